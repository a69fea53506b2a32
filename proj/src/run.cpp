#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "cavitate/compressible.hpp"
#include "cavitate/config.hpp"
#include "cavitate/errors.hpp"
#include "cavitate/incompressible.hpp"

namespace cavitate {

namespace {

using nlohmann::json;

int log_level() {
    static const int level = [] {
        const char* env = std::getenv("CAVITATE_LOG");
        if (!env) return 1;
        const std::string v(env);
        if (v == "error") return 0;
        if (v == "debug") return 2;
        return 1;
    }();
    return level;
}

void log_info(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "[cavitate] " << msg << "\n";
}
void log_debug(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "[cavitate:debug] " << msg << "\n";
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

/// atomic write: temp file in the same directory, then rename
void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::create_directories(path.parent_path().empty() ? "."
                                                                   : path.parent_path());
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write " + tmp.string());
        out << contents;
    }
    std::filesystem::rename(tmp, path);
}

json tail_to_json(const TailReport& t) {
    return json{{"value", t.value},
                {"converged", t.converged},
                {"inconclusive", t.inconclusive},
                {"cutoff", t.cutoff},
                {"last_delta", t.last_delta}};
}

/// numbers serialized as strings would lose diff-ability; keep 17 digits
std::string dump_json(const json& j) { return j.dump(2) + "\n"; }

double auto_t_max(const RunConfig& cfg, double lam_needed) {
    if (cfg.t_max > 0.0) return std::min(cfg.t_max, cfg.curvature.t_max());
    const double want = std::max(4.0, 2.0 * std::max(lam_needed, 1.0));
    return std::min(want, cfg.curvature.t_max());
}

Model model_for_incompressible(const RunConfig& cfg, double A_max) {
    double t = std::max({4.0, 2.0 * (1.0 + A_max), cfg.t_max});
    for (int i = 0; i < 40; ++i) {
        const double capped = std::min(t, cfg.curvature.t_max());
        Model m = make_model(cfg.curvature, cfg.n, capped, 1e-10);
        const double upper = std::min(capped, m.jacobi.first_f_zero());
        if (A_max < upper && 1.0 < upper) {
            const double target = m.jacobi.sigma(1.0) + m.jacobi.sigma(A_max);
            if (m.jacobi.sigma_max() >= target) return m;
        }
        if (capped >= cfg.curvature.t_max() * (1.0 - 1e-12)) {
            if (std::isfinite(m.jacobi.first_f_zero()))
                throw GateError(
                    "incompressible model: sigma saturates at a conjugate point before "
                    "covering the requested cavity radii");
            throw SolverError("incompressible model: curvature domain too small");
        }
        t *= 2.0;
    }
    throw SolverError("incompressible model: sigma range unreachable");
}

struct BranchVerdict {
    std::string verdict;
    double A = 0.0;
    double I_reg = 0.0;
    std::optional<double> I_cav;
    std::optional<EquilibriumSolution> winner;
    std::optional<EquilibriumSolution> regular;
    std::optional<EquilibriumSolution> cavitating;
};

BranchVerdict branch_compare(const Model& model, const ConstitutiveLaw& law, double lam,
                             double tol) {
    ShootOptions opt;
    opt.tol = std::min(tol, 1e-8);
    BranchVerdict v;
    EquilibriumSolution reg = solve_regular(model, law, lam, opt);
    v.I_reg = energy_of(model, law, reg);
    v.regular = reg;
    auto cav = solve_cavitating(model, law, lam, opt);
    if (cav) {
        v.I_cav = energy_of(model, law, *cav);
        v.cavitating = cav;
    }
    const double tol_e = 1e-9 * (1.0 + std::abs(v.I_reg));
    if (cav && *v.I_cav < v.I_reg - tol_e) {
        v.verdict = "cavitating";
        v.A = cav->cavity_radius();
        v.winner = *cav;
    } else {
        v.verdict = "regular";
        v.A = 0.0;
        v.winner = reg;
    }
    return v;
}

int run_jacobi(const RunConfig& cfg, const RunOptions& opt) {
    const double t_max = (cfg.t_max > 0.0) ? std::min(cfg.t_max, cfg.curvature.t_max())
                                           : std::min(10.0, cfg.curvature.t_max());
    Model m = make_model(cfg.curvature, cfg.n, t_max, std::clamp(cfg.tol, 1e-12, 1e-8));
    const auto& J = m.jacobi;
    const auto moments = curvature_moments(cfg.curvature, t_max, 1e-10);
    const auto [mu0, mu1] = J.f_prime_range(t_max);
    json out{{"n", cfg.n},
             {"t_max", t_max},
             {"mu_plus", moments.mu_plus},
             {"mu_minus", moments.mu_minus},
             {"mu0", mu0},
             {"mu1", mu1},
             {"f_at_t_max", J.f(t_max)},
             {"f_prime_at_t_max", J.f_prime(t_max)},
             {"sigma_at_t_max", J.sigma(t_max)},
             {"first_f_zero", std::isfinite(J.first_f_zero()) ? json(J.first_f_zero())
                                                              : json(nullptr)}};
    if (opt.dump_jacobi) {
        out["grid"] = J.grid();
        out["f"] = J.f_values();
        out["f_prime"] = J.f_prime_values();
        out["sigma"] = J.sigma_values();
    }
    write_file_atomic(std::filesystem::path(opt.out_dir) / "jacobi.json", dump_json(out));
    std::cout << "jacobi: t_max=" << fmt(t_max) << " mu_plus=" << fmt(moments.mu_plus)
              << " mu0=" << fmt(mu0) << " mu1=" << fmt(mu1) << "\n";
    return 0;
}

int run_pcr(const RunConfig& cfg, const RunOptions& opt) {
    const auto adm = admissibility_42(cfg.material, cfg.tol);
    const double value = pcr(cfg.material, cfg.tol);
    json out{{"P_cr", value}, {"admissibility_42", tail_to_json(adm)}};
    write_file_atomic(std::filesystem::path(opt.out_dir) / "pcr.json", dump_json(out));
    std::cout << out.dump() << "\n";
    if (!adm.converged && !adm.inconclusive) return 2;  // divergent tail: gate failed
    return 0;
}

int run_incompressible(const RunConfig& cfg, const RunOptions& opt) {
    std::vector<double> A_grid = cfg.A_grid;
    if (A_grid.empty()) A_grid = {0.1, 0.2, 0.5, 1.0};
    Model model = model_for_incompressible(cfg, A_grid.back());
    std::ostringstream csv;
    csv << "A,chi,E,I,T0_residual\n";
    for (double A : A_grid) {
        ChiOptions copt;
        copt.tol = cfg.tol;
        const double chi_value = chi(model, cfg.material, A, copt);
        const double E = energy_E(model, cfg.material, A, cfg.tol);
        const double I = energy_I(model, cfg.material, A, cfg.P, cfg.tol);
        const auto sol = incompressible_deformation(model, A);
        const auto T = cauchy_stress_T(model, cfg.material, sol, chi_value);
        const double t0_res = std::abs(T(0.0));
        csv << fmt(A) << ',' << fmt(chi_value) << ',' << fmt(E) << ',' << fmt(I) << ','
            << fmt(t0_res) << "\n";
        log_debug("A=" + fmt(A) + " chi=" + fmt(chi_value));
    }
    write_file_atomic(std::filesystem::path(opt.out_dir) / "incompressible.csv", csv.str());
    std::cout << "incompressible: " << A_grid.size() << " cavity radii, P_probe=" << fmt(cfg.P)
              << "\n";
    return 0;
}

int run_compressible(const RunConfig& cfg, const RunOptions& opt) {
    if (!cfg.lambda) throw ConfigError("config: $.command.lambda: required for compressible");
    const double lam = *cfg.lambda;
    Model model = make_model(cfg.curvature, cfg.n, auto_t_max(cfg, lam), 1e-10);
    const auto v = branch_compare(model, cfg.material, lam, cfg.tol);
    const auto& sol = *v.winner;
    const auto stresses = stress_report(model, cfg.material, sol);

    std::ostringstream csv;
    csv << "rho,phi,phi_prime,tau,T,T_tilde\n";
    const int rows = 512;
    for (int i = 1; i <= rows; ++i) {
        const double rho = static_cast<double>(i) / rows;
        csv << fmt(rho) << ',' << fmt(sol.phi(rho)) << ',' << fmt(sol.phi_prime(rho)) << ','
            << fmt(sol.tau(rho)) << ',' << fmt(stresses.T(rho)) << ','
            << fmt(stresses.T_tilde(rho)) << "\n";
    }
    write_file_atomic(std::filesystem::path(opt.out_dir) / "profile.csv", csv.str());

    json out{{"lambda", lam},
             {"verdict", v.verdict},
             {"cavity_radius", v.A},
             {"I_regular", v.I_reg},
             {"I_cavitating", v.I_cav ? json(*v.I_cav) : json(nullptr)},
             {"T0", sol.T0()},
             {"ode_residual", sol.residual()},
             {"conservation_residual", stresses.conservation_residual}};
    write_file_atomic(std::filesystem::path(opt.out_dir) / "verdict.json", dump_json(out));
    std::cout << "compressible: lambda=" << fmt(lam) << " verdict=" << v.verdict
              << " A=" << fmt(v.A) << "\n";
    return 0;
}

int run_minimize(const RunConfig& cfg, const RunOptions& opt) {
    if (!cfg.lambda) throw ConfigError("config: $.command.lambda: required for minimize");
    const double lam = *cfg.lambda;
    Model model = make_model(cfg.curvature, cfg.n, auto_t_max(cfg, lam), 1e-10);
    ShootOptions sopt;
    sopt.tol = std::min(cfg.tol, 1e-8);
    const auto rep = minimize_energy(model, cfg.material, lam, cfg.grid_size, sopt);
    json out{{"lambda", rep.lam},
             {"verdict",
              rep.verdict == MinimizerReport::Verdict::cavitating ? "cavitating" : "regular"},
             {"regular_energy", rep.regular_energy},
             {"cavitating_energy",
              rep.cavitating_energy ? json(*rep.cavitating_energy) : json(nullptr)},
             {"cavity_radius", rep.cavity_radius ? json(*rep.cavity_radius) : json(nullptr)},
             {"direct_min_energy", rep.direct_min_energy},
             {"descent_iterations", rep.descent_iterations},
             {"descent_grad_norm", rep.descent_grad_norm},
             {"descent_converged", rep.descent_converged}};
    write_file_atomic(std::filesystem::path(opt.out_dir) / "minimize.json", dump_json(out));
    std::cout << "minimize: lambda=" << fmt(lam) << " verdict="
              << (rep.verdict == MinimizerReport::Verdict::cavitating ? "cavitating"
                                                                      : "regular")
              << " direct=" << fmt(rep.direct_min_energy) << "\n";
    return 0;
}

int run_sweep(const RunConfig& cfg, const RunOptions& opt) {
    std::vector<double> lams = cfg.lambda_grid;
    if (lams.empty())
        throw ConfigError("config: $.command.lambda_range: required for sweep");
    const double lam_max = *std::max_element(lams.begin(), lams.end());
    Model model = make_model(cfg.curvature, cfg.n, auto_t_max(cfg, lam_max), 1e-10);

    struct Row {
        bool ok = false;
        std::string error;
        BranchVerdict v;
    };
    std::vector<Row> rows(lams.size());
    std::atomic<std::size_t> next{0};
    const int jobs = std::max(1, opt.jobs);
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= lams.size()) return;
            try {
                rows[i].v = branch_compare(model, cfg.material, lams[i], cfg.tol);
                rows[i].ok = true;
            } catch (const std::exception& e) {
                rows[i].error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::ostringstream csv;
    csv << "lambda,verdict,A,I_regular,I_cavitating\n";
    bool any_failed = false;
    for (std::size_t i = 0; i < lams.size(); ++i) {
        if (!rows[i].ok) {
            any_failed = true;
            csv << fmt(lams[i]) << ",error,,,\n";
            log_info("lambda=" + fmt(lams[i]) + " failed: " + rows[i].error);
            continue;
        }
        const auto& v = rows[i].v;
        csv << fmt(lams[i]) << ',' << v.verdict << ',' << fmt(v.A) << ',' << fmt(v.I_reg)
            << ',' << (v.I_cav ? fmt(*v.I_cav) : "") << "\n";
    }
    write_file_atomic(std::filesystem::path(opt.out_dir) / "sweep.csv", csv.str());
    std::cout << "sweep: " << lams.size() << " lambda values\n";
    return any_failed ? 3 : 0;
}

}  // namespace

int run(const RunConfig& cfg, const RunOptions& opt) {
    try {
        if (cfg.command == "jacobi") return run_jacobi(cfg, opt);
        if (cfg.command == "pcr") return run_pcr(cfg, opt);
        if (cfg.command == "incompressible") return run_incompressible(cfg, opt);
        if (cfg.command == "compressible") return run_compressible(cfg, opt);
        if (cfg.command == "minimize") return run_minimize(cfg, opt);
        if (cfg.command == "sweep") return run_sweep(cfg, opt);
        throw ConfigError("config: unknown command '" + cfg.command + "'");
    } catch (const GateError& e) {
        std::cerr << "gate failure: " << e.what() << "\n";
        return 2;
    } catch (const SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace cavitate
