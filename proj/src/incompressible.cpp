#include "cavitate/incompressible.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "cavitate/errors.hpp"
#include "cavitate/numerics/quadrature.hpp"
#include "cavitate/numerics/roots.hpp"

namespace cavitate {

namespace {

double pow_int(double x, int p) {
    double acc = 1.0;
    for (int i = 0; i < p; ++i) acc *= x;
    return acc;
}

}  // namespace

double unit_sphere_area(int n) {
    return 2.0 * std::pow(std::numbers::pi, 0.5 * n) / std::tgamma(0.5 * n);
}

Model make_model(const CurvatureProfile& curv, int n, double t_max, double tol) {
    return Model{n, curv, solve_jacobi(curv, n, t_max, tol)};
}

Model make_model_for_sigma(const CurvatureProfile& curv, int n, double sigma_target,
                           double tol) {
    double t_max = 2.0;
    for (int i = 0; i < 48; ++i) {
        const double capped = std::min(t_max, curv.t_max());
        Model m = make_model(curv, n, capped, tol);
        if (m.jacobi.sigma_max() >= sigma_target) return m;
        if (std::isfinite(m.jacobi.first_f_zero()) && m.jacobi.first_f_zero() < capped)
            throw GateError(
                "make_model_for_sigma: sigma saturates at a conjugate point below the target");
        if (capped >= curv.t_max() * (1.0 - 1e-12))
            throw SolverError(
                "make_model_for_sigma: curvature domain exhausted before reaching the "
                "sigma target");
        t_max *= 2.0;
    }
    throw SolverError("make_model_for_sigma: sigma target unreachable");
}

// ---------------------------------------------------------------------------
// closed-form incompressible deformation

IncompressibleSolution::IncompressibleSolution(Model model, double A,
                                               std::optional<double> load)
    : model_(std::move(model)), A_(A), load_(load) {
    if (A_ < 0.0) throw std::invalid_argument("incompressible deformation: A must be >= 0");
    const auto& J = model_.jacobi;
    lam_ = (A_ == 0.0) ? 1.0 : J.sigma_inverse(J.sigma(1.0) + J.sigma(A_));
    gates_.mu_plus_1 = J.mu_plus(std::min(1.0, J.t_max()));
    gates_.mu_plus_lam = J.mu_plus(std::min(lam_, J.t_max()));
    const double slack = 1e-12;
    gates_.pass = gates_.mu_plus_1 <= 1.0 + slack && gates_.mu_plus_lam <= 1.0 + slack;
    gates_.marginal = std::abs(gates_.mu_plus_1 - 1.0) <= slack ||
                      std::abs(gates_.mu_plus_lam - 1.0) <= slack;
}

double IncompressibleSolution::phi(double rho) const {
    if (rho < 0.0) throw std::invalid_argument("phi: rho must be >= 0");
    if (A_ == 0.0) return rho;
    if (rho == 0.0) return A_;
    const auto& J = model_.jacobi;
    return J.sigma_inverse(J.sigma(rho) + J.sigma(A_));
}

double IncompressibleSolution::phi_prime(double rho) const {
    const auto& J = model_.jacobi;
    if (A_ == 0.0) return 1.0;
    if (!(rho > 0.0)) throw std::invalid_argument("phi': rho must be positive");
    const double ph = phi(rho);
    return pow_int(J.f(rho) / J.f(ph), model_.n - 1);
}

double IncompressibleSolution::tau(double rho) const {
    const auto& J = model_.jacobi;
    if (A_ == 0.0) return 1.0;
    if (!(rho > 0.0)) throw std::invalid_argument("tau: rho must be positive");
    return J.f(phi(rho)) / J.f(rho);
}

IncompressibleSolution incompressible_deformation(const Model& model, double A,
                                                  std::optional<double> load) {
    IncompressibleSolution sol(model, A, load);
    if (!sol.gates().pass)
        throw GateError("incompressible deformation: mu_plus gate failed (mu_plus(1) = " +
                        std::to_string(sol.gates().mu_plus_1) + ", mu_plus(phi(1)) = " +
                        std::to_string(sol.gates().mu_plus_lam) + ")");
    return sol;
}

// ---------------------------------------------------------------------------
// split-point machinery for the tau-substitution

namespace {

// largest rho1 in (0, min(1, t_max)] with kappa f^2 + n f'^2 > 0 (sampled)
double find_rho1(const Model& m) {
    const auto& J = m.jacobi;
    const double upper = std::min(1.0, J.t_max());
    const int K = 400;
    for (int i = 1; i <= K; ++i) {
        const double t = upper * i / K;
        const double f = J.f(t);
        const double fp = J.f_prime(t);
        if (!(m.curvature(t) * f * f + m.n * fp * fp > 0.0))
            return upper * (i - 1) / K;
    }
    return upper;
}

// split point rho0 <= min(0.1, ...) such that phi(rho0) stays below rho1;
// returns 0 when no valid split exists (fall back to the direct route)
double choose_rho0(const Model& m, double A, double override_value) {
    if (override_value > 0.0) return override_value;
    const double rho1 = find_rho1(m);
    if (!(rho1 > 0.0)) return 0.0;
    const auto& J = m.jacobi;
    const double budget = J.sigma(rho1) - J.sigma(A);
    if (!(budget > 0.0)) return 0.0;
    const double r = J.sigma_inverse(0.98 * budget);
    return std::min(0.1, 0.95 * r);
}

// rho(A, tau): unique root of f(phi(rho)) = tau f(rho) on (0, rho0]
double rho_of_tau(const Model& m, const IncompressibleSolution& sol, double tau,
                  double rho0) {
    const auto& J = m.jacobi;
    const double fA = J.f(sol.cavity_radius());
    auto g = [&](double rho) { return J.f(sol.phi(rho)) - tau * J.f(rho); };
    auto dg = [&](double rho) {
        return J.f_prime(sol.phi(rho)) * sol.phi_prime(rho) - tau * J.f_prime(rho);
    };
    double lo = std::min(0.5 * rho0, 0.1 * fA / tau);
    for (int i = 0; i < 60 && !(g(lo) > 0.0); ++i) lo *= 0.5;
    if (!(g(lo) > 0.0)) throw SolverError("rho_of_tau: bracket failure");
    RootOptions opt;
    opt.x_tol = 1e-14 * (1.0 + rho0);
    return newton_bisect(g, dg, lo, rho0, opt);
}

}  // namespace

// ---------------------------------------------------------------------------

TailReport admissibility_42(const ConstitutiveLaw& law, double tol, double delta) {
    if (!(delta > 1.0)) throw std::invalid_argument("admissibility_42: delta must be > 1");
    const int n = law.dimension();
    auto g = [&law, n](double tau) {
        if (tau < 1e3) {
            const double tn1 = std::expm1(n * std::log(tau));
            return std::pow(tau, n - 1.0) / (tn1 * tn1) * law.phi_hat_prime(tau);
        }
        // overflow-safe large-tau form: tau^{n-1}/(tau^n - 1)^2 = tau^{-n-1}(1 - tau^{-n})^{-2}
        const double L = std::log(tau);
        const double corr = std::pow(1.0 - std::exp(-n * L), -2.0);
        return law.phi_hat_prime(tau) * std::exp(-(n + 1.0) * L) * corr;
    };
    QuadOptions q;
    q.abs_tol = tol;
    q.rel_tol = tol;
    const auto tail = integrate_tail(g, delta, q);
    TailReport r;
    r.value = tail.value;
    r.converged = tail.converged();
    r.inconclusive = tail.trend == TailTrend::inconclusive;
    r.cutoff = tail.cutoff;
    r.last_delta = tail.last_delta;
    return r;
}

double pcr(const ConstitutiveLaw& law, double tol) {
    auto g = [&law](double tau) { return law.phi_hat_prime_over_taun1(tau); };
    QuadOptions q;
    q.abs_tol = tol;
    q.rel_tol = tol;
    const double head = adaptive_gk(g, 1.0, 4.0, q);
    const auto tail = integrate_tail(g, 4.0, q);
    if (tail.trend == TailTrend::diverged)
        throw SolverError("pcr: the tail integral diverges");
    if (!tail.converged())
        throw SolverError("pcr: tail integral inconclusive at the cutoff budget");
    return head + tail.value;
}

double chi(const Model& model, const ConstitutiveLaw& law, double A, ChiOptions opt) {
    if (!(A > 0.0)) throw std::invalid_argument("chi: A must be positive");
    if (law.dimension() != model.n) throw std::invalid_argument("chi: dimension mismatch");
    const auto sol = incompressible_deformation(model, A);
    const auto& J = model.jacobi;
    const int n = model.n;

    auto integrand_rho = [&](double rho) {
        const double ph = sol.phi(rho);
        const double tv = sol.tau(rho);
        return J.f_prime(ph) / J.f(ph) * std::pow(tv, 2.0 - n) * law.phi_hat_prime(tv);
    };
    const double factor = pow_int(sol.tau(1.0), n - 1);
    QuadOptions q;
    q.abs_tol = opt.tol;
    q.rel_tol = opt.tol;

    const double rho0 = opt.force_direct ? 0.0 : choose_rho0(model, A, opt.rho0_override);
    if (!(rho0 > 0.0))
        return factor * adaptive_gk(integrand_rho, 0.0, 1.0, q);

    const double part_rho = adaptive_gk(integrand_rho, rho0, 1.0, q);
    const double tau_split = sol.tau(rho0);
    auto integrand_tau = [&](double tau) {
        const double rho = rho_of_tau(model, sol, tau, rho0);
        const double fp_phi = J.f_prime(sol.phi(rho));
        const double denom = J.f_prime(rho) * pow_int(tau, n) - fp_phi;
        return fp_phi / denom * law.phi_hat_prime(tau);
    };
    const double head_end = std::max(2.0 * tau_split, 4.0);
    double part_tau = adaptive_gk(integrand_tau, tau_split, head_end, q);
    const auto tail = integrate_tail(integrand_tau, head_end, q);
    if (tail.trend == TailTrend::diverged)
        throw SolverError("chi: tau-integral diverges (equilibrium criterion fails)");
    if (!tail.converged()) throw SolverError("chi: tau-integral inconclusive");
    part_tau += tail.value;
    return factor * (part_rho + part_tau);
}

std::function<double(double)> cauchy_stress_T(const Model& model, const ConstitutiveLaw& law,
                                              const IncompressibleSolution& sol, double P) {
    const int n = model.n;
    const double tau1 = sol.tau(1.0);
    const double boundary = P / pow_int(tau1, n - 1);
    // rho = 0 is allowed and evaluates the limit T(0+) = (P - chi(A))/tau^{n-1}(1)
    // through the full open-rule quadrature (the endpoint singularity is
    // integrable under the admissibility tail condition)
    return [model, law, sol, boundary, n](double rho) {
        if (!(rho >= 0.0 && rho <= 1.0))
            throw std::invalid_argument("T(rho): rho must lie in [0, 1]");
        const auto& J = model.jacobi;
        auto integrand = [&](double r) {
            const double ph = sol.phi(r);
            const double tv = sol.tau(r);
            return J.f_prime(ph) / J.f(ph) * std::pow(tv, 2.0 - n) * law.phi_hat_prime(tv);
        };
        QuadOptions q;
        q.abs_tol = 1e-10;
        q.rel_tol = 1e-10;
        return boundary - adaptive_gk(integrand, rho, 1.0, q);
    };
}

double energy_E(const Model& model, const ConstitutiveLaw& law, double A, double tol) {
    const int n = model.n;
    const auto& J = model.jacobi;
    const double omega = unit_sphere_area(n);
    if (A == 0.0) {
        const std::vector<double> ones(static_cast<std::size_t>(n), 1.0);
        return omega * J.sigma(1.0) * law.Phi(ones);
    }
    const auto sol = incompressible_deformation(model, A);
    QuadOptions q;
    q.abs_tol = tol;
    q.rel_tol = tol;
    auto integrand_rho = [&](double rho) {
        return pow_int(J.f(rho), n - 1) * law.phi_hat(sol.tau(rho));
    };
    const double rho0 = choose_rho0(model, A, 0.0);
    if (!(rho0 > 0.0)) return omega * adaptive_gk(integrand_rho, 0.0, 1.0, q);

    const double part1 = adaptive_gk(integrand_rho, rho0, 1.0, q);
    const double tau_split = sol.tau(rho0);
    const double part2 = J.sigma(rho0) * law.phi_hat(tau_split);
    auto integrand_tau = [&](double tau) {
        const double rho = rho_of_tau(model, sol, tau, rho0);
        return J.sigma(rho) * law.phi_hat_prime(tau);
    };
    const double head_end = std::max(2.0 * tau_split, 4.0);
    double part3 = adaptive_gk(integrand_tau, tau_split, head_end, q);
    const auto tail = integrate_tail(integrand_tau, head_end, q);
    if (!tail.converged())
        throw SolverError("energy_E: energy integral divergent or inconclusive");
    part3 += tail.value;
    return omega * (part1 + part2 + part3);
}

double energy_I(const Model& model, const ConstitutiveLaw& law, double A, double P,
                double tol) {
    const auto& J = model.jacobi;
    const double lam = (A == 0.0) ? 1.0 : J.sigma_inverse(J.sigma(1.0) + J.sigma(A));
    return energy_E(model, law, A, tol) -
           unit_sphere_area(model.n) * pow_int(J.f(1.0), model.n - 1) * P * lam;
}

// ---------------------------------------------------------------------------
// bifurcation diagram

namespace {

// integral_1^inf (tau^2 - 1) tau^n / (tau^n - 1)^{2(1+1/n)} Phi_hat'(tau) dtau,
// with the (tau - 1)^{-2/n} endpoint handled by the substitution tau = 1 + w^3
double sign_classification_integral(const ConstitutiveLaw& law, double tol) {
    const int n = law.dimension();
    const double expo = 2.0 * (1.0 + 1.0 / n);
    auto integrand = [&](double tau) {
        const double u = tau - 1.0;
        if (u < 1e-6) {
            // leading behavior (2 Phi_hat''(1) / n^expo) u^{2 - expo}, expo = 2 + 2/n
            return 2.0 * law.phi_hat_pp1() / std::pow(static_cast<double>(n), expo) *
                   std::pow(u, 2.0 - expo);
        }
        const double tn1 = std::expm1(n * std::log(tau));
        return (tau * tau - 1.0) * std::pow(tau, static_cast<double>(n)) /
               std::pow(tn1, expo) * law.phi_hat_prime(tau);
    };
    QuadOptions q;
    q.abs_tol = tol;
    q.rel_tol = tol;
    auto head_sub = [&](double w) {
        const double tau = 1.0 + w * w * w;
        return integrand(tau) * 3.0 * w * w;
    };
    const double head = adaptive_gk(head_sub, 0.0, 1.0, q);  // tau in [1, 2]
    const auto tail = integrate_tail(integrand, 2.0, q);
    if (!tail.converged())
        throw SolverError("bifurcation diagram: classification integral inconclusive");
    return head + tail.value;
}

}  // namespace

BifurcationDiagram bifurcation_diagram(const Model& model, const ConstitutiveLaw& law,
                                       std::vector<double> A_grid, double P_probe,
                                       double tol) {
    if (A_grid.empty()) throw std::invalid_argument("bifurcation_diagram: empty A grid");
    if (!std::is_sorted(A_grid.begin(), A_grid.end()))
        throw std::invalid_argument("bifurcation_diagram: A grid must increase");
    BifurcationDiagram d;
    d.A_grid = std::move(A_grid);
    for (double A : d.A_grid) {
        ChiOptions copt;
        copt.tol = tol;
        d.chi_values.push_back(chi(model, law, A, copt));
    }
    d.P_cr = pcr(law, std::min(tol, 1e-9));

    d.gap_at_smallest = std::abs(d.chi_values.front() - d.P_cr);
    d.gap_monotone = true;
    for (std::size_t i = 0; i + 1 < d.A_grid.size(); ++i) {
        const double g0 = std::abs(d.chi_values[i] - d.P_cr);
        const double g1 = std::abs(d.chi_values[i + 1] - d.P_cr);
        if (g0 > g1 * (1.0 + 1e-9) + 1e-12) d.gap_monotone = false;
    }

    const auto& J = model.jacobi;
    for (std::size_t i = 0; i + 1 < d.A_grid.size(); ++i) {
        const double dA = d.A_grid[i + 1] - d.A_grid[i];
        const double est = (d.chi_values[i + 1] - d.chi_values[i]) / dA;
        d.chi_prime_est.push_back(est);
        d.slope_over_f.push_back(est / J.f(0.5 * (d.A_grid[i] + d.A_grid[i + 1])));
    }

    d.kappa_at_0 = model.curvature(0.0);
    const int n = model.n;
    if (n >= 3 && std::abs(d.kappa_at_0) > 1e-13)
        d.sign_integral = sign_classification_integral(law, tol);

    // flat-core criterion when kappa vanishes identically near 0
    double eps = 0.0;
    {
        const int K = 64;
        for (int i = 0; i <= K; ++i) {
            const double t = static_cast<double>(i) / K;
            if (std::abs(model.curvature(t)) > 1e-13) break;
            eps = t;
        }
    }
    if (eps > 0.0) {
        QuadOptions q;
        q.abs_tol = tol;
        q.rel_tol = tol;
        const double integral =
            (eps >= 1.0) ? 0.0
                         : adaptive_gk(
                               [&](double r) {
                                   return model.curvature(r) / pow_int(J.f(r), n - 1);
                               },
                               eps, 1.0, q);
        const double bracket = 1.0 + pow_int(J.f(1.0), n) / J.f_prime(1.0) * integral;
        d.flat_core_criterion =
            d.P_cr - bracket * law.phi_hat_pp1() / (n * (n - 1.0));
    }

    // predicted sign of chi' for small A
    if (std::abs(d.kappa_at_0) > 1e-13) {
        if (n == 2) {
            d.predicted_sign = (d.kappa_at_0 > 0.0) ? -1 : +1;
        } else {
            const double s = d.kappa_at_0 * d.sign_integral;
            d.predicted_sign = (std::abs(s) > 1e-12) ? ((s < 0.0) ? +1 : -1) : 0;
        }
    } else if (d.flat_core_criterion) {
        const double c = *d.flat_core_criterion;
        const double scale = 1e-10 * (1.0 + std::abs(d.P_cr));
        d.predicted_sign = (c > scale) ? +1 : (c < -scale) ? -1 : 0;
    }

    // roots of P_probe = chi(A) on the grid, refined by bisection
    for (std::size_t i = 0; i + 1 < d.A_grid.size(); ++i) {
        const double g0 = d.chi_values[i] - P_probe;
        const double g1 = d.chi_values[i + 1] - P_probe;
        if (g0 == 0.0 || std::signbit(g0) != std::signbit(g1)) {
            RootOptions ro;
            ro.x_tol = 1e-10;
            ChiOptions copt;
            copt.tol = tol;
            d.probe_roots.push_back(brent(
                [&](double A) { return chi(model, law, A, copt) - P_probe; }, d.A_grid[i],
                d.A_grid[i + 1], ro));
        }
    }
    return d;
}

}  // namespace cavitate
