#include <CLI11.hpp>
#include <iostream>
#include <string>

#include "cavitate/config.hpp"
#include "cavitate/errors.hpp"

namespace {

const char* const kColumnsHelp =
    "Output files (fixed column order):\n"
    "  incompressible.csv : A,chi,E,I,T0_residual\n"
    "  profile.csv        : rho,phi,phi_prime,tau,T,T_tilde\n"
    "  sweep.csv          : lambda,verdict,A,I_regular,I_cavitating\n"
    "  pcr.json, verdict.json, minimize.json, jacobi.json\n"
    "Exit status: 0 success, 1 usage/config error, 2 admissibility gate\n"
    "failure, 3 solver non-convergence.  CAVITATE_LOG=error|info|debug.";

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"radial cavitation analyses on rotationally symmetric models"};
    app.footer(kColumnsHelp);
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    int jobs = 1;
    bool dump_jacobi = false;
    double lambda_override = 0.0;
    std::string lambda_range;

    const std::vector<std::string> commands = {"jacobi",       "pcr",      "incompressible",
                                               "compressible", "minimize", "sweep"};
    for (const auto& name : commands) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "JSON config file")->required();
        sub->add_option("--out", out_dir, "output directory (default: .)");
        sub->add_option("--jobs", jobs, "sweep parallelism")->check(CLI::PositiveNumber);
        sub->add_flag("--dump-jacobi", dump_jacobi, "include dense arrays in jacobi.json");
        if (name == "compressible" || name == "minimize" || name == "sweep")
            sub->add_option("--lambda", lambda_override, "boundary stretch phi(1)");
        if (name == "sweep")
            sub->add_option("--lambda-range", lambda_range, "lo:hi:count sweep grid");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string command = app.get_subcommands().front()->get_name();

    try {
        cavitate::RunConfig cfg = cavitate::parse_config_file(config_path);
        cfg.command = command;
        if (lambda_override > 0.0) cfg.lambda = lambda_override;
        if (!lambda_range.empty()) {
            double lo = 0.0, hi = 0.0;
            int count = 0;
            if (std::sscanf(lambda_range.c_str(), "%lf:%lf:%d", &lo, &hi, &count) != 3 ||
                !(lo > 0.0 && hi > lo && count >= 2))
                throw cavitate::ConfigError("--lambda-range: expected lo:hi:count");
            cfg.lambda_grid.clear();
            for (int i = 0; i < count; ++i)
                cfg.lambda_grid.push_back(lo + (hi - lo) * i / (count - 1));
        }
        cavitate::RunOptions opt;
        opt.out_dir = out_dir;
        opt.jobs = jobs;
        opt.dump_jacobi = dump_jacobi;
        return cavitate::run(cfg, opt);
    } catch (const cavitate::ConfigError& e) {
        std::cerr << e.what() << "\n";
        return 1;
    } catch (const cavitate::GateError& e) {
        std::cerr << "gate failure: " << e.what() << "\n";
        return 2;
    } catch (const cavitate::SolverError& e) {
        std::cerr << "solver failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
