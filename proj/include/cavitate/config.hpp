#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cavitate/constitutive.hpp"
#include "cavitate/curvature.hpp"

namespace cavitate {

/// Validated run configuration: model + material + one command.
struct RunConfig {
    int n = 3;
    CurvatureProfile curvature = CurvatureProfile::zero();
    ConstitutiveLaw material;
    std::string command;  // jacobi | pcr | incompressible | compressible | minimize | sweep

    std::optional<double> lambda;
    std::vector<double> lambda_grid;  // expanded sweep grid
    std::vector<double> A_grid;
    double P = 0.0;
    double tol = 1e-9;
    int grid_size = 256;
    double t_max = 0.0;  // 0 = automatic
};

/// Parses and validates a JSON config.  Unknown keys are rejected with the
/// offending path; malformed JSON reports line and column.
RunConfig parse_config_text(const std::string& json_text);
RunConfig parse_config_file(const std::string& path);

struct RunOptions {
    std::string out_dir = ".";
    int jobs = 1;
    bool dump_jacobi = false;
};

/// Dispatches the configured command, writing outputs atomically under
/// out_dir.  Returns the process exit status: 0 success, 2 admissibility
/// gate failure, 3 solver non-convergence.
int run(const RunConfig& config, const RunOptions& options);

}  // namespace cavitate
