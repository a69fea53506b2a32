#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <cmath>
#include <sstream>

#include "cavitate/config.hpp"
#include "cavitate/errors.hpp"

using namespace cavitate;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("cavitate_test_" + tag);
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

const char* kMinimalConfig = R"({
  "model": {"n": 3, "curvature": {"kind": "zero"}},
  "material": {"family": "example42", "mu": 1, "nu": 0.1, "alpha": 2, "beta": 0.5, "k": 2},
  "command": {"name": "pcr"}
})";

}  // namespace

TEST_CASE("minimal config parses with defaults") {
    const auto cfg = parse_config_text(kMinimalConfig);
    CHECK(cfg.n == 3);
    CHECK(cfg.command == "pcr");
    CHECK(cfg.material.params().has_value());
    CHECK(cfg.material.params()->beta == doctest::Approx(0.5));
    CHECK(cfg.tol == doctest::Approx(1e-9));
    CHECK(cfg.grid_size == 256);
}

TEST_CASE("config validation names the offending field") {
    CHECK_THROWS_WITH_AS(
        parse_config_text(R"({"model":{"n":1,"curvature":{"kind":"zero"}},
                             "material":{"family":"example42"},
                             "command":{"name":"pcr"}})"),
        doctest::Contains("n must be >= 2"), ConfigError);

    // misspelled key is rejected with its path
    CHECK_THROWS_WITH_AS(
        parse_config_text(R"({"model":{"n":3,"curvatur":{"kind":"zero"},
                              "curvature":{"kind":"zero"}},
                             "material":{"family":"example42"},
                             "command":{"name":"pcr"}})"),
        doctest::Contains("curvatur"), ConfigError);

    // malformed JSON reports line and column
    try {
        parse_config_text("{\n  \"model\": [,]\n}");
        FAIL("expected a parse error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_config_text(R"({"model":{"n":3,"curvature":{"kind":"wavy"}},
        "material":{"family":"example42"},"command":{"name":"pcr"}})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config_text(R"({"model":{"n":3,"curvature":{"kind":"zero"}},
        "material":{"family":"example42","alpha":5},"command":{"name":"pcr"}})"),
                    ConfigError);
}

TEST_CASE("config parses every curvature kind") {
    const char* tmpl = R"({
      "model": {"n": 2, "curvature": %s},
      "material": {"family": "example42", "alpha": 1.5},
      "command": {"name": "jacobi", "t_max": 2.0}
    })";
    const char* kinds[] = {
        R"({"kind": "constant", "value": -0.5})",
        R"({"kind": "table", "t": [0, 1, 2], "kappa": [0.5, 0, -0.5]})",
        R"({"kind": "revolution", "psi": {"form": "alog1p_sq", "a": 0.5}, "r_max": 20})",
        R"({"kind": "revolution", "psi": {"form": "poly", "coeffs": [0, 0, 0.5]}, "r_max": 10})",
        R"({"kind": "ellipsoid", "n": 2, "A": [[1, 0], [0, 2]], "b": {"form": "poly", "coeffs": [1, 0, 0.2]}})",
    };
    for (const char* k : kinds) {
        char buf[1024];
        std::snprintf(buf, sizeof(buf), tmpl, k);
        const auto cfg = parse_config_text(buf);
        CHECK(std::isfinite(cfg.curvature(0.5)));
    }
}

TEST_CASE("pcr command writes its JSON report") {
    TempDir dummy("pcr");
    const auto cfg = parse_config_text(kMinimalConfig);
    RunOptions opt;
    opt.out_dir = dummy.path.string();
    CHECK(run(cfg, opt) == 0);
    const std::string body = slurp(dummy.path / "pcr.json");
    CHECK(body.find("P_cr") != std::string::npos);
    CHECK(body.find("admissibility_42") != std::string::npos);
}

TEST_CASE("incompressible command emits the CSV contract") {
    TempDir dir("inc");
    auto cfg = parse_config_text(R"({
      "model": {"n": 3, "curvature": {"kind": "zero"}},
      "material": {"family": "example42", "mu": 1, "alpha": 2, "k": 2},
      "command": {"name": "incompressible", "A_grid": [0.2, 0.5], "P": 0.4, "tol": 1e-8}
    })");
    RunOptions opt;
    opt.out_dir = dir.path.string();
    CHECK(run(cfg, opt) == 0);
    const std::string csv = slurp(dir.path / "incompressible.csv");
    CHECK(csv.rfind("A,chi,E,I,T0_residual\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 rows
}

TEST_CASE("gate failures exit with status 2") {
    TempDir dir("gate");
    auto cfg = parse_config_text(R"({
      "model": {"n": 2, "curvature": {"kind": "constant", "value": 1.0}},
      "material": {"family": "example42", "alpha": 1.5},
      "command": {"name": "incompressible", "A_grid": [1.2]}
    })");
    RunOptions opt;
    opt.out_dir = dir.path.string();
    CHECK(run(cfg, opt) == 2);
}

TEST_CASE("compressible command writes profile and verdict") {
    TempDir dir("comp");
    auto cfg = parse_config_text(R"({
      "model": {"n": 3, "curvature": {"kind": "zero"}},
      "material": {"family": "example42", "mu": 1, "alpha": 2, "k": 2},
      "command": {"name": "compressible", "lambda": 1.2, "tol": 1e-8}
    })");
    RunOptions opt;
    opt.out_dir = dir.path.string();
    CHECK(run(cfg, opt) == 0);
    const std::string csv = slurp(dir.path / "profile.csv");
    CHECK(csv.rfind("rho,phi,phi_prime,tau,T,T_tilde\n", 0) == 0);
    const std::string verdict = slurp(dir.path / "verdict.json");
    CHECK(verdict.find("\"verdict\": \"regular\"") != std::string::npos);
}

TEST_CASE("sweep is deterministic and order-stable under parallelism") {
    auto cfg = parse_config_text(R"({
      "model": {"n": 3, "curvature": {"kind": "zero"}},
      "material": {"family": "example42", "mu": 1, "alpha": 2, "k": 2},
      "command": {"name": "sweep",
                  "lambda_range": {"lo": 1.1, "hi": 3.0, "count": 4},
                  "tol": 1e-8}
    })");
    TempDir d1("sweep1"), d2("sweep2");
    RunOptions o1;
    o1.out_dir = d1.path.string();
    o1.jobs = 1;
    RunOptions o2;
    o2.out_dir = d2.path.string();
    o2.jobs = 3;
    CHECK(run(cfg, o1) == 0);
    CHECK(run(cfg, o2) == 0);
    const std::string a = slurp(d1.path / "sweep.csv");
    const std::string b = slurp(d2.path / "sweep.csv");
    CHECK(a == b);  // byte-identical outputs
    CHECK(a.rfind("lambda,verdict,A,I_regular,I_cavitating\n", 0) == 0);
    // the verdict table transitions regular -> cavitating somewhere
    CHECK(a.find("regular") != std::string::npos);
    CHECK(a.find("cavitating") != std::string::npos);
}

TEST_CASE("jacobi command dumps dense arrays on request") {
    TempDir dir("jac");
    auto cfg = parse_config_text(R"({
      "model": {"n": 3, "curvature": {"kind": "constant", "value": -1.0}},
      "material": {"family": "example42", "mu": 1, "alpha": 2, "k": 2},
      "command": {"name": "jacobi", "t_max": 3.0}
    })");
    RunOptions opt;
    opt.out_dir = dir.path.string();
    opt.dump_jacobi = true;
    CHECK(run(cfg, opt) == 0);
    const std::string body = slurp(dir.path / "jacobi.json");
    CHECK(body.find("\"grid\"") != std::string::npos);
    CHECK(body.find("\"sigma\"") != std::string::npos);
    CHECK(body.find("\"mu_plus\"") != std::string::npos);
}

TEST_CASE("identical configs give byte-identical outputs") {
    auto cfg = parse_config_text(R"({
      "model": {"n": 3, "curvature": {"kind": "zero"}},
      "material": {"family": "example42", "mu": 1, "nu": 0.1, "alpha": 2, "beta": 0.5, "k": 2},
      "command": {"name": "incompressible", "A_grid": [0.3, 0.7], "P": 0.2, "tol": 1e-8}
    })");
    TempDir d1("det1"), d2("det2");
    RunOptions o1;
    o1.out_dir = d1.path.string();
    RunOptions o2;
    o2.out_dir = d2.path.string();
    CHECK(run(cfg, o1) == 0);
    CHECK(run(cfg, o2) == 0);
    CHECK(slurp(d1.path / "incompressible.csv") == slurp(d2.path / "incompressible.csv"));
}

TEST_CASE("minimize command reports branch energies and the direct minimum") {
    TempDir dir("min");
    auto cfg = parse_config_text(R"({
      "model": {"n": 3, "curvature": {"kind": "zero"}},
      "material": {"family": "example42", "mu": 1, "alpha": 2, "k": 2},
      "command": {"name": "minimize", "lambda": 2.0, "grid_size": 48, "tol": 1e-8}
    })");
    RunOptions opt;
    opt.out_dir = dir.path.string();
    CHECK(run(cfg, opt) == 0);
    const std::string body = slurp(dir.path / "minimize.json");
    CHECK(body.find("\"verdict\": \"cavitating\"") != std::string::npos);
    CHECK(body.find("direct_min_energy") != std::string::npos);
    CHECK(body.find("cavity_radius") != std::string::npos);
}
