#include "cavitate/config.hpp"

#include <Eigen/Dense>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "cavitate/ellipsoid.hpp"
#include "cavitate/errors.hpp"

namespace cavitate {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& what) {
    throw ConfigError("config: " + path + ": " + what);
}

void reject_unknown(const json& obj, const std::string& path,
                    const std::set<std::string>& allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!allowed.count(key)) bad(path + "." + key, "unknown key");
    }
}

double need_number(const json& obj, const std::string& path, const std::string& key) {
    if (!obj.contains(key)) bad(path + "." + key, "missing");
    if (!obj[key].is_number()) bad(path + "." + key, "must be a number");
    return obj[key].get<double>();
}

double opt_number(const json& obj, const std::string& path, const std::string& key,
                  double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) bad(path + "." + key, "must be a number");
    return obj[key].get<double>();
}

std::vector<double> need_array(const json& obj, const std::string& path,
                               const std::string& key) {
    if (!obj.contains(key) || !obj[key].is_array()) bad(path + "." + key, "must be an array");
    std::vector<double> out;
    for (const auto& v : obj[key]) {
        if (!v.is_number()) bad(path + "." + key, "array entries must be numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

CurvatureProfile parse_curvature(const json& c, int n, const std::string& path) {
    if (!c.is_object()) bad(path, "must be an object");
    if (!c.contains("kind") || !c["kind"].is_string()) bad(path + ".kind", "missing kind");
    const std::string kind = c["kind"].get<std::string>();

    if (kind == "zero") {
        reject_unknown(c, path, {"kind"});
        return CurvatureProfile::zero();
    }
    if (kind == "constant") {
        reject_unknown(c, path, {"kind", "value"});
        return CurvatureProfile::constant(need_number(c, path, "value"));
    }
    if (kind == "table") {
        reject_unknown(c, path, {"kind", "t", "kappa"});
        return CurvatureProfile::tabulated(need_array(c, path, "t"),
                                           need_array(c, path, "kappa"));
    }
    if (kind == "revolution") {
        reject_unknown(c, path, {"kind", "psi", "r_max"});
        if (!c.contains("psi") || !c["psi"].is_object()) bad(path + ".psi", "missing");
        const json& p = c["psi"];
        const double r_max = opt_number(c, path, "r_max", 100.0);
        if (!p.contains("form") || !p["form"].is_string())
            bad(path + ".psi.form", "missing form");
        const std::string form = p["form"].get<std::string>();
        if (form == "alog1p_sq") {
            reject_unknown(p, path + ".psi", {"form", "a"});
            return curvature_of_revolution(
                RevolutionSurface::log_profile(need_number(p, path + ".psi", "a"), r_max));
        }
        if (form == "poly") {
            reject_unknown(p, path + ".psi", {"form", "coeffs"});
            return curvature_of_revolution(RevolutionSurface::polynomial(
                need_array(p, path + ".psi", "coeffs"), r_max));
        }
        bad(path + ".psi.form", "unknown form '" + form + "'");
    }
    if (kind == "ellipsoid") {
        reject_unknown(c, path, {"kind", "n", "A", "b", "t_max"});
        const int en = static_cast<int>(opt_number(c, path, "n", n));
        if (en != n) bad(path + ".n", "must match model.n");
        if (!c.contains("A") || !c["A"].is_array()) bad(path + ".A", "must be a matrix");
        Eigen::MatrixXd A(en, en);
        if (static_cast<int>(c["A"].size()) != en) bad(path + ".A", "wrong row count");
        for (int i = 0; i < en; ++i) {
            const auto& row = c["A"][i];
            if (!row.is_array() || static_cast<int>(row.size()) != en)
                bad(path + ".A", "wrong column count");
            for (int j = 0; j < en; ++j) A(i, j) = row[j].get<double>();
        }
        RadialScalar b = RadialScalar::one();
        if (c.contains("b")) {
            const json& bj = c["b"];
            if (!bj.is_object() || !bj.contains("form")) bad(path + ".b", "missing form");
            const std::string form = bj["form"].get<std::string>();
            if (form == "one") {
                reject_unknown(bj, path + ".b", {"form"});
            } else if (form == "exp") {
                reject_unknown(bj, path + ".b", {"form", "c"});
                b = RadialScalar::exponential(need_number(bj, path + ".b", "c"));
            } else if (form == "poly") {
                reject_unknown(bj, path + ".b", {"form", "coeffs"});
                b = RadialScalar::polynomial(need_array(bj, path + ".b", "coeffs"));
            } else {
                bad(path + ".b.form", "unknown form '" + form + "'");
            }
        }
        const double t_max = opt_number(c, path, "t_max", 64.0);
        return EllipsoidMetric::from_scalar(en, std::move(A), std::move(b))
            .radial_curvature(t_max);
    }
    bad(path + ".kind", "unknown kind '" + kind + "'");
}

ConstitutiveLaw parse_material(const json& m, int n, const std::string& path) {
    if (!m.is_object()) bad(path, "must be an object");
    if (!m.contains("family") || !m["family"].is_string())
        bad(path + ".family", "missing family");
    const std::string family = m["family"].get<std::string>();
    if (family == "example42" || family == "power_law") {
        reject_unknown(m, path, {"family", "mu", "nu", "alpha", "beta", "k", "n"});
        if (m.contains("n") && static_cast<int>(m["n"].get<double>()) != n)
            bad(path + ".n", "must match model.n");
        PowerLawParams p;
        p.mu = opt_number(m, path, "mu", 1.0);
        p.nu = opt_number(m, path, "nu", 0.0);
        p.alpha = opt_number(m, path, "alpha", 2.0);
        p.beta = opt_number(m, path, "beta", 0.0);
        p.k = opt_number(m, path, "k", 2.0);
        try {
            return ConstitutiveLaw::power_law(n, p);
        } catch (const std::invalid_argument& e) {
            bad(path, e.what());
        }
    }
    if (family == "custom") {
        reject_unknown(m, path, {"family", "v", "phi", "d", "h"});
        try {
            return ConstitutiveLaw::tabulated(n, need_array(m, path, "v"),
                                              need_array(m, path, "phi"),
                                              need_array(m, path, "d"),
                                              need_array(m, path, "h"));
        } catch (const std::invalid_argument& e) {
            bad(path, e.what());
        }
    }
    bad(path + ".family", "unknown family '" + family + "'");
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        // translate the byte offset into line/column
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ConfigError("config: JSON parse error at line " + std::to_string(line) +
                          ", column " + std::to_string(col) + ": " + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be an object");
    reject_unknown(root, "$", {"model", "material", "command"});
    if (!root.contains("model")) throw ConfigError("config: $.model: missing");
    if (!root.contains("material")) throw ConfigError("config: $.material: missing");
    if (!root.contains("command")) throw ConfigError("config: $.command: missing");

    const json& model = root["model"];
    reject_unknown(model, "$.model", {"n", "curvature", "t_max"});
    const double n_raw = need_number(model, "$.model", "n");
    if (n_raw != std::floor(n_raw) || n_raw < 2.0) bad("$.model.n", "n must be >= 2");
    const int n = static_cast<int>(n_raw);
    if (!model.contains("curvature")) bad("$.model.curvature", "missing");

    RunConfig cfg{.n = n,
                  .curvature = parse_curvature(model["curvature"], n, "$.model.curvature"),
                  .material = parse_material(root["material"], n, "$.material"),
                  .command = {},
                  .lambda = {},
                  .lambda_grid = {},
                  .A_grid = {},
                  .P = 0.0,
                  .tol = 1e-9,
                  .grid_size = 256,
                  .t_max = opt_number(model, "$.model", "t_max", 0.0)};

    const json& cmd = root["command"];
    reject_unknown(cmd, "$.command",
                   {"name", "lambda", "lambda_range", "A_grid", "P", "tol", "grid_size",
                    "t_max"});
    if (!cmd.contains("name") || !cmd["name"].is_string()) bad("$.command.name", "missing");
    cfg.command = cmd["name"].get<std::string>();
    const std::set<std::string> known = {"jacobi",       "pcr",      "incompressible",
                                         "compressible", "minimize", "sweep"};
    if (!known.count(cfg.command)) bad("$.command.name", "unknown command '" + cfg.command + "'");

    if (cmd.contains("lambda")) cfg.lambda = need_number(cmd, "$.command", "lambda");
    if (cmd.contains("A_grid")) {
        cfg.A_grid = need_array(cmd, "$.command", "A_grid");
        if (cfg.A_grid.empty()) bad("$.command.A_grid", "must be non-empty");
        for (std::size_t i = 1; i < cfg.A_grid.size(); ++i)
            if (!(cfg.A_grid[i] > cfg.A_grid[i - 1]))
                bad("$.command.A_grid", "must strictly increase");
    }
    if (cmd.contains("lambda_range")) {
        const json& lr = cmd["lambda_range"];
        if (!lr.is_object()) bad("$.command.lambda_range", "must be an object {lo, hi, count}");
        reject_unknown(lr, "$.command.lambda_range", {"lo", "hi", "count"});
        const double lo = need_number(lr, "$.command.lambda_range", "lo");
        const double hi = need_number(lr, "$.command.lambda_range", "hi");
        const double cnt = need_number(lr, "$.command.lambda_range", "count");
        if (!(lo > 0.0 && hi > lo)) bad("$.command.lambda_range", "need 0 < lo < hi");
        const int count = static_cast<int>(cnt);
        if (count < 2) bad("$.command.lambda_range.count", "must be >= 2");
        for (int i = 0; i < count; ++i)
            cfg.lambda_grid.push_back(lo + (hi - lo) * i / (count - 1));
    }
    cfg.P = opt_number(cmd, "$.command", "P", 0.0);
    cfg.tol = opt_number(cmd, "$.command", "tol", 1e-9);
    if (!(cfg.tol > 0.0)) bad("$.command.tol", "must be positive");
    const double gs = opt_number(cmd, "$.command", "grid_size", 256.0);
    if (gs < 8.0 || gs != std::floor(gs)) bad("$.command.grid_size", "must be an integer >= 8");
    cfg.grid_size = static_cast<int>(gs);
    if (cmd.contains("t_max")) cfg.t_max = need_number(cmd, "$.command", "t_max");
    if (cfg.t_max < 0.0) bad("$.command.t_max", "must be positive");

    return cfg;
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

}  // namespace cavitate
