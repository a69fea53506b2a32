#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cavitate {

/// Parameters of the built-in power-law family
///   phi(v) = mu (v^alpha - n) + nu v^-beta,   h = H - n,
///   H(d) = k (d - 1 - 1/k)^2 for d >= 1/2, blowing up as d -> 0+.
struct PowerLawParams {
    double mu = 1.0;
    double nu = 0.0;
    double alpha = 2.0;
    double beta = 0.0;
    double k = 2.0;
};

/// Isotropic stored energy Phi(v_1, ..., v_n) = sum_i phi(v_i) + h(v_1...v_n)
/// with evaluators for phi, h and their first two derivatives.  Immutable;
/// copies share state.
class ConstitutiveLaw {
public:
    using Fn = std::function<double(double)>;

    int dimension() const;

    double phi(double v) const;
    double phi_p(double v) const;
    double phi_pp(double v) const;
    double h(double d) const;
    double h_p(double d) const;
    double h_pp(double d) const;

    /// full stored energy at a stretch vector (symmetric in its arguments)
    double Phi(std::span<const double> v) const;
    /// Phi at the radial point (a, t, ..., t)
    double Phi_radial(double a, double t) const;
    /// first partials (Phi_1, Phi_2) at the radial point (a, t, ..., t)
    std::pair<double, double> Phi12(double a, double t) const;

    /// incompressible reduction Phi_hat(v) = Phi(v^{1-n}, v, ..., v)
    double phi_hat(double v) const;
    double phi_hat_prime(double v) const;
    /// Phi_hat''(1) = n(n-1)[phi'(1) + phi''(1)]
    double phi_hat_pp1() const;
    /// Phi_hat'''(1), by central differences of Phi_hat'' (series branch input)
    double phi_hat_ppp1() const;
    /// guarded Phi_hat'(tau)/(tau^n - 1): series branch for |tau-1| < 1e-4
    double phi_hat_prime_over_taun1(double tau) const;

    /// root t0 >= 0 of phi' (0 when phi' > 0 on (0, inf))
    double t0() const;
    /// root of h' (the cavity-surface determinant), h''(varpi) > 0
    double varpi() const;

    /// growth envelopes of (A 6) and their inverses
    double q1(double s) const;       // s >= 1
    double q0(double s) const;       // 0 < s <= 1
    double q1_inv(double z) const;   // 0 < z <= 1
    double q0_inv(double z) const;   // z >= 1

    const std::optional<PowerLawParams>& params() const;

    static ConstitutiveLaw power_law(int n, const PowerLawParams& p);
    static ConstitutiveLaw custom(int n, Fn phi, Fn phi_p, Fn phi_pp, Fn h, Fn h_p,
                                  Fn h_pp);
    /// monotone-cubic interpolants of tabulated samples (report-grade)
    static ConstitutiveLaw tabulated(int n, std::vector<double> v,
                                     std::vector<double> phi_samples,
                                     std::vector<double> d,
                                     std::vector<double> h_samples);

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    explicit ConstitutiveLaw(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
};

enum class AssumptionStatus { pass, fail, sampled_pass };

struct AssumptionReport {
    struct Entry {
        AssumptionStatus status = AssumptionStatus::sampled_pass;
        std::string note;
        std::optional<double> witness;  // sample point of a failure
    };
    std::array<Entry, 9> a;  // a[0] = (A1), ..., a[8] = (A9)

    double t0 = 0.0;
    double varpi = 0.0;
    std::vector<double> q1_grid, q1_values;  // sampled envelope
    std::vector<double> q0_grid, q0_values;
    std::vector<double> theta_grid, theta_values;  // theta(s) ~ liminf h(sv)/h(v)

    bool all_pass() const;
};

/// Numeric screening of (A1)-(A9); sampled, never a proof.
AssumptionReport check_assumptions(const ConstitutiveLaw& law, int sample_budget = 64);

struct BakerEricksenResult {
    bool ok = true;
    struct Witness {
        double a = 0.0, t = 0.0, value = 0.0;
    };
    std::optional<Witness> violation;
};

/// Predicates excluding small-stretch cavities on negatively curved cores:
/// a natural reference state (Phi_i(1,...,1) = 0) and volumetric stiffness
/// dominating the radial response beyond unit stretch
/// (phi'(s) < h''(s^n) s^{2n-1} for s > 1, sampled).
struct NoCavityPredicates {
    bool natural_state = false;
    bool volumetric_dominates = false;
    bool both() const { return natural_state && volumetric_dominates; }
};

NoCavityPredicates no_cavity_predicates(const ConstitutiveLaw& law, int samples = 64);

/// Checks (a Phi_1 - t Phi_2)/(a - t) >= -1e-12 on a log grid of radial
/// points; returns the first violation if any.
BakerEricksenResult baker_ericksen(const ConstitutiveLaw& law, int grid_per_axis = 40,
                                   double v_lo = 0.1, double v_hi = 10.0);

}  // namespace cavitate
