#pragma once

#include <atomic>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

namespace cavitate {

/// Surface of revolution {(x, psi(|x|)) : x in R^2} for a C^2 profile psi
/// with psi'(0) = 0.  Evaluators are supplied for psi and its first two
/// derivatives; dpsi_over_r resolves the removable psi'(r)/r factor at r=0.
class RevolutionSurface {
public:
    using Fn = std::function<double(double)>;

    RevolutionSurface(Fn psi, Fn dpsi, Fn d2psi, double r_max = 100.0,
                      Fn dpsi_over_r = nullptr);

    double psi(double r) const { return psi_(r); }
    double dpsi(double r) const { return dpsi_(r); }
    double d2psi(double r) const { return d2psi_(r); }
    double dpsi_over_r(double r) const;
    double r_max() const { return r_max_; }

    /// psi(s) = a log(1 + s^2)
    static RevolutionSurface log_profile(double a, double r_max = 100.0);
    /// psi(s) = sum_i coeffs[i] s^i, with coeffs[1] = 0 required
    static RevolutionSurface polynomial(std::vector<double> coeffs, double r_max = 100.0);
    /// psi identically constant (a flat plane)
    static RevolutionSurface flat(double r_max = 100.0);

private:
    Fn psi_, dpsi_, d2psi_, dpsi_over_r_;
    double r_max_;
};

/// Geodesic radius of the circle of arclength-distance t from the pole:
/// solves t = integral_0^zeta sqrt(1 + psi'^2) by bracketed bisection
/// refined with Newton; quadrature is adaptive Simpson (abs tol 1e-10).
double zeta(const RevolutionSurface& surface, double t, double tol = 1e-12);

/// Arclength from the pole to Euclidean radius r.
double arclength_of_radius(const RevolutionSurface& surface, double r);

/// Radial curvature profile kappa(t) of a rotationally symmetric model.
/// Immutable after construction; copies share state.
class CurvatureProfile {
public:
    enum class Kind { constant, zero, tabulated, revolution, prescribed };

    double operator()(double t) const;
    Kind kind() const;
    double t_max() const;
    /// set once a tabulated profile has been queried beyond its last sample
    bool extrapolation_seen() const;
    /// interior points where kappa is only C^0 (tabulated knots); integrators
    /// split at these
    std::vector<double> breakpoints() const;

    static CurvatureProfile constant(double value,
                                     double t_max = std::numeric_limits<double>::infinity());
    static CurvatureProfile zero(double t_max = std::numeric_limits<double>::infinity());
    /// piecewise-linear in t; abscissae strictly increasing, starting at 0;
    /// constant extrapolation beyond the last sample (sets the warning flag)
    static CurvatureProfile tabulated(std::vector<double> t, std::vector<double> kappa);
    static CurvatureProfile prescribed(std::function<double(double)> kappa, double t_max);
    static CurvatureProfile revolution(const RevolutionSurface& surface);

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    explicit CurvatureProfile(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
};

/// kappa(t) = psi'(zeta) psi''(zeta) / [zeta (1 + psi'^2(zeta))^2], the
/// Gaussian curvature along a meridian at arclength t from the pole.
/// At t = 0 the removable singularity is resolved by psi'(r)/r -> psi''(0).
CurvatureProfile curvature_of_revolution(const RevolutionSurface& surface);

}  // namespace cavitate
