#pragma once

#include <limits>
#include <memory>
#include <vector>

#include "cavitate/curvature.hpp"

namespace cavitate {

struct Moments {
    double mu_plus = 0.0;
    double mu_minus = 0.0;
    bool truncated = false;    // lam exceeded the curvature domain / cutoff budget
    double t_used = 0.0;       // upper limit actually integrated to
};

/// Moments mu_pm(lam) = integral_0^lam s kappa_pm(s) ds.  lam may be
/// infinity: the integral is then taken to the profile's t_max (or a
/// doubling cutoff) and flagged truncated unless the tail provably
/// vanished.  mu_plus <= 1 is the admissibility gate.
Moments curvature_moments(const CurvatureProfile& curv, double lam, double tol = 1e-10);

struct JacobiOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-16;    // sigma' consistency at small t needs tight nodes
    double h_max = 0.004;      // keeps cubic-Hermite dense output near 1e-11
    double t_series = 1e-6;    // series start offset at t = 0
};

/// Solution of f'' + kappa f = 0, f(0) = 0, f'(0) = 1 together with the
/// volume coordinate sigma(t) = integral_0^t f^{n-1}.  Dense output on
/// [0, t_max]; immutable and cheap to copy (shared state).
class JacobiField {
public:
    int dimension() const;
    double t_max() const;
    const CurvatureProfile& curvature() const;

    double f(double t) const;
    double f_prime(double t) const;
    double sigma(double t) const;
    /// inverse of sigma, 1e-10 relative; throws if s is out of range
    double sigma_inverse(double s) const;
    /// upper end of sigma's invertible range (sigma at min(t_max, first zero of f))
    double sigma_max() const;

    double mu_plus(double lam) const;
    double mu_minus(double lam) const;

    /// range of f' over [0, lam]: (mu0, mu1)
    std::pair<double, double> f_prime_range(double lam) const;
    /// running extrema of f' over [0, rho] (the b0/b1 envelopes)
    double b0(double rho) const;
    double b1(double rho) const;

    /// first zero of f, +inf if f > 0 on (0, t_max]
    double first_f_zero() const;

    /// accepted integration nodes, for serialization
    const std::vector<double>& grid() const;
    const std::vector<double>& f_values() const;
    const std::vector<double>& f_prime_values() const;
    const std::vector<double>& sigma_values() const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    friend JacobiField solve_jacobi(const CurvatureProfile&, int, double, JacobiOptions);
    explicit JacobiField(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
};

/// Integrates the Jacobi problem with sigma' = f^{n-1} carried as an extra
/// component.  Starts from the two-term series f = t - kappa(0) t^3/6 at
/// t = t_series.  Throws SolverError on sign loss of f or f' when
/// mu_plus(t_max) <= 1 (an internal inconsistency).
JacobiField solve_jacobi(const CurvatureProfile& curv, int n, double t_max,
                         JacobiOptions opt = {});

inline JacobiField solve_jacobi(const CurvatureProfile& curv, int n, double t_max,
                                double tol) {
    JacobiOptions opt;
    opt.rel_tol = tol;
    opt.abs_tol = std::min(tol * 1e-3, 1e-16);
    return solve_jacobi(curv, n, t_max, opt);
}

/// Tightest sampled bounds mu0 = min f', mu1 = max f' on [0, lam]
/// (Jacobi-comparison bounds; requires mu_plus(lam) <= 1, else mu0 may
/// be nonpositive and an error is raised).
std::pair<double, double> f_bounds(const JacobiField& field, double lam);

}  // namespace cavitate
