#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cavitate/constitutive.hpp"
#include "cavitate/jacobi.hpp"

namespace cavitate {

/// Rotationally symmetric model: dimension, radial curvature and the
/// solved Jacobi coefficient on [0, t_max].
struct Model {
    int n = 3;
    CurvatureProfile curvature = CurvatureProfile::zero();
    JacobiField jacobi;
};

/// Solves the Jacobi problem over [0, t_max].
Model make_model(const CurvatureProfile& curv, int n, double t_max, double tol = 1e-10);

/// Solves the Jacobi problem on a domain large enough that
/// sigma(t_max) >= sigma_target (the range needed by sigma^{-1}).
Model make_model_for_sigma(const CurvatureProfile& curv, int n, double sigma_target,
                           double tol = 1e-10);

/// area of the unit (n-1)-sphere, 2 pi^{n/2} / Gamma(n/2)
double unit_sphere_area(int n);

struct GateReport {
    double mu_plus_1 = 0.0;    // mu_plus(1)
    double mu_plus_lam = 0.0;  // mu_plus(phi(1))
    bool pass = false;
    bool marginal = false;     // exactly at the mu_plus = 1 edge
};

/// Incompressible radial deformation phi(rho) = sigma^{-1}(sigma(rho) + sigma(A)).
class IncompressibleSolution {
public:
    IncompressibleSolution(Model model, double A, std::optional<double> load);

    double cavity_radius() const { return A_; }
    double boundary_stretch() const { return lam_; }  // phi(1)
    std::optional<double> load() const { return load_; }
    const GateReport& gates() const { return gates_; }
    const Model& model() const { return model_; }

    double phi(double rho) const;
    double phi_prime(double rho) const;  // f^{n-1}(rho) / f^{n-1}(phi(rho))
    double tau(double rho) const;        // f(phi(rho)) / f(rho)

private:
    Model model_;
    double A_;
    double lam_;
    std::optional<double> load_;
    GateReport gates_;
};

/// Builds the closed-form deformation; throws GateError when the mu_plus
/// gates fail and SolverError when sigma(1) + sigma(A) leaves sigma's range.
IncompressibleSolution incompressible_deformation(const Model& model, double A,
                                                  std::optional<double> load = {});

struct TailReport {
    double value = 0.0;
    bool converged = false;
    bool inconclusive = false;
    double cutoff = 0.0;
    double last_delta = 0.0;
};

/// Tail integrability of tau^{n-1}/(tau^n-1)^2 Phi_hat'(tau) on (delta, inf):
/// the equilibrium criterion for cavity solutions.
TailReport admissibility_42(const ConstitutiveLaw& law, double tol = 1e-9,
                            double delta = 2.0);

/// P_cr = integral_1^inf Phi_hat'(tau)/(tau^n - 1) dtau; the integrand at
/// tau = 1 is the limit Phi_hat''(1)/n.  Throws SolverError on a divergent
/// tail.
double pcr(const ConstitutiveLaw& law, double tol = 1e-9);

struct ChiOptions {
    double tol = 1e-9;
    double rho0_override = 0.0;  // 0 = automatic split point
    bool force_direct = false;   // skip the tau-substitution (oracle route)
};

/// chi(A) = tau^{n-1}(1) integral_0^1 (f'(phi)/f(phi)) tau^{2-n} Phi_hat'(tau) drho,
/// evaluated by splitting at rho_0 and switching the inner part to the
/// tau variable via the coupled system f(phi) = tau f, sigma(phi) = sigma(rho) + sigma(A).
double chi(const Model& model, const ConstitutiveLaw& law, double A, ChiOptions opt = {});
inline double chi(const Model& model, const ConstitutiveLaw& law, double A, double tol) {
    ChiOptions o;
    o.tol = tol;
    return chi(model, law, A, o);
}

/// Radial Cauchy stress T(rho) = P/tau^{n-1}(1) - integral_rho^1 (f'(phi)/f(phi)) tau^{2-n} Phi_hat'(tau).
std::function<double(double)> cauchy_stress_T(const Model& model, const ConstitutiveLaw& law,
                                              const IncompressibleSolution& sol, double P);

/// stored energy E(A) = omega_n integral_0^1 f^{n-1} Phi(rho) drho
double energy_E(const Model& model, const ConstitutiveLaw& law, double A,
                double tol = 1e-9);
/// total energy I(A) = E(A) - omega_n f^{n-1}(1) P phi(1)
double energy_I(const Model& model, const ConstitutiveLaw& law, double A, double P,
                double tol = 1e-9);

struct BifurcationDiagram {
    std::vector<double> A_grid;
    std::vector<double> chi_values;
    double P_cr = 0.0;
    double gap_at_smallest = 0.0;   // |chi(A_min) - P_cr|
    bool gap_monotone = false;      // gap shrinks along decreasing A

    // slope diagnostics near A = 0 per the classification of chi'(0+)
    std::vector<double> chi_prime_est;   // centered on interior grid points
    std::vector<double> slope_over_f;    // chi' estimate / f(A)
    double kappa_at_0 = 0.0;
    double sign_integral = 0.0;          // integral_1^inf (tau^2-1)tau^n/(tau^n-1)^{2(1+1/n)} Phi_hat'
    std::optional<double> flat_core_criterion;  // defined when kappa == 0 near 0
    int predicted_sign = 0;              // predicted sign of chi' for small A (0 = indeterminate)
    std::vector<double> probe_roots;     // roots of chi(A) = P_probe found on the grid
};

BifurcationDiagram bifurcation_diagram(const Model& model, const ConstitutiveLaw& law,
                                       std::vector<double> A_grid, double P_probe,
                                       double tol = 1e-8);

}  // namespace cavitate
