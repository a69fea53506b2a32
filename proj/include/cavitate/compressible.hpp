#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "cavitate/incompressible.hpp"
#include "cavitate/numerics/ode.hpp"

namespace cavitate {

/// phi'' from the radial equilibrium equation at the state (rho, phi, phi').
/// Throws SolverError if the phi''-coefficient is not positive (convexity
/// violated).
double equilibrium_rhs(const Model& model, const ConstitutiveLaw& law, double rho,
                       double phi, double phi_prime);

struct ShootOptions {
    double tol = 1e-9;         // outer root-find tolerance on phi(1) - lam
    double ode_rel_tol = 1e-10;
    double rho0 = 1e-6;        // desingularized start
    double cavity_stress_tol = 1e-4;  // |T(0+)| acceptance for the cavitating kind
    long max_steps = 200000;   // per-shot budget; crawling trajectories fail fast
};

/// Radial equilibrium solution from shooting; dense profile on [rho0, 1].
class EquilibriumSolution {
public:
    enum class Kind { regular, cavitating };

    Kind kind() const { return kind_; }
    double cavity_radius() const { return A_; }       // phi(0+)
    double boundary_stretch() const { return lam_; }  // phi(1)
    double shoot_slope() const { return slope_; }     // phi'(0) (regular) or launch phi'(rho0)
    double rho0() const { return rho0_; }
    double residual() const { return residual_; }     // max ODE residual at checkpoints
    double T0() const { return T0_; }                 // limit of T(rho), rho -> 0+
    bool stress_free_cavity() const { return t0_ok_; }
    bool launch_is_asymptotic() const { return launch_asymptotic_; }

    double phi(double rho) const;
    double phi_prime(double rho) const;
    double tau(double rho) const;

    EquilibriumSolution(Kind kind, double A, double lam, double slope, double rho0,
                        DenseSolution<2> profile, const Model& model);

private:
    friend EquilibriumSolution finalize_solution(EquilibriumSolution, const Model&,
                                                 const ConstitutiveLaw&,
                                                 const ShootOptions&);
    Kind kind_;
    double A_;
    double lam_;
    double slope_;
    double rho0_;
    double residual_ = 0.0;
    double T0_ = 0.0;
    bool t0_ok_ = false;
    bool launch_asymptotic_ = true;
    DenseSolution<2> profile_;
    std::shared_ptr<const Model> model_;
};

/// Regular branch: shooting on s = phi'(0) with phi(rho0) = s rho0; the
/// returned solution is checked against the a-priori envelope
/// alpha_0(rho, phi) tau <= phi' <= alpha_1(rho, phi) tau.
EquilibriumSolution solve_regular(const Model& model, const ConstitutiveLaw& law,
                                  double lam, ShootOptions opt = {});

/// Cavitating branch: shooting on the cavity radius A with the
/// stress-free launch phi'(rho0) chosen so T(rho0) = 0 (reduces to
/// phi' tau^{n-1} = varpi when (A 8) holds with beta = 0).  Returns
/// nullopt when no A in (0, lam) matches the boundary data.
std::optional<EquilibriumSolution> solve_cavitating(const Model& model,
                                                    const ConstitutiveLaw& law, double lam,
                                                    ShootOptions opt = {});

/// phi(1) reached by the cavitating launch from cavity radius A; throws
/// SolverError when the trajectory collapses or explodes before rho = 1.
/// Diagnostic surface for the shooting map (monotone in A).
double cavitating_boundary_stretch(const Model& model, const ConstitutiveLaw& law, double A,
                                   ShootOptions opt = {});

struct StressReport {
    std::function<double(double)> T;        // radial Cauchy stress tau^{1-n} Phi_1
    std::function<double(double)> T_tilde;  // inverse Cauchy stress Phi - phi' Phi_1
    double conservation_residual = 0.0;     // relative defect of the integrated identity
};

StressReport stress_report(const Model& model, const ConstitutiveLaw& law,
                           const EquilibriumSolution& sol);

/// I(phi) = integral_0^1 f^{n-1} Phi(rho) drho along the profile
double energy_of(const Model& model, const ConstitutiveLaw& law,
                 const EquilibriumSolution& sol, double tol = 1e-9);

struct MinimizerReport {
    double lam = 0.0;
    enum class Verdict { regular, cavitating } verdict = Verdict::regular;
    double regular_energy = 0.0;
    std::optional<double> cavitating_energy;
    std::optional<double> cavity_radius;
    double direct_min_energy = 0.0;
    double direct_init_energy = 0.0;  // J at the branch-interpolant start
    int descent_iterations = 0;
    double descent_grad_norm = 0.0;
    bool descent_converged = false;
    std::optional<EquilibriumSolution> regular_solution;
    std::optional<EquilibriumSolution> cavitating_solution;
};

/// Three-way energy comparison: (a) regular branch, (b) best cavitating
/// branch, (c) direct minimization of the reduced functional J(u) over
/// piecewise-linear u on a uniform grid in p = sigma(rho), with increments
/// optimized in log space.  Verdict = argmin of (a) and (b).
MinimizerReport minimize_energy(const Model& model, const ConstitutiveLaw& law, double lam,
                                int grid_size = 256, ShootOptions opt = {});

}  // namespace cavitate
