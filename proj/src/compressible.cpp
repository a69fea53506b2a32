#include "cavitate/compressible.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cavitate/errors.hpp"
#include "cavitate/numerics/quadrature.hpp"
#include "cavitate/numerics/roots.hpp"

namespace cavitate {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double pow_int(double x, int p) {
    double acc = 1.0;
    for (int i = 0; i < p; ++i) acc *= x;
    return acc;
}

double rhs_or_nan(const Model& m, const ConstitutiveLaw& law, double rho, double phi,
                  double phip, double t_cap) {
    if (!(phi > 0.0) || !(phip > 0.0) || !(phi < t_cap) || !(rho > 0.0)) return kNaN;
    const auto& J = m.jacobi;
    const int n = m.n;
    const double f = J.f(rho);
    const double fp = J.f_prime(rho);
    const double fph = J.f(phi);
    const double fpph = J.f_prime(phi);
    const double tau = fph / f;
    const double det = phip * pow_int(tau, n - 1);
    if (!(det > 1e-14) || !(det < 1e14)) return kNaN;
    const double hpp = law.h_pp(det);
    const double coef = f * (law.phi_pp(phip) + hpp * pow_int(tau, 2 * (n - 1)));
    if (!(coef > 0.0)) return kNaN;
    const double num =
        (n - 1) * (fpph * law.phi_p(tau) - fp * law.phi_p(phip) -
                   (fpph * phip - fp * tau) * hpp * phip * pow_int(tau, 2 * n - 3));
    return num / coef;
}

struct ShootOutcome {
    enum class Class { reached, collapsed, exploded };
    Class cls = Class::collapsed;
    double phi1 = kNaN;
    DenseSolution<2> profile;
};

ShootOutcome shoot_to_boundary(const Model& m, const ConstitutiveLaw& law, double rho0,
                               const std::array<double, 2>& y0, double ode_tol,
                               long max_steps) {
    // the rhs rejects states beyond rhs_cap with NaN; the guard stops
    // slightly earlier so a capped trajectory always ends on an accepted
    // state that classifies as exploded rather than underflowing the step
    const double rhs_cap = m.jacobi.t_max() * 0.999;
    const double guard_cap = m.jacobi.t_max() * 0.99;
    OdeOptions ode;
    ode.rel_tol = ode_tol;
    // phi' can launch many orders below 1 (cavity layer); keep the error
    // control relative there or the determinant drifts off varpi
    ode.abs_tol = std::min(1e-14, 1e-8 * std::abs(y0[1]));
    ode.h_max = 0.01;
    ode.max_steps = max_steps;
    auto rhs = [&](double rho, const std::array<double, 2>& y, std::array<double, 2>& dy) {
        dy[0] = y[1];
        dy[1] = rhs_or_nan(m, law, rho, y[0], y[1], rhs_cap);
        if (!std::isfinite(dy[1])) dy[0] = kNaN;
    };
    auto guard = [&](double, const std::array<double, 2>& y) {
        return y[0] > 0.0 && y[1] > 0.0 && y[0] < guard_cap && y[1] < 1e12;
    };
    auto res = integrate_dense<2>(rhs, rho0, 1.0, y0, ode, guard);

    ShootOutcome out;
    out.profile = std::move(res.solution);
    if (res.status == OdeStatus::ok) {
        out.cls = ShootOutcome::Class::reached;
        out.phi1 = out.profile.back_state()[0];
        return out;
    }
    const auto& y_end = out.profile.back_state();
    const bool exploded = y_end[0] >= guard_cap * (1.0 - 1e-9) || y_end[1] >= 1e11;
    out.cls = exploded ? ShootOutcome::Class::exploded : ShootOutcome::Class::collapsed;
    return out;
}

// checkpoints, geometric from lo to 1
std::vector<double> checkpoints(double lo, int count) {
    std::vector<double> out;
    const double a = std::log(lo);
    for (int i = 0; i <= count; ++i)
        out.push_back(std::exp(a + (0.0 - a) * i / count));
    out.back() = 1.0;
    return out;
}

double alpha1_envelope(const Model& m, const ConstitutiveLaw& law, double rho, double s) {
    const auto& J = m.jacobi;
    return std::max(J.b1(rho) / J.b0(s), law.q1_inv(J.b0(rho) / J.b1(s)));
}

double alpha0_envelope(const Model& m, const ConstitutiveLaw& law, double rho, double s) {
    const auto& J = m.jacobi;
    return std::min(J.b0(rho) / J.b1(s), law.q0_inv(J.b1(rho) / J.b0(s)));
}

double stress_T_at(const Model& m, const ConstitutiveLaw& law,
                   const EquilibriumSolution& sol, double rho) {
    const double tau = sol.tau(rho);
    const auto [P1, P2] = law.Phi12(sol.phi_prime(rho), tau);
    (void)P2;
    return std::pow(tau, 1.0 - m.n) * P1;
}

void require_admissible(const Model& m, double lam) {
    const double gate_arg = std::max(lam, 1.0);
    const double mup = curvature_moments(m.curvature, std::min(gate_arg, m.curvature.t_max())).mu_plus;
    if (mup > 1.0 + 1e-12)
        throw GateError("compressible solve: mu_plus(max(lam,1)) > 1");
    if (!(m.jacobi.t_max() >= gate_arg))
        throw std::invalid_argument(
            "compressible solve: the Jacobi field domain must cover max(lam, 1)");
}

}  // namespace

double equilibrium_rhs(const Model& model, const ConstitutiveLaw& law, double rho,
                       double phi, double phi_prime) {
    if (!(rho > 0.0 && rho <= 1.0))
        throw std::invalid_argument("equilibrium_rhs: rho must lie in (0, 1]");
    if (!(phi > 0.0 && phi_prime > 0.0))
        throw std::invalid_argument("equilibrium_rhs: phi and phi' must be positive");
    const double v = rhs_or_nan(model, law, rho, phi, phi_prime, model.jacobi.t_max());
    if (!std::isfinite(v))
        throw SolverError("equilibrium_rhs: vanishing phi''-coefficient or out-of-domain state");
    return v;
}

// ---------------------------------------------------------------------------

EquilibriumSolution::EquilibriumSolution(Kind kind, double A, double lam, double slope,
                                         double rho0, DenseSolution<2> profile,
                                         const Model& model)
    : kind_(kind),
      A_(A),
      lam_(lam),
      slope_(slope),
      rho0_(rho0),
      profile_(std::move(profile)),
      model_(std::make_shared<Model>(model)) {}

double EquilibriumSolution::phi(double rho) const { return profile_.component(rho, 0); }
double EquilibriumSolution::phi_prime(double rho) const { return profile_.component(rho, 1); }
double EquilibriumSolution::tau(double rho) const {
    return model_->jacobi.f(phi(rho)) / model_->jacobi.f(rho);
}

EquilibriumSolution finalize_solution(EquilibriumSolution sol, const Model& m,
                                      const ConstitutiveLaw& law, const ShootOptions& opt) {
    // ODE residual: finite differences of the dense phi' against the rhs
    double worst = 0.0;
    for (double rho : checkpoints(std::max(10.0 * opt.rho0, 1e-4), 40)) {
        if (rho >= 1.0) rho = 1.0 - 1e-6;
        const double h = 1e-6 * std::max(rho, 1e-2);
        const double d2 =
            (sol.phi_prime(rho + h) - sol.phi_prime(rho - h)) / (2.0 * h);
        const double r = rhs_or_nan(m, law, rho, sol.phi(rho), sol.phi_prime(rho),
                                    m.jacobi.t_max());
        worst = std::max(worst, std::abs(d2 - r) / (1.0 + std::abs(r)));
    }
    sol.residual_ = worst;

    const double probe = std::max(10.0 * opt.rho0, 1e-5);
    sol.T0_ = stress_T_at(m, law, sol, probe);
    const double t_bnd = stress_T_at(m, law, sol, 1.0);
    sol.t0_ok_ = std::abs(sol.T0_) <= opt.cavity_stress_tol * (1.0 + std::abs(t_bnd));
    if (sol.kind_ == EquilibriumSolution::Kind::cavitating) {
        // records whether the stress-free launch coincides with the varpi
        // asymptotic (it does exactly when the law has no inverse-power term)
        const double b_launch = sol.slope_ * pow_int(sol.tau(sol.rho0_), m.n - 1);
        sol.launch_asymptotic_ = std::abs(b_launch - law.varpi()) <= 1e-6 * law.varpi();
    }
    return sol;
}

// ---------------------------------------------------------------------------

EquilibriumSolution solve_regular(const Model& model, const ConstitutiveLaw& law, double lam,
                                  ShootOptions opt) {
    if (!(lam > 0.0)) throw std::invalid_argument("solve_regular: lam must be positive");
    require_admissible(model, lam);

    auto value = [&](double s) {
        const auto out = shoot_to_boundary(model, law, opt.rho0, {s * opt.rho0, s},
                                           opt.ode_rel_tol, opt.max_steps);
        switch (out.cls) {
            case ShootOutcome::Class::reached: return out.phi1 - lam;
            case ShootOutcome::Class::collapsed: return -(lam + 1.0);
            case ShootOutcome::Class::exploded: return model.jacobi.t_max() + lam;
        }
        return kNaN;
    };

    double s_lo = 0.5 * lam, s_hi = 2.0 * lam;
    int tries = 0;
    while (value(s_lo) > 0.0 && tries++ < 28) s_lo *= 0.5;
    if (value(s_lo) > 0.0) throw SolverError("solve_regular: no lower bracket for phi'(0)");
    tries = 0;
    while (value(s_hi) < 0.0 && tries++ < 28) s_hi *= 2.0;
    if (value(s_hi) < 0.0) throw SolverError("solve_regular: no upper bracket for phi'(0)");

    RootOptions ro;
    ro.x_tol = opt.tol * std::max(1.0, lam) * 1e-2;
    ro.f_tol = opt.tol * std::max(1.0, lam);
    const double s_star = brent(value, s_lo, s_hi, ro);

    auto out = shoot_to_boundary(model, law, opt.rho0, {s_star * opt.rho0, s_star},
                                 opt.ode_rel_tol, opt.max_steps);
    if (out.cls != ShootOutcome::Class::reached ||
        std::abs(out.phi1 - lam) > 100.0 * opt.tol * (1.0 + lam))
        throw SolverError("solve_regular: shooting did not meet the boundary datum (s=" +
                          std::to_string(s_star) + ", cls=" +
                          std::to_string(static_cast<int>(out.cls)) + ", phi1=" +
                          std::to_string(out.phi1) + ")");

    const double A_extrap = out.profile.nodes().front().y[0] - s_star * opt.rho0;
    EquilibriumSolution sol(EquilibriumSolution::Kind::regular, std::max(0.0, A_extrap),
                            out.phi1, s_star, opt.rho0, std::move(out.profile), model);
    sol = finalize_solution(std::move(sol), model, law, opt);

    // a-priori envelope (asserted, not assumed)
    for (double rho : checkpoints(std::max(10.0 * opt.rho0, 1e-4), 50)) {
        const double ph = sol.phi(rho);
        const double pp = sol.phi_prime(rho);
        const double tv = sol.tau(rho);
        const double hi = alpha1_envelope(model, law, rho, ph) * tv;
        const double lo = alpha0_envelope(model, law, rho, ph) * tv;
        const double slack = 1e-7 * (1.0 + std::abs(pp));
        if (pp > hi + slack || pp < lo - slack)
            throw SolverError("solve_regular: a-priori envelope violated at rho = " +
                              std::to_string(rho));
    }
    return sol;
}

// ---------------------------------------------------------------------------

namespace {

// stress-free launch: phi'(rho0) solving Phi_1(phi', tau0) = 0, i.e. T(rho0) = 0
std::array<double, 2> cavitating_launch(const Model& m, const ConstitutiveLaw& law, double A,
                                        double rho0) {
    const auto& J = m.jacobi;
    const int n = m.n;
    const double varpi = law.varpi();
    double phi0 = A;
    double x = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
        const double tau0 = J.f(phi0) / J.f(rho0);
        const double tn1 = pow_int(tau0, n - 1);
        auto F = [&](double v) { return law.phi_p(v) + law.h_p(v * tn1) * tn1; };
        auto dF = [&](double v) { return law.phi_pp(v) + law.h_pp(v * tn1) * tn1 * tn1; };
        double seed = varpi / tn1;
        double lo = seed, hi = seed;
        int guard = 0;
        while (F(lo) > 0.0 && guard++ < 200) lo *= 0.25;
        guard = 0;
        while (F(hi) < 0.0 && guard++ < 200) hi *= 4.0;
        RootOptions ropt;
        ropt.x_tol = 1e-13 * seed;  // the root scales with varpi tau0^{1-n}
        ropt.max_iter = 300;
        x = newton_bisect(F, dF, lo, hi, ropt);
        // consistent first-order offset of phi at rho0
        phi0 = A + (x * tn1) * J.sigma(rho0) / pow_int(J.f(A), n - 1);
    }
    return {phi0, x};
}

struct CavityShot {
    double value;  // phi(1) - lam, with +-big sentinels on failures
    ShootOutcome outcome;
};

CavityShot cavity_shot(const Model& m, const ConstitutiveLaw& law, double A, double lam,
                       const ShootOptions& opt) {
    const auto y0 = cavitating_launch(m, law, A, opt.rho0);
    auto out = shoot_to_boundary(m, law, opt.rho0, y0, opt.ode_rel_tol, opt.max_steps);
    double v;
    switch (out.cls) {
        case ShootOutcome::Class::reached: v = out.phi1 - lam; break;
        case ShootOutcome::Class::collapsed: v = -(lam + 1.0); break;
        default: v = m.jacobi.t_max() + lam; break;
    }
    return {v, std::move(out)};
}

}  // namespace

double cavitating_boundary_stretch(const Model& model, const ConstitutiveLaw& law, double A,
                                   ShootOptions opt) {
    if (!(A > 0.0)) throw std::invalid_argument("cavitating_boundary_stretch: A > 0 required");
    const auto y0 = cavitating_launch(model, law, A, opt.rho0);
    auto out = shoot_to_boundary(model, law, opt.rho0, y0, opt.ode_rel_tol, opt.max_steps);
    if (out.cls != ShootOutcome::Class::reached)
        throw SolverError("cavitating_boundary_stretch: trajectory failed before rho = 1");
    return out.phi1;
}

std::optional<EquilibriumSolution> solve_cavitating(const Model& model,
                                                    const ConstitutiveLaw& law, double lam,
                                                    ShootOptions opt) {
    if (!(lam > 0.0)) throw std::invalid_argument("solve_cavitating: lam must be positive");
    require_admissible(model, lam);
    law.varpi();  // throws when h' has no root

    // scan A in [1e-4 lam, 0.99 lam] for sign changes of phi(1; A) - lam
    const int scan = 48;
    std::vector<double> As(scan), vals(scan);
    const double a_lo = 1e-4 * lam, a_hi = 0.99 * lam;
    for (int i = 0; i < scan; ++i) {
        As[i] = a_lo * std::pow(a_hi / a_lo, static_cast<double>(i) / (scan - 1));
        vals[i] = cavity_shot(model, law, As[i], lam, opt).value;
    }

    auto is_sentinel = [lam](double v) { return std::abs(v) > lam + 0.999; };
    std::vector<double> roots;
    auto refine = [&](double a0, double v0, double a1, double v1) {
        if (is_sentinel(v0) || is_sentinel(v1)) return;  // failure edge, not a root
        RootOptions ro;
        ro.x_tol = opt.tol * std::max(1.0, lam) * 1e-2;
        ro.f_tol = opt.tol * std::max(1.0, lam);
        const double A = brent(
            [&](double a) { return cavity_shot(model, law, a, lam, opt).value; }, a0, a1, ro);
        if (std::abs(cavity_shot(model, law, A, lam, opt).value) <=
            1e3 * opt.tol * (1.0 + lam))
            roots.push_back(A);
    };
    for (int i = 0; i + 1 < scan; ++i) {
        if (vals[i] == 0.0) {
            roots.push_back(As[i]);
            continue;
        }
        if (std::signbit(vals[i]) == std::signbit(vals[i + 1])) continue;
        if (!is_sentinel(vals[i]) && !is_sentinel(vals[i + 1])) {
            refine(As[i], vals[i], As[i + 1], vals[i + 1]);
            continue;
        }
        // subdivide a sentinel-adjacent sign change: genuine roots hide only
        // in sub-brackets whose endpoints both evaluated
        double pa = As[i], pv = vals[i];
        for (int k = 1; k <= 8; ++k) {
            const double a = As[i] + (As[i + 1] - As[i]) * k / 8.0;
            const double v = (k == 8) ? vals[i + 1] : cavity_shot(model, law, a, lam, opt).value;
            if (std::signbit(pv) != std::signbit(v)) refine(pa, pv, a, v);
            pa = a;
            pv = v;
        }
    }
    if (roots.empty()) return std::nullopt;

    std::optional<EquilibriumSolution> best;
    double best_energy = std::numeric_limits<double>::infinity();
    for (double A : roots) {
        auto shot = cavity_shot(model, law, A, lam, opt);
        if (shot.outcome.cls != ShootOutcome::Class::reached) continue;
        const double launch_slope = shot.outcome.profile.nodes().front().y[1];
        const double lam_reached = shot.outcome.profile.back_state()[0];
        EquilibriumSolution sol(EquilibriumSolution::Kind::cavitating, A, lam_reached,
                                launch_slope, opt.rho0, std::move(shot.outcome.profile),
                                model);
        sol = finalize_solution(std::move(sol), model, law, opt);
        const double e = energy_of(model, law, sol);
        if (e < best_energy) {
            best_energy = e;
            best = std::move(sol);
        }
    }
    return best;
}

// ---------------------------------------------------------------------------

StressReport stress_report(const Model& model, const ConstitutiveLaw& law,
                           const EquilibriumSolution& sol) {
    StressReport rep;
    const int n = model.n;
    rep.T = [model, law, sol](double rho) { return stress_T_at(model, law, sol, rho); };
    rep.T_tilde = [model, law, sol](double rho) {
        const double pp = sol.phi_prime(rho);
        const double tv = sol.tau(rho);
        const auto [P1, P2] = law.Phi12(pp, tv);
        (void)P2;
        return law.Phi_radial(pp, tv) - pp * P1;
    };

    // integrated conservation identity
    const auto& J = model.jacobi;
    auto bracket_term = [&](double rho) {
        const double pp = sol.phi_prime(rho);
        const double tv = sol.tau(rho);
        const auto [P1, P2] = law.Phi12(pp, tv);
        (void)P2;
        return pow_int(J.f(rho), n) * (law.Phi_radial(pp, tv) - (pp - tv) * P1);
    };
    auto density = [&](double rho) {
        const double pp = sol.phi_prime(rho);
        const double tv = sol.tau(rho);
        const auto [P1, P2] = law.Phi12(pp, tv);
        const double fn1 = pow_int(J.f(rho), n - 1);
        return n * J.f_prime(rho) * fn1 * law.Phi_radial(pp, tv) +
               (J.f_prime(sol.phi(rho)) - J.f_prime(rho)) * fn1 *
                   (pp * P1 + (n - 1) * tv * P2);
    };
    const double a = std::max(0.05, 10.0 * sol.rho0());
    QuadOptions q;
    q.abs_tol = 1e-11;
    q.rel_tol = 1e-11;
    const double lhs = bracket_term(1.0) - bracket_term(a);
    const double rhs = adaptive_gk(density, a, 1.0, q);
    rep.conservation_residual =
        std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
    return rep;
}

double energy_of(const Model& model, const ConstitutiveLaw& law,
                 const EquilibriumSolution& sol, double tol) {
    const auto& J = model.jacobi;
    const int n = model.n;
    QuadOptions q;
    q.abs_tol = tol;
    q.rel_tol = tol;
    auto density = [&](double rho) {
        return pow_int(J.f(rho), n - 1) * law.Phi_radial(sol.phi_prime(rho), sol.tau(rho));
    };
    const double rho0 = sol.rho0();
    double total = adaptive_gk(density, rho0, 1.0, q);

    if (sol.kind() == EquilibriumSolution::Kind::regular) {
        total += J.sigma(rho0) * law.Phi_radial(sol.phi_prime(rho0), sol.tau(rho0));
    } else {
        // asymptotic head: phi ~ A, phi' tau^{n-1} ~ const
        const double A = sol.cavity_radius();
        const double fA1 = pow_int(J.f(A), n - 1);
        const double b0 = sol.phi_prime(rho0) * pow_int(sol.tau(rho0), n - 1);
        auto head = [&](double s) {
            const double fs = J.f(s);
            const double phip = b0 * pow_int(fs, n - 1) / fA1;
            return pow_int(fs, n - 1) *
                   (law.phi(phip) + (n - 1) * law.phi(J.f(A) / fs) + law.h(b0));
        };
        total += adaptive_gk(head, 0.0, rho0, q);
    }
    return total;
}

// ---------------------------------------------------------------------------
// direct minimization of the reduced functional J(u)

namespace {

// sigma^{-1} accelerated by a Hermite table uniform in y = s^{1/n}
class SigmaInverseTable {
public:
    SigmaInverseTable(const JacobiField& J, double s_max, int n) : n_(n) {
        const int m = 4096;
        y_max_ = std::pow(s_max, 1.0 / n);
        h_ = y_max_ / m;
        t_.resize(m + 1);
        d_.resize(m + 1);
        t_[0] = 0.0;
        d_[0] = std::pow(static_cast<double>(n), 1.0 / n);
        for (int j = 1; j <= m; ++j) {
            const double y = h_ * j;
            const double s = std::pow(y, n);
            const double t = J.sigma_inverse(s);
            t_[j] = t;
            d_[j] = n * std::pow(y, n - 1) / pow_int(J.f(t), n - 1);
        }
    }

    double operator()(double s) const {
        const double y = std::pow(std::max(s, 0.0), 1.0 / n_);
        const double u = std::min(y / h_, static_cast<double>(t_.size() - 1) - 1e-9);
        const std::size_t j = static_cast<std::size_t>(u);
        const double w = u - static_cast<double>(j);
        const double w2 = w * w, w3 = w2 * w;
        return (2 * w3 - 3 * w2 + 1) * t_[j] + (w3 - 2 * w2 + w) * h_ * d_[j] +
               (-2 * w3 + 3 * w2) * t_[j + 1] + (w3 - w2) * h_ * d_[j + 1];
    }

private:
    int n_;
    double y_max_ = 0.0, h_ = 0.0;
    std::vector<double> t_, d_;
};

struct ReducedFunctional {
    const Model& model;
    const ConstitutiveLaw& law;
    const SigmaInverseTable& inv;
    int N;             // intervals
    double p_end;      // sigma(1)
    double u_end;      // sigma(lam)
    std::vector<double> p_lo;          // interval left edges
    std::vector<double> gauss_p;       // 2 nodes per interval
    std::vector<double> gauss_fn1;     // f^{n-1}(sigma^{-1}(p)) at nodes
    std::vector<double> gauss_f;       // f(sigma^{-1}(p)) at nodes

    ReducedFunctional(const Model& m, const ConstitutiveLaw& l, const SigmaInverseTable& t,
                      int grid, double pe, double ue)
        : model(m), law(l), inv(t), N(grid), p_end(pe), u_end(ue) {
        const auto& J = model.jacobi;
        const int n = model.n;
        const double dp = p_end / N;
        const double g1 = 0.5 * (1.0 - 1.0 / std::sqrt(3.0));
        const double g2 = 0.5 * (1.0 + 1.0 / std::sqrt(3.0));
        for (int i = 0; i < N; ++i) {
            const double a = dp * i;
            p_lo.push_back(a);
            for (double g : {g1, g2}) {
                const double p = a + dp * g;
                const double rho = J.sigma_inverse(p);
                gauss_p.push_back(p);
                gauss_fn1.push_back(pow_int(J.f(rho), n - 1));
                gauss_f.push_back(J.f(rho));
            }
        }
    }

    // z in R^{N+1} -> softmax weights -> (u0, increments); returns J(u)
    double operator()(const std::vector<double>& z) const {
        const auto& J = model.jacobi;
        const int n = model.n;
        const double dp = p_end / N;
        double zmax = z[0];
        for (double v : z) zmax = std::max(zmax, v);
        double S = 0.0;
        for (double v : z) S += std::exp(v - zmax);
        double u = u_end * std::exp(z[0] - zmax) / S;  // u(0)
        double value = 0.0;
        for (int i = 0; i < N; ++i) {
            const double d = u_end * std::exp(z[i + 1] - zmax) / S;
            const double q = d / dp;
            for (int g = 0; g < 2; ++g) {
                const std::size_t idx = 2 * i + g;
                const double p = gauss_p[idx];
                const double ug = u + q * (p - p_lo[i]);
                const double rho_u = inv(ug);
                const double fu = J.f(rho_u);
                const double fn1u = pow_int(fu, n - 1);
                const double phip = gauss_fn1[idx] / fn1u * q;
                const double tau = fu / gauss_f[idx];
                value += 0.5 * dp *
                         (law.phi(phip) + (n - 1) * law.phi(tau) + law.h(q));
            }
            u += d;
        }
        return value;
    }
};

struct DescentResult {
    double value = 0.0;
    int iterations = 0;
    double grad_norm = 0.0;
    bool converged = false;
};

DescentResult lbfgs_minimize(const ReducedFunctional& fn, std::vector<double>& z,
                             int max_iter) {
    const std::size_t dim = z.size();
    auto gradient = [&](const std::vector<double>& x, std::vector<double>& g) {
        std::vector<double> xp = x;
        for (std::size_t j = 0; j < dim; ++j) {
            const double h = 1e-6 * (1.0 + std::abs(x[j]));
            const double x0 = x[j];
            xp[j] = x0 + h;
            const double fp = fn(xp);
            xp[j] = x0 - h;
            const double fm = fn(xp);
            xp[j] = x0;
            g[j] = (fp - fm) / (2.0 * h);
        }
    };

    const int m = 8;
    std::vector<std::vector<double>> s_hist, y_hist;
    std::vector<double> rho_hist;
    std::vector<double> g(dim), g_new(dim), dir(dim), z_new(dim);
    double f_val = fn(z);
    gradient(z, g);

    DescentResult res;
    for (int iter = 0; iter < max_iter; ++iter) {
        double gnorm = 0.0;
        for (double v : g) gnorm = std::max(gnorm, std::abs(v));
        res.iterations = iter;
        res.grad_norm = gnorm;
        res.value = f_val;
        if (gnorm <= std::max(1e-8, 1e-10 * std::abs(f_val))) {
            res.converged = true;
            return res;
        }

        // two-loop recursion
        dir = g;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t i = s_hist.size(); i-- > 0;) {
            double dot = 0.0;
            for (std::size_t j = 0; j < dim; ++j) dot += s_hist[i][j] * dir[j];
            alpha[i] = rho_hist[i] * dot;
            for (std::size_t j = 0; j < dim; ++j) dir[j] -= alpha[i] * y_hist[i][j];
        }
        if (!s_hist.empty()) {
            double sy = 0.0, yy = 0.0;
            const auto& sb = s_hist.back();
            const auto& yb = y_hist.back();
            for (std::size_t j = 0; j < dim; ++j) {
                sy += sb[j] * yb[j];
                yy += yb[j] * yb[j];
            }
            const double scale = (yy > 0.0) ? sy / yy : 1.0;
            for (auto& v : dir) v *= scale;
        }
        for (std::size_t i = 0; i < s_hist.size(); ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < dim; ++j) dot += y_hist[i][j] * dir[j];
            const double beta = rho_hist[i] * dot;
            for (std::size_t j = 0; j < dim; ++j)
                dir[j] += (alpha[i] - beta) * s_hist[i][j];
        }
        for (auto& v : dir) v = -v;

        double slope = 0.0;
        for (std::size_t j = 0; j < dim; ++j) slope += dir[j] * g[j];
        if (!(slope < 0.0)) {
            for (std::size_t j = 0; j < dim; ++j) dir[j] = -g[j];
            slope = -gnorm * gnorm;
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
        }

        // Armijo backtracking
        double step = 1.0;
        double f_new = f_val;
        bool ok = false;
        for (int ls = 0; ls < 48; ++ls) {
            for (std::size_t j = 0; j < dim; ++j) z_new[j] = z[j] + step * dir[j];
            f_new = fn(z_new);
            if (std::isfinite(f_new) && f_new <= f_val + 1e-4 * step * slope) {
                ok = true;
                break;
            }
            step *= 0.5;
        }
        if (!ok) {
            res.converged = false;
            return res;  // stalled; report the best iterate
        }
        gradient(z_new, g_new);

        std::vector<double> s_vec(dim), y_vec(dim);
        double sy = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            s_vec[j] = z_new[j] - z[j];
            y_vec[j] = g_new[j] - g[j];
            sy += s_vec[j] * y_vec[j];
        }
        if (sy > 1e-14) {
            s_hist.push_back(std::move(s_vec));
            y_hist.push_back(std::move(y_vec));
            rho_hist.push_back(1.0 / sy);
            if (static_cast<int>(s_hist.size()) > m) {
                s_hist.erase(s_hist.begin());
                y_hist.erase(y_hist.begin());
                rho_hist.erase(rho_hist.begin());
            }
        }
        z = z_new;
        g = g_new;
        f_val = f_new;
    }
    res.value = f_val;
    return res;
}

}  // namespace

MinimizerReport minimize_energy(const Model& model, const ConstitutiveLaw& law, double lam,
                                int grid_size, ShootOptions opt) {
    MinimizerReport rep;
    rep.lam = lam;

    EquilibriumSolution reg = solve_regular(model, law, lam, opt);
    rep.regular_energy = energy_of(model, law, reg);
    rep.regular_solution = reg;

    auto cav = solve_cavitating(model, law, lam, opt);
    if (cav) {
        rep.cavitating_energy = energy_of(model, law, *cav);
        rep.cavity_radius = cav->cavity_radius();
        rep.cavitating_solution = *cav;
    }

    // direct discretized minimization of the reduced functional
    const auto& J = model.jacobi;
    const double p_end = J.sigma(1.0);
    const double u_end = J.sigma(lam);
    SigmaInverseTable inv(J, J.sigma_max(), model.n);
    ReducedFunctional fn(model, law, inv, grid_size, p_end, u_end);

    const bool cav_better =
        cav && *rep.cavitating_energy < rep.regular_energy;
    auto u_of = [&](double p) {
        const double rho = J.sigma_inverse(p);
        return J.sigma(cav_better ? cav->phi(std::max(rho, cav->rho0()))
                                  : reg.phi(std::max(rho, reg.rho0())));
    };
    std::vector<double> z(grid_size + 1);
    {
        const double dp = p_end / grid_size;
        double prev = u_of(0.0);
        const double floor_w = 1e-12;
        z[0] = std::log(std::max(prev / u_end, floor_w));
        for (int i = 1; i <= grid_size; ++i) {
            const double cur = u_of(dp * i);
            z[i] = std::log(std::max((cur - prev) / u_end, floor_w));
            prev = cur;
        }
    }
    rep.direct_init_energy = fn(z);
    auto descent = lbfgs_minimize(fn, z, 400);
    rep.direct_min_energy = descent.value;
    rep.descent_iterations = descent.iterations;
    rep.descent_grad_norm = descent.grad_norm;
    rep.descent_converged = descent.converged;

    const double tol_e = 1e-9 * (1.0 + std::abs(rep.regular_energy));
    rep.verdict = (cav && *rep.cavitating_energy < rep.regular_energy - tol_e)
                      ? MinimizerReport::Verdict::cavitating
                      : MinimizerReport::Verdict::regular;
    return rep;
}

}  // namespace cavitate
