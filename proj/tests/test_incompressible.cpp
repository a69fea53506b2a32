#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cavitate/incompressible.hpp"
#include "cavitate/numerics/quadrature.hpp"

using namespace cavitate;

namespace {

ConstitutiveLaw reference_law_n3() {
    return ConstitutiveLaw::power_law(3, {1.0, 0.0, 2.0, 0.0, 2.0});
}

// law with phi constant: Phi_hat' vanishes identically
ConstitutiveLaw flat_phi_hat_law(int n) {
    return ConstitutiveLaw::custom(
        n, [](double) { return 1.0; }, [](double) { return 0.0; },
        [](double) { return 0.0; }, [](double d) { return (d - 1.0) * (d - 1.0); },
        [](double d) { return 2.0 * (d - 1.0); }, [](double) { return 2.0; });
}

// n = 2, phi(v) = v: Phi_hat'(tau) = (tau^2 - 1)/tau^2 exactly
ConstitutiveLaw linear_phi_law_n2() {
    return ConstitutiveLaw::custom(
        2, [](double v) { return v; }, [](double) { return 1.0; },
        [](double) { return 0.0; }, [](double d) { return (d - 1.0) * (d - 1.0); },
        [](double d) { return 2.0 * (d - 1.0); }, [](double) { return 2.0; });
}

}  // namespace

TEST_CASE("unit sphere areas") {
    CHECK(unit_sphere_area(2) == doctest::Approx(2 * std::numbers::pi).epsilon(1e-14));
    CHECK(unit_sphere_area(3) == doctest::Approx(4 * std::numbers::pi).epsilon(1e-14));
    CHECK(unit_sphere_area(4) ==
          doctest::Approx(2 * std::numbers::pi * std::numbers::pi).epsilon(1e-14));
}

TEST_CASE("incompressible deformation: identity at A = 0") {
    const auto model = make_model(CurvatureProfile::zero(), 3, 8.0);
    const auto sol = incompressible_deformation(model, 0.0);
    for (double rho : {0.1, 0.5, 1.0}) {
        CHECK(sol.phi(rho) == rho);
        CHECK(sol.phi_prime(rho) == 1.0);
        CHECK(sol.tau(rho) == 1.0);
    }
}

TEST_CASE("incompressible deformation: Euclidean closed form") {
    const auto model = make_model(CurvatureProfile::zero(), 3, 8.0);
    const auto sol = incompressible_deformation(model, 1.0);
    CHECK(sol.boundary_stretch() == doctest::Approx(std::cbrt(2.0)).epsilon(1e-10));
    for (double rho : {0.05, 0.3, 0.8, 1.0}) {
        const double expected = std::cbrt(rho * rho * rho + 1.0);
        CHECK(sol.phi(rho) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("incompressible deformation: spherical model closed form") {
    // kappa = 1, n = 2: sigma(t) = 1 - cos t, phi = arccos(cos rho + cos A - 1)
    const auto model = make_model(CurvatureProfile::constant(1.0), 2, 3.0);
    const double A = 0.5;
    const auto sol = incompressible_deformation(model, A);
    for (double rho : {0.2, 0.6, 1.0}) {
        const double expected = std::acos(std::cos(rho) + std::cos(A) - 1.0);
        CHECK(sol.phi(rho) == doctest::Approx(expected).epsilon(1e-9));
    }
    // boundary stretch against an independent bisection on the closed form
    const double target = (1.0 - std::cos(1.0)) + (1.0 - std::cos(A));
    double lo = 1.0, hi = 2.0;
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        ((1.0 - std::cos(mid)) < target ? lo : hi) = mid;
    }
    CHECK(sol.boundary_stretch() == doctest::Approx(0.5 * (lo + hi)).epsilon(1e-9));
}

TEST_CASE("gates: mu_plus beyond 1 is rejected") {
    const auto model = make_model(CurvatureProfile::constant(1.0), 2, 3.0);
    // mu_plus(phi(1)) = phi(1)^2/2 > 1 once phi(1) > sqrt(2)
    CHECK_THROWS_AS(incompressible_deformation(model, 1.2), GateError);
    // sigma range exhausted (conjugate point at pi)
    CHECK_THROWS_AS(make_model_for_sigma(CurvatureProfile::constant(1.0), 2, 10.0),
                    GateError);
}

TEST_CASE("incompressibility residual via finite differences of phi") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> uk(-1.0, 0.6);
    std::uniform_real_distribution<double> uA(0.05, 0.9);
    int done = 0;
    while (done < 10) {
        const double kappa = uk(rng);
        const double A = uA(rng);
        const auto curv = CurvatureProfile::constant(kappa);
        Model model = make_model(curv, 3, 4.0);
        if (model.jacobi.sigma(1.0) + model.jacobi.sigma(A) > model.jacobi.sigma_max())
            continue;
        IncompressibleSolution sol(model, A, {});
        if (!sol.gates().pass) continue;
        ++done;
        const auto& J = model.jacobi;
        const int n = model.n;
        for (double rho : {0.05, 0.2, 0.5, 0.9}) {
            // Richardson-extrapolated central difference of phi
            const double h = 5e-3 * std::max(rho, 0.1);
            const auto diff = [&](double step) {
                return (sol.phi(rho + step) - sol.phi(rho - step)) / (2.0 * step);
            };
            const double fd = (4.0 * diff(0.5 * h) - diff(h)) / 3.0;
            const double fn1 = std::pow(J.f(rho), n - 1);
            const double res =
                std::abs(fd * std::pow(J.f(sol.phi(rho)), n - 1) - fn1) / fn1;
            CHECK(res <= 1e-8);
        }
    }
}

TEST_CASE("admissibility criterion: flat, convergent, divergent") {
    // Phi_hat' = 0: integral 0, converged
    const auto flat = admissibility_42(flat_phi_hat_law(3));
    CHECK(flat.converged);
    CHECK(flat.value == doctest::Approx(0.0));

    // built-in family with alpha < n: convergent tail
    const auto fam = admissibility_42(ConstitutiveLaw::power_law(3, {1.0, 0.1, 2.0, 0.5, 2.0}));
    CHECK(fam.converged);

    // phi' ~ v^{n-1} keeps the integrand ~ tau^{-2}: still convergent
    const auto cubic = ConstitutiveLaw::custom(
        3, [](double v) { return v * v * v / 3.0; }, [](double v) { return v * v; },
        [](double v) { return 2.0 * v; }, [](double d) { return (d - 1.0) * (d - 1.0); },
        [](double d) { return 2.0 * (d - 1.0); }, [](double) { return 2.0; });
    CHECK(admissibility_42(cubic).converged);

    // phi' ~ v^5 pushes the integrand to ~ 1/tau: divergent
    const auto sext = ConstitutiveLaw::custom(
        3, [](double v) { return std::pow(v, 6) / 6.0; },
        [](double v) { return std::pow(v, 5); }, [](double v) { return 5.0 * std::pow(v, 4); },
        [](double d) { return (d - 1.0) * (d - 1.0); },
        [](double d) { return 2.0 * (d - 1.0); }, [](double) { return 2.0; });
    CHECK_FALSE(admissibility_42(sext).converged);
}

TEST_CASE("P_cr closed forms") {
    // Phi_hat'(tau) = (tau^2 - 1)/tau^2: P_cr = int_1^inf tau^-2 = 1
    CHECK(pcr(linear_phi_law_n2()) == doctest::Approx(1.0).epsilon(1e-8));
    // Phi_hat' = 0: P_cr = 0
    CHECK(pcr(flat_phi_hat_law(3)) == doctest::Approx(0.0));
}

TEST_CASE("P_cr against a brute-force panel oracle") {
    // n = 2, mu = 1, nu = 0, alpha = 1.5
    const auto law = ConstitutiveLaw::power_law(2, {1.0, 0.0, 1.5, 0.0, 2.0});
    // oracle: tau = 1/w^2 maps (1, inf) to (0, 1); midpoint-composite rule
    // with 2^20 panels avoids both endpoints
    auto g = [&law](double tau) { return law.phi_hat_prime_over_taun1(tau); };
    auto integrand = [&](double w) {
        const double tau = 1.0 / (w * w);
        return g(tau) * 2.0 / (w * w * w);
    };
    const int panels = 1 << 20;
    const double h = 1.0 / panels;
    double mid_sum = 0.0;
    for (int i = 0; i < panels; ++i) mid_sum += integrand((i + 0.5) * h);
    const double oracle = mid_sum * h;
    CHECK(pcr(law, 1e-10) == doctest::Approx(oracle).epsilon(1e-7));
}

TEST_CASE("chi: flat law gives zero") {
    const auto model = make_model(CurvatureProfile::zero(), 3, 8.0);
    const auto law = flat_phi_hat_law(3);
    for (double A : {0.1, 0.7}) {
        CHECK(chi(model, law, A) == doctest::Approx(0.0));
    }
}

TEST_CASE("chi: split route agrees with the direct-quadrature oracle") {
    const auto model = make_model(CurvatureProfile::zero(), 3, 10.0);
    const auto law = reference_law_n3();
    for (double A : {0.1, 0.5, 1.0}) {
        ChiOptions split;
        split.tol = 1e-10;
        ChiOptions direct;
        direct.tol = 1e-10;
        direct.force_direct = true;
        const double a = chi(model, law, A, split);
        const double b = chi(model, law, A, direct);
        CHECK(a == doctest::Approx(b).epsilon(1e-7));
    }
}

TEST_CASE("chi is invariant under halving the split point") {
    const auto model = make_model(CurvatureProfile::zero(), 3, 10.0);
    const auto law = reference_law_n3();
    ChiOptions o1;
    o1.tol = 1e-10;
    o1.rho0_override = 0.08;
    ChiOptions o2 = o1;
    o2.rho0_override = 0.04;
    const double c1 = chi(model, law, 0.4, o1);
    const double c2 = chi(model, law, 0.4, o2);
    CHECK(c1 == doctest::Approx(c2).epsilon(1e-8));
}

TEST_CASE("chi approaches P_cr as the cavity closes") {
    const auto model = make_model(CurvatureProfile::zero(), 3, 8.0);
    const auto law = reference_law_n3();
    const double p = pcr(law, 1e-10);
    const double c = chi(model, law, 1e-3, 1e-9);
    CHECK(std::abs(c - p) <= 1e-3 * (1.0 + std::abs(p)));
}

TEST_CASE("T(0) = 0 and P = chi(A) are equivalent at random cavity radii") {
    const auto model = make_model(CurvatureProfile::zero(), 3, 8.0);
    const auto law = reference_law_n3();
    std::mt19937 rng(424242);
    std::uniform_real_distribution<double> uA(0.05, 1.2);
    for (int i = 0; i < 10; ++i) {
        const double A = uA(rng);
        const double P = chi(model, law, A, 1e-10);
        const auto sol = incompressible_deformation(model, A, P);
        const auto T = cauchy_stress_T(model, law, sol, P);
        CHECK(std::abs(T(0.0)) <= 1e-8 * (1.0 + std::abs(P)));
        // and off the curve the cavity stress is genuinely nonzero
        const auto T_off = cauchy_stress_T(model, law, sol, P + 0.5);
        CHECK(std::abs(T_off(0.0)) > 1e-3);
    }
}

TEST_CASE("Cauchy stress: construction identity and monotonicity") {
    const auto model = make_model(CurvatureProfile::zero(), 3, 8.0);
    const auto law = reference_law_n3();
    REQUIRE(baker_ericksen(law).ok);
    for (double A : {0.2, 0.6}) {
        const double P = chi(model, law, A, 1e-10);
        const auto sol = incompressible_deformation(model, A, P);
        const auto T = cauchy_stress_T(model, law, sol, P);
        // limit identity T(0+) = (P - chi)/tau^{n-1}(1) = 0 at P = chi(A);
        // T vanishes only linearly in rho, so extrapolate from small rho
        CHECK(std::abs(T(0.0)) <= 1e-6);
        CHECK(std::abs(2.0 * T(1e-4) - T(2e-4)) <= 1e-6);
        // Baker-Ericksen: T nondecreasing in rho
        double prev = T(1e-3);
        for (int i = 1; i <= 24; ++i) {
            const double rho = 1e-3 + (1.0 - 1e-3) * i / 24;
            const double cur = T(rho);
            CHECK(cur >= prev - 1e-10);
            prev = cur;
        }
        CHECK(T(1.0) == doctest::Approx(P / std::pow(sol.tau(1.0), 2)).epsilon(1e-10));
    }
}

TEST_CASE("Cauchy stress with a flat law is constant") {
    const auto model = make_model(CurvatureProfile::zero(), 3, 8.0);
    const auto law = flat_phi_hat_law(3);
    const auto sol = incompressible_deformation(model, 0.5, 0.7);
    const auto T = cauchy_stress_T(model, law, sol, 0.7);
    const double expected = 0.7 / std::pow(sol.tau(1.0), 2);
    for (double rho : {0.01, 0.3, 1.0}) {
        CHECK(T(rho) == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("energy: I(0) closed form and A-independence for constant Phi") {
    const auto model = make_model(CurvatureProfile::zero(), 3, 8.0);
    const auto law = reference_law_n3();
    const double P = 0.8;
    const double omega = unit_sphere_area(3);
    const std::vector<double> ones(3, 1.0);
    const double expected = omega * (law.Phi(ones) / 3.0 - P);
    CHECK(energy_I(model, law, 0.0, P) == doctest::Approx(expected).epsilon(1e-10));

    // constant Phi: E(A) = omega sigma(1) c for every A
    const auto flat = flat_phi_hat_law(3);
    const double c0 = 3.0 * 1.0 + flat.h(1.0);  // phi == 1, h(1) = 0
    for (double A : {0.0, 0.3, 0.8}) {
        CHECK(energy_E(model, flat, A) ==
              doctest::Approx(omega * model.jacobi.sigma(1.0) * c0).epsilon(1e-9));
    }
}

TEST_CASE("energy derivative identity I'(A) = omega f^{n-1}(A) tau^{1-n}(1) [chi - P]") {
    const auto law = reference_law_n3();
    const double P = 0.3;
    const CurvatureProfile profiles[] = {
        CurvatureProfile::zero(),
        curvature_of_revolution(RevolutionSurface::log_profile(0.5, 60.0)),
    };
    for (const auto& curv : profiles) {
        const auto model = make_model(curv, 3, 8.0);
        for (double A : {0.2, 0.5}) {
            const double h = 1e-3;
            const double dI =
                (energy_I(model, law, A + h, P, 1e-10) - energy_I(model, law, A - h, P, 1e-10)) /
                (2.0 * h);
            const auto sol = incompressible_deformation(model, A);
            const double formula = unit_sphere_area(3) *
                                   std::pow(model.jacobi.f(A), 2) *
                                   std::pow(sol.tau(1.0), -2) *
                                   (chi(model, law, A, 1e-10) - P);
            CHECK(dI == doctest::Approx(formula).epsilon(1e-4));
        }
    }
}

TEST_CASE("bifurcation diagram: flat law") {
    const auto model = make_model(CurvatureProfile::zero(), 3, 8.0);
    const auto d = bifurcation_diagram(model, flat_phi_hat_law(3), {0.01, 0.1, 0.5}, 0.0);
    CHECK(d.P_cr == doctest::Approx(0.0));
    for (double c : d.chi_values) CHECK(c == doctest::Approx(0.0));
}

TEST_CASE("bifurcation diagram: slope vanishes toward A = 0 in flat space") {
    const auto model = make_model(CurvatureProfile::zero(), 3, 8.0);
    const auto law = reference_law_n3();
    const auto d =
        bifurcation_diagram(model, law, {1e-3, 2e-3, 1e-2, 2e-2, 1e-1}, 0.0, 1e-9);
    REQUIRE(d.chi_prime_est.size() >= 4);
    const double slope_small = std::abs(d.chi_prime_est[0]);  // near 1.5e-3
    const double slope_mid = std::abs(d.chi_prime_est[2]);    // near 1.5e-2
    CHECK(slope_small <= 0.2 * slope_mid);  // chi' ~ c A in the flat-core regime
    CHECK(d.gap_monotone);
    CHECK(std::abs(d.kappa_at_0) <= 1e-14);
    REQUIRE(d.flat_core_criterion.has_value());
    // kappa == 0 everywhere: criterion reduces to P_cr - Phi_hat''(1)/(n(n-1))
    CHECK(*d.flat_core_criterion ==
          doctest::Approx(d.P_cr - law.phi_hat_pp1() / 6.0).epsilon(1e-8));
}

TEST_CASE("bifurcation diagram: negative curvature near 0 pushes chi' positive") {
    const auto model = make_model(CurvatureProfile::constant(-0.5), 3, 8.0);
    const auto law = reference_law_n3();
    REQUIRE(baker_ericksen(law).ok);
    const auto d = bifurcation_diagram(model, law, {5e-4, 1e-3, 2e-3, 4e-3}, 0.0, 1e-10);
    CHECK(d.kappa_at_0 == doctest::Approx(-0.5));
    CHECK(d.predicted_sign == +1);
    for (double s : d.chi_prime_est) CHECK(s > 0.0);
}

TEST_CASE("bifurcation diagram finds the probe root") {
    const auto model = make_model(CurvatureProfile::zero(), 3, 8.0);
    const auto law = reference_law_n3();
    const auto d = bifurcation_diagram(model, law, {0.05, 0.2, 0.5, 1.0}, 0.0, 1e-9);
    const double probe = 0.5 * (d.chi_values.front() + d.chi_values.back());
    const auto d2 = bifurcation_diagram(model, law, d.A_grid, probe, 1e-9);
    REQUIRE_FALSE(d2.probe_roots.empty());
    const double root = d2.probe_roots.front();
    CHECK(chi(model, law, root, 1e-9) == doctest::Approx(probe).epsilon(1e-6));
}

TEST_CASE("energy and stress limits diverge together (finiteness equivalence)") {
    // the built-in family keeps both finite; the sextic phi breaks both
    const auto model = make_model(CurvatureProfile::zero(), 3, 8.0);
    const auto good = reference_law_n3();
    CHECK(std::isfinite(energy_E(model, good, 0.5)));
    CHECK(admissibility_42(good).converged);

    const auto sext = ConstitutiveLaw::custom(
        3, [](double v) { return std::pow(v, 6) / 6.0; },
        [](double v) { return std::pow(v, 5); }, [](double v) { return 5.0 * std::pow(v, 4); },
        [](double d) { return (d - 1.0) * (d - 1.0); },
        [](double d) { return 2.0 * (d - 1.0); }, [](double) { return 2.0; });
    CHECK_FALSE(admissibility_42(sext).converged);
    CHECK_THROWS_AS(energy_E(model, sext, 0.5), SolverError);
}
