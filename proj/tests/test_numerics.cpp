#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cavitate/numerics/ode.hpp"
#include "cavitate/numerics/quadrature.hpp"
#include "cavitate/numerics/roots.hpp"

using namespace cavitate;

TEST_CASE("brent finds simple roots") {
    RootOptions opt;
    opt.x_tol = 1e-14;
    const double r1 = brent([](double x) { return std::cos(x); }, 1.0, 2.0, opt);
    CHECK(r1 == doctest::Approx(std::numbers::pi / 2).epsilon(1e-12));
    const double r2 = brent([](double x) { return x * x * x - 2.0; }, 0.0, 2.0, opt);
    CHECK(r2 == doctest::Approx(std::cbrt(2.0)).epsilon(1e-12));
    CHECK_THROWS_AS(brent([](double x) { return 1.0 + x * x; }, 0.0, 1.0, opt), SolverError);
}

TEST_CASE("newton_bisect matches the closed-form root") {
    RootOptions opt;
    opt.x_tol = 1e-14;
    auto f = [](double x) { return std::expm1(x) - 1.0; };
    auto df = [](double x) { return std::exp(x); };
    const double r = newton_bisect(f, df, 0.0, 2.0, opt);
    CHECK(r == doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("adaptive quadrature on smooth integrands") {
    QuadOptions q;
    q.abs_tol = 1e-12;
    q.rel_tol = 1e-12;
    CHECK(adaptive_simpson([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, q) ==
          doctest::Approx(2.0).epsilon(1e-11));
    CHECK(adaptive_gk([](double x) { return std::exp(-x * x); }, -6.0, 6.0, q) ==
          doctest::Approx(std::sqrt(std::numbers::pi)).epsilon(1e-11));
}

TEST_CASE("adaptive GK handles integrable endpoint singularities") {
    QuadOptions q;
    q.abs_tol = 1e-10;
    q.rel_tol = 1e-10;
    const double v = adaptive_gk([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, q);
    CHECK(v == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("tail integration: convergence and divergence trends") {
    QuadOptions q;
    q.abs_tol = 1e-10;
    q.rel_tol = 1e-10;
    const auto conv = integrate_tail([](double x) { return 1.0 / (x * x); }, 1.0, q);
    CHECK(conv.converged());
    CHECK(conv.value == doctest::Approx(1.0).epsilon(1e-9));

    const auto div = integrate_tail([](double x) { return 1.0 / x; }, 2.0, q);
    CHECK(div.trend == TailTrend::diverged);

    // slow decay that cannot converge within the cutoff budget must not be
    // reported as converged
    const auto slow = integrate_tail([](double x) { return std::pow(x, -1.02); }, 1.0, q);
    CHECK_FALSE(slow.converged());
}

TEST_CASE("Dormand-Prince dense output reproduces the harmonic oscillator") {
    OdeOptions opt;
    opt.rel_tol = 1e-10;
    opt.abs_tol = 1e-13;
    opt.h_max = 0.02;
    auto rhs = [](double, const std::array<double, 2>& y, std::array<double, 2>& dy) {
        dy[0] = y[1];
        dy[1] = -y[0];
    };
    const auto res = integrate_dense<2>(rhs, 0.0, 3.0, {0.0, 1.0}, opt);
    REQUIRE(res.status == OdeStatus::ok);
    double worst = 0.0;
    for (int i = 0; i <= 600; ++i) {
        const double t = 3.0 * i / 600;
        worst = std::max(worst, std::abs(res.solution.component(t, 0) - std::sin(t)));
        worst = std::max(worst, std::abs(res.solution.component(t, 1) - std::cos(t)));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("integrator guard stops runaway trajectories") {
    OdeOptions opt;
    auto rhs = [](double, const std::array<double, 1>& y, std::array<double, 1>& dy) {
        dy[0] = y[0] * y[0];  // blows up at t = 1
    };
    const auto res = integrate_dense<1>(
        rhs, 0.0, 2.0, {1.0}, opt,
        [](double, const std::array<double, 1>& y) { return y[0] < 1e6; });
    CHECK(res.status != OdeStatus::ok);
    CHECK(res.t_reached < 1.05);
}
