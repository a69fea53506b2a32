#include "cavitate/curvature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

#include "cavitate/errors.hpp"
#include "cavitate/numerics/quadrature.hpp"
#include "cavitate/numerics/roots.hpp"

namespace cavitate {

namespace {

double square(double x) { return x * x; }

}  // namespace

RevolutionSurface::RevolutionSurface(Fn psi, Fn dpsi, Fn d2psi, double r_max,
                                     Fn dpsi_over_r)
    : psi_(std::move(psi)),
      dpsi_(std::move(dpsi)),
      d2psi_(std::move(d2psi)),
      dpsi_over_r_(std::move(dpsi_over_r)),
      r_max_(r_max) {
    if (!(r_max_ > 0.0)) throw std::invalid_argument("RevolutionSurface: r_max must be positive");
    if (std::abs(dpsi_(0.0)) > 1e-10)
        throw std::invalid_argument("RevolutionSurface: psi'(0) must vanish");
    for (double r : {0.0, 0.5 * r_max_, r_max_}) {
        if (!std::isfinite(psi_(r)) || !std::isfinite(dpsi_(r)) || !std::isfinite(d2psi_(r)))
            throw std::invalid_argument("RevolutionSurface: psi evaluators not finite on domain");
    }
}

double RevolutionSurface::dpsi_over_r(double r) const {
    if (dpsi_over_r_) return dpsi_over_r_(r);
    if (r < 1e-7) return d2psi_(0.0);
    return dpsi_(r) / r;
}

RevolutionSurface RevolutionSurface::log_profile(double a, double r_max) {
    return RevolutionSurface(
        [a](double s) { return a * std::log1p(s * s); },
        [a](double s) { return 2.0 * a * s / (1.0 + s * s); },
        [a](double s) { return 2.0 * a * (1.0 - s * s) / square(1.0 + s * s); }, r_max,
        [a](double s) { return 2.0 * a / (1.0 + s * s); });
}

RevolutionSurface RevolutionSurface::polynomial(std::vector<double> coeffs, double r_max) {
    if (coeffs.size() > 1 && std::abs(coeffs[1]) > 1e-12)
        throw std::invalid_argument("RevolutionSurface::polynomial: linear term breaks psi'(0)=0");
    auto horner = [](const std::vector<double>& c, double s, int start) {
        double acc = 0.0;
        for (std::size_t i = c.size(); i-- > static_cast<std::size_t>(start);) {
            double term = c[i];
            for (int k = 0; k < start; ++k) term *= static_cast<double>(i - k);
            acc = acc * s + term;
        }
        return acc;
    };
    auto c = coeffs;
    return RevolutionSurface(
        [c, horner](double s) { return horner(c, s, 0); },
        [c, horner](double s) { return horner(c, s, 1); },
        [c, horner](double s) { return horner(c, s, 2); }, r_max,
        [c](double s) {
            // psi'(s)/s = sum_{i>=2} i c_i s^{i-2}
            double acc = 0.0;
            for (std::size_t i = c.size(); i-- > 2;)
                acc = acc * s + static_cast<double>(i) * c[i];
            return acc;
        });
}

RevolutionSurface RevolutionSurface::flat(double r_max) {
    return RevolutionSurface([](double) { return 0.0; }, [](double) { return 0.0; },
                             [](double) { return 0.0; }, r_max,
                             [](double) { return 0.0; });
}

double arclength_of_radius(const RevolutionSurface& surface, double r) {
    QuadOptions q;
    q.abs_tol = 1e-10;
    q.rel_tol = 1e-12;
    return adaptive_simpson(
        [&surface](double s) { return std::sqrt(1.0 + square(surface.dpsi(s))); }, 0.0, r, q);
}

double zeta(const RevolutionSurface& surface, double t, double tol) {
    if (t < 0.0) throw std::invalid_argument("zeta: t must be nonnegative");
    if (t == 0.0) return 0.0;
    // integrand >= 1, hence zeta(t) <= t: [0, t] brackets the root
    auto speed = [&surface](double z) { return std::sqrt(1.0 + square(surface.dpsi(z))); };
    QuadOptions q;
    q.abs_tol = 1e-10;
    q.rel_tol = 1e-12;
    auto residual = [&](double z) { return adaptive_simpson(speed, 0.0, z, q) - t; };
    RootOptions ropt;
    ropt.x_tol = tol;
    ropt.max_iter = 300;
    double z = newton_bisect(residual, speed, 0.0, t, ropt);
    if (!(z >= 0.0 && z <= t))
        throw SolverError("zeta: root-find failed (bad psi derivatives or t beyond domain?)");
    return z;
}

// ---------------------------------------------------------------------------
// CurvatureProfile

struct CurvatureProfile::Impl {
    Kind kind = Kind::zero;
    double t_max = std::numeric_limits<double>::infinity();
    double value = 0.0;                   // constant
    std::vector<double> ts, ks;           // tabulated
    std::function<double(double)> fn;     // prescribed

    // revolution: Hermite table of zeta(t) over [0, t_max]
    std::optional<RevolutionSurface> surface;
    double dt = 0.0;
    std::vector<double> zeta_nodes, zeta_deriv;

    mutable std::atomic<bool> extrapolated{false};

    double zeta_at(double t) const {
        const std::size_t m = zeta_nodes.size() - 1;
        double u = t / dt;
        std::size_t i = std::min(static_cast<std::size_t>(std::max(u, 0.0)), m - 1);
        const double s = u - static_cast<double>(i);
        const double s2 = s * s, s3 = s2 * s;
        return (2 * s3 - 3 * s2 + 1) * zeta_nodes[i] + (s3 - 2 * s2 + s) * dt * zeta_deriv[i] +
               (-2 * s3 + 3 * s2) * zeta_nodes[i + 1] + (s3 - s2) * dt * zeta_deriv[i + 1];
    }

    double eval(double t) const {
        switch (kind) {
            case Kind::zero:
                return 0.0;
            case Kind::constant:
                return value;
            case Kind::prescribed:
                return fn(t);
            case Kind::tabulated: {
                if (t >= ts.back()) {
                    if (t > ts.back()) extrapolated.store(true, std::memory_order_relaxed);
                    return ks.back();
                }
                auto it = std::upper_bound(ts.begin(), ts.end(), t);
                const std::size_t j = static_cast<std::size_t>(it - ts.begin());
                if (j == 0) return ks.front();
                const double w = (t - ts[j - 1]) / (ts[j] - ts[j - 1]);
                return ks[j - 1] + w * (ks[j] - ks[j - 1]);
            }
            case Kind::revolution: {
                if (t > t_max * (1.0 + 1e-12))
                    throw SolverError("curvature: t beyond the revolution-surface domain");
                const double z = zeta_at(std::min(t, t_max));
                const double ps = surface->dpsi(z);
                return surface->dpsi_over_r(z) * surface->d2psi(z) / square(1.0 + ps * ps);
            }
        }
        return 0.0;
    }
};

double CurvatureProfile::operator()(double t) const { return impl_->eval(t); }
CurvatureProfile::Kind CurvatureProfile::kind() const { return impl_->kind; }
double CurvatureProfile::t_max() const { return impl_->t_max; }
bool CurvatureProfile::extrapolation_seen() const {
    return impl_->extrapolated.load(std::memory_order_relaxed);
}
std::vector<double> CurvatureProfile::breakpoints() const {
    if (impl_->kind != Kind::tabulated) return {};
    return std::vector<double>(impl_->ts.begin() + 1, impl_->ts.end());
}

CurvatureProfile CurvatureProfile::constant(double value, double t_max) {
    auto impl = std::make_shared<Impl>();
    impl->kind = (value == 0.0) ? Kind::zero : Kind::constant;
    impl->value = value;
    impl->t_max = t_max;
    return CurvatureProfile(std::move(impl));
}

CurvatureProfile CurvatureProfile::zero(double t_max) { return constant(0.0, t_max); }

CurvatureProfile CurvatureProfile::tabulated(std::vector<double> t, std::vector<double> kappa) {
    if (t.size() != kappa.size() || t.empty())
        throw std::invalid_argument("tabulated curvature: size mismatch or empty table");
    if (t.front() != 0.0)
        throw std::invalid_argument("tabulated curvature: abscissae must start at 0");
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i] > t[i - 1]))
            throw std::invalid_argument("tabulated curvature: abscissae must strictly increase");
    for (double k : kappa)
        if (!std::isfinite(k))
            throw std::invalid_argument("tabulated curvature: non-finite sample");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::tabulated;
    impl->ts = std::move(t);
    impl->ks = std::move(kappa);
    impl->t_max = std::numeric_limits<double>::infinity();  // constant extrapolation, flagged
    return CurvatureProfile(std::move(impl));
}

CurvatureProfile CurvatureProfile::prescribed(std::function<double(double)> kappa,
                                              double t_max) {
    if (!kappa) throw std::invalid_argument("prescribed curvature: null evaluator");
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::prescribed;
    impl->fn = std::move(kappa);
    impl->t_max = t_max;
    return CurvatureProfile(std::move(impl));
}

CurvatureProfile CurvatureProfile::revolution(const RevolutionSurface& surface) {
    auto impl = std::make_shared<Impl>();
    impl->kind = Kind::revolution;
    impl->surface = surface;
    impl->t_max = arclength_of_radius(surface, surface.r_max());

    // Incremental zeta table: each node refines the previous one by a
    // bracketed Newton step on the local arclength increment.
    const double target_dt = 0.02;
    const std::size_t m =
        std::max<std::size_t>(64, static_cast<std::size_t>(std::ceil(impl->t_max / target_dt)));
    impl->dt = impl->t_max / static_cast<double>(m);
    impl->zeta_nodes.resize(m + 1);
    impl->zeta_deriv.resize(m + 1);
    impl->zeta_nodes[0] = 0.0;
    impl->zeta_deriv[0] = 1.0;  // psi'(0) = 0
    auto speed = [&surface](double z) { return std::sqrt(1.0 + square(surface.dpsi(z))); };
    QuadOptions q;
    q.abs_tol = 1e-13;
    q.rel_tol = 1e-12;
    for (std::size_t j = 1; j <= m; ++j) {
        const double z_prev = impl->zeta_nodes[j - 1];
        auto residual = [&](double z) {
            return adaptive_simpson(speed, z_prev, z, q) - impl->dt;
        };
        RootOptions ropt;
        ropt.x_tol = 1e-13;
        const double hi = z_prev + impl->dt * (1.0 + 1e-12);
        const double z = (residual(hi) <= 0.0) ? hi : newton_bisect(residual, speed, z_prev, hi, ropt);
        impl->zeta_nodes[j] = z;
        impl->zeta_deriv[j] = 1.0 / speed(z);
    }
    return CurvatureProfile(std::move(impl));
}

CurvatureProfile curvature_of_revolution(const RevolutionSurface& surface) {
    return CurvatureProfile::revolution(surface);
}

}  // namespace cavitate
