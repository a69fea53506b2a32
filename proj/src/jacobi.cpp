#include "cavitate/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cavitate/errors.hpp"
#include "cavitate/numerics/ode.hpp"
#include "cavitate/numerics/quadrature.hpp"
#include "cavitate/numerics/roots.hpp"

namespace cavitate {

namespace {

double pow_int(double x, int p) {
    double acc = 1.0;
    for (int i = 0; i < p; ++i) acc *= x;
    return acc;
}

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

Moments curvature_moments(const CurvatureProfile& curv, double lam, double tol) {
    Moments m;
    QuadOptions q;
    q.abs_tol = tol;
    q.rel_tol = tol;
    auto plus = [&curv](double s) { return s * std::max(curv(s), 0.0); };
    auto minus = [&curv](double s) { return s * std::max(-curv(s), 0.0); };

    const double hard_max = curv.t_max();
    if (std::isfinite(lam)) {
        if (lam < 0.0) throw std::invalid_argument("curvature_moments: lam must be >= 0");
        if (lam > hard_max * (1.0 + 1e-12))
            throw std::invalid_argument("curvature_moments: lam beyond the curvature domain");
        m.mu_plus = adaptive_gk(plus, 0.0, lam, q);
        m.mu_minus = adaptive_gk(minus, 0.0, lam, q);
        m.t_used = lam;
        return m;
    }

    // lam = infinity: doubling panels until both contributions vanish or the
    // domain / cutoff budget is exhausted; truncation is reported, never
    // silently extrapolated.
    double t_hi = 1.0;
    const double cutoff = std::isfinite(hard_max) ? hard_max : 1.0e9;
    m.mu_plus = adaptive_gk(plus, 0.0, std::min(t_hi, cutoff), q);
    m.mu_minus = adaptive_gk(minus, 0.0, std::min(t_hi, cutoff), q);
    m.t_used = std::min(t_hi, cutoff);
    int quiet = 0;
    while (m.t_used < cutoff) {
        const double t_next = std::min(2.0 * t_hi, cutoff);
        const double dp = adaptive_gk(plus, m.t_used, t_next, q);
        const double dm = adaptive_gk(minus, m.t_used, t_next, q);
        m.mu_plus += dp;
        m.mu_minus += dm;
        t_hi = t_next;
        m.t_used = t_next;
        if (std::abs(dp) + std::abs(dm) < 0.1 * tol) {
            if (++quiet >= 2) {
                m.truncated = false;
                return m;
            }
        } else {
            quiet = 0;
        }
    }
    m.truncated = true;
    return m;
}

// ---------------------------------------------------------------------------

struct JacobiField::Impl {
    int n = 3;
    double t_max = 0.0;
    CurvatureProfile curv = CurvatureProfile::zero();
    DenseSolution<3> sol;  // state (f, f', sigma)

    std::vector<double> t_nodes, f_nodes, fp_nodes, sig_nodes;

    // uniform cache for running extrema of f'
    double cache_h = 0.0;
    std::vector<double> prefix_min_fp, prefix_max_fp;

    double first_zero = kInf;
    double sigma_valid_end = 0.0;  // sigma is invertible on [0, sigma(..)]
    double t_valid_end = 0.0;
    std::size_t monotone_limit = 0;  // node count with t <= t_valid_end

    double f(double t) const { return sol.component(t, 0); }
    double fp(double t) const { return sol.component(t, 1); }

    // sigma evaluated as the exact Gauss-Legendre integral of the
    // f-interpolant from the last node: sigma' == f^{n-1} holds for the
    // dense output itself, so incompressibility identities are consistent
    // to machine precision everywhere (8 points integrate the piecewise
    // cubic f^{n-1} essentially exactly).
    double sg(double t) const {
        static constexpr double gl_x[4] = {0.1834346424956498, 0.5255324099163290,
                                           0.7966664774136267, 0.9602898564975363};
        static constexpr double gl_w[4] = {0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};
        const auto& nodes = sol.nodes();
        if (t <= 0.0) return 0.0;
        if (t >= nodes.back().t) return sig_at_node.back();
        const std::size_t idx = sol.locate(t);
        const double a = nodes[idx].t;
        const double mid = 0.5 * (a + t);
        const double half = 0.5 * (t - a);
        std::array<double, 3> y;
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) {
            const double dx = half * gl_x[k];
            sol.eval_piece(idx, mid + dx, y);
            const double fr = pow_int(y[0], n - 1);
            sol.eval_piece(idx, mid - dx, y);
            acc += gl_w[k] * (fr + pow_int(y[0], n - 1));
        }
        return sig_at_node[idx] + half * acc;
    }

    std::vector<double> sig_at_node;  // running integral of the f-interpolant
};

int JacobiField::dimension() const { return impl_->n; }
double JacobiField::t_max() const { return impl_->t_max; }
const CurvatureProfile& JacobiField::curvature() const { return impl_->curv; }
double JacobiField::f(double t) const { return impl_->f(t); }
double JacobiField::f_prime(double t) const { return impl_->fp(t); }
double JacobiField::sigma(double t) const { return impl_->sg(t); }
const std::vector<double>& JacobiField::grid() const { return impl_->t_nodes; }
const std::vector<double>& JacobiField::f_values() const { return impl_->f_nodes; }
const std::vector<double>& JacobiField::f_prime_values() const { return impl_->fp_nodes; }
const std::vector<double>& JacobiField::sigma_values() const { return impl_->sig_nodes; }
double JacobiField::first_f_zero() const { return impl_->first_zero; }
double JacobiField::sigma_max() const { return impl_->sigma_valid_end; }

double JacobiField::sigma_inverse(double s) const {
    const Impl& im = *impl_;
    if (s < -1e-15 || s > im.sigma_valid_end * (1.0 + 1e-12))
        throw SolverError("sigma_inverse: argument outside the range of sigma");
    if (s <= 0.0) return 0.0;
    s = std::min(s, im.sigma_valid_end);
    // bracket on the stored nodes (monotone part only), then Newton with
    // sigma' = f^{n-1}
    const auto begin = im.sig_nodes.begin();
    const auto end = begin + static_cast<std::ptrdiff_t>(im.monotone_limit);
    auto it = std::lower_bound(begin, end, s);
    std::size_t j = static_cast<std::size_t>(it - begin);
    double lo = (j == 0) ? 0.0 : im.t_nodes[j - 1];
    double hi = (j < im.monotone_limit) ? im.t_nodes[j] : im.t_valid_end;
    RootOptions opt;
    opt.x_tol = 1e-15 * (1.0 + hi);
    return newton_bisect([&im, s](double t) { return im.sg(t) - s; },
                         [&im](double t) { return pow_int(im.f(t), im.n - 1); }, lo, hi, opt);
}

double JacobiField::mu_plus(double lam) const {
    return curvature_moments(impl_->curv, lam).mu_plus;
}
double JacobiField::mu_minus(double lam) const {
    return curvature_moments(impl_->curv, lam).mu_minus;
}

std::pair<double, double> JacobiField::f_prime_range(double lam) const {
    const Impl& im = *impl_;
    lam = std::min(lam, im.t_max);
    double mn = 1.0, mx = 1.0;  // f'(0) = 1
    const std::size_t j = std::min(
        static_cast<std::size_t>(std::floor(lam / im.cache_h)), im.prefix_min_fp.size() - 1);
    mn = std::min(mn, im.prefix_min_fp[j]);
    mx = std::max(mx, im.prefix_max_fp[j]);
    // close the gap between the cache node and lam
    const double t0 = static_cast<double>(j) * im.cache_h;
    for (int k = 1; k <= 8; ++k) {
        const double t = t0 + (lam - t0) * k / 8.0;
        const double v = im.fp(t);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    return {mn, mx};
}

double JacobiField::b0(double rho) const { return f_prime_range(rho).first; }
double JacobiField::b1(double rho) const { return f_prime_range(rho).second; }

std::pair<double, double> f_bounds(const JacobiField& field, double lam) {
    const double mup = field.mu_plus(lam);
    if (mup > 1.0 + 1e-12)
        throw GateError("f_bounds: mu_plus(lam) > 1, comparison bounds unavailable");
    auto [mu0, mu1] = field.f_prime_range(lam);
    if (!(mu0 > 0.0)) throw SolverError("f_bounds: f' lost positivity (admissibility violated)");
    return {mu0, mu1};
}

JacobiField solve_jacobi(const CurvatureProfile& curv, int n, double t_max,
                         JacobiOptions opt) {
    if (n < 2) throw std::invalid_argument("solve_jacobi: dimension must be >= 2");
    if (!(t_max > 0.0)) throw std::invalid_argument("solve_jacobi: t_max must be positive");
    if (t_max > curv.t_max() * (1.0 + 1e-12))
        throw std::invalid_argument("solve_jacobi: t_max beyond the curvature domain");
    if (!(opt.rel_tol > 1e-14 && opt.rel_tol < 1e-4))
        throw std::invalid_argument("solve_jacobi: tol must lie in (1e-14, 1e-4)");
    if (!(t_max > 100.0 * opt.t_series))
        throw std::invalid_argument("solve_jacobi: t_max too small for the series start");

    auto impl = std::make_shared<JacobiField::Impl>();
    impl->n = n;
    impl->t_max = t_max;
    impl->curv = curv;

    const double k0 = curv(0.0);
    const double t0 = opt.t_series;
    // two-term series start, consistent with the Volterra expansion
    std::array<double, 3> y0;
    y0[0] = t0 - k0 * t0 * t0 * t0 / 6.0;
    y0[1] = 1.0 - k0 * t0 * t0 / 2.0;
    y0[2] = std::pow(t0, n) / n -
            (n - 1) * k0 * std::pow(t0, n + 2) / (6.0 * (n + 2));

    OdeOptions ode;
    ode.rel_tol = opt.rel_tol;
    ode.abs_tol = opt.abs_tol;
    ode.h_max = opt.h_max;
    auto rhs = [&curv, n](double t, const std::array<double, 3>& y, std::array<double, 3>& dy) {
        dy[0] = y[1];
        dy[1] = -curv(t) * y[0];
        dy[2] = pow_int(y[0], n - 1);
    };

    // integrate segment-wise, splitting where kappa is only C^0
    std::vector<double> stops;
    for (double b : curv.breakpoints())
        if (b > t0 && b < t_max) stops.push_back(b);
    stops.push_back(t_max);

    // exact origin node f(0)=0, f'(0)=1, sigma(0)=0, then the series start
    std::vector<DenseSolution<3>::Node> nodes;
    nodes.push_back({0.0, {0.0, 1.0, 0.0}, {1.0, 0.0, 0.0}});
    double t_from = t0;
    std::array<double, 3> y_from = y0;
    for (double t_to : stops) {
        auto res = integrate_dense<3>(rhs, t_from, t_to, y_from, ode);
        if (res.status != OdeStatus::ok)
            throw SolverError("solve_jacobi: integration failed (step underflow or budget)");
        for (const auto& nd : res.solution.nodes())
            if (nd.t > t_from || t_from == t0) nodes.push_back(nd);
        y_from = res.solution.back_state();
        t_from = t_to;
    }
    impl->sol = DenseSolution<3>(std::move(nodes));

    // running Gauss-Legendre integral of the f-interpolant: the sigma the
    // dense output reports, jump-free and derivative-consistent with f
    {
        const auto& nds = impl->sol.nodes();
        impl->sig_at_node.resize(nds.size());
        impl->sig_at_node[0] = 0.0;
        static constexpr double gl_x[4] = {0.1834346424956498, 0.5255324099163290,
                                           0.7966664774136267, 0.9602898564975363};
        static constexpr double gl_w[4] = {0.3626837833783620, 0.3137066458778873,
                                           0.2223810344533745, 0.1012285362903763};
        std::array<double, 3> y;
        for (std::size_t i = 0; i + 1 < nds.size(); ++i) {
            const double mid = 0.5 * (nds[i].t + nds[i + 1].t);
            const double half = 0.5 * (nds[i + 1].t - nds[i].t);
            double acc = 0.0;
            for (int k = 0; k < 4; ++k) {
                const double dx = half * gl_x[k];
                impl->sol.eval_piece(i, mid + dx, y);
                const double fr = pow_int(y[0], n - 1);
                impl->sol.eval_piece(i, mid - dx, y);
                acc += gl_w[k] * (fr + pow_int(y[0], n - 1));
            }
            impl->sig_at_node[i + 1] = impl->sig_at_node[i] + half * acc;
        }
    }

    for (std::size_t i = 0; i < impl->sol.nodes().size(); ++i) {
        const auto& nd = impl->sol.nodes()[i];
        impl->t_nodes.push_back(nd.t);
        impl->f_nodes.push_back(nd.y[0]);
        impl->fp_nodes.push_back(nd.y[1]);
        impl->sig_nodes.push_back(impl->sig_at_node[i]);
    }

    // first zero of f (conjugate point)
    impl->first_zero = kInf;
    for (std::size_t i = 1; i < impl->t_nodes.size(); ++i) {
        if (impl->f_nodes[i] <= 0.0 && impl->t_nodes[i] > 0.0) {
            double lo = impl->t_nodes[i - 1], hi = impl->t_nodes[i];
            RootOptions ro;
            ro.x_tol = 1e-12;
            impl->first_zero =
                (impl->f_nodes[i] == 0.0)
                    ? impl->t_nodes[i]
                    : brent([&](double t) { return impl->f(t); }, lo, hi, ro);
            break;
        }
    }
    impl->t_valid_end = std::min(t_max, impl->first_zero);
    impl->sigma_valid_end = impl->sg(impl->t_valid_end);
    impl->monotone_limit = impl->t_nodes.size();
    for (std::size_t i = 0; i < impl->t_nodes.size(); ++i) {
        if (impl->t_nodes[i] > impl->t_valid_end) {
            impl->monotone_limit = i;
            break;
        }
    }

    // admissibility consistency: mu_plus(t_max) <= 1 forces f, f' > 0
    const double mup = curvature_moments(curv, t_max).mu_plus;
    if (mup <= 1.0 + 1e-12) {
        for (std::size_t i = 1; i < impl->t_nodes.size(); ++i) {
            if (impl->f_nodes[i] <= 0.0 || impl->fp_nodes[i] <= 0.0)
                throw SolverError(
                    "solve_jacobi: sign loss of f or f' under mu_plus <= 1 "
                    "(internal inconsistency)");
        }
    }

    // uniform cache of running extrema of f'
    const std::size_t m = 8192;
    impl->cache_h = t_max / static_cast<double>(m);
    impl->prefix_min_fp.resize(m + 1);
    impl->prefix_max_fp.resize(m + 1);
    double mn = 1.0, mx = 1.0;
    for (std::size_t j = 0; j <= m; ++j) {
        const double t = std::min(t_max, static_cast<double>(j) * impl->cache_h);
        const double v = impl->fp(t);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        impl->prefix_min_fp[j] = mn;
        impl->prefix_max_fp[j] = mx;
    }

    return JacobiField(std::move(impl));
}

}  // namespace cavitate
