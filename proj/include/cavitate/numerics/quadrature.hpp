#pragma once

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "cavitate/errors.hpp"

namespace cavitate {

struct QuadOptions {
    double abs_tol = 1e-10;
    double rel_tol = 1e-10;
    int max_depth = 60;
};

namespace detail {

template <class F>
double simpson_rec(F& f, double a, double m, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth, int max_depth) {
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double h6 = (b - a) / 12.0;
    const double left = h6 * (fa + 4.0 * flm + fm);
    const double right = h6 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth >= max_depth || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth + 1, max_depth) +
           simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth + 1, max_depth);
}

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
inline constexpr double gk_nodes[8] = {
    0.000000000000000, 0.405845151377397, 0.741531185599394, 0.949107912342759,
    0.207784955007898, 0.586087235467691, 0.864864423359769, 0.991455371120813};
inline constexpr double gk_gauss_w[8] = {
    0.417959183673469, 0.381830050505119, 0.279705391489277, 0.129484966168870,
    0.0, 0.0, 0.0, 0.0};
inline constexpr double gk_kronrod_w[8] = {
    0.209482141084728, 0.190350578064785, 0.140653259715525, 0.063092092629979,
    0.204432940075298, 0.169004726639267, 0.104790010322250, 0.022935322010529};

template <class F>
double gk15_panel(F& f, double a, double b, double& err) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f0 = f(mid);
    double g = gk_gauss_w[0] * f0;
    double k = gk_kronrod_w[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = half * gk_nodes[i];
        const double s = f(mid + dx) + f(mid - dx);
        g += gk_gauss_w[i] * s;
        k += gk_kronrod_w[i] * s;
    }
    g *= half;
    k *= half;
    err = std::pow(200.0 * std::abs(g - k), 1.5);
    return k;
}

}  // namespace detail

/// Adaptive Simpson with Richardson correction.
template <class F>
double adaptive_simpson(F&& f, double a, double b, QuadOptions opt = {}) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(whole));
    return detail::simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, 0, opt.max_depth);
}

/// Adaptive Gauss-Kronrod (G7/K15) with an explicit interval stack.
/// Tolerates mild integrable endpoint singularities.
template <class F>
double adaptive_gk(F&& f, double a, double b, QuadOptions opt = {}) {
    if (a == b) return 0.0;
    struct Seg { double a, b, value, err; };
    std::vector<Seg> segs;
    double err0;
    const double v0 = detail::gk15_panel(f, a, b, err0);
    if (!std::isfinite(v0)) throw SolverError("adaptive_gk: non-finite integrand");
    segs.push_back({a, b, v0, err0});
    double total = v0;
    double total_err = err0;
    const int max_segs = 4000;
    while (total_err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
        // split the worst segment
        std::size_t worst = 0;
        for (std::size_t i = 1; i < segs.size(); ++i)
            if (segs[i].err > segs[worst].err) worst = i;
        const Seg s = segs[worst];
        const double mid = 0.5 * (s.a + s.b);
        if (mid <= s.a || mid >= s.b)
            break;  // interval exhausted at machine precision
        double el, er;
        const double vl = detail::gk15_panel(f, s.a, mid, el);
        const double vr = detail::gk15_panel(f, mid, s.b, er);
        if (!std::isfinite(vl) || !std::isfinite(vr) || !std::isfinite(el) ||
            !std::isfinite(er))
            throw SolverError("adaptive_gk: non-finite integrand");
        segs[worst] = {s.a, mid, vl, el};
        segs.push_back({mid, s.b, vr, er});
        total += vl + vr - s.value;
        total_err += el + er - s.err;
        if (static_cast<int>(segs.size()) > max_segs)
            throw SolverError("adaptive_gk: interval budget exhausted");
    }
    // compensated re-sum for determinism and accuracy
    total = 0.0;
    for (const Seg& s : segs) total += s.value;
    return total;
}

enum class TailTrend { converged, diverged, inconclusive };

struct TailResult {
    double value = 0.0;        // accumulated integral up to `cutoff`
    double cutoff = 0.0;       // last upper limit used
    double last_delta = 0.0;   // contribution of the last doubling
    TailTrend trend = TailTrend::inconclusive;
    bool converged() const { return trend == TailTrend::converged; }
};

/// Improper integral of f over [a, infinity) for a > 0 via the substitution
/// t = 1/w mapping (a, T) to (1/T, 1/a).  The cutoff T doubles until the
/// contribution falls below tolerance; clearly non-decaying contributions
/// declare divergence.  A slowly decaying (but integrable) tail is finished
/// by open-rule quadrature of the w-integral down to w = 0; failure of that
/// quadrature to converge marks the tail divergent.
template <class F>
TailResult integrate_tail(F&& f, double a, QuadOptions opt = {}, double max_cutoff = 1e13) {
    if (!(a > 0.0)) throw SolverError("integrate_tail: lower limit must be positive");
    auto g = [&f](double w) { return f(1.0 / w) / (w * w); };
    TailResult r;
    double t_hi = 2.0 * a;
    r.value = adaptive_gk(g, 1.0 / t_hi, 1.0 / a, opt);
    r.cutoff = t_hi;
    double prev_delta = std::numeric_limits<double>::infinity();
    int non_decaying = 0;
    int doublings = 0;
    while (t_hi < max_cutoff && doublings++ < 24 && non_decaying < 6) {
        const double t_next = 2.0 * t_hi;
        const double delta = adaptive_gk(g, 1.0 / t_next, 1.0 / t_hi, opt);
        r.value += delta;
        r.cutoff = t_next;
        r.last_delta = delta;
        t_hi = t_next;
        const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(r.value));
        if (std::abs(delta) <= tol) {
            r.trend = TailTrend::converged;
            return r;
        }
        if (std::abs(delta) >= 0.97 * std::abs(prev_delta))
            ++non_decaying;
        else
            non_decaying = 0;
        prev_delta = delta;
    }
    // not settled by doubling: close the remaining w-interval (0, 1/T] in one
    // shot.  The open rule converges exactly when the tail is integrable; a
    // budget failure marks divergence (or inconclusive if the contributions
    // were still decaying).
    try {
        const double rest = adaptive_gk(g, 0.0, 1.0 / t_hi, opt);
        if (!std::isfinite(rest)) throw SolverError("integrate_tail: non-finite remainder");
        r.value += rest;
        r.last_delta = rest;
        r.cutoff = std::numeric_limits<double>::infinity();
        r.trend = TailTrend::converged;
    } catch (const SolverError&) {
        r.trend = (non_decaying >= 3) ? TailTrend::diverged : TailTrend::inconclusive;
    }
    return r;
}

}  // namespace cavitate
