#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "cavitate/errors.hpp"

namespace cavitate {

struct RootOptions {
    double x_tol = 1e-12;   // absolute tolerance on the root location
    double f_tol = 0.0;     // optional residual tolerance (0 = ignore)
    int max_iter = 200;
};

/// Brent-style safeguarded root finder on a sign-changing bracket [a, b].
template <class F>
double brent(F&& f, double a, double b, RootOptions opt = {}) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (std::signbit(fa) == std::signbit(fb))
        throw SolverError("brent: no sign change on [" + std::to_string(a) + ", " +
                          std::to_string(b) + "]");

    double c = a, fc = fa;
    double d = b - a, e = d;
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) +
                            0.5 * opt.x_tol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0 ||
            (opt.f_tol > 0.0 && std::abs(fb) <= opt.f_tol))
            return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            // inverse quadratic / secant step
            const double s = fb / fa;
            double p, q;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                const double qq = fa / fc;
                const double r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0.0) == (fc > 0.0)) {
            c = a; fc = fa;
            d = b - a; e = d;
        }
    }
    throw SolverError("brent: max iterations exceeded");
}

/// Newton iteration confined to a sign-changing bracket [a, b];
/// falls back to bisection whenever the Newton step leaves the bracket.
template <class F, class DF>
double newton_bisect(F&& f, DF&& df, double a, double b, RootOptions opt = {}) {
    double fa = f(a);
    double fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (std::signbit(fa) == std::signbit(fb))
        throw SolverError("newton_bisect: no sign change on bracket");
    double lo = a, hi = b, flo = fa;
    double x = 0.5 * (lo + hi);
    for (int iter = 0; iter < opt.max_iter; ++iter) {
        const double fx = f(x);
        if (fx == 0.0 || (opt.f_tol > 0.0 && std::abs(fx) <= opt.f_tol)) return x;
        if (std::signbit(fx) == std::signbit(flo)) {
            lo = x; flo = fx;
        } else {
            hi = x;
        }
        const double dfx = df(x);
        double xn = (dfx != 0.0) ? x - fx / dfx : 0.5 * (lo + hi);
        if (!(xn > std::min(lo, hi) && xn < std::max(lo, hi)))
            xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= opt.x_tol * (1.0 + std::abs(xn))) return xn;
        x = xn;
    }
    return x;
}

}  // namespace cavitate
