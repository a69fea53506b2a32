#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "cavitate/errors.hpp"

namespace cavitate {

struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-13;
    double h_max = std::numeric_limits<double>::infinity();
    double h_init = 0.0;  // 0 = automatic
    long max_steps = 4'000'000;
};

enum class OdeStatus { ok, guard_stop, step_underflow, max_steps };

/// Dense solution of y' = f(t, y): accepted nodes (t_i, y_i, y'_i) with
/// cubic Hermite interpolation in between.  Immutable once built.
template <int N>
class DenseSolution {
public:
    struct Node {
        double t;
        std::array<double, N> y;
        std::array<double, N> dy;
    };

    DenseSolution() = default;
    explicit DenseSolution(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

    double t_front() const { return nodes_.front().t; }
    double t_back() const { return nodes_.back().t; }
    const std::vector<Node>& nodes() const { return nodes_; }
    const std::array<double, N>& back_state() const { return nodes_.back().y; }

    std::array<double, N> operator()(double t) const {
        std::array<double, N> out;
        eval(t, out);
        return out;
    }

    double component(double t, int i) const {
        std::array<double, N> out;
        eval(t, out);
        return out[i];
    }

    void eval(double t, std::array<double, N>& out) const {
        const Node& lo = nodes_.front();
        const Node& hi = nodes_.back();
        if (t <= lo.t) { extrapolate(lo, t, out); return; }
        if (t >= hi.t) { extrapolate(hi, t, out); return; }
        eval_piece(locate(t), t, out);
    }

    /// index of the Hermite piece containing t (nodes_[i].t <= t < nodes_[i+1].t)
    std::size_t locate(double t) const {
        std::size_t lo = 0, hi = nodes_.size() - 1;
        while (hi - lo > 1) {
            const std::size_t mid = (lo + hi) / 2;
            (nodes_[mid].t <= t ? lo : hi) = mid;
        }
        return lo;
    }

    /// Hermite evaluation on a known piece
    void eval_piece(std::size_t idx, double t, std::array<double, N>& out) const {
        const Node& a = nodes_[idx];
        const Node& b = nodes_[idx + 1];
        const double h = b.t - a.t;
        const double s = (t - a.t) / h;
        const double s2 = s * s;
        const double s3 = s2 * s;
        const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        const double h10 = s3 - 2.0 * s2 + s;
        const double h01 = -2.0 * s3 + 3.0 * s2;
        const double h11 = s3 - s2;
        for (int i = 0; i < N; ++i)
            out[i] = h00 * a.y[i] + h10 * h * a.dy[i] + h01 * b.y[i] + h11 * h * b.dy[i];
    }

private:
    static void extrapolate(const Node& n, double t, std::array<double, N>& out) {
        const double dt = t - n.t;
        for (int i = 0; i < N; ++i) out[i] = n.y[i] + dt * n.dy[i];
    }

    std::vector<Node> nodes_;
};

template <int N>
struct OdeResult {
    DenseSolution<N> solution;
    OdeStatus status = OdeStatus::ok;
    double t_reached = 0.0;
};

/// Adaptive Dormand-Prince 5(4) from t0 to t1 (t1 > t0).  `guard(t, y)` is
/// checked on every accepted step; returning false stops the integration
/// with status guard_stop.  Deterministic for identical inputs.
template <int N, class RHS, class Guard>
OdeResult<N> integrate_dense(RHS&& rhs, double t0, double t1,
                             const std::array<double, N>& y0,
                             const OdeOptions& opt, Guard&& guard) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    // embedded 4th-order error weights (b - bhat)
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                            e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    using State = std::array<double, N>;
    using Node = typename DenseSolution<N>::Node;

    std::vector<Node> nodes;
    State y = y0;
    State k1;
    rhs(t0, y, k1);
    nodes.push_back({t0, y, k1});

    const double span = t1 - t0;
    double h = (opt.h_init > 0.0) ? opt.h_init : std::min(opt.h_max, 1e-3 * span);
    h = std::min(h, opt.h_max);
    double t = t0;
    const double h_floor = 16.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(t0), std::abs(t1));

    OdeResult<N> result;
    State k2, k3, k4, k5, k6, k7, ytmp, ynew, yerr;
    long steps = 0;
    while (t < t1) {
        if (++steps > opt.max_steps) {
            result.status = OdeStatus::max_steps;
            break;
        }
        h = std::min(h, t1 - t);
        if (h < h_floor) {
            result.status = OdeStatus::step_underflow;
            break;
        }

        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + h * a21 * k1[i];
        rhs(t + c2 * h, ytmp, k2);
        for (int i = 0; i < N; ++i) ytmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
        rhs(t + c3 * h, ytmp, k3);
        for (int i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        rhs(t + c4 * h, ytmp, k4);
        for (int i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
        rhs(t + c5 * h, ytmp, k5);
        for (int i = 0; i < N; ++i)
            ytmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] +
                                  a65 * k5[i]);
        rhs(t + h, ytmp, k6);
        for (int i = 0; i < N; ++i)
            ynew[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] +
                                  b6 * k6[i]);
        rhs(t + h, ynew, k7);

        bool finite = true;
        double err_norm = 0.0;
        for (int i = 0; i < N; ++i) {
            yerr[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                           e7 * k7[i]);
            const double scale =
                opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double r = yerr[i] / scale;
            err_norm += r * r;
            finite = finite && std::isfinite(ynew[i]);
        }
        err_norm = std::sqrt(err_norm / N);

        if (!finite) {
            h *= 0.25;
            continue;
        }
        if (err_norm <= 1.0) {
            t += h;
            y = ynew;
            k1 = k7;  // FSAL
            nodes.push_back({t, y, k1});
            if (!guard(t, y)) {
                result.status = OdeStatus::guard_stop;
                break;
            }
        }
        const double factor =
            (err_norm > 0.0) ? 0.9 * std::pow(err_norm, -0.2) : 5.0;
        h *= std::clamp(factor, 0.2, 5.0);
        h = std::min(h, opt.h_max);
    }

    result.t_reached = t;
    result.solution = DenseSolution<N>(std::move(nodes));
    return result;
}

template <int N, class RHS>
OdeResult<N> integrate_dense(RHS&& rhs, double t0, double t1,
                             const std::array<double, N>& y0,
                             const OdeOptions& opt = {}) {
    return integrate_dense<N>(std::forward<RHS>(rhs), t0, t1, y0, opt,
                              [](double, const std::array<double, N>&) { return true; });
}

}  // namespace cavitate
