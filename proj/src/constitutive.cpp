#include "cavitate/constitutive.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cavitate/errors.hpp"
#include "cavitate/numerics/roots.hpp"

namespace cavitate {

namespace {

double pow_int(double x, int p) {
    double acc = 1.0;
    for (int i = 0; i < p; ++i) acc *= x;
    return acc;
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0)) throw std::invalid_argument(std::string(what) + " must be positive");
}

// piecewise-linear table in log-log space, with monotone evaluation/inversion
struct LogLogTable {
    std::vector<double> ls, lv;  // log(s), log(value)

    void require_built(const char* what) const {
        if (ls.size() < 2)
            throw SolverError(std::string(what) +
                              ": envelope unavailable (phi' not eventually positive?)");
    }

    double eval(double s) const {
        const double x = std::log(s);
        if (x <= ls.front()) return std::exp(lv.front());
        if (x >= ls.back()) return std::exp(lv.back());
        auto it = std::upper_bound(ls.begin(), ls.end(), x);
        const std::size_t j = static_cast<std::size_t>(it - ls.begin());
        const double w = (x - ls[j - 1]) / (ls[j] - ls[j - 1]);
        return std::exp(lv[j - 1] + w * (lv[j] - lv[j - 1]));
    }

    // inverse assuming lv strictly monotone
    double inverse(double z) const {
        const double y = std::log(z);
        const bool dec = lv.back() < lv.front();
        double lo = ls.front(), hi = ls.back();
        const double y_lo = lv.front(), y_hi = lv.back();
        if (dec ? (y >= y_lo) : (y <= y_lo)) return std::exp(lo);
        if (dec ? (y <= y_hi) : (y >= y_hi)) return std::exp(hi);
        for (std::size_t j = 1; j < ls.size(); ++j) {
            const bool inside = dec ? (lv[j] <= y) : (lv[j] >= y);
            if (inside) {
                const double w = (y - lv[j - 1]) / (lv[j] - lv[j - 1]);
                return std::exp(ls[j - 1] + w * (ls[j] - ls[j - 1]));
            }
        }
        return std::exp(hi);
    }
};

std::vector<double> log_grid(double lo, double hi, int count) {
    if (count <= 1) return {lo};
    std::vector<double> g(count);
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < count; ++i)
        g[i] = std::exp(a + (b - a) * i / (count - 1));
    return g;
}

// monotone cubic (Fritsch-Carlson) interpolant for tabulated laws
struct Pchip {
    std::vector<double> x, y, d;

    static Pchip build(std::vector<double> xs, std::vector<double> ys) {
        if (xs.size() != ys.size() || xs.size() < 3)
            throw std::invalid_argument("tabulated law: need >= 3 samples");
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (!(xs[i] > xs[i - 1]))
                throw std::invalid_argument("tabulated law: abscissae must increase");
        Pchip p;
        p.x = std::move(xs);
        p.y = std::move(ys);
        const std::size_t m = p.x.size();
        std::vector<double> h(m - 1), del(m - 1);
        for (std::size_t i = 0; i + 1 < m; ++i) {
            h[i] = p.x[i + 1] - p.x[i];
            del[i] = (p.y[i + 1] - p.y[i]) / h[i];
        }
        p.d.assign(m, 0.0);
        for (std::size_t i = 1; i + 1 < m; ++i) {
            if (del[i - 1] * del[i] > 0.0) {
                const double w1 = 2.0 * h[i] + h[i - 1];
                const double w2 = h[i] + 2.0 * h[i - 1];
                p.d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
            }
        }
        p.d[0] = del[0];
        p.d[m - 1] = del[m - 2];
        return p;
    }

    double operator()(double t, int deriv = 0) const {
        std::size_t j = static_cast<std::size_t>(
            std::upper_bound(x.begin(), x.end(), t) - x.begin());
        j = std::clamp<std::size_t>(j, 1, x.size() - 1) - 1;
        const double h = x[j + 1] - x[j];
        const double s = (t - x[j]) / h;
        const double y0 = y[j], y1 = y[j + 1], d0 = d[j] * h, d1 = d[j + 1] * h;
        const double a = 2 * y0 - 2 * y1 + d0 + d1;
        const double b = -3 * y0 + 3 * y1 - 2 * d0 - d1;
        if (deriv == 0) return ((a * s + b) * s + d0) * s + y0;
        if (deriv == 1) return ((3 * a * s + 2 * b) * s + d0) / h;
        return (6 * a * s + 2 * b) / (h * h);
    }
};

}  // namespace

struct ConstitutiveLaw::Impl {
    int n = 3;
    Fn phi, phi_p, phi_pp, h, h_p, h_pp;
    std::optional<PowerLawParams> params;

    double t0 = 0.0;
    double varpi = 0.0;
    bool has_varpi = false;

    bool analytic_q = false;  // q1(s) = q0(s) = s^{1-alpha}
    LogLogTable q1_table, q0_table;

    double hat_pp1 = 0.0;

    double hat_pp(double v) const {
        const double nn = n;
        const double w = std::pow(v, 1.0 - nn);
        return nn * (nn - 1) * std::pow(v, -nn - 1.0) * phi_p(w) +
               (nn - 1) * (nn - 1) * std::pow(v, -2.0 * nn) * phi_pp(w) +
               (nn - 1) * phi_pp(v);
    }

    void build_q_tables() {
        const double v_lo = std::max(t0 * 1.0001, 1e-6);
        const auto vs = log_grid(v_lo, 1e8, 240);
        {
            const auto ss = log_grid(1.0 + 1e-9, 1e8, 120);
            double prev = std::numeric_limits<double>::infinity();
            for (double s : ss) {
                double sup = 0.0;
                for (double v : vs) {
                    const double denom = phi_p(s * v);
                    if (denom <= 0.0) continue;
                    sup = std::max(sup, phi_p(v) / denom);
                }
                sup = std::min(sup, prev);  // q1 is decreasing: monotone hull
                prev = sup;
                if (sup > 0.0) {
                    q1_table.ls.push_back(std::log(s));
                    q1_table.lv.push_back(std::log(sup));
                }
            }
        }
        {
            const auto ss = log_grid(1e-8, 1.0, 120);
            double prev = std::numeric_limits<double>::infinity();
            for (double s : ss) {
                double inf = std::numeric_limits<double>::infinity();
                for (double v : vs) {
                    if (!(v > t0 / s)) continue;
                    const double denom = phi_p(s * v);
                    if (denom <= 0.0) continue;
                    inf = std::min(inf, phi_p(v) / denom);
                }
                inf = std::min(inf, prev);  // q0 is decreasing in s as well
                prev = inf;
                if (std::isfinite(inf) && inf > 0.0) {
                    q0_table.ls.push_back(std::log(s));
                    q0_table.lv.push_back(std::log(inf));
                }
            }
        }
    }
};

int ConstitutiveLaw::dimension() const { return impl_->n; }
double ConstitutiveLaw::phi(double v) const {
    if (!(v > 0.0)) throw std::invalid_argument("phi: stretch must be positive");
    return impl_->phi(v);
}
double ConstitutiveLaw::phi_p(double v) const {
    if (!(v > 0.0)) throw std::invalid_argument("phi': stretch must be positive");
    return impl_->phi_p(v);
}
double ConstitutiveLaw::phi_pp(double v) const {
    if (!(v > 0.0)) throw std::invalid_argument("phi'': stretch must be positive");
    return impl_->phi_pp(v);
}
double ConstitutiveLaw::h(double d) const {
    if (!(d > 0.0)) throw std::invalid_argument("h: determinant must be positive");
    return impl_->h(d);
}
double ConstitutiveLaw::h_p(double d) const {
    if (!(d > 0.0)) throw std::invalid_argument("h': determinant must be positive");
    return impl_->h_p(d);
}
double ConstitutiveLaw::h_pp(double d) const {
    if (!(d > 0.0)) throw std::invalid_argument("h'': determinant must be positive");
    return impl_->h_pp(d);
}

double ConstitutiveLaw::Phi(std::span<const double> v) const {
    if (static_cast<int>(v.size()) != impl_->n)
        throw std::invalid_argument("Phi: stretch vector must have length n");
    double sum = 0.0, prod = 1.0;
    for (double vi : v) {
        if (!(vi > 0.0)) throw std::invalid_argument("Phi: stretches must be positive");
        sum += impl_->phi(vi);
        prod *= vi;
    }
    return sum + impl_->h(prod);
}

double ConstitutiveLaw::Phi_radial(double a, double t) const {
    if (!(a > 0.0 && t > 0.0)) throw std::invalid_argument("Phi_radial: positive stretches");
    const int n = impl_->n;
    return impl_->phi(a) + (n - 1) * impl_->phi(t) + impl_->h(a * pow_int(t, n - 1));
}

std::pair<double, double> ConstitutiveLaw::Phi12(double a, double t) const {
    if (!(a > 0.0 && t > 0.0)) throw std::invalid_argument("Phi12: positive stretches");
    const int n = impl_->n;
    const double tn1 = pow_int(t, n - 1);
    const double hp = impl_->h_p(a * tn1);
    const double P1 = impl_->phi_p(a) + hp * tn1;
    const double P2 = impl_->phi_p(t) + hp * a * pow_int(t, n - 2);
    return {P1, P2};
}

double ConstitutiveLaw::phi_hat(double v) const {
    const int n = impl_->n;
    return impl_->phi(std::pow(v, 1.0 - n)) + (n - 1) * impl_->phi(v) + impl_->h(1.0);
}

double ConstitutiveLaw::phi_hat_prime(double v) const {
    const int n = impl_->n;
    return (1.0 - n) * std::pow(v, -static_cast<double>(n)) *
               impl_->phi_p(std::pow(v, 1.0 - n)) +
           (n - 1) * impl_->phi_p(v);
}

double ConstitutiveLaw::phi_hat_pp1() const { return impl_->hat_pp1; }

double ConstitutiveLaw::phi_hat_ppp1() const {
    const double h = 1e-4;
    return (impl_->hat_pp(1.0 + h) - impl_->hat_pp(1.0 - h)) / (2.0 * h);
}

double ConstitutiveLaw::phi_hat_prime_over_taun1(double tau) const {
    const int n = impl_->n;
    const double u = tau - 1.0;
    if (std::abs(u) < 1e-4) {
        // series branch: both numerator and denominator vanish at tau = 1
        const double num = impl_->hat_pp1 + 0.5 * phi_hat_ppp1() * u;
        const double den = n * (1.0 + 0.5 * (n - 1) * u);
        return num / den;
    }
    return phi_hat_prime(tau) / std::expm1(n * std::log(tau));
}

double ConstitutiveLaw::t0() const { return impl_->t0; }

double ConstitutiveLaw::varpi() const {
    if (!impl_->has_varpi) throw SolverError("varpi: h' has no positive root for this law");
    return impl_->varpi;
}

double ConstitutiveLaw::q1(double s) const {
    if (!(s >= 1.0)) throw std::invalid_argument("q1: s must be >= 1");
    if (impl_->analytic_q) return std::pow(s, 1.0 - impl_->params->alpha);
    impl_->q1_table.require_built("q1");
    return impl_->q1_table.eval(s);
}
double ConstitutiveLaw::q0(double s) const {
    if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("q0: s must lie in (0, 1]");
    if (impl_->analytic_q) return std::pow(s, 1.0 - impl_->params->alpha);
    impl_->q0_table.require_built("q0");
    return impl_->q0_table.eval(s);
}
double ConstitutiveLaw::q1_inv(double z) const {
    if (!(z > 0.0 && z <= 1.0)) throw std::invalid_argument("q1_inv: z must lie in (0, 1]");
    if (impl_->analytic_q) return std::pow(z, -1.0 / (impl_->params->alpha - 1.0));
    impl_->q1_table.require_built("q1_inv");
    return impl_->q1_table.inverse(z);
}
double ConstitutiveLaw::q0_inv(double z) const {
    if (!(z >= 1.0)) throw std::invalid_argument("q0_inv: z must be >= 1");
    if (impl_->analytic_q) return std::pow(z, -1.0 / (impl_->params->alpha - 1.0));
    impl_->q0_table.require_built("q0_inv");
    return impl_->q0_table.inverse(z);
}

const std::optional<PowerLawParams>& ConstitutiveLaw::params() const { return impl_->params; }

// ---------------------------------------------------------------------------

ConstitutiveLaw ConstitutiveLaw::power_law(int n, const PowerLawParams& p) {
    if (n < 2) throw std::invalid_argument("power_law: dimension must be >= 2");
    require_positive(p.mu, "power_law: mu");
    if (p.nu < 0.0) throw std::invalid_argument("power_law: nu must be >= 0");
    if (!(p.alpha > 1.0 && p.alpha < n))
        throw std::invalid_argument("power_law: alpha must lie in (1, n)");
    if (!(p.beta >= 0.0 && p.beta < 1.0 + 1.0 / (n - 1)))
        throw std::invalid_argument("power_law: beta must lie in [0, 1 + 1/(n-1))");
    if (!(p.k > 1.0)) throw std::invalid_argument("power_law: k must be > 1");

    auto impl = std::make_shared<Impl>();
    impl->n = n;
    impl->params = p;
    const double mu = p.mu, nu = p.nu, al = p.alpha, be = p.beta, k = p.k;

    impl->phi = [mu, nu, al, be, n](double v) {
        return mu * (std::pow(v, al) - n) + ((nu != 0.0) ? nu * std::pow(v, -be) : 0.0);
    };
    impl->phi_p = [mu, nu, al, be](double v) {
        return mu * al * std::pow(v, al - 1.0) -
               ((nu != 0.0) ? nu * be * std::pow(v, -be - 1.0) : 0.0);
    };
    impl->phi_pp = [mu, nu, al, be](double v) {
        return mu * al * (al - 1.0) * std::pow(v, al - 2.0) +
               ((nu != 0.0) ? nu * be * (be + 1.0) * std::pow(v, -be - 2.0) : 0.0);
    };

    // H(d) = k (d - 1 - 1/k)^2 for d >= 1/2, extended below 1/2 by the
    // barrier c1 (1/2 - d)^3 / d (C^2 at the junction, H -> inf at 0+)
    const double c1 = k;
    auto Hquad = [k](double d) { const double w = d - 1.0 - 1.0 / k; return k * w * w; };
    auto Hquad_p = [k](double d) { return 2.0 * k * (d - 1.0 - 1.0 / k); };
    impl->h = [k, c1, n, Hquad](double d) {
        double v = Hquad(d) - n;
        if (d < 0.5) {
            const double w = 0.5 - d;
            v += c1 * w * w * w / d;
        }
        return v;
    };
    impl->h_p = [k, c1, Hquad_p](double d) {
        double v = Hquad_p(d);
        if (d < 0.5) {
            const double w = 0.5 - d;
            v += -3.0 * c1 * w * w / d - c1 * w * w * w / (d * d);
        }
        return v;
    };
    impl->h_pp = [k, c1](double d) {
        double v = 2.0 * k;
        if (d < 0.5) {
            const double w = 0.5 - d;
            v += 6.0 * c1 * w / d + 6.0 * c1 * w * w / (d * d) + 2.0 * c1 * w * w * w / (d * d * d);
        }
        return v;
    };

    impl->t0 = (nu * be > 0.0) ? std::pow(nu * be / (mu * al), 1.0 / (al + be)) : 0.0;
    impl->varpi = 1.0 + 1.0 / k;
    impl->has_varpi = true;
    impl->analytic_q = true;
    impl->hat_pp1 = n * (n - 1.0) * (impl->phi_p(1.0) + impl->phi_pp(1.0));
    return ConstitutiveLaw(std::move(impl));
}

namespace {

double find_sign_change_root(const std::function<double(double)>& g, double lo, double hi) {
    // scan a log grid for a sign change, refine by bisection
    const auto grid = log_grid(lo, hi, 400);
    double prev_x = grid.front();
    double prev_v = g(prev_x);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double x = grid[i];
        const double v = g(x);
        if (prev_v == 0.0) return prev_x;
        if (std::signbit(prev_v) != std::signbit(v)) {
            RootOptions ro;
            ro.x_tol = 1e-12;
            return brent(g, prev_x, x, ro);
        }
        prev_x = x;
        prev_v = v;
    }
    return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

ConstitutiveLaw ConstitutiveLaw::custom(int n, Fn phi, Fn phi_p, Fn phi_pp, Fn h, Fn h_p,
                                        Fn h_pp) {
    if (n < 2) throw std::invalid_argument("custom law: dimension must be >= 2");
    auto impl = std::make_shared<Impl>();
    impl->n = n;
    impl->phi = std::move(phi);
    impl->phi_p = std::move(phi_p);
    impl->phi_pp = std::move(phi_pp);
    impl->h = std::move(h);
    impl->h_p = std::move(h_p);
    impl->h_pp = std::move(h_pp);

    const double t0 = find_sign_change_root([&impl](double v) { return impl->phi_p(v); },
                                            1e-8, 1e8);
    impl->t0 = std::isnan(t0) ? 0.0 : t0;
    const double vp = find_sign_change_root([&impl](double d) { return impl->h_p(d); },
                                            1e-8, 1e8);
    impl->has_varpi = !std::isnan(vp);
    impl->varpi = impl->has_varpi ? vp : 0.0;
    impl->build_q_tables();
    impl->hat_pp1 = n * (n - 1.0) * (impl->phi_p(1.0) + impl->phi_pp(1.0));
    return ConstitutiveLaw(std::move(impl));
}

ConstitutiveLaw ConstitutiveLaw::tabulated(int n, std::vector<double> v,
                                           std::vector<double> phi_samples,
                                           std::vector<double> d,
                                           std::vector<double> h_samples) {
    auto phi_interp = std::make_shared<Pchip>(Pchip::build(std::move(v), std::move(phi_samples)));
    auto h_interp = std::make_shared<Pchip>(Pchip::build(std::move(d), std::move(h_samples)));
    return custom(
        n, [phi_interp](double x) { return (*phi_interp)(x, 0); },
        [phi_interp](double x) { return (*phi_interp)(x, 1); },
        [phi_interp](double x) { return (*phi_interp)(x, 2); },
        [h_interp](double x) { return (*h_interp)(x, 0); },
        [h_interp](double x) { return (*h_interp)(x, 1); },
        [h_interp](double x) { return (*h_interp)(x, 2); });
}

// ---------------------------------------------------------------------------
// assumption screening

bool AssumptionReport::all_pass() const {
    for (const auto& e : a)
        if (e.status == AssumptionStatus::fail) return false;
    return true;
}

AssumptionReport check_assumptions(const ConstitutiveLaw& law, int sample_budget) {
    AssumptionReport rep;
    const int n = law.dimension();
    const int m = std::max(sample_budget, 16);
    const auto vs = log_grid(1e-6, 1e6, m);

    auto fail = [&rep](int idx, double witness, const std::string& note) {
        rep.a[idx].status = AssumptionStatus::fail;
        rep.a[idx].witness = witness;
        rep.a[idx].note = note;
    };
    auto sampled = [&rep](int idx, const std::string& note) {
        rep.a[idx].status = AssumptionStatus::sampled_pass;
        rep.a[idx].note = note;
    };

    // (A 1): h strictly convex
    for (double d : vs) {
        if (!(law.h_pp(d) > 0.0)) {
            fail(0, d, "h'' <= 0");
            break;
        }
    }
    if (rep.a[0].status != AssumptionStatus::fail) sampled(0, "h'' > 0 on sampled grid");

    // (A 2): h(0+) = inf, h(v)/v -> inf
    {
        const bool blow_up = law.h(1e-6) > law.h(1e-4) && law.h(1e-4) > law.h(1e-2) &&
                             law.h(1e-6) > 10.0 * std::abs(law.h(1.0)) + 10.0;
        const double r1 = law.h(1e2) / 1e2, r2 = law.h(1e4) / 1e4, r3 = law.h(1e6) / 1e6;
        const bool super_linear = r3 > r2 && r2 > r1 && r3 > 10.0 * std::max(1.0, r1);
        if (!blow_up)
            fail(1, 1e-6, "h does not blow up as v -> 0+");
        else if (!super_linear)
            fail(1, 1e6, "h(v)/v does not grow");
        else
            sampled(1, "limits consistent on v in {1e-6..1e6}");
    }

    // (A 3): liminf v h'(v)/h(v) > 1 and theta(s) finite/positive
    {
        double worst = std::numeric_limits<double>::infinity();
        for (double v : {1e2, 1e4, 1e6}) worst = std::min(worst, v * law.h_p(v) / law.h(v));
        rep.theta_grid = {0.25, 0.5, 2.0, 4.0};
        for (double s : rep.theta_grid)
            rep.theta_values.push_back(law.h(s * 1e6) / law.h(1e6));
        if (worst > 1.0)
            sampled(2, "v h'/h sampled min = " + std::to_string(worst));
        else
            fail(2, 1e6, "v h'/h <= 1 at large v");
    }

    // (A 4): phi C^2 convex
    for (double v : vs) {
        if (law.phi_pp(v) < -1e-12 * (1.0 + std::abs(law.phi_pp(1.0)))) {
            fail(3, v, "phi'' < 0");
            break;
        }
    }
    if (rep.a[3].status != AssumptionStatus::fail) sampled(3, "phi'' >= 0 on sampled grid");

    // (A 5): v phi'(v) increasing
    {
        double prev = vs.front() * law.phi_p(vs.front());
        for (std::size_t i = 1; i < vs.size(); ++i) {
            const double cur = vs[i] * law.phi_p(vs[i]);
            if (cur < prev - 1e-10 * (1.0 + std::abs(cur))) {
                fail(4, vs[i], "v phi'(v) decreased");
                break;
            }
            prev = cur;
        }
        if (rep.a[4].status != AssumptionStatus::fail) sampled(4, "v phi' nondecreasing");
    }

    // (A 6): q1 -> 0, q0 -> inf with negative slopes
    try {
        rep.q1_grid = log_grid(1.0, 1e6, 25);
        for (double s : rep.q1_grid) rep.q1_values.push_back(law.q1(s));
        rep.q0_grid = log_grid(1e-6, 1.0, 25);
        for (double s : rep.q0_grid) rep.q0_values.push_back(law.q0(s));
        const bool q1_ok = rep.q1_values.back() < 1e-2 * rep.q1_values.front();
        const bool q0_ok = rep.q0_values.front() > 1e2 * rep.q0_values.back();
        if (!q1_ok)
            fail(5, 1e6, "q1(s) does not decay");
        else if (!q0_ok)
            fail(5, 1e-6, "q0(s) does not grow");
        else
            sampled(5, "q envelopes decay/grow as required");
    } catch (const SolverError& e) {
        fail(5, 0.0, e.what());
    }

    // (A 7): |phi'(sv)| <= delta1 phi(v)/v near s = 1; checked against the
    // positive comparator phi - inf(phi) (the assumption is stated for
    // nonnegative phi, which additive normalizations break)
    {
        double phi_min = 0.0;
        for (double v : vs) phi_min = std::min(phi_min, law.phi(v));
        const double reg = 1e-6 * (1.0 + std::abs(phi_min) + std::abs(law.phi(1.0)));
        double delta1 = 0.0;
        bool ok = true;
        for (double s : {0.95, 1.0, 1.05}) {
            for (double v : vs) {
                const double comparator = (law.phi(v) - phi_min + reg) / v;
                const double ratio = std::abs(law.phi_p(s * v)) / comparator;
                if (!std::isfinite(ratio)) { ok = false; break; }
                delta1 = std::max(delta1, ratio);
            }
        }
        if (ok && delta1 < 1e12)
            sampled(6, "delta1 estimate = " + std::to_string(delta1) +
                           (phi_min < 0.0 ? " (positive-part comparator)" : ""));
        else
            fail(6, 0.0, "phi'(sv) v / phi(v) unbounded on the sampled grid");
    }

    // (A 8): phi(v) <= delta2 (1 + v^alpha + v^-beta), alpha < n, beta < 1 + 1/(n-1)
    {
        double alpha_hat, beta_hat;
        if (law.params()) {
            alpha_hat = law.params()->alpha;
            beta_hat = law.params()->beta;
        } else {
            alpha_hat = std::log(std::abs(law.phi(1e6)) / std::max(std::abs(law.phi(1e4)), 1e-300)) /
                        std::log(1e2);
            beta_hat = std::log(std::abs(law.phi(1e-6)) / std::max(std::abs(law.phi(1e-4)), 1e-300)) /
                       std::log(1e2);
            beta_hat = std::max(beta_hat, 0.0);
        }
        if (alpha_hat < n && beta_hat < 1.0 + 1.0 / (n - 1))
            sampled(7, "growth exponents alpha ~ " + std::to_string(alpha_hat) +
                           ", beta ~ " + std::to_string(beta_hat));
        else
            fail(7, alpha_hat, "growth exponents violate alpha < n or beta bound");
    }

    // (A 9): phi -> inf
    if (law.phi(1e6) > law.phi(1e3) && law.phi(1e6) > 1e3 * (1.0 + std::abs(law.phi(1.0))))
        sampled(8, "phi grows at large v");
    else
        fail(8, 1e6, "phi does not grow at large v");

    rep.t0 = law.t0();
    try {
        rep.varpi = law.varpi();
    } catch (const SolverError&) {
        rep.varpi = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

NoCavityPredicates no_cavity_predicates(const ConstitutiveLaw& law, int samples) {
    NoCavityPredicates p;
    const int n = law.dimension();
    p.natural_state = std::abs(law.phi_p(1.0) + law.h_p(1.0)) <= 1e-10;
    p.volumetric_dominates = true;
    for (double s : log_grid(1.0 + 1e-6, 1e4, std::max(samples, 8))) {
        const double lhs = law.phi_p(s);
        const double rhs = law.h_pp(std::pow(s, n)) * std::pow(s, 2.0 * n - 1.0);
        if (!(lhs < rhs)) {
            p.volumetric_dominates = false;
            break;
        }
    }
    return p;
}

BakerEricksenResult baker_ericksen(const ConstitutiveLaw& law, int grid_per_axis,
                                   double v_lo, double v_hi) {
    BakerEricksenResult res;
    const auto grid = log_grid(v_lo, v_hi, grid_per_axis);
    for (double a : grid) {
        for (double t : grid) {
            if (std::abs(a - t) <= 1e-9 * (1.0 + std::abs(a))) continue;
            const auto [P1, P2] = law.Phi12(a, t);
            const double value = (a * P1 - t * P2) / (a - t);
            if (value < -1e-12) {
                res.ok = false;
                res.violation = BakerEricksenResult::Witness{a, t, value};
                return res;
            }
        }
    }
    return res;
}

}  // namespace cavitate
