#include "cavitate/ellipsoid.hpp"

#include <cmath>
#include <stdexcept>

#include "cavitate/errors.hpp"
#include "cavitate/numerics/ode.hpp"

namespace cavitate {

RadialScalar RadialScalar::one() {
    return {[](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

RadialScalar RadialScalar::exponential(double c) {
    return {[c](double e) { return std::exp(c * e); },
            [c](double e) { return c * std::exp(c * e); },
            [c](double e) { return c * c * std::exp(c * e); }};
}

RadialScalar RadialScalar::polynomial(std::vector<double> coeffs) {
    if (coeffs.empty() || std::abs(coeffs[0] - 1.0) > 1e-12)
        throw std::invalid_argument("RadialScalar::polynomial: b(0) must equal 1");
    auto horner = [](const std::vector<double>& c, double s, int d) {
        double acc = 0.0;
        for (std::size_t i = c.size(); i-- > static_cast<std::size_t>(d);) {
            double term = c[i];
            for (int k = 0; k < d; ++k) term *= static_cast<double>(i - k);
            acc = acc * s + term;
        }
        return acc;
    };
    auto c = coeffs;
    return {[c, horner](double e) { return horner(c, e, 0); },
            [c, horner](double e) { return horner(c, e, 1); },
            [c, horner](double e) { return horner(c, e, 2); }};
}

struct EllipsoidMetric::Impl {
    enum class Family { scalar, prescribed } family = Family::scalar;
    int n = 2;
    Eigen::MatrixXd A;
    RadialScalar b;
    std::optional<JacobiField> f;
    DenseSolution<1> sigma_sol;  // scalar family: sigma' = b^{-1/2}(sigma)
    double sigma_t_max = 0.0;
};

namespace {

void validate_A(const Eigen::MatrixXd& A, int n) {
    if (A.rows() != n || A.cols() != n)
        throw std::invalid_argument("EllipsoidMetric: A must be n x n");
    const double scale = A.norm();
    if ((A - A.transpose()).norm() > 1e-12 * std::max(scale, 1.0))
        throw std::invalid_argument("EllipsoidMetric: A must be symmetric (1e-12 relative)");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw std::invalid_argument("EllipsoidMetric: A must be positive definite");
}

}  // namespace

EllipsoidMetric EllipsoidMetric::from_scalar(int n, Eigen::MatrixXd A, RadialScalar b) {
    if (n < 2) throw std::invalid_argument("EllipsoidMetric: dimension must be >= 2");
    validate_A(A, n);
    if (std::abs(b.b(0.0) - 1.0) > 1e-12)
        throw std::invalid_argument("EllipsoidMetric: b(0) must equal 1 (1e-12)");
    auto impl = std::make_shared<Impl>();
    impl->family = Impl::Family::scalar;
    impl->n = n;
    impl->A = std::move(A);
    impl->b = std::move(b);

    // geodesic reparametrization sigma' = b^{-1/2}(sigma), sigma(0) = 0
    const double t_max = 64.0;
    OdeOptions ode;
    ode.rel_tol = 1e-11;
    ode.abs_tol = 1e-13;
    ode.h_max = 0.05;
    auto rhs = [bfun = impl->b.b](double, const std::array<double, 1>& y,
                                  std::array<double, 1>& dy) {
        const double bv = bfun(std::max(y[0], 0.0));
        if (!(bv > 0.0)) throw SolverError("EllipsoidMetric: b must stay positive");
        dy[0] = 1.0 / std::sqrt(bv);
    };
    auto res = integrate_dense<1>(rhs, 0.0, t_max, {0.0}, ode);
    if (res.status != OdeStatus::ok)
        throw SolverError("EllipsoidMetric: sigma ODE failed");
    impl->sigma_sol = std::move(res.solution);
    impl->sigma_t_max = t_max;
    return EllipsoidMetric(std::move(impl));
}

EllipsoidMetric EllipsoidMetric::prescribed(int n, Eigen::MatrixXd A, JacobiField f) {
    if (n < 2) throw std::invalid_argument("EllipsoidMetric: dimension must be >= 2");
    validate_A(A, n);
    auto impl = std::make_shared<Impl>();
    impl->family = Impl::Family::prescribed;
    impl->n = n;
    impl->A = std::move(A);
    impl->f = std::move(f);
    return EllipsoidMetric(std::move(impl));
}

int EllipsoidMetric::dimension() const { return impl_->n; }
const Eigen::MatrixXd& EllipsoidMetric::A_matrix() const { return impl_->A; }

double EllipsoidMetric::sigma_of_radius(double t) const {
    if (t < 0.0) throw std::invalid_argument("sigma_of_radius: t must be >= 0");
    if (impl_->family == Impl::Family::prescribed) return t;
    if (t > impl_->sigma_t_max)
        throw SolverError("sigma_of_radius: t beyond the integrated range");
    return impl_->sigma_sol.component(t, 0);
}

Eigen::MatrixXd EllipsoidMetric::metric_at(const Eigen::VectorXd& x) const {
    const Impl& im = *impl_;
    if (x.size() != im.n) throw std::invalid_argument("metric_at: wrong dimension");
    const Eigen::VectorXd Ax = im.A * x;
    const double eta2 = x.dot(Ax);
    const double eta = std::sqrt(std::max(eta2, 0.0));
    if (im.family == Impl::Family::scalar) return im.b.b(eta) * im.A;

    // prescribed family: G = (f^2/eta^2) A + (1/eta^2)[1 - f^2/eta^2] Ax Ax^T,
    // G(0) = A by f(eta)/eta -> 1
    if (eta < 1e-6) {
        const double k0 = im.f->curvature()(0.0);
        // series: G = A - (k0/3)(eta^2 A - Ax Ax^T) + O(eta^4)
        return im.A - (k0 / 3.0) * (eta2 * im.A - Ax * Ax.transpose());
    }
    const double fe = im.f->f(eta);
    const double ratio2 = (fe / eta) * (fe / eta);
    return ratio2 * im.A + ((1.0 - ratio2) / eta2) * (Ax * Ax.transpose());
}

CurvatureProfile EllipsoidMetric::radial_curvature(double t_max) const {
    const Impl& im = *impl_;
    if (im.family == Impl::Family::prescribed) {
        const CurvatureProfile& base = im.f->curvature();
        return CurvatureProfile::prescribed([base](double t) { return base(t); },
                                            std::min(t_max, base.t_max()));
    }
    // scalar family in normal coordinates: f(rho) = sigma(rho) sqrt(b(sigma)),
    // kappa = -f''/f = -[b'/(2b) + sigma b''/(2b) - sigma b'^2/(2b^2)] / (sigma b)
    auto self = *this;
    auto kappa = [self](double t) {
        const auto& b = self.impl_->b;
        const double s = self.sigma_of_radius(t);
        const double bv = b.b(s), b1 = b.db(s), b2 = b.d2b(s);
        if (s < 1e-8) {
            // the limit is finite only when b'(0) = 0, and equals -b''(0)
            if (std::abs(b.db(0.0)) > 1e-10)
                throw SolverError(
                    "EllipsoidMetric: radial curvature singular at t = 0 (b'(0) != 0)");
            return -b.d2b(0.0);
        }
        const double num = b1 / (2.0 * bv) + s * b2 / (2.0 * bv) - s * b1 * b1 / (2.0 * bv * bv);
        return -num / (s * bv);
    };
    return CurvatureProfile::prescribed(std::move(kappa), t_max);
}

QuadricDescriptor ellipsoid_geodesic_sphere(const EllipsoidMetric& metric, double t) {
    QuadricDescriptor q;
    q.A = metric.A_matrix();
    const double s = metric.sigma_of_radius(t);
    q.level = s * s;
    return q;
}

EllipsoidMetric prescribed_curvature_metric(int n, Eigen::MatrixXd A_matrix,
                                            const JacobiField& f) {
    return EllipsoidMetric::prescribed(n, std::move(A_matrix), f);
}

}  // namespace cavitate
