#pragma once

#include <Eigen/Dense>
#include <functional>
#include <memory>
#include <optional>

#include "cavitate/curvature.hpp"
#include "cavitate/jacobi.hpp"

namespace cavitate {

/// Scalar coefficient b(eta) with derivatives; b(0) = 1 required.
struct RadialScalar {
    std::function<double(double)> b;
    std::function<double(double)> db;
    std::function<double(double)> d2b;

    static RadialScalar one();
    /// b(eta) = exp(c eta)
    static RadialScalar exponential(double c);
    /// b(eta) = sum_i coeffs[i] eta^i with coeffs[0] = 1 required
    static RadialScalar polynomial(std::vector<double> coeffs);
};

/// Level set {y : <Ay, y> = level}, a geodesic sphere rendered as a
/// Euclidean quadric.
struct QuadricDescriptor {
    Eigen::MatrixXd A;
    double level = 0.0;
    double evaluate(const Eigen::VectorXd& y) const { return y.dot(A * y); }
};

/// Metric G(x) on R^n whose geodesic balls about the origin are ellipsoids.
/// Two families:
///   - scalar family  G(x) = b(eta) A        with eta = sqrt(<Ax, x>),
///   - prescribed     G(x) = (f^2/eta^2) A + (1/eta^2)[1 - f^2/eta^2] Ax (Ax)^T,
/// the latter realizing a given radial curvature through its Jacobi
/// coefficient f.
class EllipsoidMetric {
public:
    static EllipsoidMetric from_scalar(int n, Eigen::MatrixXd A, RadialScalar b);
    static EllipsoidMetric prescribed(int n, Eigen::MatrixXd A, JacobiField f);

    int dimension() const;
    const Eigen::MatrixXd& A_matrix() const;

    Eigen::MatrixXd metric_at(const Eigen::VectorXd& x) const;

    /// geodesic reparametrization: sigma(t) solves sigma' = b^{-1/2}(sigma),
    /// sigma(0) = 0 (scalar family); identity eta = t for the prescribed one
    double sigma_of_radius(double t) const;

    /// radial curvature kappa(t) of the model (R^n, g, 0)
    CurvatureProfile radial_curvature(double t_max) const;

private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
    explicit EllipsoidMetric(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
};

/// Geodesic sphere of radius t about the origin: {y : <Ay, y> = sigma^2(t)}.
QuadricDescriptor ellipsoid_geodesic_sphere(const EllipsoidMetric& metric, double t);

/// Metric with prescribed radial curvature via the Jacobi coefficient f of
/// kappa; G(0) = A by the limit f(eta)/eta -> 1.
EllipsoidMetric prescribed_curvature_metric(int n, Eigen::MatrixXd A_matrix,
                                            const JacobiField& f);

}  // namespace cavitate
