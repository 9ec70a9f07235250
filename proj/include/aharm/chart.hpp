#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "aharm/diffusivity.hpp"

namespace aharm {

class AnnulusChart;

/// Values on the (sigma, theta) grid of a chart, row-major with the theta
/// index fastest.
class ScalarField {
public:
    ScalarField() = default;
    ScalarField(int n_sigma, int n_theta, double fill = 0.0)
        : n_sigma_(n_sigma), n_theta_(n_theta),
          values_(static_cast<size_t>(n_sigma) * n_theta, fill) {}

    int n_sigma() const { return n_sigma_; }
    int n_theta() const { return n_theta_; }
    double& operator()(int i, int j) { return values_[static_cast<size_t>(i) * n_theta_ + j]; }
    double operator()(int i, int j) const { return values_[static_cast<size_t>(i) * n_theta_ + j]; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }
    bool same_shape(const ScalarField& o) const {
        return n_sigma_ == o.n_sigma_ && n_theta_ == o.n_theta_;
    }

private:
    int n_sigma_ = 0;
    int n_theta_ = 0;
    std::vector<double> values_;
};

/// Vector field in the orthonormal frame (e_sigma_hat, e_theta_hat) of the
/// conformal metric, so inner products are plain componentwise dots.
struct VectorField {
    ScalarField c1;  ///< component along e_sigma / mu
    ScalarField c2;  ///< component along e_theta / mu
};

enum class Topology { annulus_in_disk, cylinder };

/// Conformal-factor specification for build_chart.
struct LambdaSpec {
    enum class Kind { flat, hyperbolic_disk, gaussian_bump, constant, user } kind = Kind::flat;
    double bump_c = 0.0;   ///< gaussian_bump exponent coefficient
    double value = 1.0;    ///< constant scale
    std::function<double(double /*x*/, double /*y*/)> field;  ///< user lambda(x, y)

    static LambdaSpec flat() { return {}; }
    static LambdaSpec hyperbolic_disk() { return {Kind::hyperbolic_disk, 0, 1, nullptr}; }
    static LambdaSpec gaussian_bump(double c) { return {Kind::gaussian_bump, c, 1, nullptr}; }
    static LambdaSpec constant(double v) { return {Kind::constant, 0, v, nullptr}; }
    static LambdaSpec user(std::function<double(double, double)> f) {
        return {Kind::user, 0, 1, std::move(f)};
    }
};

struct invalid_metric_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Tensor-product grid over the conformal rectangle [0, ln R] x [0, 2 pi).
/// sigma has n_sigma points including both ends; theta has n_theta periodic
/// points.  mu is the full chart conformal factor: lambda(z) r0 e^sigma for
/// the annulus-in-disk topology (z = r0 e^{sigma + i theta}), lambda alone
/// for the cylinder.  Immutable after construction.
class AnnulusChart {
public:
    double R = 2.0;
    int n_sigma = 0;
    int n_theta = 0;
    double h_sigma = 0.0;
    double h_theta = 0.0;
    double r0 = 1.0;  ///< inner physical radius of the embedded annulus
    Topology topology = Topology::annulus_in_disk;
    LambdaSpec lambda_spec;
    ScalarField mu;
    /// integral of K over the inner hole (disk r < r0) carried for
    /// Gauss-Bonnet bookkeeping; NaN when the metric has no analytic hole
    /// extension (user fields).
    double hole_K_integral = 0.0;

    double sigma(int i) const { return i * h_sigma; }
    double theta(int j) const { return j * h_theta; }
    /// physical radius of grid row i (annulus_in_disk embedding)
    double radius(int i) const { return r0 * std::exp(sigma(i)); }

    /// Riemannian cell area weights: mu^2 dsigma dtheta with trapezoidal
    /// weights in sigma.
    double area_weight(int i, int j) const;
};

/// Builds the chart; grid sizes must be at least 16 and R > 1.  Throws
/// invalid_metric_error when lambda <= 0 anywhere on the grid.
AnnulusChart build_chart(double R, int n_sigma, int n_theta,
                         const LambdaSpec& lambda = LambdaSpec::flat(),
                         Topology topology = Topology::annulus_in_disk);

/// Gauss curvature K = -mu^{-2} Laplacian_0 log mu on the grid, with a
/// compact 5-point stencil (one-sided second order at the sigma ends).
ScalarField gauss_curvature(const AnnulusChart& chart);

/// Sign classification of a curvature field: +1 nonnegative, -1 nonpositive,
/// 0 mixed (within tolerance).
int curvature_sign(const ScalarField& K, double tol = 1e-12);

/// First chart derivatives: centered interior, one-sided second order at the
/// sigma boundaries; periodic wrap in theta.
ScalarField d_sigma(const AnnulusChart& chart, const ScalarField& u);
ScalarField d_theta(const AnnulusChart& chart, const ScalarField& u);

/// Riemannian gradient in the orthonormal frame: (u_sigma / mu, u_theta / mu).
VectorField riemannian_gradient(const AnnulusChart& chart, const ScalarField& u);

/// div_g X = mu^{-2} [ d_sigma(mu X1) + d_theta(mu X2) ] for frame fields.
ScalarField riemannian_divergence(const AnnulusChart& chart, const VectorField& X);

/// Composition div_g(grad_g u); the discrete compatibility identity
/// riemannian_divergence(riemannian_gradient(u)) == riemannian_laplacian(u)
/// holds exactly by construction.
ScalarField riemannian_laplacian(const AnnulusChart& chart, const ScalarField& u);

/// |grad u|_g = mu^{-1} |grad_0 u|.
ScalarField grad_norm_g(const AnnulusChart& chart, const ScalarField& u);

/// Integral of f over the chart with dA_g = mu^2 dsigma dtheta.
double integrate_area(const AnnulusChart& chart, const ScalarField& f);

/// Integral of Laplacian u against dA_g minus the outward boundary flux;
/// used by the Stokes consistency check.
double stokes_defect(const AnnulusChart& chart, const ScalarField& u);

}  // namespace aharm
