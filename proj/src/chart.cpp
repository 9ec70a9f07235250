#include "aharm/chart.hpp"

#include <cmath>

namespace aharm {

namespace {

double lambda_value(const LambdaSpec& spec, double x, double y) {
    double r2 = x * x + y * y;
    switch (spec.kind) {
        case LambdaSpec::Kind::flat: return 1.0;
        case LambdaSpec::Kind::hyperbolic_disk: return 2.0 / (1.0 - r2);
        case LambdaSpec::Kind::gaussian_bump: return std::exp(spec.bump_c * r2);
        case LambdaSpec::Kind::constant: return spec.value;
        case LambdaSpec::Kind::user: return spec.field(x, y);
    }
    return 1.0;
}

/// K at disk radius r for the analytic metrics (isothermal formula in the
/// plane); user metrics have no closed form here.
double lambda_curvature_radial(const LambdaSpec& spec, double r) {
    switch (spec.kind) {
        case LambdaSpec::Kind::flat:
        case LambdaSpec::Kind::constant: return 0.0;
        case LambdaSpec::Kind::hyperbolic_disk: return -1.0;
        case LambdaSpec::Kind::gaussian_bump:
            // log lambda = c r^2, Laplacian_0 = 4c
            return -4.0 * spec.bump_c * std::exp(-2.0 * spec.bump_c * r * r);
        case LambdaSpec::Kind::user: return std::nan("");
    }
    return 0.0;
}

}  // namespace

double AnnulusChart::area_weight(int i, int j) const {
    double w = (i == 0 || i == n_sigma - 1) ? 0.5 : 1.0;
    double m = mu(i, j);
    return m * m * h_sigma * h_theta * w;
}

AnnulusChart build_chart(double R, int n_sigma, int n_theta,
                         const LambdaSpec& lambda, Topology topology) {
    if (!(R > 1.0)) throw domain_error("build_chart requires R > 1");
    if (n_sigma < 16 || n_theta < 16) throw domain_error("build_chart requires grid sizes >= 16");

    AnnulusChart c;
    c.R = R;
    c.n_sigma = n_sigma;
    c.n_theta = n_theta;
    c.h_sigma = std::log(R) / (n_sigma - 1);
    c.h_theta = 2.0 * M_PI / n_theta;
    c.topology = topology;
    c.lambda_spec = lambda;
    // the hyperbolic metric needs the image annulus inside the unit disk;
    // park it at outer radius 0.9
    c.r0 = (lambda.kind == LambdaSpec::Kind::hyperbolic_disk) ? 0.9 / R : 1.0;

    c.mu = ScalarField(n_sigma, n_theta);
    for (int i = 0; i < n_sigma; ++i) {
        double rad = c.r0 * std::exp(c.sigma(i));
        for (int j = 0; j < n_theta; ++j) {
            double th = c.theta(j);
            double lam = lambda_value(lambda, rad * std::cos(th), rad * std::sin(th));
            if (!(lam > 0.0) || !std::isfinite(lam))
                throw invalid_metric_error("conformal factor must be positive and finite");
            c.mu(i, j) = (topology == Topology::cylinder) ? lam : lam * rad;
        }
    }

    // K-mass of the inner hole, for Gauss-Bonnet interior integrals.
    if (topology == Topology::cylinder || lambda.kind == LambdaSpec::Kind::user) {
        c.hole_K_integral = std::nan("");
    } else {
        // radial metrics: 2 pi int_0^{r0} K(r) lambda^2(r) r dr by Simpson
        const int n = 2001;
        double h = c.r0 / (n - 1);
        double acc = 0.0;
        for (int k = 0; k < n; ++k) {
            double r = k * h;
            double lam = lambda_value(lambda, r, 0.0);
            double f = lambda_curvature_radial(lambda, r) * lam * lam * r;
            double w = (k == 0 || k == n - 1) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            acc += w * f;
        }
        c.hole_K_integral = 2.0 * M_PI * acc * h / 3.0;
    }
    return c;
}

ScalarField d_sigma(const AnnulusChart& chart, const ScalarField& u) {
    if (!u.same_shape(chart.mu)) throw domain_error("d_sigma: field shape mismatch");
    int ns = chart.n_sigma, nt = chart.n_theta;
    double h = chart.h_sigma;
    ScalarField out(ns, nt);
    for (int j = 0; j < nt; ++j) {
        out(0, j) = (-3.0 * u(0, j) + 4.0 * u(1, j) - u(2, j)) / (2.0 * h);
        out(ns - 1, j) = (3.0 * u(ns - 1, j) - 4.0 * u(ns - 2, j) + u(ns - 3, j)) / (2.0 * h);
    }
    for (int i = 1; i < ns - 1; ++i)
        for (int j = 0; j < nt; ++j) out(i, j) = (u(i + 1, j) - u(i - 1, j)) / (2.0 * h);
    return out;
}

ScalarField d_theta(const AnnulusChart& chart, const ScalarField& u) {
    if (!u.same_shape(chart.mu)) throw domain_error("d_theta: field shape mismatch");
    int ns = chart.n_sigma, nt = chart.n_theta;
    double h = chart.h_theta;
    ScalarField out(ns, nt);
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < nt; ++j) {
            int jp = (j + 1) % nt, jm = (j + nt - 1) % nt;
            out(i, j) = (u(i, jp) - u(i, jm)) / (2.0 * h);
        }
    return out;
}

VectorField riemannian_gradient(const AnnulusChart& chart, const ScalarField& u) {
    VectorField g{d_sigma(chart, u), d_theta(chart, u)};
    for (int i = 0; i < chart.n_sigma; ++i)
        for (int j = 0; j < chart.n_theta; ++j) {
            g.c1(i, j) /= chart.mu(i, j);
            g.c2(i, j) /= chart.mu(i, j);
        }
    return g;
}

ScalarField riemannian_divergence(const AnnulusChart& chart, const VectorField& X) {
    if (!X.c1.same_shape(chart.mu) || !X.c2.same_shape(chart.mu))
        throw domain_error("riemannian_divergence: field shape mismatch");
    ScalarField m1(chart.n_sigma, chart.n_theta), m2(chart.n_sigma, chart.n_theta);
    for (int i = 0; i < chart.n_sigma; ++i)
        for (int j = 0; j < chart.n_theta; ++j) {
            m1(i, j) = chart.mu(i, j) * X.c1(i, j);
            m2(i, j) = chart.mu(i, j) * X.c2(i, j);
        }
    ScalarField a = d_sigma(chart, m1);
    ScalarField b = d_theta(chart, m2);
    ScalarField out(chart.n_sigma, chart.n_theta);
    for (int i = 0; i < chart.n_sigma; ++i)
        for (int j = 0; j < chart.n_theta; ++j) {
            double m = chart.mu(i, j);
            out(i, j) = (a(i, j) + b(i, j)) / (m * m);
        }
    return out;
}

ScalarField riemannian_laplacian(const AnnulusChart& chart, const ScalarField& u) {
    return riemannian_divergence(chart, riemannian_gradient(chart, u));
}

ScalarField grad_norm_g(const AnnulusChart& chart, const ScalarField& u) {
    VectorField g = riemannian_gradient(chart, u);
    ScalarField out(chart.n_sigma, chart.n_theta);
    for (int i = 0; i < chart.n_sigma; ++i)
        for (int j = 0; j < chart.n_theta; ++j)
            out(i, j) = std::hypot(g.c1(i, j), g.c2(i, j));
    return out;
}

ScalarField gauss_curvature(const AnnulusChart& chart) {
    int ns = chart.n_sigma, nt = chart.n_theta;
    double hs = chart.h_sigma, ht = chart.h_theta;
    ScalarField lm(ns, nt);
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < nt; ++j) lm(i, j) = std::log(chart.mu(i, j));

    ScalarField K(ns, nt);
    auto dss = [&](int i, int j) {
        if (i == 0)
            return (2.0 * lm(0, j) - 5.0 * lm(1, j) + 4.0 * lm(2, j) - lm(3, j)) / (hs * hs);
        if (i == ns - 1)
            return (2.0 * lm(ns - 1, j) - 5.0 * lm(ns - 2, j) + 4.0 * lm(ns - 3, j) - lm(ns - 4, j)) /
                   (hs * hs);
        return (lm(i + 1, j) - 2.0 * lm(i, j) + lm(i - 1, j)) / (hs * hs);
    };
    for (int i = 0; i < ns; ++i)
        for (int j = 0; j < nt; ++j) {
            int jp = (j + 1) % nt, jm = (j + nt - 1) % nt;
            double dtt = (lm(i, jp) - 2.0 * lm(i, j) + lm(i, jm)) / (ht * ht);
            double m = chart.mu(i, j);
            K(i, j) = -(dss(i, j) + dtt) / (m * m);
        }
    return K;
}

int curvature_sign(const ScalarField& K, double tol) {
    double mn = 1e300, mx = -1e300;
    for (double v : K.values()) {
        mn = std::min(mn, v);
        mx = std::max(mx, v);
    }
    if (mx <= tol) return -1;
    if (mn >= -tol) return +1;
    return 0;
}

double integrate_area(const AnnulusChart& chart, const ScalarField& f) {
    if (!f.same_shape(chart.mu)) throw domain_error("integrate_area: field shape mismatch");
    double acc = 0.0;
    for (int i = 0; i < chart.n_sigma; ++i)
        for (int j = 0; j < chart.n_theta; ++j) acc += f(i, j) * chart.area_weight(i, j);
    return acc;
}

double stokes_defect(const AnnulusChart& chart, const ScalarField& u) {
    ScalarField lap = riemannian_laplacian(chart, u);
    double vol = integrate_area(chart, lap);
    ScalarField us = d_sigma(chart, u);
    double flux = 0.0;
    int ns = chart.n_sigma;
    for (int j = 0; j < chart.n_theta; ++j) {
        // outward normal flux with dH^1 = mu dtheta: <grad u, n>_g = u_sigma / mu
        flux += us(ns - 1, j) * chart.h_theta;
        flux -= us(0, j) * chart.h_theta;
    }
    return vol - flux;
}

}  // namespace aharm
