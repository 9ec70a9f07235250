#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "aharm/chart.hpp"
#include "aharm/io.hpp"

using namespace aharm;

namespace {

double max_abs(const ScalarField& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

ScalarField nodal(const AnnulusChart& c, const std::function<double(double, double)>& f) {
    ScalarField out(c.n_sigma, c.n_theta);
    for (int i = 0; i < c.n_sigma; ++i)
        for (int j = 0; j < c.n_theta; ++j) out(i, j) = f(c.sigma(i), c.theta(j));
    return out;
}

}  // namespace

TEST_CASE("chart construction") {
    auto flat = build_chart(2.0, 32, 32);
    CHECK(flat.h_sigma == doctest::Approx(std::log(2.0) / 31));
    for (int i = 0; i < flat.n_sigma; ++i)
        for (int j = 0; j < flat.n_theta; ++j)
            CHECK(flat.mu(i, j) == doctest::Approx(std::exp(flat.sigma(i))));

    auto cyl = build_chart(std::exp(1.0), 32, 32, LambdaSpec::flat(), Topology::cylinder);
    for (double v : cyl.mu.values()) CHECK(v == doctest::Approx(1.0));

    auto hyp = build_chart(2.0, 32, 32, LambdaSpec::hyperbolic_disk());
    CHECK(hyp.r0 == doctest::Approx(0.45));
    CHECK(hyp.radius(hyp.n_sigma - 1) == doctest::Approx(0.9));

    CHECK_THROWS_AS(build_chart(0.9, 32, 32), domain_error);
    CHECK_THROWS_AS(build_chart(2.0, 8, 32), domain_error);
    CHECK_THROWS_AS(build_chart(2.0, 32, 32, LambdaSpec::constant(-1.0)), invalid_metric_error);
    CHECK_THROWS_AS(
        build_chart(2.0, 32, 32, LambdaSpec::user([](double x, double) { return x - 1.05; })),
        invalid_metric_error);
}

TEST_CASE("gauss curvature of the analytic metrics") {
    auto flat = build_chart(2.0, 48, 48);
    CHECK(max_abs(gauss_curvature(flat)) < 1e-10);
    CHECK(curvature_sign(gauss_curvature(flat)) == -1);  // nonpositive ties win

    auto hyp = build_chart(2.0, 64, 64, LambdaSpec::hyperbolic_disk());
    auto K = gauss_curvature(hyp);
    for (int i = 1; i < hyp.n_sigma - 1; ++i)
        for (int j = 0; j < hyp.n_theta; ++j)
            CHECK(K(i, j) == doctest::Approx(-1.0).epsilon(1e-2));
    for (int j = 0; j < hyp.n_theta; ++j) {  // one-sided rows carry a bigger constant
        CHECK(K(0, j) == doctest::Approx(-1.0).epsilon(0.1));
        CHECK(K(hyp.n_sigma - 1, j) == doctest::Approx(-1.0).epsilon(0.1));
    }
    CHECK(curvature_sign(K, 1e-6) == -1);

    double c = 0.3;
    auto bump = build_chart(2.0, 64, 64, LambdaSpec::gaussian_bump(c));
    auto Kb = gauss_curvature(bump);
    for (int i = 0; i < bump.n_sigma; ++i) {
        double r = bump.radius(i);
        double expect = -4.0 * c * std::exp(-2.0 * c * r * r);
        for (int j = 0; j < bump.n_theta; ++j)
            CHECK(Kb(i, j) == doctest::Approx(expect).epsilon(5e-3));
    }

    // positive curvature diagnostic: negative bump coefficient
    auto pos = build_chart(2.0, 32, 32, LambdaSpec::gaussian_bump(-0.3));
    CHECK(curvature_sign(gauss_curvature(pos), 1e-9) == +1);
}

TEST_CASE("gauss curvature converges at second order") {
    // The bump metric is in the asymptotic regime from 32^2 on; the
    // hyperbolic one carries large high-order derivatives near the 0.9 rim
    // and reaches its order later.
    for (auto spec : {LambdaSpec::hyperbolic_disk(), LambdaSpec::gaussian_bump(0.4)}) {
        bool hyp = spec.kind == LambdaSpec::Kind::hyperbolic_disk;
        std::vector<int> grids = hyp ? std::vector<int>{64, 128, 256}
                                     : std::vector<int>{32, 64, 128};
        double errs[3];
        int k = 0;
        for (int n : grids) {
            auto c = build_chart(2.0, n, n, spec);
            auto K = gauss_curvature(c);
            double e = 0.0;
            for (int i = 0; i < c.n_sigma; ++i) {
                double r = c.radius(i);
                double expect = hyp ? -1.0
                                    : -4.0 * spec.bump_c * std::exp(-2.0 * spec.bump_c * r * r);
                for (int j = 0; j < c.n_theta; ++j) e = std::max(e, std::abs(K(i, j) - expect));
            }
            errs[k++] = e;
        }
        double order1 = std::log2(errs[0] / errs[1]);
        double order2 = std::log2(errs[1] / errs[2]);
        CHECK(order1 >= (hyp ? 1.6 : 1.8));
        CHECK(order2 >= (hyp ? 1.7 : 1.8));
    }
}

TEST_CASE("riemannian operators on reference fields") {
    auto flat = build_chart(2.0, 64, 64);
    auto u = nodal(flat, [](double s, double) { return s; });

    auto W = grad_norm_g(flat, u);
    for (int i = 0; i < flat.n_sigma; ++i)
        for (int j = 0; j < flat.n_theta; ++j)
            CHECK(W(i, j) == doctest::Approx(std::exp(-flat.sigma(i))).epsilon(1e-12));

    // log r is harmonic in the plane
    CHECK(max_abs(riemannian_laplacian(flat, u)) < 1e-10);

    auto hyp = build_chart(2.0, 64, 64, LambdaSpec::hyperbolic_disk());
    auto uh = nodal(hyp, [](double s, double) { return s; });
    auto Wh = grad_norm_g(hyp, uh);
    for (int i = 0; i < hyp.n_sigma; ++i) {
        double r = hyp.radius(i);
        double expect = (1.0 - r * r) / (2.0 * r);
        for (int j = 0; j < hyp.n_theta; ++j)
            CHECK(Wh(i, j) == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("divergence of gradient equals the laplacian exactly") {
    auto chart = build_chart(2.5, 48, 40, LambdaSpec::gaussian_bump(0.2));
    std::mt19937_64 gen(42);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    ScalarField u(chart.n_sigma, chart.n_theta);
    for (double& v : u.values()) v = dist(gen);

    auto lap = riemannian_laplacian(chart, u);
    auto div = riemannian_divergence(chart, riemannian_gradient(chart, u));
    for (size_t k = 0; k < lap.values().size(); ++k)
        CHECK(lap.values()[k] == doctest::Approx(div.values()[k]).epsilon(1e-14));
}

TEST_CASE("stokes consistency on a smooth field") {
    auto chart = build_chart(2.0, 128, 128, LambdaSpec::gaussian_bump(0.25));
    auto u = nodal(chart, [](double s, double t) {
        return std::exp(s) * std::sin(3.0 * t) + 0.5 * s * s;
    });
    double defect = stokes_defect(chart, u);
    // normalize by the boundary flux scale
    auto us = d_sigma(chart, u);
    double flux = 0.0;
    for (int j = 0; j < chart.n_theta; ++j)
        flux += std::abs(us(chart.n_sigma - 1, j)) * chart.h_theta;
    CHECK(std::abs(defect) / std::max(flux, 1e-30) <= 1e-3);
}

TEST_CASE("field io round trip") {
    auto chart = build_chart(2.0, 32, 32);
    auto u = nodal(chart, [](double s, double t) { return s * std::cos(t); });

    write_field_dump("/tmp/aharm_test_field.bin", chart, u);
    double R = 0.0;
    auto back = read_field_dump("/tmp/aharm_test_field.bin", &R);
    CHECK(R == doctest::Approx(2.0));
    REQUIRE(back.same_shape(u));
    for (size_t k = 0; k < u.values().size(); ++k)
        CHECK(back.values()[k] == u.values()[k]);

    write_field_csv("/tmp/aharm_test_field.csv", chart, u);
    std::FILE* fp = std::fopen("/tmp/aharm_test_field.csv", "r");
    REQUIRE(fp);
    char line[128];
    REQUIRE(std::fgets(line, sizeof(line), fp));
    CHECK(std::string(line) == "sigma,theta,value\n");
    std::fclose(fp);

    CHECK_THROWS_AS(read_field_dump("/tmp/definitely_missing_file.bin"), io_error);
}
