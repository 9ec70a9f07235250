#include <doctest.h>

#include <cmath>

#include "aharm/diffusivity.hpp"

using namespace aharm;

TEST_CASE("builtin structure bounds match the closed forms") {
    auto p3 = p_harmonic_model(3.0);
    CHECK(p3.alpha() == doctest::Approx(2.0));
    CHECK(p3.beta() == doctest::Approx(2.0));

    auto p2 = p_harmonic_model(2.0);
    CHECK(p2.a(0.37) == doctest::Approx(1.0));
    CHECK(p2.D(5.1) == doctest::Approx(0.0));

    auto gas = subsonic_gas_model(3.0);
    CHECK(gas.alpha() == doctest::Approx(2.0 / 3.0));
    CHECK(gas.beta() == doctest::Approx(1.0));

    auto ms = minimal_surface_model();
    CHECK(ms.alpha() == doctest::Approx(0.0));
    CHECK(ms.beta() == doctest::Approx(1.0));

    auto lor = maximal_lorentz_model(0.8);
    CHECK(lor.alpha() == doctest::Approx(1.0));
    CHECK(lor.beta() == doctest::Approx(1.0 / (1.0 - 0.64)));

    CHECK_THROWS_AS(p_harmonic_model(1.0), domain_error);
    CHECK_THROWS_AS(subsonic_gas_model(0.9), domain_error);
    CHECK_THROWS_AS(maximal_lorentz_model(1.0), domain_error);
    CHECK_THROWS_AS(maximal_lorentz_model(-0.1), domain_error);
}

TEST_CASE("sampled structure condition holds on the admissible range") {
    std::vector<DiffusivityModel> models;
    models.push_back(p_harmonic_model(1.5));
    models.push_back(p_harmonic_model(2.0));
    models.push_back(p_harmonic_model(3.0));
    models.push_back(p_harmonic_model(4.0));
    models.push_back(minimal_surface_model());
    models.push_back(subsonic_gas_model(3.0));
    models.push_back(maximal_lorentz_model(0.8));
    models.push_back(valtorta_model(7));

    for (const auto& m : models) {
        CAPTURE(m.name());
        double hi = std::min(1e3, m.s_struct() * (1.0 - 1e-6));
        for (double s : log_space(1e-6, hi, 500)) {
            double v = 1.0 + m.D(s);
            CHECK(v >= m.alpha() - 1e-7);
            CHECK(v <= m.beta() + 1e-7);
        }
    }
}

TEST_CASE("structure report classifies the builtins") {
    auto rep2 = structure_report(p_harmonic_model(2.0));
    CHECK(rep2.alpha_hat == doctest::Approx(1.0));
    CHECK(rep2.beta_hat == doctest::Approx(1.0));
    CHECK(rep2.holds_A);
    CHECK(rep2.holds_Aprime);
    CHECK(rep2.A2_class == LogBoundClass::both);

    auto rep3 = structure_report(p_harmonic_model(3.0));
    CHECK(rep3.A2_class == LogBoundClass::upper_bounded);

    auto rep15 = structure_report(p_harmonic_model(1.5));
    CHECK(rep15.A2_class == LogBoundClass::lower_bounded);

    auto repms = structure_report(minimal_surface_model());
    CHECK(repms.beta_hat == doctest::Approx(1.0));
    CHECK(repms.alpha_hat < 1e-5);  // degenerates as the grid extends upward
    CHECK(repms.holds_Aprime);
    CHECK(repms.A2_class == LogBoundClass::both);

    auto repv = structure_report(valtorta_model(7));
    CHECK(repv.A2_class == LogBoundClass::neither);
    CHECK(repv.alpha_hat == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(repv.beta_hat == doctest::Approx(3.0).epsilon(1e-6));
    CHECK(repv.holds_A);
    CHECK(repv.holds_Aprime);
}

TEST_CASE("minimal surface alpha_hat marches to zero as the grid extends") {
    auto ms = minimal_surface_model();
    double prev = 1.0;
    for (double hi : {1e1, 1e2, 1e3, 1e4}) {
        auto rep = structure_report(ms, log_space(1e-6, hi, 800));
        CHECK(rep.alpha_hat < prev);
        prev = rep.alpha_hat;
    }
    CHECK(prev < 1e-7);
}

TEST_CASE("valtorta log a sets unbounded records in both directions") {
    // Envelope touches are sparse in s (the corner positions grow
    // geometrically in t = -log s), so records need very deep grids.
    auto v = valtorta_model(7);
    double prev_max = -1e300, prev_min = 1e300;
    int new_max_records = 0, new_min_records = 0;
    for (double smin : {1e-6, 1e-40, 1e-280}) {
        double mx = -1e300, mn = 1e300;
        for (double s : log_space(smin, 1.0, 4000)) {
            double la = std::log(v.a(s));
            mx = std::max(mx, la);
            mn = std::min(mn, la);
        }
        if (mx > prev_max + 1.0) ++new_max_records;
        if (mn < prev_min - 1.0) ++new_min_records;
        prev_max = std::max(prev_max, mx);
        prev_min = std::min(prev_min, mn);
    }
    CHECK(new_max_records >= 3);
    CHECK(new_min_records >= 3);
}

TEST_CASE("flux map and its inverse") {
    auto p3 = p_harmonic_model(3.0);
    CHECK(flux_map(p3, 2.0) == doctest::Approx(4.0));  // F(t) = t^2
    CHECK(invert_flux(p3, 4.0) == doctest::Approx(2.0).epsilon(1e-11));

    auto p2 = p_harmonic_model(2.0);
    for (double w : {1e-3, 0.5, 1.0, 7.0, 1e3})
        CHECK(invert_flux(p2, w) == doctest::Approx(w).epsilon(1e-11));

    auto ms = minimal_surface_model();
    CHECK(flux_map(ms, 1.0) == doctest::Approx(1.0 / std::sqrt(2.0)));
    CHECK_THROWS_AS(invert_flux(ms, 1.0), domain_error);  // range of F is (0,1)
    CHECK_THROWS_AS(invert_flux(ms, 1.7), domain_error);

    // Lorentz flux has full range [0, inf) despite s_max = 1; the w-space
    // roundtrip error is the s-tolerance amplified by 1 + D
    auto lor = maximal_lorentz_model(0.9);
    double s = invert_flux(lor, 50.0);
    CHECK(s < 1.0);
    CHECK(flux_map(lor, s) == doctest::Approx(50.0).epsilon(1e-8));
}

TEST_CASE("invert_flux o flux_map is the identity over a wide grid") {
    std::vector<DiffusivityModel> models;
    models.push_back(p_harmonic_model(1.5));
    models.push_back(p_harmonic_model(3.7));
    models.push_back(minimal_surface_model());
    models.push_back(subsonic_gas_model(3.0));
    models.push_back(maximal_lorentz_model(0.8));
    models.push_back(valtorta_model(3));
    for (const auto& m : models) {
        CAPTURE(m.name());
        // Relative error in the inverse is amplified by 1/(1+D); keep the
        // sample range where that stays comfortably above roundoff.
        double hi = std::min(1e3, m.s_max() * (1.0 - 1e-6));
        if (m.kind() == ModelKind::minimal_surface) hi = 100.0;
        if (m.kind() == ModelKind::subsonic_gas) hi = m.s_struct();
        for (double t : log_space(1e-6, hi, 1000)) {
            double w = flux_map(m, t);
            CHECK(invert_flux(m, w) == doctest::Approx(t).epsilon(1e-10));
        }
    }
}

TEST_CASE("half flux map") {
    auto p4 = p_harmonic_model(4.0);
    CHECK(half_flux_map(p4, 3.0) == doctest::Approx(9.0));  // A(s) = s^2
    CHECK(invert_half_flux(p4, 9.0) == doctest::Approx(3.0).epsilon(1e-11));

    auto p2 = p_harmonic_model(2.0);
    CHECK(half_flux_map(p2, 0.73) == doctest::Approx(0.73));

    auto ms = minimal_surface_model();
    CHECK(half_flux_map(ms, 1.0) == doctest::Approx(std::pow(2.0, -0.25)));
}

TEST_CASE("conjugate models") {
    auto p3 = p_harmonic_model(3.0);
    auto b = conjugate_model(p3);
    // q-harmonic with q = 3/2: b(t) = t^{-1/2}
    CHECK(b.alpha() == doctest::Approx(0.5));
    CHECK(b.beta() == doctest::Approx(0.5));
    CHECK(b.a(4.0) == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(b.a(0.25) == doctest::Approx(2.0).epsilon(1e-10));

    auto p2 = p_harmonic_model(2.0);
    auto b2 = conjugate_model(p2);
    for (double t : {0.1, 1.0, 42.0}) CHECK(b2.a(t) == doctest::Approx(1.0).epsilon(1e-10));

    auto ms = minimal_surface_model();
    auto bl = conjugate_model(ms);
    // maximal graph operator 1/sqrt(1 - t^2) on (0,1)
    CHECK(bl.a(0.6) == doctest::Approx(1.25).epsilon(1e-9));
    CHECK(bl.alpha() == doctest::Approx(1.0));
    CHECK(std::isfinite(bl.s_max()));
    CHECK(bl.s_max() == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("conjugation is an involution") {
    for (auto* make : {+[] { return p_harmonic_model(3.0); },
                       +[] { return p_harmonic_model(1.5); },
                       +[] { return minimal_surface_model(); }}) {
        auto m = make();
        auto cc = conjugate_model(conjugate_model(m));
        double hi = std::min(10.0, m.s_max() * (1.0 - 1e-6));
        for (double s : log_space(0.1, hi, 40)) {
            CHECK(cc.a(s) == doctest::Approx(m.a(s)).epsilon(1e-8));
        }
    }
}

TEST_CASE("elliptic coefficients") {
    auto p4 = p_harmonic_model(4.0);
    auto ec = elliptic_coefficients(p4, 1.7);  // D = 2 at every s
    CHECK(ec.D == doctest::Approx(2.0));
    CHECK(ec.B == doctest::Approx(0.25));
    CHECK(ec.B_ratio == doctest::Approx(1.0 / 3.0));
    CHECK(ec.C == doctest::Approx(-0.2));
    CHECK(ec.abs_sum / 2.0 == doctest::Approx(1.0 / 3.0));

    auto p2 = p_harmonic_model(2.0);
    auto e0 = elliptic_coefficients(p2, 1.0);
    CHECK(e0.B == doctest::Approx(0.0));
    CHECK(e0.C == doctest::Approx(0.0));
    CHECK(e0.abs_sum == doctest::Approx(0.0));

    for (double p : {1.5, 2.5, 3.0, 7.0}) {
        auto e = elliptic_coefficients(p_harmonic_model(p), 0.9);
        CHECK(e.B_ratio == doctest::Approx((p - 2.0) / (p + 2.0)));
    }

    CHECK_THROWS_AS(elliptic_coefficients_at_D(-1.0), structure_error);
    CHECK_THROWS_AS(elliptic_coefficients_at_D(-1.5), structure_error);
}

TEST_CASE("ellipticity bound abs_sum < 2 across the admissible D range") {
    for (int i = 0; i < 10000; ++i) {
        double D = -1.0 + (21.0 * (i + 1)) / 10001.0;  // (-1, 20]
        auto ec = elliptic_coefficients_at_D(D);
        CHECK(ec.abs_sum < 2.0);
    }
}

TEST_CASE("cordes constants") {
    auto cc = cordes_constants(1.0, 1.0, 2.0);
    CHECK(cc.c2 == doctest::Approx(1.5));

    auto def = cordes_constants(1.0, 1.0);
    CHECK(def.c1 == doctest::Approx(1.01));  // threshold (1+1)/2 = 1
    CHECK(def.c2 > 0.0);

    // p = 3: threshold (1+4)/4
    auto p3 = cordes_constants(2.0, 2.0);
    CHECK(p3.c1 == doctest::Approx(1.01 * 1.25));
    CHECK(2.0 * p3.c1 * p3.alpha - 1.0 - p3.beta * p3.beta > 0.0);

    CHECK_THROWS_AS(cordes_constants(0.0, 1.0), domain_error);
    CHECK_THROWS_AS(cordes_constants(1.0, 1.0, 0.5), domain_error);
}

TEST_CASE("riccati gamma coefficient") {
    CHECK(riccati_gamma(2.0, 2.0, 0.3) == doctest::Approx(1.0));
    CHECK(riccati_gamma(2.0, 2.0, 11.0) == doctest::Approx(1.0));
    CHECK(riccati_gamma(4.0, 3.0, 0.5) == doctest::Approx(0.8));
    CHECK(riccati_gamma(4.0, 3.0, 9.0) == doctest::Approx(0.8));
    // q != 1 + p/2 leaves an s-dependence
    CHECK(riccati_gamma(4.0, 2.0, 2.0) != doctest::Approx(riccati_gamma(4.0, 2.0, 4.0)));
    CHECK(riccati_gamma(4.0, 2.0, 2.0) == doctest::Approx(0.4));
    CHECK(riccati_gamma(4.0, 2.0, 4.0) == doctest::Approx(0.2));
}

TEST_CASE("model json round trip") {
    auto p3 = p_harmonic_model(3.0);
    auto back = model_from_json(model_to_json(p3));
    CHECK(back.alpha() == doctest::Approx(2.0));
    CHECK(back.a(1.7) == doctest::Approx(p3.a(1.7)));

    auto lor = maximal_lorentz_model(0.8);
    auto lback = model_from_json(model_to_json(lor));
    CHECK(lback.beta() == doctest::Approx(lor.beta()));

    auto v = valtorta_model(9);
    auto vback = model_from_json(model_to_json(v));
    CHECK(vback.a(1e-3) == doctest::Approx(v.a(1e-3)));

    CHECK_THROWS(model_from_json("{\"name\":\"nope\"}"));
}

TEST_CASE("user model falls back to finite difference derivative") {
    auto m = user_model("quadratic", [](double s) { return 1.0 + s * s; }, 0.1, 3.0);
    CHECK(m.a_prime(2.0) == doctest::Approx(4.0).epsilon(1e-6));
    CHECK(m.D(1.0) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("evaluation errors carry the offending point") {
    auto bad = user_model("bad", [](double s) { return s < 0.5 ? -1.0 : 1.0; }, 0.5, 1.5);
    CHECK_THROWS_AS(bad.a(0.1), evaluation_error);
    CHECK_THROWS_AS(structure_report(bad, log_space(1e-3, 10.0, 50)), evaluation_error);
}
