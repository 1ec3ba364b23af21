#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fmc/fmc.hpp"
#include "oracle_helpers.hpp"

using namespace fmc;
using namespace fmc_test;

TEST_CASE("bandwidth and perturbation plug-ins") {
    // 32^{-1/5} = 1/2 and 32^{-2/5} = 1/4 exactly.
    CHECK(default_bandwidth(32) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(default_bandwidth(32, 0.8) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(phi_plugin(32, 1.0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(phi_plugin(32, 2.0) == doctest::Approx(0.5).epsilon(1e-15));

    // Power-law ratio: multiplying m by 32 halves b.
    for (int m : {50, 500, 5000})
        CHECK(default_bandwidth(32 * m) / default_bandwidth(m) == doctest::Approx(0.5).epsilon(1e-13));

    CHECK_THROWS_AS(default_bandwidth(2), domain_error);
    CHECK_THROWS_AS(phi_plugin(2, 1.0), domain_error);
    CHECK_THROWS_AS(phi_plugin(32, 0.0), domain_error);
}

TEST_CASE("smoother validation") {
    SmootherSpec spec;
    spec.b = 0.0;
    CHECK_THROWS_AS(validate_smoother(spec), domain_error);

    spec.b = 0.1;
    spec.W.value = [](double t) { return std::abs(t) < 1.0 ? 1.5 * (1 - t * t) : 0.0; };
    CHECK_THROWS_AS(validate_smoother(spec), domain_error);  // integrates to 2

    spec.W.value = [](double t) { return std::abs(t) < 1.0 ? t : 0.0; };
    CHECK_THROWS_AS(validate_smoother(spec), domain_error);  // negative part

    spec.W = epanechnikov_weight();
    validate_smoother(spec);  // default Epanechnikov passes
}

TEST_CASE("gm_smooth maps constants to constants") {
    auto g = make_grid(101);
    std::vector<double> row(g->m, 3.7);
    SmootherSpec spec;
    spec.b = 0.15;

    // Renormalized: num/den = 3.7 pointwise, so the shifted output is zero.
    spec.boundary = Boundary::renormalize;
    Curve out = gm_smooth(row, g, spec, g);
    for (double v : out.values) CHECK(std::abs(v) < 1e-12);

    // Reflected: the mirrored segments restore full kernel mass near the ends.
    spec.boundary = Boundary::reflect;
    Curve ref = gm_smooth(row, g, spec, g);
    for (double v : ref.values) CHECK(std::abs(v) < 1e-6);
}

TEST_CASE("gm_smooth is linear in the observations") {
    auto g = make_grid(81);
    Rng rng(12);
    std::vector<double> r1(g->m), r2(g->m), combo(g->m);
    for (int j = 0; j < g->m; ++j) {
        r1[j] = rng.normal();
        r2[j] = rng.normal();
        combo[j] = 2.0 * r1[j] - 0.5 * r2[j];
    }
    SmootherSpec spec;
    spec.b = 0.1;
    for (Boundary bnd : {Boundary::renormalize, Boundary::reflect}) {
        spec.boundary = bnd;
        Curve a = gm_smooth(r1, g, spec, g);
        Curve b = gm_smooth(r2, g, spec, g);
        Curve c = gm_smooth(combo, g, spec, g);
        for (int j = 0; j < g->m; ++j)
            CHECK(std::abs(c.values[j] - (2.0 * a.values[j] - 0.5 * b.values[j])) < 1e-12);
    }
}

TEST_CASE("gm_smooth bias on a noiseless smooth curve") {
    // 1 - cos(pi t) vanishes at 0 with zero derivative at both endpoints, so
    // neither boundary bias nor the t=0 shift pinning contaminates the check.
    auto g = make_grid(201);
    std::vector<double> row(g->m);
    for (int j = 0; j < g->m; ++j) row[j] = 1.0 - std::cos(M_PI * g->points[j]);
    SmootherSpec spec;
    spec.b = 0.06;
    spec.boundary = Boundary::renormalize;
    Curve out = gm_smooth(row, g, spec, g);
    // Interior bias is O(b^2 f''): |f''| <= pi^2 keeps it under 0.01.
    for (int j = 0; j < g->m; ++j) {
        const double t = g->points[j];
        if (t < spec.b || t > 1 - spec.b) continue;
        CHECK(std::abs(out.values[j] - row[j]) < 0.01);
    }
    // The L2 distance to the truth is small overall.
    Curve truth{g, row};
    CHECK(dist_l2(out, normalize_shift(truth)) < 0.02);
}

TEST_CASE("gm_smooth averages out observation noise") {
    auto g = make_grid(401);
    Rng rng(13);
    std::vector<double> clean(g->m), noisy(g->m);
    const double sigma = 0.2;
    for (int j = 0; j < g->m; ++j) {
        clean[j] = 1.0 - std::cos(M_PI * g->points[j]);
        noisy[j] = clean[j] + sigma * rng.normal();
    }
    SmootherSpec spec;
    spec.b = 0.1;
    Curve out = gm_smooth(noisy, g, spec, g);
    Curve truth = normalize_shift(Curve{g, clean});
    Curve raw = normalize_shift(Curve{g, noisy});
    CHECK(dist_l2(out, truth) < 0.5 * dist_l2(raw, truth));
}

TEST_CASE("gm_smooth undersmoothing detection") {
    auto design = make_grid(11);
    auto eval = make_grid(21);
    std::vector<double> row(design->m, 1.0);
    SmootherSpec spec;
    spec.b = 1e-4;  // window narrower than the quadrature spacing
    CHECK_THROWS_AS(gm_smooth(row, design, spec, eval), undersmoothing_error);
}

TEST_CASE("gm_smooth input guards") {
    auto g = make_grid(51);
    std::vector<double> short_row(10, 0.0);
    SmootherSpec spec;
    spec.b = 0.1;
    CHECK_THROWS_AS(gm_smooth(short_row, g, spec, g), error);
}

TEST_CASE("reconstruct_sample recovers noiseless curves") {
    auto g = make_grid(201);
    MixtureSpec mspec;
    mspec.basis = sin_basis(2, g);
    mspec.seed = 3;
    mspec.components = {{{1.0, 0.3}, {0.1, 0.1}, 1.0}};
    auto draw = sample_mixture(mspec, 5);
    Observations obs = observe_noisy(draw.sample, 0.0, 4);

    SmootherSpec spec;
    spec.b = 0.05;
    CurveSample rec = reconstruct_sample(obs, spec, g);
    REQUIRE(rec.curves.size() == draw.sample.curves.size());
    // The sin-basis curves have f'(0) != 0, so the t=0 pinning turns the O(b)
    // boundary bias of the smoother into a constant offset; 0.1 covers it at
    // b = 0.05.
    for (size_t i = 0; i < rec.curves.size(); ++i)
        CHECK(dist_l2(rec.curves[i], draw.sample.curves[i]) < 0.1);
}
