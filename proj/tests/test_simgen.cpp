#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fmc/fmc.hpp"
#include "oracle_helpers.hpp"

using namespace fmc;
using namespace fmc_test;

namespace {

MixtureSpec two_component_spec(const GridPtr& g, std::uint64_t seed) {
    MixtureSpec spec;
    spec.basis = sin_basis(3, g);
    spec.seed = seed;
    spec.components = {{{1.0, 0.0, 0.2}, {0.1, 0.1, 0.1}, 0.4},
                       {{-1.0, 0.5, 0.0}, {0.15, 0.1, 0.1}, 0.6}};
    return spec;
}

/// Residual after projecting x onto the basis span.
double span_residual(const Curve& x, const SubspaceBasis& basis) {
    auto coeffs = project(x, basis);
    Curve back = linear_combination(coeffs, basis.basis);
    return dist_l2(x, back);
}

}  // namespace

TEST_CASE("sin_basis is orthonormal and vanishes at t=0") {
    auto g = make_grid(101);
    auto basis = sin_basis(4, g);
    REQUIRE(basis.basis.size() == 4);
    for (size_t a = 0; a < basis.basis.size(); ++a) {
        CHECK(basis.basis[a].values[0] == 0.0);
        for (size_t b = 0; b < basis.basis.size(); ++b)
            CHECK(std::abs(inner_l2(basis.basis[a], basis.basis[b]) - (a == b ? 1.0 : 0.0)) < 1e-10);
    }
    CHECK_THROWS_AS(sin_basis(0, g), domain_error);
    CHECK_THROWS_AS(sin_basis(g->m - 1, g), domain_error);
}

TEST_CASE("mixture validation") {
    auto g = make_grid(51);
    MixtureSpec spec;
    spec.basis = sin_basis(2, g);
    CHECK_THROWS_AS(validate_mixture(spec), domain_error);  // no components
    spec.components = {{{1.0}, {0.1}, 1.0}};
    CHECK_THROWS_AS(validate_mixture(spec), domain_error);  // dimension mismatch
    spec.components = {{{1.0, 0.0}, {0.1, 0.1}, 0.7}};
    CHECK_THROWS_AS(validate_mixture(spec), domain_error);  // weights != 1
    spec.components = {{{1.0, 0.0}, {0.1, 0.1}, 0.7}, {{0.0, 1.0}, {0.1, 0.1}, 0.3}};
    validate_mixture(spec);
}

TEST_CASE("sample_mixture is seed-deterministic and lives in the span") {
    auto g = make_grid(101);
    auto spec = two_component_spec(g, 123);
    auto a = sample_mixture(spec, 50);
    auto b = sample_mixture(spec, 50);
    REQUIRE(a.sample.curves.size() == 50);
    CHECK(a.sample.labels == b.sample.labels);
    for (int i = 0; i < 50; ++i)
        CHECK(a.sample.curves[i].values == b.sample.curves[i].values);  // bit-identical

    auto c = sample_mixture(two_component_spec(g, 124), 50);
    CHECK(a.sample.curves[0].values != c.sample.curves[0].values);

    for (const auto& curve : a.sample.curves) CHECK(span_residual(curve, spec.basis) < 1e-10);
    for (const auto& mean : a.component_means) CHECK(span_residual(mean, spec.basis) < 1e-10);
}

TEST_CASE("sample_mixture empirical moments") {
    auto g = make_grid(101);
    auto spec = two_component_spec(g, 7);
    const int n = 4000;
    auto draw = sample_mixture(spec, n);

    std::vector<int> counts(2, 0);
    std::vector<std::vector<double>> sums(2, std::vector<double>(3, 0.0));
    for (int i = 0; i < n; ++i) {
        const int k = draw.sample.labels[i];
        ++counts[k];
        for (int j = 0; j < 3; ++j) sums[k][j] += draw.coefficients[i][j];
    }
    // Component frequencies match the weights to ~4 binomial sigmas.
    CHECK(std::abs(counts[0] / static_cast<double>(n) - 0.4) <
          4.0 * std::sqrt(0.4 * 0.6 / n));
    // Per-component coefficient means within 4 sigma / sqrt(n_k).
    for (int k = 0; k < 2; ++k)
        for (int j = 0; j < 3; ++j) {
            const double mean = sums[k][j] / counts[k];
            const double tol = 4.0 * spec.components[k].stddev[j] / std::sqrt(counts[k]);
            CHECK(std::abs(mean - spec.components[k].mean[j]) < tol);
        }
}

TEST_CASE("observe_noisy") {
    auto g = make_grid(51);
    auto spec = two_component_spec(g, 5);
    auto draw = sample_mixture(spec, 10);

    auto clean = observe_noisy(draw.sample, 0.0, 1);
    for (size_t i = 0; i < clean.values.size(); ++i)
        CHECK(clean.values[i] == draw.sample.curves[i].values);

    auto noisy1 = observe_noisy(draw.sample, 0.3, 1);
    auto noisy2 = observe_noisy(draw.sample, 0.3, 1);
    CHECK(noisy1.values == noisy2.values);
    CHECK(noisy1.values != clean.values);
    CHECK(noisy1.sigma == 0.3);

    CHECK_THROWS_AS(observe_noisy(draw.sample, -0.1, 1), domain_error);

    // Empirical noise scale is right to ~10%.
    double ss = 0.0;
    long cnt = 0;
    for (size_t i = 0; i < noisy1.values.size(); ++i)
        for (int j = 0; j < g->m; ++j) {
            const double d = noisy1.values[i][j] - draw.sample.curves[i].values[j];
            ss += d * d;
            ++cnt;
        }
    CHECK(std::sqrt(ss / cnt) == doctest::Approx(0.3).epsilon(0.1));
}

TEST_CASE("curve-space gradient matches the coefficient-space KDE gradient") {
    // Subspace adaptivity: when the data and the query share an orthonormal
    // span, the functional gradient is the Euclidean KDE gradient mapped
    // through the basis.
    auto g = make_grid(101);
    auto spec = two_component_spec(g, 31);
    auto draw = sample_mixture(spec, 25);
    auto model = make_model(draw.sample, exponential_kernel(), 0.5);

    Rng rng(32);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<double> xc(3);
        for (double& v : xc) v = rng.normal();
        Curve x = linear_combination(xc, spec.basis.basis);

        auto gcoef = fd_kde_gradient(draw.coefficients, xc, model.kernel, model.h);
        Curve expected = linear_combination(gcoef, spec.basis.basis);
        Curve actual = gradient(model, x);
        CHECK(dist_l2(actual, expected) < 1e-9);
    }
}

TEST_CASE("Hessian on the orthogonal complement is the scalar part") {
    auto g = make_grid(101);
    auto spec = two_component_spec(g, 41);
    auto draw = sample_mixture(spec, 15);
    auto model = make_model(draw.sample, exponential_kernel(), 0.5);
    Curve x = draw.sample.curves[0];

    Rng rng(42);
    for (int trial = 0; trial < 5; ++trial) {
        // Random direction with the span projected out.
        Curve v = random_unit_direction(g, rng);
        auto coeffs = project(v, spec.basis);
        Curve inspan = linear_combination(coeffs, spec.basis.basis);
        for (int j = 0; j < g->m; ++j) v.values[j] -= inspan.values[j];

        double scalar = 0.0;
        for (const Curve& xi : model.sample.curves)
            scalar += eval_kh(model.kernel, model.h, dist2_l2(xi, x), 1);
        scalar *= 2.0 / model.n() * inner_l2(v, v);
        CHECK(std::abs(hessian_form(model, x, v, v) - scalar) < 1e-10);
    }
}

TEST_CASE("mean-shift flow stays in the sample span") {
    auto g = make_grid(101);
    auto spec = two_component_spec(g, 51);
    auto draw = sample_mixture(spec, 30);
    auto model = make_model(draw.sample, exponential_kernel(), 0.5);

    // The data are not exactly in span(basis) after shift normalization of
    // linear combinations of an already-shifted basis -- they are, since the
    // basis vanishes at 0. Ascend and verify the endpoint's span residual.
    auto res = ascend(model, draw.sample.curves[0], {});
    REQUIRE(res.converged);
    CHECK(span_residual(res.endpoint, spec.basis) < 1e-6);

    // And the endpoint coefficients are a fixed point of the Euclidean KDE
    // mean shift.
    auto xc = project(res.endpoint, spec.basis);
    auto gcoef = fd_kde_gradient(draw.coefficients, xc, model.kernel, model.h);
    double gnorm = 0.0;
    for (double v : gcoef) gnorm += v * v;
    CHECK(std::sqrt(gnorm) < 10 * effective_tol_grad({}, model));
}
