#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fmc/kernels.hpp"
#include "fmc/rng.hpp"

using namespace fmc;

TEST_CASE("eval_kh values and scaling") {
    auto expo = exponential_kernel();
    CHECK(eval_kh(expo, 1.0, 0.0, 0) == 1.0);
    CHECK(eval_kh(expo, 0.5, 0.0, 1) == doctest::Approx(-2.0).epsilon(1e-15));

    auto cubic = cubic_kernel();
    CHECK(eval_kh(cubic, 0.7, 0.5 * 0.7, 0) == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(eval_kh(cubic, 1.0, 2.0, 0) == 0.0);  // outside support

    CHECK_THROWS_AS(eval_kh(expo, -1.0, 0.0, 0), domain_error);
    CHECK_THROWS_AS(eval_kh(expo, 1.0, -0.1, 0), domain_error);
    CHECK_THROWS_AS(eval_kh(expo, 1.0, 0.1, 4), domain_error);

    // Bandwidth scaling identity K_h(s) = K(s/h).
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const double h = 0.1 + rng.uniform01();
        const double s = 3 * rng.uniform01();
        CHECK(eval_kh(expo, h, s, 0) == eval_kh(expo, 1.0, s / h, 0));
    }
}

TEST_CASE("derivative consistency against central differences") {
    Rng rng(2);
    for (const auto& k : {exponential_kernel(), cubic_kernel()}) {
        const double h = 0.8;
        for (int i = 0; i < 50; ++i) {
            double s = (std::isfinite(k.support_cutoff) ? 0.9 * k.support_cutoff * h : 3.0) *
                       (0.05 + 0.9 * rng.uniform01());
            const double eps = 1e-6;
            for (int order = 1; order <= 3; ++order) {
                const double fd =
                    (eval_kh(k, h, s + eps, order - 1) - eval_kh(k, h, s - eps, order - 1)) / (2 * eps);
                const double an = eval_kh(k, h, s, order);
                CHECK(std::abs(fd - an) <= 1e-6 * std::max(1.0, std::abs(an)));
            }
        }
    }
}

TEST_CASE("check_assumptions accepts the two built-ins") {
    CHECK(check_assumptions(exponential_kernel()).h2_ok);
    CHECK(check_assumptions(cubic_kernel()).h2_ok);
    CHECK(check_assumptions(exponential_kernel()).h1_smooth_ok);
    CHECK(check_assumptions(cubic_kernel()).h1_smooth_ok);
}

TEST_CASE("check_assumptions rejects K(t)=1/(1+t)") {
    // K'(t^2)+K(t^2) = t^2/(1+t^2)^2 > 0 for t > 0.
    KernelProfile k;
    k.name = "cauchy-like";
    k.value = [](double s) { return 1.0 / (1.0 + s); };
    k.d1 = [](double s) { return -1.0 / ((1.0 + s) * (1.0 + s)); };
    k.d2 = [](double s) { return 2.0 / std::pow(1.0 + s, 3); };
    k.d3 = [](double s) { return -6.0 / std::pow(1.0 + s, 4); };
    auto rep = check_assumptions(k);
    CHECK_FALSE(rep.h2_ok);
    CHECK(rep.h2_worst_value > 0.0);
    const double t = rep.h2_worst_t;
    CHECK(rep.h2_worst_value ==
          doctest::Approx(t * t / std::pow(1 + t * t, 2)).epsilon(1e-9));
}

TEST_CASE("kernel_constants for the exponential kernel at h=1") {
    auto c = kernel_constants(exponential_kernel(), 1.0);
    CHECK(c.K0 == doctest::Approx(1.0).epsilon(1e-9));
    // sup t e^{-t^2} attained at t = 1/sqrt(2).
    CHECK(c.K1 == doctest::Approx(1.0 / std::sqrt(2.0 * M_E)).epsilon(1e-8));
    // sup e^{-u}(1+u) = 1 at u=0.
    CHECK(c.K2 == doctest::Approx(1.0).epsilon(1e-9));
    // sup e^{-u} sqrt(u)(1+u) = 2/e at u=1.
    CHECK(c.K3 == doctest::Approx(2.0 / M_E).epsilon(1e-8));
}

TEST_CASE("kernel_constants for the cubic kernel") {
    auto c = kernel_constants(cubic_kernel(), 1.0);
    CHECK(c.K0 == doctest::Approx(1.0).epsilon(1e-9));
    // sup 3 u (1-u^2)^2 at u = 1/sqrt(5).
    CHECK(c.K1 == doctest::Approx(3.0 / std::sqrt(5.0) * std::pow(0.8, 2)).epsilon(1e-8));
}

TEST_CASE("constants are true bounds on random arguments") {
    Rng rng(3);
    for (const auto& k : {exponential_kernel(), cubic_kernel()}) {
        for (double h : {0.3, 1.0, 2.5}) {
            auto c = kernel_constants(k, h);
            const double t_hi = std::isfinite(k.support_cutoff) ? std::sqrt(k.support_cutoff * h) : 6 * std::sqrt(h);
            int violations = 0;
            for (int i = 0; i < 10000; ++i) {
                const double t = t_hi * rng.uniform01();
                if (std::isfinite(k.support_cutoff) && std::abs(t - std::sqrt(k.support_cutoff * h)) < 1e-9)
                    continue;  // breakpoint exclusion, documented essential sup
                const double s = t * t;
                const double tol = 1e-12;
                if (std::abs(eval_kh(k, h, s, 0)) > c.K0 + tol) ++violations;
                if (std::abs(eval_kh(k, h, s, 1) * t) > c.K1 + tol) ++violations;
                if (std::abs(eval_kh(k, h, s, 1)) + std::abs(eval_kh(k, h, s, 2) * s) > c.K2 + tol) ++violations;
                if (std::abs(eval_kh(k, h, s, 2) * t) + std::abs(eval_kh(k, h, s, 3) * s * t) > c.K3 + tol)
                    ++violations;
            }
            CHECK(violations == 0);
        }
    }
}

TEST_CASE("kernel_by_name") {
    CHECK(kernel_by_name("exponential").name == "exponential");
    CHECK(kernel_by_name("cubic").name == "cubic");
    CHECK_THROWS_AS(kernel_by_name("gaussian"), domain_error);
}
