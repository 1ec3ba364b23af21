// Kernel profiles K with three analytic derivatives, bandwidth scaling
// K_h(s) = K(s/h), the shape checks the theory needs, and the numeric bound
// constants K0..K3.
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "fmc/errors.hpp"

namespace fmc {

/// Scalar kernel s -> K(s) (s is a squared distance) with analytic
/// derivatives up to order 3. support_cutoff is the s beyond which K is
/// identically zero (infinity for full-support kernels).
struct KernelProfile {
    std::string name;
    std::function<double(double)> value, d1, d2, d3;
    double support_cutoff = std::numeric_limits<double>::infinity();
};

inline KernelProfile exponential_kernel() {
    KernelProfile k;
    k.name = "exponential";
    k.value = [](double s) { return std::exp(-s); };
    k.d1 = [](double s) { return -std::exp(-s); };
    k.d2 = [](double s) { return std::exp(-s); };
    k.d3 = [](double s) { return -std::exp(-s); };
    return k;
}

inline KernelProfile cubic_kernel() {
    KernelProfile k;
    k.name = "cubic";
    k.value = [](double s) { return s < 1.0 ? (1 - s) * (1 - s) * (1 - s) : 0.0; };
    k.d1 = [](double s) { return s < 1.0 ? -3 * (1 - s) * (1 - s) : 0.0; };
    k.d2 = [](double s) { return s < 1.0 ? 6 * (1 - s) : 0.0; };
    k.d3 = [](double s) { return s < 1.0 ? -6.0 : 0.0; };
    k.support_cutoff = 1.0;
    return k;
}

inline KernelProfile kernel_by_name(const std::string& name) {
    if (name == "exponential") return exponential_kernel();
    if (name == "cubic") return cubic_kernel();
    throw domain_error("unknown kernel name: " + name + " (expected exponential|cubic)");
}

/// d^order/ds^order of K_h(s) = K(s/h), i.e. h^-order K^(order)(s/h).
inline double eval_kh(const KernelProfile& k, double h, double s, int order = 0) {
    if (h <= 0) throw domain_error("eval_kh: bandwidth must be positive");
    if (s < 0) throw domain_error("eval_kh: squared distance must be nonnegative");
    const double u = s / h;
    switch (order) {
        case 0: return k.value(u);
        case 1: return k.d1(u) / h;
        case 2: return k.d2(u) / (h * h);
        case 3: return k.d3(u) / (h * h * h);
        default: throw domain_error("eval_kh: order must be in 0..3");
    }
}

namespace detail {

/// Largest t worth scanning for K_h(t^2): support edge for compact kernels,
/// decay cutoff (value below 1e-12) otherwise.
inline double scan_t_max(const KernelProfile& k, double h) {
    if (std::isfinite(k.support_cutoff)) return std::sqrt(k.support_cutoff * h);
    double t = std::sqrt(h);
    while (k.value(t * t / h) >= 1e-12 && t < 1e8) t *= 1.25;
    return t;
}

}  // namespace detail

struct AssumptionReport {
    bool h2_ok = true;
    double h2_worst_t = 0.0;          // where K'(t^2)+K(t^2) is largest
    double h2_worst_value = 0.0;      // that largest value
    bool h1_smooth_ok = true;
    double h1_worst_rel_err = 0.0;    // analytic vs finite-difference derivatives
    bool ok() const { return h2_ok && h1_smooth_ok; }
};

/// Dense scan for (H2): K'(t^2) + K(t^2) <= 0, plus finite-difference spot
/// checks that the supplied derivatives match the profile.
inline AssumptionReport check_assumptions(const KernelProfile& k) {
    AssumptionReport rep;
    const double t_max = detail::scan_t_max(k, 1.0);
    const int n_scan = 100000;
    double worst = -std::numeric_limits<double>::infinity();
    for (int i = 0; i <= n_scan; ++i) {
        const double t = t_max * i / n_scan;
        const double v = k.d1(t * t) + k.value(t * t);
        if (v > worst) {
            worst = v;
            rep.h2_worst_t = t;
        }
    }
    rep.h2_worst_value = worst;
    rep.h2_ok = worst <= 1e-12;

    // Spot-check d1..d3 against central differences away from any breakpoint.
    const double s_hi = std::isfinite(k.support_cutoff) ? 0.9 * k.support_cutoff : t_max * t_max;
    const double eps = 1e-6;
    for (int i = 1; i <= 20; ++i) {
        const double s = s_hi * i / 21.0;
        const double fd1 = (k.value(s + eps) - k.value(s - eps)) / (2 * eps);
        const double fd2 = (k.d1(s + eps) - k.d1(s - eps)) / (2 * eps);
        const double fd3 = (k.d2(s + eps) - k.d2(s - eps)) / (2 * eps);
        const double pairs[3][2] = {{k.d1(s), fd1}, {k.d2(s), fd2}, {k.d3(s), fd3}};
        for (const auto& p : pairs) {
            const double scale = std::max({std::abs(p[0]), std::abs(p[1]), 1e-8});
            rep.h1_worst_rel_err = std::max(rep.h1_worst_rel_err, std::abs(p[0] - p[1]) / scale);
        }
    }
    rep.h1_smooth_ok = rep.h1_worst_rel_err <= 1e-6;
    return rep;
}

/// The (H1) bounds for K_h at a given bandwidth.
struct KernelConstants {
    double K0 = 0, K1 = 0, K2 = 0, K3 = 0;
    double h = 0;
};

namespace detail {

/// Dense 1-D maximization of f over [0, t_max] followed by a local refinement
/// around the coarse argmax. Breakpoints of piecewise kernels are dodged by a
/// +-1e-9 exclusion (the sup is then an essential sup).
template <class F>
double sup_scan(F&& f, double t_max, double breakpoint = -1.0) {
    const int n_coarse = 100000;
    double best = 0.0, best_t = 0.0;
    auto eval = [&](double t) {
        if (breakpoint >= 0 && std::abs(t - breakpoint) < 1e-9) return -std::numeric_limits<double>::infinity();
        return f(t);
    };
    for (int i = 0; i <= n_coarse; ++i) {
        const double t = t_max * i / n_coarse;
        const double v = eval(t);
        if (v > best) {
            best = v;
            best_t = t;
        }
    }
    const double step = t_max / n_coarse;
    const double lo = std::max(0.0, best_t - step), hi = std::min(t_max, best_t + step);
    for (int i = 0; i <= 2000; ++i) {
        const double t = lo + (hi - lo) * i / 2000;
        best = std::max(best, eval(t));
    }
    return best;
}

}  // namespace detail

/// Numeric suprema for the (H1) bounds of K_h.
inline KernelConstants kernel_constants(const KernelProfile& k, double h) {
    if (h <= 0) throw domain_error("kernel_constants: bandwidth must be positive");
    const double t_max = detail::scan_t_max(k, h);
    const double brk = std::isfinite(k.support_cutoff) ? std::sqrt(k.support_cutoff * h) : -1.0;
    KernelConstants c;
    c.h = h;
    c.K0 = detail::sup_scan([&](double t) { return std::abs(eval_kh(k, h, t * t, 0)); }, t_max, brk);
    c.K1 = detail::sup_scan([&](double t) { return std::abs(eval_kh(k, h, t * t, 1) * t); }, t_max, brk);
    c.K2 = detail::sup_scan(
        [&](double t) { return std::abs(eval_kh(k, h, t * t, 1)) + std::abs(eval_kh(k, h, t * t, 2) * t * t); },
        t_max, brk);
    c.K3 = detail::sup_scan(
        [&](double t) {
            return std::abs(eval_kh(k, h, t * t, 2) * t) + std::abs(eval_kh(k, h, t * t, 3) * t * t * t);
        },
        t_max, brk);
    for (double v : {c.K0, c.K1, c.K2, c.K3})
        if (!std::isfinite(v))
            throw assumption_violation_error("kernel_constants: non-finite supremum for kernel " + k.name);
    return c;
}

}  // namespace fmc
