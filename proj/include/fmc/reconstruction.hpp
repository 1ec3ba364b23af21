// Gasser-Mueller curve reconstruction from noisy grid observations.
#pragma once

#include <cmath>
#include <vector>

#include "fmc/grid_curves.hpp"
#include "fmc/kernels.hpp"

namespace fmc {

/// Raw n x m observations y_ij = X_i(t_j) + eps_ij on a design grid.
struct Observations {
    GridPtr grid;
    std::vector<std::vector<double>> values;  // n rows of length m
    double sigma = 0;  // noise scale used to generate them, if known
};

enum class Boundary { reflect, renormalize };

/// Regression weight profile W (t-axis units, not squared distances):
/// nonnegative, unit integral over [-support, support].
struct RegressionKernel {
    std::string name;
    std::function<double(double)> value;
    double support = 1.0;
};

inline RegressionKernel epanechnikov_weight() {
    RegressionKernel w;
    w.name = "epanechnikov";
    w.value = [](double t) { return std::abs(t) < 1.0 ? 0.75 * (1 - t * t) : 0.0; };
    return w;
}

struct SmootherSpec {
    RegressionKernel W = epanechnikov_weight();
    double b = 0;  // smoothing bandwidth, t-axis units
    Boundary boundary = Boundary::renormalize;
};

inline void validate_smoother(const SmootherSpec& spec) {
    if (spec.b <= 0) throw domain_error("smoother: bandwidth b must be positive");
    // Unit-integral check by composite Simpson over the support.
    const int n = 2000;
    const double a = -spec.W.support, c = spec.W.support;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double t = a + (c - a) * i / n;
        const double f = spec.W.value(t);
        if (f < 0) throw domain_error("smoother: weight kernel must be nonnegative");
        s += f * ((i == 0 || i == n) ? 1 : (i % 2 ? 4 : 2));
    }
    s *= (c - a) / (3.0 * n);
    if (std::abs(s - 1.0) > 1e-8)
        throw domain_error("smoother: weight kernel must integrate to 1, got " + std::to_string(s));
}

/// b = c_b * m^{-1/5}, the rate-optimal order for H^2-bounded curves.
inline double default_bandwidth(int m, double c_b = 1.0) {
    if (m < 3) throw domain_error("default_bandwidth: m must be >= 3");
    return c_b * std::pow(static_cast<double>(m), -0.2);
}

/// Perturbation-bound plug-in phi(m) = c_phi * m^{-2/5} (the L1 rate).
inline double phi_plugin(int m, double c_phi) {
    if (m < 3) throw domain_error("phi_plugin: m must be >= 3");
    if (c_phi <= 0) throw domain_error("phi_plugin: c_phi must be positive");
    return c_phi * std::pow(static_cast<double>(m), -0.4);
}

namespace detail {

/// (1/b) int_a^c W((t-u)/b) du by 16-point composite midpoint quadrature.
inline double segment_weight(const RegressionKernel& W, double b, double t, double a, double c) {
    if (c <= a) return 0.0;
    // Quick reject: the kernel window is [t - b*support, t + b*support].
    if (c < t - b * W.support || a > t + b * W.support) return 0.0;
    const int q = 16;
    const double len = c - a;
    double s = 0.0;
    for (int i = 0; i < q; ++i) {
        const double u = a + len * (i + 0.5) / q;
        s += W.value((t - u) / b);
    }
    return s * len / (q * b);
}

}  // namespace detail

/// Gasser-Mueller smoother: X~(t) = sum_j (y_j / b) int_{t_{j-1}}^{t_j}
/// W((t-u)/b) du with t_0 = 0, evaluated on eval_grid and shift-normalized.
inline Curve gm_smooth(std::span<const double> obs_row, const GridPtr& grid, const SmootherSpec& spec,
                       const GridPtr& eval_grid) {
    validate_smoother(spec);
    if (static_cast<int>(obs_row.size()) != grid->m)
        throw error("gm_smooth: row length does not match the design grid");
    const int m = grid->m;
    Curve out{eval_grid, std::vector<double>(eval_grid->m, 0.0)};
    for (int e = 0; e < eval_grid->m; ++e) {
        const double t = eval_grid->points[e];
        double num = 0.0, den = 0.0;
        auto add_segment = [&](double a, double c, double y) {
            const double w = detail::segment_weight(spec.W, spec.b, t, a, c);
            num += y * w;
            den += w;
        };
        for (int j = 0; j < m; ++j) {
            const double a = j == 0 ? 0.0 : grid->points[j - 1];
            const double c = grid->points[j];
            add_segment(a, c, obs_row[j]);
            if (spec.boundary == Boundary::reflect) {
                add_segment(-c, -a, obs_row[j]);          // reflect about 0
                add_segment(2.0 - c, 2.0 - a, obs_row[j]);  // reflect about 1
            }
        }
        if (den <= 0.0)
            throw undersmoothing_error("gm_smooth: no kernel mass at t=" + std::to_string(t) +
                                       "; increase the bandwidth b");
        out.values[e] = spec.boundary == Boundary::renormalize ? num / den : num;
    }
    return normalize_shift(out);
}

inline CurveSample reconstruct_sample(const Observations& obs, const SmootherSpec& spec,
                                      const GridPtr& eval_grid) {
    CurveSample out;
    out.grid = eval_grid;
    out.curves.reserve(obs.values.size());
    for (const auto& row : obs.values) out.curves.push_back(gm_smooth(row, obs.grid, spec, eval_grid));
    return out;
}

}  // namespace fmc
