// Discrete curves on [0,1]: uniform grids with trapezoid quadrature, the L2
// inner product, the H^1_0 seminorm, and Gram-Schmidt orthonormalization.
#pragma once

#include <cmath>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fmc/errors.hpp"

namespace fmc {

/// Uniform design points t_j = (j-1)/(m-1) on [0,1] with trapezoid weights.
struct Grid {
    int m = 0;
    double spacing = 0.0;
    std::vector<double> points;
    std::vector<double> weights;  // sum to 1
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(int m) {
    if (m < 3) throw invalid_grid_error("make_grid: m must be >= 3, got " + std::to_string(m));
    auto g = std::make_shared<Grid>();
    g->m = m;
    g->spacing = 1.0 / (m - 1);
    g->points.resize(m);
    g->weights.resize(m);
    for (int j = 0; j < m; ++j) {
        g->points[j] = static_cast<double>(j) / (m - 1);
        g->weights[j] = (j == 0 || j == m - 1) ? g->spacing / 2 : g->spacing;
    }
    return g;
}

/// Function values on a shared grid. The working convention is values[0] == 0
/// (curves are shifted by their value at t=0 on ingestion).
struct Curve {
    GridPtr grid;
    std::vector<double> values;
};

inline bool same_grid(const GridPtr& a, const GridPtr& b) {
    return a.get() == b.get() || (a && b && a->m == b->m);
}

inline void require_same_grid(const Curve& x, const Curve& y, const char* where) {
    if (!same_grid(x.grid, y.grid))
        throw grid_mismatch_error(std::string(where) + ": curves live on different grids");
}

/// Shift so the value at t=0 is zero. Idempotent.
inline Curve normalize_shift(const Curve& c) {
    Curve out{c.grid, c.values};
    const double v0 = out.values.empty() ? 0.0 : out.values.front();
    for (double& v : out.values) v -= v0;
    return out;
}

inline double inner_l2(const Curve& x, const Curve& y) {
    require_same_grid(x, y, "inner_l2");
    const auto& w = x.grid->weights;
    double s = 0.0;
    for (int j = 0; j < x.grid->m; ++j) s += w[j] * (x.values[j] * y.values[j]);
    return s;
}

inline double norm_l2(const Curve& x) { return std::sqrt(inner_l2(x, x)); }

/// Squared L2 distance, fused (no temporary curve).
inline double dist2_l2(const Curve& x, const Curve& y) {
    require_same_grid(x, y, "dist2_l2");
    const auto& w = x.grid->weights;
    double s = 0.0;
    for (int j = 0; j < x.grid->m; ++j) {
        const double d = x.values[j] - y.values[j];
        s += w[j] * d * d;
    }
    return s;
}

inline double dist_l2(const Curve& x, const Curve& y) { return std::sqrt(dist2_l2(x, y)); }

/// ||x'||_{L2} via forward differences and the rectangle rule.
inline double norm_h10(const Curve& x) {
    const double dt = x.grid->spacing;
    double s = 0.0;
    for (int j = 0; j + 1 < x.grid->m; ++j) {
        const double d = x.values[j + 1] - x.values[j];
        s += d * d / dt;
    }
    return std::sqrt(s);
}

inline Curve linear_combination(std::span<const double> coeffs, std::span<const Curve> curves) {
    if (coeffs.size() != curves.size())
        throw error("linear_combination: " + std::to_string(coeffs.size()) + " coefficients vs " +
                    std::to_string(curves.size()) + " curves");
    if (curves.empty()) throw error("linear_combination: empty input");
    for (size_t i = 1; i < curves.size(); ++i) require_same_grid(curves[0], curves[i], "linear_combination");
    Curve out{curves[0].grid, std::vector<double>(curves[0].grid->m, 0.0)};
    for (size_t i = 0; i < curves.size(); ++i)
        for (int j = 0; j < out.grid->m; ++j) out.values[j] += coeffs[i] * curves[i].values[j];
    return out;
}

/// n curves on one grid; labels are optional (simulation truth).
struct CurveSample {
    GridPtr grid;
    std::vector<Curve> curves;
    std::vector<int> labels;  // empty or size n
};

/// d curves orthonormal under the discrete L2 inner product.
struct SubspaceBasis {
    GridPtr grid;
    std::vector<Curve> basis;
};

inline constexpr double kGramSchmidtPivotTol = 1e-10;

/// Modified Gram-Schmidt with one re-orthogonalization pass.
inline SubspaceBasis gram_schmidt(std::span<const Curve> curves) {
    if (curves.empty()) throw error("gram_schmidt: empty input");
    SubspaceBasis out{curves[0].grid, {}};
    for (size_t i = 0; i < curves.size(); ++i) {
        Curve q = curves[i];
        require_same_grid(curves[0], q, "gram_schmidt");
        for (int pass = 0; pass < 2; ++pass) {
            for (const Curve& b : out.basis) {
                const double c = inner_l2(q, b);
                for (int j = 0; j < q.grid->m; ++j) q.values[j] -= c * b.values[j];
            }
        }
        const double nrm = norm_l2(q);
        if (nrm < kGramSchmidtPivotTol)
            throw rank_deficiency_error(
                "gram_schmidt: curve " + std::to_string(i) + " is numerically dependent (pivot " +
                    std::to_string(nrm) + ")",
                static_cast<int>(i));
        for (double& v : q.values) v /= nrm;
        out.basis.push_back(std::move(q));
    }
    return out;
}

/// Coefficients of the L2 projection of x onto an orthonormal basis.
inline std::vector<double> project(const Curve& x, const SubspaceBasis& basis) {
    std::vector<double> coeffs(basis.basis.size());
    for (size_t i = 0; i < basis.basis.size(); ++i) coeffs[i] = inner_l2(x, basis.basis[i]);
    return coeffs;
}

}  // namespace fmc
