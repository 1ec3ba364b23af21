// The sample pseudo-density p_h, its L2 gradient and Hessian bilinear form,
// and the curvature score delta via a finite-rank eigen decomposition.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <vector>

#include "fmc/grid_curves.hpp"
#include "fmc/kernels.hpp"

namespace fmc {

struct DensityModel {
    CurveSample sample;
    KernelProfile kernel;
    double h = 0;
    KernelConstants constants;

    int n() const { return static_cast<int>(sample.curves.size()); }
    const GridPtr& grid() const { return sample.grid; }
};

inline DensityModel make_model(CurveSample sample, KernelProfile kernel, double h) {
    if (h <= 0) throw domain_error("make_model: bandwidth must be positive");
    if (sample.curves.empty()) throw error("make_model: empty sample");
    const auto rep = check_assumptions(kernel);
    if (!rep.h2_ok)
        throw assumption_violation_error("make_model: kernel " + kernel.name +
                                         " violates (H2); worst t=" + std::to_string(rep.h2_worst_t));
    DensityModel m{std::move(sample), std::move(kernel), h, {}};
    m.constants = kernel_constants(m.kernel, h);
    return m;
}

/// p_hat(x) = (1/n) sum_i K_h(||X_i - x||^2).
inline double density(const DensityModel& model, const Curve& x) {
    require_same_grid(model.sample.curves.front(), x, "density");
    double s = 0.0;
    for (const Curve& xi : model.sample.curves) s += eval_kh(model.kernel, model.h, dist2_l2(xi, x), 0);
    return s / model.n();
}

/// L2 gradient (2/n) sum_i K_h'(||X_i - x||^2) (x - X_i), as a curve.
inline Curve gradient(const DensityModel& model, const Curve& x) {
    require_same_grid(model.sample.curves.front(), x, "gradient");
    const int m = x.grid->m;
    Curve out{x.grid, std::vector<double>(m, 0.0)};
    for (const Curve& xi : model.sample.curves) {
        const double g = eval_kh(model.kernel, model.h, dist2_l2(xi, x), 1);
        for (int j = 0; j < m; ++j) out.values[j] += g * (x.values[j] - xi.values[j]);
    }
    const double scale = 2.0 / model.n();
    for (double& v : out.values) v *= scale;
    return out;
}

/// Second-derivative bilinear form D^2 p_hat(x)(z1, z2).
inline double hessian_form(const DensityModel& model, const Curve& x, const Curve& z1, const Curve& z2) {
    require_same_grid(model.sample.curves.front(), x, "hessian_form");
    require_same_grid(x, z1, "hessian_form");
    require_same_grid(x, z2, "hessian_form");
    const double z12 = inner_l2(z1, z2);
    double s = 0.0;
    for (const Curve& xi : model.sample.curves) {
        const double d2 = dist2_l2(xi, x);
        const double kp = eval_kh(model.kernel, model.h, d2, 1);
        const double kpp = eval_kh(model.kernel, model.h, d2, 2);
        double v1 = 0.0, v2 = 0.0;
        const auto& w = x.grid->weights;
        for (int j = 0; j < x.grid->m; ++j) {
            const double dj = x.values[j] - xi.values[j];
            v1 += w[j] * dj * z1.values[j];
            v2 += w[j] * dj * z2.values[j];
        }
        s += 4.0 * kpp * (v1 * v2) + 2.0 * kp * z12;
    }
    return s / model.n();
}

/// Summary of the Hessian quadratic form over the unit L2 sphere of the
/// discrete space. The form is c*I plus a rank-<=n term, so its spectrum is
/// resolved through the n x n Gram matrix of the spanning curves x - X_i.
struct HessianSummary {
    double sup_form = 0;        // sup over unit directions of D^2 p_hat (u,u)
    double delta = 0;           // -sup_form
    double complement_value = 0;  // the scalar c = (2/n) sum K_h'
    double top_eigenvalue = 0;  // lambda_max of the finite-rank part (0 if rank 0)
    int span_dim = 0;           // numerical rank of the spanning set
    std::optional<Curve> sup_direction;  // unit curve attaining sup_form
};

inline HessianSummary hessian_summary(const DensityModel& model, const Curve& x) {
    require_same_grid(model.sample.curves.front(), x, "hessian_summary");
    const int n = model.n();
    const int m = x.grid->m;
    const int ambient = m - 1;  // first grid value is pinned to 0
    const auto& w = x.grid->weights;

    // Spanning curves v_i = x - X_i in sqrt(weight) coordinates, so Euclidean
    // dot products realize the quadrature inner product.
    Eigen::MatrixXd V(m, n);
    Eigen::VectorXd a(n);
    double c = 0.0;
    for (int i = 0; i < n; ++i) {
        const Curve& xi = model.sample.curves[i];
        double d2 = 0.0;
        for (int j = 0; j < m; ++j) {
            const double dj = x.values[j] - xi.values[j];
            d2 += w[j] * dj * dj;
            V(j, i) = std::sqrt(w[j]) * dj;
        }
        c += eval_kh(model.kernel, model.h, d2, 1);
        a(i) = eval_kh(model.kernel, model.h, d2, 2);
    }
    c *= 2.0 / n;
    a *= 4.0 / n;

    Eigen::MatrixXd G = V.transpose() * V;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> gs(G);
    if (gs.info() != Eigen::Success) throw numerical_error("hessian_summary: Gram eigendecomposition failed");
    const double rank_tol = 1e-12 * std::max(G.trace(), 0.0);
    int rank = 0;
    for (int i = 0; i < n; ++i)
        if (gs.eigenvalues()(i) > rank_tol) ++rank;

    HessianSummary out;
    out.complement_value = c;
    out.span_dim = rank;

    double lam_max = 0.0;
    Eigen::VectorXd top_zeta;  // sqrt(weight) coordinates of the top direction
    if (rank > 0) {
        // Columns n-rank..n-1 hold the retained eigenpairs (ascending order).
        Eigen::MatrixXd Ur = gs.eigenvectors().rightCols(rank);
        Eigen::VectorXd lr = gs.eigenvalues().tail(rank);
        Eigen::VectorXd sq = lr.cwiseSqrt();
        // M = L^{1/2} U^T diag(a) U L^{1/2}: spectrum of the rank part on its span.
        Eigen::MatrixXd M = sq.asDiagonal() * Ur.transpose() * a.asDiagonal() * Ur * sq.asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ms(M);
        if (ms.info() != Eigen::Success) throw numerical_error("hessian_summary: rank-part eigensolve failed");
        lam_max = ms.eigenvalues()(rank - 1);
        // Map the eigenvector back: zeta = V U L^{-1/2} y.
        Eigen::VectorXd y = ms.eigenvectors().col(rank - 1);
        top_zeta = V * (Ur * (sq.cwiseInverse().asDiagonal() * y));
        const double nz = top_zeta.norm();
        if (nz > 0) top_zeta /= nz;
    }
    out.top_eigenvalue = (rank > 0) ? lam_max : 0.0;

    const bool has_complement = rank < ambient;
    const bool use_rank_part = rank > 0 && (!has_complement || lam_max > 0.0);
    out.sup_form = c + (has_complement ? std::max(0.0, lam_max) : lam_max);
    out.delta = -out.sup_form;

    // A unit direction attaining the sup: the mapped eigenvector when the rank
    // part wins, otherwise anything orthogonal to the span.
    if (use_rank_part && top_zeta.size() == m) {
        Curve dir{x.grid, std::vector<double>(m, 0.0)};
        for (int j = 0; j < m; ++j) dir.values[j] = w[j] > 0 ? top_zeta(j) / std::sqrt(w[j]) : 0.0;
        out.sup_direction = std::move(dir);
    } else if (has_complement) {
        // Deflate trial vectors against span{v_i}; zero first coordinate.
        Eigen::MatrixXd Ur = rank > 0 ? Eigen::MatrixXd(gs.eigenvectors().rightCols(rank)) : Eigen::MatrixXd(n, 0);
        Eigen::MatrixXd Q = rank > 0
                                ? Eigen::MatrixXd(V * Ur * gs.eigenvalues().tail(rank).cwiseSqrt().cwiseInverse().asDiagonal())
                                : Eigen::MatrixXd(m, 0);
        for (int trial = 1; trial < m; ++trial) {
            Eigen::VectorXd e = Eigen::VectorXd::Zero(m);
            e(trial) = 1.0;
            if (rank > 0) e -= Q * (Q.transpose() * e);
            if (e.norm() > 1e-8) {
                e /= e.norm();
                Curve dir{x.grid, std::vector<double>(m, 0.0)};
                for (int j = 0; j < m; ++j) dir.values[j] = w[j] > 0 ? e(j) / std::sqrt(w[j]) : 0.0;
                out.sup_direction = std::move(dir);
                break;
            }
        }
    }
    return out;
}

}  // namespace fmc
