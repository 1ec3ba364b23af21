// Synthetic data generation: Gaussian mixtures in an orthonormal curve basis,
// the noisy observation model, and the finite-dimensional KDE gradient used as
// an independent oracle for the subspace-adaptivity property.
#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "fmc/grid_curves.hpp"
#include "fmc/kernels.hpp"
#include "fmc/reconstruction.hpp"
#include "fmc/rng.hpp"

namespace fmc {

/// Orthonormal basis from sin(k pi t / 2), k = 1..d; every element vanishes
/// at t = 0.
inline SubspaceBasis sin_basis(int d, const GridPtr& grid) {
    if (d < 1) throw domain_error("sin_basis: d must be >= 1");
    if (d >= grid->m - 1) throw domain_error("sin_basis: d must be < m-1");
    std::vector<Curve> raw;
    for (int k = 1; k <= d; ++k) {
        Curve c{grid, std::vector<double>(grid->m)};
        for (int j = 0; j < grid->m; ++j) c.values[j] = std::sin(k * M_PI * grid->points[j] / 2.0);
        raw.push_back(std::move(c));
    }
    return gram_schmidt(raw);
}

struct MixtureComponent {
    std::vector<double> mean;    // coefficients in the basis
    std::vector<double> stddev;  // diagonal, same length
    double weight = 0;
};

struct MixtureSpec {
    SubspaceBasis basis;
    std::vector<MixtureComponent> components;
    std::uint64_t seed = 0;
};

inline void validate_mixture(const MixtureSpec& spec) {
    if (spec.components.empty()) throw domain_error("mixture: no components");
    const size_t d = spec.basis.basis.size();
    double wsum = 0;
    for (const auto& c : spec.components) {
        if (c.mean.size() != d || c.stddev.size() != d)
            throw domain_error("mixture: component dimension does not match the basis");
        if (c.weight <= 0) throw domain_error("mixture: weights must be positive");
        wsum += c.weight;
    }
    if (std::abs(wsum - 1.0) > 1e-9) throw domain_error("mixture: weights must sum to 1");
}

struct MixtureSample {
    CurveSample sample;                 // labels hold the component indices
    std::vector<Curve> component_means;
    std::vector<std::vector<double>> coefficients;  // n x d draws
};

inline MixtureSample sample_mixture(const MixtureSpec& spec, int n) {
    validate_mixture(spec);
    if (n < 1) throw domain_error("sample_mixture: n must be >= 1");
    const size_t d = spec.basis.basis.size();
    Rng rng(spec.seed);
    std::vector<double> weights;
    for (const auto& c : spec.components) weights.push_back(c.weight);

    MixtureSample out;
    out.sample.grid = spec.basis.grid;
    for (const auto& comp : spec.components)
        out.component_means.push_back(
            normalize_shift(linear_combination(comp.mean, spec.basis.basis)));
    for (int i = 0; i < n; ++i) {
        const int k = rng.categorical(weights);
        std::vector<double> coeffs(d);
        for (size_t j = 0; j < d; ++j)
            coeffs[j] = spec.components[k].mean[j] + spec.components[k].stddev[j] * rng.normal();
        out.sample.curves.push_back(normalize_shift(linear_combination(coeffs, spec.basis.basis)));
        out.sample.labels.push_back(k);
        out.coefficients.push_back(std::move(coeffs));
    }
    return out;
}

/// y_ij = X_i(t_j) + sigma * N(0,1), seed-reproducible.
inline Observations observe_noisy(const CurveSample& sample, double sigma, std::uint64_t seed) {
    if (sigma < 0) throw domain_error("observe_noisy: sigma must be nonnegative");
    Rng rng(seed);
    Observations obs;
    obs.grid = sample.grid;
    obs.sigma = sigma;
    for (const Curve& c : sample.curves) {
        std::vector<double> row = c.values;
        if (sigma > 0)
            for (double& v : row) v += sigma * rng.normal();
        obs.values.push_back(std::move(row));
    }
    return obs;
}

/// Euclidean-space KDE gradient (2/n) sum_i K_h'(||x - a_i||^2)(x - a_i),
/// computed entirely in coefficient space. Independent of the curve-space
/// gradient path by construction.
inline std::vector<double> fd_kde_gradient(const std::vector<std::vector<double>>& sample_coeffs,
                                           const std::vector<double>& x, const KernelProfile& kernel,
                                           double h) {
    const size_t d = x.size();
    std::vector<double> out(d, 0.0);
    for (const auto& a : sample_coeffs) {
        if (a.size() != d) throw domain_error("fd_kde_gradient: dimension mismatch");
        double d2 = 0.0;
        for (size_t j = 0; j < d; ++j) d2 += (x[j] - a[j]) * (x[j] - a[j]);
        const double g = eval_kh(kernel, h, d2, 1);
        for (size_t j = 0; j < d; ++j) out[j] += g * (x[j] - a[j]);
    }
    const double scale = 2.0 / sample_coeffs.size();
    for (double& v : out) v *= scale;
    return out;
}

}  // namespace fmc
