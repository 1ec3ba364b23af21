// Gradient ascent on the sample pseudo-density: mean-shift fixed-point
// iteration and explicit Euler stepping, mode merging, and cluster assignment
// by basin of attraction.
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "fmc/pseudo_density.hpp"

namespace fmc {

struct AscentOptions {
    enum class Method { mean_shift, euler };
    Method method = Method::mean_shift;
    double step = 0.1;        // euler time step
    double tol_grad = -1.0;   // <=0 means "use 1e-8 * K1 of the model"
    double tol_step = 1e-9;   // L2 displacement
    int max_iter = 10000;
    bool backtrack = false;
};

inline double effective_tol_grad(const AscentOptions& opts, const DensityModel& model) {
    return opts.tol_grad > 0 ? opts.tol_grad : 1e-8 * model.constants.K1;
}

/// Kernel length scale: h carries squared-distance units.
inline double default_merge_radius(double h) { return 0.05 * std::sqrt(h); }

struct AscentResult {
    Curve endpoint;
    int iterations = 0;
    double final_grad_norm = 0;
    std::vector<double> density_trace;
    bool converged = false;
};

namespace detail {

/// One pass over the sample: kernel first-derivative weights g_i, their sum,
/// the weighted data average, and the density. Shared by the mean-shift step
/// and the fused gradient evaluation.
struct ShiftPass {
    std::vector<double> g;      // K_h'(d_i^2), all <= 0 under (H2)
    double g_sum = 0;
    std::vector<double> avg;    // sum_i g_i X_i / g_sum (valid when g_sum != 0)
    double dens = 0;
};

inline ShiftPass shift_pass(const DensityModel& model, const Curve& x) {
    const int n = model.n();
    const int m = x.grid->m;
    ShiftPass p;
    p.g.resize(n);
    std::vector<double> acc(m, 0.0);
    for (int i = 0; i < n; ++i) {
        const double d2 = dist2_l2(model.sample.curves[i], x);
        p.dens += eval_kh(model.kernel, model.h, d2, 0);
        p.g[i] = eval_kh(model.kernel, model.h, d2, 1);
        p.g_sum += p.g[i];
        if (p.g[i] != 0.0)
            for (int j = 0; j < m; ++j) acc[j] += p.g[i] * model.sample.curves[i].values[j];
    }
    p.dens /= n;
    if (p.g_sum != 0.0) {
        p.avg.resize(m);
        for (int j = 0; j < m; ++j) p.avg[j] = acc[j] / p.g_sum;
    }
    return p;
}

inline double grad_norm_from_pass(const ShiftPass& p, const DensityModel& model, const Curve& x) {
    // grad = (2/n) g_sum (x - avg); its L2 norm follows from the same pass.
    if (p.g_sum == 0.0) return 0.0;
    Curve avg{x.grid, p.avg};
    return std::abs(2.0 * p.g_sum / model.n()) * dist_l2(x, avg);
}

}  // namespace detail

/// x -> sum_i w_i X_i with w_i = K_h'(d_i^2) / sum_j K_h'(d_j^2).
/// Weights are nonnegative and sum to one under (H2).
inline Curve mean_shift_step(const DensityModel& model, const Curve& x) {
    require_same_grid(model.sample.curves.front(), x, "mean_shift_step");
    const auto pass = detail::shift_pass(model, x);
    if (pass.g_sum == 0.0)
        throw dead_zone_error(
            "mean_shift_step: every kernel weight vanished; the point is outside the kernel "
            "support of all samples. Increase the bandwidth h.");
    return Curve{x.grid, pass.avg};
}

inline AscentResult ascend(const DensityModel& model, const Curve& x0, const AscentOptions& opts) {
    require_same_grid(model.sample.curves.front(), x0, "ascend");
    const double tol_grad = effective_tol_grad(opts, model);
    const int m = x0.grid->m;

    AscentResult res;
    Curve x = x0;
    auto pass = detail::shift_pass(model, x);
    res.density_trace.push_back(pass.dens);

    for (int it = 1; it <= opts.max_iter; ++it) {
        if (pass.g_sum == 0.0)
            throw dead_zone_error("ascend: dead zone at iteration " + std::to_string(it) +
                                  "; increase the bandwidth h");
        Curve proposal{x.grid, std::vector<double>(m)};
        if (opts.method == AscentOptions::Method::mean_shift) {
            proposal.values = pass.avg;
        } else {
            const double s = 2.0 * pass.g_sum / model.n();
            for (int j = 0; j < m; ++j)
                proposal.values[j] = x.values[j] + opts.step * s * (x.values[j] - pass.avg[j]);
        }
        for (double v : proposal.values)
            if (!std::isfinite(v)) throw numerical_error("ascend: non-finite iterate");

        auto next_pass = detail::shift_pass(model, proposal);
        if (opts.backtrack) {
            double t = 1.0;
            while (next_pass.dens < pass.dens && t > 1e-12) {
                t /= 2;
                for (int j = 0; j < m; ++j)
                    proposal.values[j] = x.values[j] + t * (proposal.values[j] - x.values[j]);
                next_pass = detail::shift_pass(model, proposal);
            }
        }

        const double disp = dist_l2(proposal, x);
        x = std::move(proposal);
        pass = std::move(next_pass);
        res.density_trace.push_back(pass.dens);
        res.iterations = it;
        res.final_grad_norm = detail::grad_norm_from_pass(pass, model, x);
        if (res.final_grad_norm <= tol_grad || disp <= opts.tol_step) {
            res.converged = true;
            break;
        }
    }
    res.endpoint = std::move(x);
    return res;
}

struct Mode {
    Curve curve;
    double delta = 0;             // curvature score from hessian_summary
    double attained_density = 0;
};

struct ModeSet {
    std::vector<Mode> modes;
    double merge_radius = 0;
    int ignored_nonconverged = 0;  // ascent results dropped (converged == false)
    int excluded_saddles = 0;      // endpoints with delta <= 0
};

/// Greedy agglomeration of converged ascent endpoints, density-descending.
/// Endpoints whose curvature score is not positive are critical points that
/// are not local maxima of the discrete form and are excluded.
inline ModeSet merge_modes(const std::vector<AscentResult>& results, const DensityModel& model,
                           double merge_radius) {
    ModeSet out;
    out.merge_radius = merge_radius;

    std::vector<const AscentResult*> converged;
    for (const auto& r : results)
        (r.converged ? void(converged.push_back(&r)) : void(++out.ignored_nonconverged));
    std::stable_sort(converged.begin(), converged.end(), [](const AscentResult* a, const AscentResult* b) {
        return a->density_trace.back() > b->density_trace.back();
    });

    std::vector<Mode> candidates;
    for (const AscentResult* r : converged) {
        bool joined = false;
        for (const Mode& mode : candidates) {
            if (dist_l2(r->endpoint, mode.curve) <= merge_radius) {
                joined = true;
                break;
            }
        }
        if (!joined)
            candidates.push_back(Mode{r->endpoint, 0.0, r->density_trace.back()});
    }
    for (Mode& mode : candidates) {
        mode.delta = hessian_summary(model, mode.curve).delta;
        if (mode.delta > 0)
            out.modes.push_back(std::move(mode));
        else
            ++out.excluded_saddles;
    }
    return out;
}

struct Clustering {
    std::vector<int> labels;   // per-sample mode index into `modes`
    ModeSet modes;             // input modes plus any appended stragglers
    int appended_modes = 0;    // endpoints farther than merge_radius from all modes
};

/// Basin-of-attraction labels: ascend from every sample curve and label by the
/// nearest mode (ties to the lower index). Endpoints not near any mode found
/// a fresh one, flagged through appended_modes.
inline Clustering assign_clusters(const DensityModel& model, const ModeSet& modeset,
                                  const AscentOptions& opts) {
    Clustering out;
    out.modes = modeset;
    out.labels.resize(model.n(), -1);
    for (int i = 0; i < model.n(); ++i) {
        AscentResult r = ascend(model, model.sample.curves[i], opts);
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t k = 0; k < out.modes.modes.size(); ++k) {
            const double d = dist_l2(r.endpoint, out.modes.modes[k].curve);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(k);
            }
        }
        if (best < 0 || best_d > modeset.merge_radius) {
            const auto hs = hessian_summary(model, r.endpoint);
            out.modes.modes.push_back(Mode{r.endpoint, hs.delta, r.density_trace.back()});
            best = static_cast<int>(out.modes.modes.size()) - 1;
            ++out.appended_modes;
        }
        out.labels[i] = best;
    }
    return out;
}

}  // namespace fmc
