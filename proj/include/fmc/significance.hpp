// Mode significance thresholds, classification, truth matching for
// simulations, and the bandwidth scan.
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fmc/flow.hpp"

namespace fmc {

struct ThresholdInputs {
    long n = 0;                    // sample size
    double M = 0;                  // a.s. bound on ||X||_{H^1_0}
    double alpha = 0;              // level in (0,1)
    KernelConstants constants;
    std::optional<double> phi_m;   // reconstruction perturbation bound
    double cover_c = 1.0;          // covering constant inside the log terms
};

inline void validate_threshold_inputs(const ThresholdInputs& in) {
    if (in.n < 1) throw domain_error("thresholds: n must be >= 1");
    if (!(in.alpha > 0 && in.alpha < 1)) throw domain_error("thresholds: alpha must lie in (0,1)");
    if (!(in.M > 0)) throw domain_error("thresholds: M must be positive");
    if (in.phi_m && *in.phi_m < 0) throw domain_error("thresholds: phi_m must be nonnegative");
    if (!(in.cover_c >= 1)) throw domain_error("thresholds: covering constant must be >= 1");
}

// The printed threshold formulas put log(alpha/2) under a square root; the
// proofs use (-d/a)^{1/2} with d = log(alpha/(2C)), so the radicand is
// log(2C/alpha), positive for alpha < 1.

inline double c1_alpha(const ThresholdInputs& in) {
    validate_threshold_inputs(in);
    if (in.phi_m) throw domain_error("c1_alpha: use c_tilde when phi_m is set");
    const auto& k = in.constants;
    return std::cbrt(125.0 * in.M * k.K1 * k.K1 * k.K2 / (2.0 * in.n)) +
           std::sqrt(25.0 * k.K1 * k.K1 * std::log(2.0 * in.cover_c / in.alpha) / (4.0 * in.n));
}

inline double c2_alpha(const ThresholdInputs& in) {
    validate_threshold_inputs(in);
    if (in.phi_m) throw domain_error("c2_alpha: use c_tilde when phi_m is set");
    const auto& k = in.constants;
    return std::cbrt(125.0 * in.M * k.K2 * k.K2 * k.K3 / (4.0 * in.n)) +
           std::sqrt(25.0 * k.K2 * k.K2 * std::log(2.0 * in.cover_c / in.alpha) / (8.0 * in.n));
}

/// Perturbation-aware thresholds for reconstructed data.
inline std::pair<double, double> c_tilde(const ThresholdInputs& in) {
    validate_threshold_inputs(in);
    if (!in.phi_m) throw domain_error("c_tilde: phi_m is required");
    const auto& k = in.constants;
    const double lg = std::log(4.0 * in.cover_c / in.alpha);
    const double c1 = std::cbrt(125.0 * in.M * k.K1 * k.K1 * k.K2 / (2.0 * in.n)) +
                      std::sqrt(25.0 * k.K1 * k.K1 * lg / (4.0 * in.n)) +
                      8.0 * k.K2 * *in.phi_m / in.alpha;
    const double c2 = std::cbrt(125.0 * in.M * k.K2 * k.K2 * k.K3 / (4.0 * in.n)) +
                      std::sqrt(25.0 * k.K2 * k.K2 * lg / (8.0 * in.n)) +
                      16.0 * k.K3 * *in.phi_m / in.alpha;
    return {c1, c2};
}

struct ModeDecision {
    double delta = 0;
    bool significant = false;
    double ball_radius = 0;    // delta / (2 beta3)
    double localization = 0;   // 8 C1 / delta (infinite when delta == 0)
};

struct SignificanceReport {
    double C1 = 0, C2 = 0;
    bool tilde = false;        // C1/C2 are the phi_m-perturbed variants
    double beta3 = 0;          // 12 K3
    double threshold = 0;      // max{ sqrt(8 beta3 C1), 8 C2 }
    std::vector<ModeDecision> decisions;
};

/// Classify each mode: significant iff delta >= threshold (inclusive).
inline SignificanceReport classify(const ModeSet& modeset, const ThresholdInputs& in) {
    SignificanceReport rep;
    if (in.phi_m) {
        auto [c1, c2] = c_tilde(in);
        rep.C1 = c1;
        rep.C2 = c2;
        rep.tilde = true;
    } else {
        rep.C1 = c1_alpha(in);
        rep.C2 = c2_alpha(in);
    }
    rep.beta3 = 12.0 * in.constants.K3;
    rep.threshold = std::max(std::sqrt(8.0 * rep.beta3 * rep.C1), 8.0 * rep.C2);
    for (const Mode& mode : modeset.modes) {
        ModeDecision d;
        d.delta = mode.delta;
        d.significant = mode.delta >= rep.threshold;
        d.ball_radius = mode.delta / (2.0 * rep.beta3);
        d.localization = mode.delta > 0 ? 8.0 * rep.C1 / mode.delta
                                        : std::numeric_limits<double>::infinity();
        rep.decisions.push_back(d);
    }
    return rep;
}

enum class MatchVerdict { bijective, non_injective, incomplete };

struct PhiMatching {
    // matched[k] lists true-mode indices within the matching radius of the
    // k-th significant mode (in modeset order, insignificant modes skipped).
    std::vector<std::vector<int>> matched;
    std::vector<int> significant_indices;  // indices into modeset.modes
    MatchVerdict verdict = MatchVerdict::incomplete;
};

/// Simulation diagnostic: match each significant mode to the true modes inside
/// radius min(delta/(2 beta3), log(n) C1/delta).
inline PhiMatching phi_match(const ModeSet& estimated, const std::vector<Curve>& truth,
                             const ThresholdInputs& in) {
    const SignificanceReport rep = classify(estimated, in);
    PhiMatching out;
    std::vector<int> truth_hits(truth.size(), 0);
    bool any_empty = false, any_multi = false;
    for (size_t k = 0; k < estimated.modes.size(); ++k) {
        if (!rep.decisions[k].significant) continue;
        out.significant_indices.push_back(static_cast<int>(k));
        const double delta = rep.decisions[k].delta;
        const double radius =
            std::min(delta / (2.0 * rep.beta3), std::log(static_cast<double>(in.n)) * rep.C1 / delta);
        std::vector<int> hits;
        for (size_t t = 0; t < truth.size(); ++t)
            if (dist_l2(estimated.modes[k].curve, truth[t]) <= radius) {
                hits.push_back(static_cast<int>(t));
                ++truth_hits[t];
            }
        if (hits.empty()) any_empty = true;
        if (hits.size() > 1) any_multi = true;
        out.matched.push_back(std::move(hits));
    }
    const bool all_truth_once =
        std::all_of(truth_hits.begin(), truth_hits.end(), [](int c) { return c == 1; });
    const bool truth_repeat =
        std::any_of(truth_hits.begin(), truth_hits.end(), [](int c) { return c > 1; });
    if (any_multi || truth_repeat)
        out.verdict = MatchVerdict::non_injective;
    else if (any_empty || !all_truth_once || out.matched.empty())
        out.verdict = MatchVerdict::incomplete;
    else
        out.verdict = MatchVerdict::bijective;
    return out;
}

struct ScanRow {
    double h = 0;
    int mode_count = 0;
    int significant_count = 0;
    std::vector<double> densities;  // attained density per mode
    bool recommended = false;
};

struct ScanTable {
    std::vector<ScanRow> rows;
    int recommended_index = -1;
};

/// Bandwidth scan: cluster at every h, count modes and significant modes.
/// Recommendation follows "maximize the significant-mode count, ties to the
/// larger h". At desk-scale n the thresholds often classify nothing as
/// significant; the fallback then picks the most stable multi-mode plateau of
/// the mode count (longest run with 2 <= count < n, ties to the smaller
/// count, then to the larger h) and recommends the run's upper median.
inline ScanTable scan_h(const CurveSample& sample, const KernelProfile& kernel,
                        const std::vector<double>& h_grid, const ThresholdInputs& base,
                        const AscentOptions& opts = {}) {
    if (h_grid.empty()) throw domain_error("scan_h: empty h grid");
    for (size_t i = 0; i < h_grid.size(); ++i) {
        if (h_grid[i] <= 0) throw domain_error("scan_h: bandwidths must be positive");
        if (i > 0 && h_grid[i] <= h_grid[i - 1])
            throw domain_error("scan_h: h grid must be strictly increasing");
    }
    ScanTable table;
    for (double h : h_grid) {
        DensityModel model = make_model(sample, kernel, h);
        std::vector<AscentResult> results;
        results.reserve(model.n());
        for (const Curve& c : model.sample.curves) results.push_back(ascend(model, c, opts));
        ModeSet modes = merge_modes(results, model, default_merge_radius(h));
        ThresholdInputs in = base;
        in.constants = model.constants;
        const SignificanceReport rep = classify(modes, in);
        ScanRow row;
        row.h = h;
        row.mode_count = static_cast<int>(modes.modes.size());
        for (const auto& d : rep.decisions) row.significant_count += d.significant ? 1 : 0;
        for (const Mode& mode : modes.modes) row.densities.push_back(mode.attained_density);
        table.rows.push_back(std::move(row));
    }

    int best = -1;
    for (size_t i = 0; i < table.rows.size(); ++i)
        if (best < 0 || table.rows[i].significant_count >= table.rows[best].significant_count)
            best = static_cast<int>(i);
    if (table.rows[best].significant_count == 0) {
        // Plateau fallback.
        const long n = static_cast<long>(sample.curves.size());
        int run_start = -1, run_len = 0, run_count = 0;
        for (size_t i = 0; i < table.rows.size();) {
            size_t j = i;
            while (j < table.rows.size() && table.rows[j].mode_count == table.rows[i].mode_count) ++j;
            const int count = table.rows[i].mode_count;
            const int len = static_cast<int>(j - i);
            if (count >= 2 && count < n) {
                const bool better = len > run_len || (len == run_len && count < run_count) ||
                                    (len == run_len && count == run_count);
                if (better) {
                    run_start = static_cast<int>(i);
                    run_len = len;
                    run_count = count;
                }
            }
            i = j;
        }
        if (run_start >= 0) best = run_start + run_len / 2;
        // else: keep the significant-count argmax (largest h).
    }
    table.recommended_index = best;
    table.rows[best].recommended = true;
    return table;
}

}  // namespace fmc
