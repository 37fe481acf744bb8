#pragma once

#include <cmath>
#include <optional>

#include "rwre/birth_death.hpp"
#include "rwre/valley.hpp"

namespace rwre {

// Parameters of the good-environment predicate at horizon n:
// core half-width c3 (1-beta)^-2 and the admissible occupation bound
// 2 c0 / sqrt(core). sigma is the log-odds standard deviation of the law,
// needed for the confinement window.
struct GoodEnvParams {
    std::int64_t n = 16;
    double beta = 0.0;
    double c0 = 1.0;
    double c3 = 1.0;
    double sigma = 1.0;

    GoodEnvParams(std::int64_t n_, double beta_, double c0_, double c3_, double sigma_)
        : n(n_), beta(beta_), c0(c0_), c3(c3_), sigma(sigma_) {
        require(n >= 16, "n must be >= 16");
        require(beta >= 0.0 && beta < 1.0, "beta must lie in [0, 1)");
        require(c0 > 0.0 && c3 > 0.0, "c0 and c3 must be positive");
        require(sigma > 0.0, "sigma must be positive");
    }

    double core_halfwidth() const { return c3 / ((1.0 - beta) * (1.0 - beta)); }
    Site confinement_window() const { return window_bound(n, sigma); }
    double occupation_bound() const { return 2.0 * c0 / std::sqrt(core_halfwidth()); }
};

struct GoodEnvReport {
    bool valley_exists = false;
    bool window_ok = false;
    bool expectation_ok = false;
    double expectation = 0.0;  // E_bottom[ L(off-core, T_bottom) ]
    double threshold = 0.0;    // 2 c0 / sqrt(core)
    std::optional<BasicValley> valley;

    bool good() const { return valley_exists && window_ok && expectation_ok; }
};

// Expected off-core occupation per excursion from the valley bottom:
// sum over both off-core flanks of E_bottom[L(j, T_bottom)], evaluated with
// the bulk closed form (identical values to expected_local_time site by
// site).
inline double off_core_expected_occupation(const Environment& env,
                                           const BasicValley& v,
                                           double core_width) {
    const OffCoreSites oc = off_core_sites(v, core_width);
    double total = 0.0;
    if (!oc.left_empty()) {
        auto prof = expected_local_time_profile(env, v.bottom, oc.left.lo, oc.left.hi);
        for (double e : prof) total += e;
    }
    if (!oc.right_empty()) {
        auto prof = expected_local_time_profile(env, v.bottom, oc.right.lo, oc.right.hi);
        for (double e : prof) total += e;
    }
    return total;
}

// The three-clause good-environment predicate:
//   (1) the basic valley at depth log n + 12 log log n exists,
//   (2) both walls sit inside the confinement window |site| <= W,
//   (3) expected off-core occupation per excursion <= 2 c0 / sqrt(core).
// The search window extends well past W so that clause (2) failing is
// reported as window_ok = false rather than masquerading as absence.
inline GoodEnvReport is_good_environment(const Environment& env,
                                         const GoodEnvParams& params) {
    GoodEnvReport r;
    r.threshold = params.occupation_bound();

    const double gamma = depth_threshold(params.n);
    const double margin = side_margin(params.n);
    const Site w = params.confinement_window();
    Potential pot(env);
    auto valley = basic_valley(pot, gamma, margin, {-8 * w, 8 * w});
    if (!valley) return r;

    r.valley = valley;
    r.valley_exists = true;
    r.window_ok = -w <= valley->left_wall && valley->right_wall <= w;
    r.expectation = off_core_expected_occupation(env, *valley, params.core_halfwidth());
    r.expectation_ok = r.expectation <= r.threshold;
    return r;
}

}  // namespace rwre
