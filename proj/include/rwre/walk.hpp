#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/rng.hpp"

namespace rwre {

template <typename S>
concept UnitStreamLike = requires(S s) {
    { s.next() } -> std::convertible_to<double>;
};

// Sparse-in-spirit occupation counts of a trajectory: a dense array over
// the visited range (which for these walks is tiny compared to n) plus the
// bookkeeping the concentration statistics need. Counts cover steps 1..n;
// the time-0 presence at the start site is not counted.
class LocalTimeField {
  public:
    explicit LocalTimeField(Site start = 0) : origin_(start) {
        counts_.assign(1, 0);
        lo_ = hi_ = start;
    }

    void record_visit(Site s) {
        grow_to(s);
        ++counts_[index(s)];
        ++total_;
        min_visited_ = std::min(min_visited_, s);
        max_visited_ = std::max(max_visited_, s);
    }

    std::int64_t count(Site s) const {
        if (s < lo_ || s > hi_) return 0;
        return counts_[index(s)];
    }

    std::int64_t total() const { return total_; }

    // Visited range: sites with at least one visit. Empty until the first step.
    bool empty() const { return total_ == 0; }
    Site min_site() const { return min_visited_; }
    Site max_site() const { return max_visited_; }

    // counts over [min_site, max_site], index 0 = min_site
    std::vector<std::int64_t> dense() const {
        std::vector<std::int64_t> out;
        if (empty()) return out;
        out.reserve(static_cast<std::size_t>(max_visited_ - min_visited_ + 1));
        for (Site s = min_visited_; s <= max_visited_; ++s) out.push_back(count(s));
        return out;
    }

  private:
    std::size_t index(Site s) const { return static_cast<std::size_t>(s - lo_); }

    void grow_to(Site s) {
        if (s >= lo_ && s <= hi_) return;
        Site nlo = lo_, nhi = hi_;
        while (s < nlo) nlo -= std::max<Site>(8, (nhi - nlo + 1));
        while (s > nhi) nhi += std::max<Site>(8, (nhi - nlo + 1));
        std::vector<std::int64_t> next(static_cast<std::size_t>(nhi - nlo + 1), 0);
        for (Site k = lo_; k <= hi_; ++k)
            next[static_cast<std::size_t>(k - nlo)] = counts_[index(k)];
        counts_ = std::move(next);
        lo_ = nlo;
        hi_ = nhi;
    }

    Site origin_;
    Site lo_ = 0, hi_ = 0;  // backing-store range
    Site min_visited_ = std::numeric_limits<Site>::max();
    Site max_visited_ = std::numeric_limits<Site>::min();
    std::int64_t total_ = 0;
    std::vector<std::int64_t> counts_;
};

struct WalkState {
    Site position = 0;
    std::int64_t step_count = 0;
};

// One quenched step: up with probability alpha at the current site.
template <UnitStreamLike S>
inline void step(const Environment& env, WalkState& w, S& stream) {
    const double a = env.alpha(w.position);
    w.position += stream.next() < a ? 1 : -1;
    ++w.step_count;
}

struct RunResult {
    LocalTimeField field;
    WalkState state;
};

// Run the walk n steps from `start`, accumulating local times for steps 1..n.
template <UnitStreamLike S>
inline RunResult run(const Environment& env, S& stream, std::int64_t n_steps,
                     Site start = 0) {
    require(n_steps >= 1, "need at least one step");
    RunResult r;
    r.field = LocalTimeField(start);
    r.state = {start, 0};
    for (std::int64_t k = 0; k < n_steps; ++k) {
        step(env, r.state, stream);
        r.field.record_visit(r.state.position);
    }
    return r;
}

inline RunResult run(const Environment& env, std::uint64_t walk_seed,
                     std::int64_t n_steps, Site start = 0) {
    UnitStream stream(walk_seed);
    return run(env, stream, n_steps, start);
}

// First k >= 1 with X_k == x, or absent once cap steps have been taken.
template <UnitStreamLike S>
inline std::optional<std::int64_t> hitting_time(const Environment& env, S& stream,
                                                Site x, std::int64_t cap,
                                                Site start = 0) {
    require(cap >= 1, "cap must be >= 1");
    WalkState w{start, 0};
    for (std::int64_t k = 1; k <= cap; ++k) {
        step(env, w, stream);
        if (w.position == x) return k;
    }
    return std::nullopt;
}

inline std::optional<std::int64_t> hitting_time(const Environment& env,
                                                std::uint64_t walk_seed, Site x,
                                                std::int64_t cap, Site start = 0) {
    UnitStream stream(walk_seed);
    return hitting_time(env, stream, x, cap, start);
}

struct ExcursionEstimate {
    double mean_occupation = 0.0;    // per-excursion visits to the target set
    double se = 0.0;                 // standard error across excursions
    std::int64_t excursions = 0;     // attempts averaged over (capped included)
    std::int64_t capped = 0;         // attempts cut off at the step cap
    std::int64_t total_steps = 0;

    bool clean() const { return capped == 0; }
};

// Unbiased estimator of E_center[L(targets, T_center)]: average the target
// visits accumulated over independent excursions from `center`. An attempt
// that has not returned after step_cap steps is truncated there and counted
// with the visits it did accrue; `capped` reports how many were truncated.
template <UnitStreamLike S, typename TargetPred>
    requires std::predicate<TargetPred&, Site>
inline ExcursionEstimate excursion_local_time(const Environment& env, S& stream,
                                              Site center, TargetPred&& in_target,
                                              std::int64_t excursions,
                                              std::int64_t step_cap = 100000) {
    require(excursions >= 1, "need at least one excursion");
    require(step_cap >= 1, "step cap must be >= 1");
    ExcursionEstimate est;
    est.excursions = excursions;
    std::int64_t hits = 0;
    double sumsq = 0.0;
    for (std::int64_t e = 0; e < excursions; ++e) {
        WalkState w{center, 0};
        bool returned = false;
        std::int64_t here = 0;
        for (std::int64_t k = 0; k < step_cap; ++k) {
            step(env, w, stream);
            ++est.total_steps;
            if (in_target(w.position)) ++here;
            if (w.position == center) {
                returned = true;
                break;
            }
        }
        if (!returned) ++est.capped;
        hits += here;
        sumsq += static_cast<double>(here) * static_cast<double>(here);
    }
    const auto n = static_cast<double>(excursions);
    est.mean_occupation = static_cast<double>(hits) / n;
    if (excursions > 1) {
        const double var =
            (sumsq - n * est.mean_occupation * est.mean_occupation) / (n - 1.0);
        est.se = std::sqrt(std::max(0.0, var) / n);
    }
    return est;
}

template <UnitStreamLike S>
inline ExcursionEstimate excursion_local_time(const Environment& env, S& stream,
                                              Site center,
                                              const std::vector<Site>& targets,
                                              std::int64_t excursions,
                                              std::int64_t step_cap = 100000) {
    std::vector<Site> sorted(targets);
    std::sort(sorted.begin(), sorted.end());
    auto pred = [&sorted](Site s) {
        return std::binary_search(sorted.begin(), sorted.end(), s);
    };
    return excursion_local_time(env, stream, center, pred, excursions, step_cap);
}

// Smallest radius k >= 1 such that some centered window [x-k, x+k] carries
// at least beta * total of the walk's time. Prefix sums over the visited
// range plus a binary search over k (the best window mass is nondecreasing
// in k). The mass comparison is `mass >= beta * total` in double precision;
// the exhaustive test oracle uses the identical comparison.
inline std::int64_t concentration_radius(const LocalTimeField& field, double beta) {
    require(beta >= 0.0 && beta < 1.0, "beta must lie in [0, 1)");
    require(field.total() >= 1, "field must contain at least one visit");

    const auto counts = field.dense();
    const auto len = static_cast<std::int64_t>(counts.size());
    std::vector<std::int64_t> pre(static_cast<std::size_t>(len) + 1, 0);
    for (std::int64_t t = 0; t < len; ++t)
        pre[static_cast<std::size_t>(t) + 1] = pre[static_cast<std::size_t>(t)] + counts[static_cast<std::size_t>(t)];
    const double need = beta * static_cast<double>(field.total());

    auto reachable = [&](std::int64_t k) {
        const std::int64_t width = 2 * k + 1;
        for (std::int64_t s = 0; s < len; ++s) {
            const std::int64_t e = std::min(len, s + width);
            if (static_cast<double>(pre[static_cast<std::size_t>(e)] - pre[static_cast<std::size_t>(s)]) >= need)
                return true;
            if (e == len) break;
        }
        return false;
    };

    std::int64_t lo = 1, hi = std::max<std::int64_t>(1, len);
    while (lo < hi) {
        const std::int64_t mid = lo + (hi - lo) / 2;
        if (reachable(mid))
            hi = mid;
        else
            lo = mid + 1;
    }
    return lo;
}

// Summary statistics of one local-time field: the maximal local time, the
// set of sites achieving it, their spread, and the concentration radius at
// any requested beta.
struct ConcentrationStats {
    std::int64_t max_local_time = 0;  // L*(n)
    std::vector<Site> favorites;      // argmax set, ascending
    Site favorite_spread = 0;         // max F - min F

    const LocalTimeField* field = nullptr;

    std::int64_t concentration(double beta) const {
        return concentration_radius(*field, beta);
    }
};

inline ConcentrationStats stats(const LocalTimeField& field) {
    require(field.total() >= 1, "field must contain at least one visit");
    ConcentrationStats s;
    s.field = &field;
    for (Site k = field.min_site(); k <= field.max_site(); ++k)
        s.max_local_time = std::max(s.max_local_time, field.count(k));
    for (Site k = field.min_site(); k <= field.max_site(); ++k)
        if (field.count(k) == s.max_local_time) s.favorites.push_back(k);
    s.favorite_spread = s.favorites.back() - s.favorites.front();
    return s;
}

}  // namespace rwre
