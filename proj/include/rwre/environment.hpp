#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "rwre/common.hpp"
#include "rwre/distribution.hpp"
#include "rwre/rng.hpp"

namespace rwre {

// A realized random environment: the i.i.d. sequence alpha_i of up-step
// probabilities, identified canonically by (distribution, seed).
//
// alpha(i) is a pure function of (seed, i) — per-site counter-based
// generation — so realizing new sites never perturbs old ones and queries
// are safe from any number of threads. The realized window is tracked only
// as bookkeeping; it grows monotonically under queries.
class Environment {
  public:
    Environment(EnvDistribution dist, std::uint64_t seed)
        : dist_(std::move(dist)), seed_(seed) {}

    Environment(const Environment& o)
        : dist_(o.dist_),
          seed_(o.seed_),
          override_lo_(o.override_lo_),
          overrides_(o.overrides_),
          lo_(o.lo_.load(std::memory_order_relaxed)),
          hi_(o.hi_.load(std::memory_order_relaxed)) {}

    Environment& operator=(const Environment&) = delete;

    // Crafted quenched input: alpha values pinned site by site on
    // [lo, lo + overrides.size()), the law filling in everywhere else.
    // Overrides may sit outside the law's support (they describe a fixed
    // environment, not a draw), so no support check applies to them.
    static Environment with_overrides(EnvDistribution dist, std::uint64_t seed,
                                      Site lo, std::vector<double> overrides) {
        for (double a : overrides)
            require(a > 0.0 && a < 1.0, "alpha overrides must lie in (0,1)");
        Environment env(std::move(dist), seed);
        env.override_lo_ = lo;
        env.overrides_ = std::move(overrides);
        return env;
    }

    double alpha(Site i) const {
        extend(i);
        if (!overrides_.empty() && i >= override_lo_ &&
            i < override_lo_ + static_cast<Site>(overrides_.size()))
            return overrides_[static_cast<std::size_t>(i - override_lo_)];
        return dist_.quantile(site_uniform(seed_, i));
    }

    // log((1 - alpha_i)/alpha_i), the potential increment at site i.
    double log_odds(Site i) const { return step_log_odds(alpha(i)); }

    const EnvDistribution& distribution() const { return dist_; }
    std::uint64_t seed() const { return seed_; }

    SiteRange realized_window() const {
        return {lo_.load(std::memory_order_relaxed),
                hi_.load(std::memory_order_relaxed)};
    }

  private:
    void extend(Site i) const {
        Site lo = lo_.load(std::memory_order_relaxed);
        while (i < lo && !lo_.compare_exchange_weak(lo, i, std::memory_order_relaxed)) {
        }
        Site hi = hi_.load(std::memory_order_relaxed);
        while (i > hi && !hi_.compare_exchange_weak(hi, i, std::memory_order_relaxed)) {
        }
    }

    EnvDistribution dist_;
    std::uint64_t seed_;
    Site override_lo_ = 0;
    std::vector<double> overrides_;
    mutable std::atomic<Site> lo_{0};
    mutable std::atomic<Site> hi_{0};
};

inline Environment sample_environment(const EnvDistribution& dist,
                                      std::uint64_t seed,
                                      SiteRange initial_window = {0, 0}) {
    require(initial_window.contains(0), "initial window must contain site 0");
    Environment env(dist, seed);
    env.alpha(initial_window.lo);
    env.alpha(initial_window.hi);
    return env;
}

inline double epsilon_at(const Environment& env, Site i) {
    return env.log_odds(i);
}

}  // namespace rwre
