#pragma once

#include <cmath>
#include <mutex>
#include <optional>
#include <vector>

#include "rwre/environment.hpp"

namespace rwre {

// The random potential S attached to an environment:
//
//   S_0 = 0,   S_k - S_{k-1} = log((1 - alpha_k)/alpha_k)   for every k.
//
// One telescoping convention for all k (so S_{-1} = -eps_0); it is the
// unique choice under which differences S_i - S_j telescope on both sides
// of the origin, which is all the first-passage formulas consume.
//
// Values are produced by sequential accumulation and cached append-only:
// the S value a site had when first realized is the value it keeps, and
// S_k - S_{k-1} == eps_k holds exactly in floating point because each value
// is computed from its inner neighbor along the same path. Window growth is
// serialized by a mutex; the environment itself is stateless.
class Potential {
  public:
    explicit Potential(const Environment& env) : env_(&env) {
        right_.push_back(0.0);  // S_0
    }

    const Environment& environment() const { return *env_; }

    double at(Site k) const {
        std::lock_guard<std::mutex> hold(mu_);
        ensure(k);
        return fetch(k);
    }

    double operator()(Site k) const { return at(k); }

    double log_odds(Site k) const { return env_->log_odds(k); }

    SiteRange realized() const {
        std::lock_guard<std::mutex> hold(mu_);
        return {-static_cast<Site>(left_.size()),
                static_cast<Site>(right_.size()) - 1};
    }

    // Contiguous S values over [lo, hi]; slice[k - lo] == S_k.
    std::vector<double> slice(Site lo, Site hi) const {
        require(lo <= hi, "potential slice needs lo <= hi");
        std::lock_guard<std::mutex> hold(mu_);
        ensure(lo);
        ensure(hi);
        std::vector<double> out;
        out.reserve(static_cast<std::size_t>(hi - lo + 1));
        for (Site k = lo; k <= hi; ++k) out.push_back(fetch(k));
        return out;
    }

  private:
    void ensure(Site k) const {
        if (k >= 0) {
            while (static_cast<Site>(right_.size()) <= k) {
                Site next = static_cast<Site>(right_.size());
                right_.push_back(right_.back() + env_->log_odds(next));
            }
        } else {
            while (static_cast<Site>(left_.size()) < -k) {
                Site next = -static_cast<Site>(left_.size()) - 1;
                double outer = left_.empty() ? right_[0] : left_.back();
                // S_{k} = S_{k+1} - eps_{k+1}
                left_.push_back(outer - env_->log_odds(next + 1));
            }
        }
    }

    double fetch(Site k) const {
        return k >= 0 ? right_[static_cast<std::size_t>(k)]
                      : left_[static_cast<std::size_t>(-k) - 1];
    }

    const Environment* env_;
    mutable std::mutex mu_;
    mutable std::vector<double> right_;  // S_0, S_1, ...
    mutable std::vector<double> left_;   // S_{-1}, S_{-2}, ...
};

struct PotentialSlice {
    Site lo = 0;
    std::vector<double> s;

    double at(Site k) const { return s[static_cast<std::size_t>(k - lo)]; }
    Site hi() const { return lo + static_cast<Site>(s.size()) - 1; }
};

inline PotentialSlice potential_range(const Environment& env, Site lo, Site hi) {
    Potential pot(env);
    return {lo, pot.slice(lo, hi)};
}

// First m >= 1 with S_{start+m} - S_start >= a, scanning at most cap sites.
// The offset m is returned, not the absolute site.
inline std::optional<Site> stopping_time_up(const Potential& pot, double a,
                                            Site start = 0, Site cap = 1 << 20) {
    require(a > 0.0, "threshold a must be positive");
    require(cap > 0, "scan cap must be positive");
    const double base = pot.at(start);
    for (Site m = 1; m <= cap; ++m) {
        if (pot.at(start + m) - base >= a) return m;
    }
    return std::nullopt;
}

// First m >= 1 with S_{start+m} - S_start <= -a.
inline std::optional<Site> stopping_time_down(const Potential& pot, double a,
                                              Site start = 0, Site cap = 1 << 20) {
    require(a > 0.0, "threshold a must be positive");
    require(cap > 0, "scan cap must be positive");
    const double base = pot.at(start);
    for (Site m = 1; m <= cap; ++m) {
        if (pot.at(start + m) - base <= -a) return m;
    }
    return std::nullopt;
}

struct LadderEpochs {
    std::vector<Site> sites;  // u_1 < u_2 < ...
    bool truncated = false;   // cap hit before `count` epochs were found
};

// Strict descending ladder epochs of the potential to the right of 0:
// u_0 = 0, u_i = inf{m > u_{i-1} : S_m < S_{u_{i-1}}}.
inline LadderEpochs ladder_epochs(const Potential& pot, std::size_t count,
                                  Site cap = 1 << 20) {
    require(count >= 1, "need at least one epoch");
    require(cap > 0, "scan cap must be positive");
    LadderEpochs out;
    double record = pot.at(0);
    for (Site m = 1; m <= cap && out.sites.size() < count; ++m) {
        double s = pot.at(m);
        if (s < record) {
            record = s;
            out.sites.push_back(m);
        }
    }
    out.truncated = out.sites.size() < count;
    return out;
}

struct BandEntries {
    std::vector<Site> sites;  // H_{ia,1} < H_{ia,2} < ...
    bool truncated = false;
};

// Successive entry times of S into the half-open band [(i-1)a, ia),
// scanning m = 1, 2, ... : H_{ia,k} = inf{m > H_{ia,k-1} : S_m in band}.
inline BandEntries band_entry_times(const Potential& pot, int band_index,
                                    double band_width, std::size_t count,
                                    Site cap = 1 << 20) {
    require(band_index >= 1, "band index must be >= 1");
    require(band_width > 0.0, "band width must be positive");
    require(count >= 1, "need at least one entry");
    require(cap > 0, "scan cap must be positive");
    const double lo = (band_index - 1) * band_width;
    const double hi = band_index * band_width;
    BandEntries out;
    for (Site m = 1; m <= cap && out.sites.size() < count; ++m) {
        double s = pot.at(m);
        if (s >= lo && s < hi) out.sites.push_back(m);
    }
    out.truncated = out.sites.size() < count;
    return out;
}

}  // namespace rwre
