#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rwre/birth_death.hpp"
#include "rwre/good_environment.hpp"
#include "rwre/parallel.hpp"
#include "rwre/report.hpp"
#include "rwre/valley.hpp"
#include "rwre/walk.hpp"

namespace rwre {

// Seed streams: every replica draws its environment and walk seeds from the
// campaign seed and its own index, so any report row reproduces from
// (campaign seed, replica) alone, independent of worker count.
inline constexpr std::uint64_t kEnvStream = 1;
inline constexpr std::uint64_t kWalkStream = 2;
inline constexpr std::uint64_t kTrialStream = 3;

inline std::vector<std::int64_t> default_schedule(std::int64_t n_max) {
    require(n_max >= 16, "schedule needs n_max >= 16");
    std::vector<std::int64_t> s;
    for (std::int64_t n = 16; n <= n_max; n *= 2) s.push_back(n);
    return s;
}

// A Monte Carlo campaign: the environment law, the observation schedule
// n_j (strictly increasing; default 16 * 2^j), replica count, the betas at
// which concentration radii are tracked, and the master seed.
struct Campaign {
    EnvDistribution dist = EnvDistribution::symmetric_two_point(0.3);
    std::vector<std::int64_t> schedule = default_schedule(1 << 16);
    int replicas = 100;
    std::vector<double> betas = {0.5};
    std::uint64_t seed = 1;
    unsigned workers = 1;
    double c0 = 0.0;  // optional calibrated constant; 0 = not set

    void validate() const {
        require(!schedule.empty(), "schedule must be nonempty");
        for (std::size_t j = 0; j + 1 < schedule.size(); ++j)
            require(schedule[j] < schedule[j + 1], "schedule must increase strictly");
        require(schedule.front() >= 1, "schedule entries must be >= 1");
        require(replicas >= 1, "need at least one replica");
        require(!betas.empty(), "need at least one beta");
        for (double b : betas) require(b >= 0.0 && b < 1.0, "beta must lie in [0,1)");
    }

    std::uint64_t env_seed(int replica) const {
        return derive_seed(seed, kEnvStream, static_cast<std::uint64_t>(replica));
    }
    std::uint64_t walk_seed(int replica) const {
        return derive_seed(seed, kWalkStream, static_cast<std::uint64_t>(replica));
    }
};

// ---------------------------------------------------------------------------
// Wald bounds on which potential threshold is crossed first

struct WaldVerification {
    double a = 0.0, d = 0.0;
    std::int64_t trials = 0;
    double est_down_first = 0.0, se_down = 0.0, bound_down = 0.0;
    double est_up_first = 0.0, se_up = 0.0, bound_up = 0.0;
    std::int64_t exhausted = 0;
    bool pass = false;
};

inline WaldVerification verify_wald_bounds(const EnvDistribution& dist, double a,
                                           double d, std::int64_t trials,
                                           std::uint64_t seed, unsigned workers = 1) {
    require(trials >= 1000, "need >= 1000 trials");
    const WaldBounds wb = wald_bound(a, d, dist.eta0());

    std::vector<int> outcome(static_cast<std::size_t>(trials), 0);
    parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
        Environment env(dist, derive_seed(seed, kTrialStream, t));
        double s = 0.0;
        const Site cap = 1 << 24;
        for (Site m = 1; m <= cap; ++m) {
            s += env.log_odds(m);
            if (s <= -a) {
                outcome[t] = -1;
                return;
            }
            if (s >= d) {
                outcome[t] = +1;
                return;
            }
        }
        outcome[t] = 0;  // cap exhausted; counted separately
    });

    WaldVerification r;
    r.a = a;
    r.d = d;
    r.trials = trials;
    r.bound_down = wb.down_before_up;
    r.bound_up = wb.up_before_down;
    std::int64_t down = 0, up = 0;
    for (int o : outcome) {
        if (o < 0) ++down;
        else if (o > 0) ++up;
        else ++r.exhausted;
    }
    r.est_down_first = static_cast<double>(down) / static_cast<double>(trials);
    r.est_up_first = static_cast<double>(up) / static_cast<double>(trials);
    r.se_down = binomial_se(r.est_down_first, static_cast<std::size_t>(trials));
    r.se_up = binomial_se(r.est_up_first, static_cast<std::size_t>(trials));
    r.pass = r.est_down_first <= r.bound_down + 3.0 * r.se_down &&
             r.est_up_first <= r.bound_up + 3.0 * r.se_up;
    return r;
}

// ---------------------------------------------------------------------------
// sqrt(r) tail of the first strict descent time V_0^-

struct TailPoint {
    std::int64_t r = 0;
    double estimate = 0.0;
    double se = 0.0;
    double fitted_bound = 0.0;  // b_hat / sqrt(r)
};

struct TailVerification {
    std::vector<TailPoint> points;
    double slope = 0.0, slope_se = 0.0;
    double fitted_b = 0.0;
    std::int64_t trials = 0;
    bool pass = false;
};

// Estimates Q[V_0^- > r] for each requested r from one batch of sampled
// first-descent times (V_0^- = first m with S_m < 0, the strict form used
// by the ladder decomposition), then fits the log-log slope.
inline TailVerification verify_sqrt_tail(const EnvDistribution& dist,
                                         const std::vector<std::int64_t>& r_list,
                                         std::int64_t trials, std::uint64_t seed,
                                         unsigned workers = 1) {
    require(!r_list.empty(), "need at least one r");
    for (std::size_t j = 0; j + 1 < r_list.size(); ++j)
        require(r_list[j] < r_list[j + 1], "r_list must increase");
    require(r_list.front() >= 1, "r must be >= 1");
    require(trials >= 1000, "need >= 1000 trials");

    const Site cap = r_list.back();
    std::vector<Site> descent(static_cast<std::size_t>(trials), 0);
    parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
        Environment env(dist, derive_seed(seed, kTrialStream, t));
        double s = 0.0;
        Site v = cap + 1;  // "beyond every requested r"
        for (Site m = 1; m <= cap; ++m) {
            s += env.log_odds(m);
            if (s < 0.0) {
                v = m;
                break;
            }
        }
        descent[t] = v;
    });

    TailVerification out;
    out.trials = trials;
    std::vector<double> lx, ly;
    for (std::int64_t r : r_list) {
        std::int64_t beyond = 0;
        for (Site v : descent)
            if (v > r) ++beyond;
        TailPoint p;
        p.r = r;
        p.estimate = static_cast<double>(beyond) / static_cast<double>(trials);
        p.se = binomial_se(p.estimate, static_cast<std::size_t>(trials));
        out.points.push_back(p);
        if (p.estimate > 0.0) {
            lx.push_back(std::log(static_cast<double>(r)));
            ly.push_back(std::log(p.estimate));
        }
        out.fitted_b = std::max(out.fitted_b,
                                p.estimate * std::sqrt(static_cast<double>(r)));
    }
    for (auto& p : out.points)
        p.fitted_bound = out.fitted_b / std::sqrt(static_cast<double>(p.r));

    bool bound_ok = true;
    for (const auto& p : out.points)
        bound_ok = bound_ok && p.estimate <= p.fitted_bound + 3.0 * p.se;
    if (lx.size() >= 2) {
        const LineFit f = fit_line(lx, ly);
        out.slope = f.slope;
        out.slope_se = f.slope_se;
        out.pass = f.slope <= -0.4 && bound_ok;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Band occupation counts of the potential inside the basic valley

struct BandCell {
    double core = 0.0;  // c-tilde
    int band = 0;       // i
    double mean_right = 0.0, mean_left = 0.0;
    double se_right = 0.0, se_left = 0.0;
};

struct BandVerification {
    std::vector<BandCell> cells;
    std::vector<double> c_hat;  // per core value: max over cells of mean*sqrt(core)/i^3
    double band_width = 0.0;    // a = Lambda/4
    int replicas = 0;
    int valleys_found = 0;
    bool flagged = false;  // missing valleys or degenerate cells
    bool pass = false;     // c_hat stable within factor 3 across cores
};

inline BandVerification verify_band_expectation(const EnvDistribution& dist,
                                                std::int64_t n,
                                                const std::vector<double>& cores,
                                                const std::vector<int>& bands,
                                                int replicas, std::uint64_t seed,
                                                unsigned workers = 1) {
    require(!cores.empty() && !bands.empty(), "need cores and bands");
    for (double c : cores) require(c >= 0.0, "core widths must be nonnegative");
    for (int i : bands) require(i >= 1, "band indices start at 1");
    require(replicas >= 1, "need at least one replica");

    const double a = dist.log_odds_bound() / 4.0;  // Lambda / 4
    const double gamma = depth_threshold(n);
    const double margin = side_margin(n);
    const Site w = window_bound(n, dist.sigma());

    struct PerReplica {
        bool found = false;
        // counts[core][band] for each flank
        std::vector<std::vector<double>> right, left;
    };
    std::vector<PerReplica> acc(static_cast<std::size_t>(replicas));

    parallel_for(static_cast<std::size_t>(replicas), workers, [&](std::size_t rep) {
        Environment env(dist, derive_seed(seed, kEnvStream, rep));
        Potential pot(env);
        auto valley = basic_valley(pot, gamma, margin, {-8 * w, 8 * w});
        if (!valley) return;
        PerReplica& pr = acc[rep];
        pr.found = true;
        pr.right.assign(cores.size(), std::vector<double>(bands.size(), 0.0));
        pr.left = pr.right;
        const double sbot = pot.at(valley->bottom);
        for (std::size_t ci = 0; ci < cores.size(); ++ci) {
            const OffCoreSites oc = off_core_sites(*valley, cores[ci]);
            auto tally = [&](SiteRange rr, std::vector<double>& cell) {
                for (Site j = rr.lo; j <= rr.hi; ++j) {
                    const double h = pot.at(j) - sbot;
                    for (std::size_t bi = 0; bi < bands.size(); ++bi) {
                        const double lo = a * (bands[bi] - 1), hi = a * bands[bi];
                        if (h >= lo && h < hi) cell[bi] += 1.0;
                    }
                }
            };
            if (!oc.right_empty()) tally(oc.right, pr.right[ci]);
            if (!oc.left_empty()) tally(oc.left, pr.left[ci]);
        }
    });

    BandVerification out;
    out.band_width = a;
    out.replicas = replicas;
    out.c_hat.assign(cores.size(), 0.0);
    for (const auto& pr : acc)
        if (pr.found) ++out.valleys_found;
    out.flagged = out.valleys_found < replicas;

    for (std::size_t ci = 0; ci < cores.size(); ++ci) {
        for (std::size_t bi = 0; bi < bands.size(); ++bi) {
            std::vector<double> xr, xl;
            for (const auto& pr : acc) {
                if (!pr.found) continue;
                xr.push_back(pr.right[ci][bi]);
                xl.push_back(pr.left[ci][bi]);
            }
            BandCell cell;
            cell.core = cores[ci];
            cell.band = bands[bi];
            const MeanSE mr = mean_se(xr), ml = mean_se(xl);
            cell.mean_right = mr.mean;
            cell.se_right = mr.se;
            cell.mean_left = ml.mean;
            cell.se_left = ml.se;
            out.cells.push_back(cell);
            const double i3 = std::pow(static_cast<double>(bands[bi]), 3);
            const double scale = std::sqrt(std::max(cores[ci], 1.0));
            out.c_hat[ci] = std::max({out.c_hat[ci], mr.mean * scale / i3,
                                      ml.mean * scale / i3});
        }
    }
    double chat_min = std::numeric_limits<double>::infinity(), chat_max = 0.0;
    for (double c : out.c_hat) {
        chat_min = std::min(chat_min, c);
        chat_max = std::max(chat_max, c);
    }
    if (chat_min <= 0.0) {
        out.flagged = true;
        out.pass = false;
    } else {
        out.pass = chat_max / chat_min <= 3.0;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Good-environment rate with the Markov-inequality calibration of c0

struct GoodEnvRate {
    double c0 = 0.0;
    double c3 = 0.0;
    double core = 0.0;  // c3 (1-beta)^-2
    double rate = 0.0;
    double se = 0.0;
    int replicas = 0;
    int valleys_found = 0;
    int window_ok = 0;
    int expectation_ok = 0;
    int calibration_count = 0;  // replicas entering the c0 mean
    int dipped = 0;             // wall stretches crossing below the bottom
    bool pass = false;
};

// Two passes over the same replicated environments:
//   1. calibrate c0 := 2 * mean of the off-core expected occupation at unit
//      core width (so the good-environment threshold 2 c0 / sqrt(core) is
//      four sample means, and the empirical Markov inequality keeps the
//      exceedance share below a quarter); the mean runs over replicas whose
//      valley sits inside the confinement window and whose wall stretches
//      never dip below the bottom — environments where the side condition
//      drags a wall across deeper terrain have exponentially large
//      occupations by construction, and the window clause exists to screen
//      that regime out;
//   2. set c3 = 64 c0^2 and count environments satisfying all three clauses.
inline GoodEnvRate verify_good_env_rate(const EnvDistribution& dist, std::int64_t n,
                                        double beta, int replicas,
                                        std::uint64_t seed, unsigned workers = 1) {
    require(replicas >= 100, "need >= 100 replicas");
    require(beta >= 0.0 && beta < 1.0, "beta must lie in [0,1)");

    const double gamma = depth_threshold(n);
    const double margin = side_margin(n);
    const double sigma = dist.sigma();
    const Site w = window_bound(n, sigma);

    struct PerReplica {
        std::optional<BasicValley> valley;
        bool window_ok = false;
        bool dipped = false;    // some wall stretch falls below the bottom
        double occ_unit = 0.0;  // off-core expectation at core width 1
    };
    std::vector<PerReplica> acc(static_cast<std::size_t>(replicas));
    parallel_for(static_cast<std::size_t>(replicas), workers, [&](std::size_t rep) {
        Environment env(dist, derive_seed(seed, kEnvStream, rep));
        Potential pot(env);
        auto valley = basic_valley(pot, gamma, margin, {-8 * w, 8 * w});
        if (!valley) return;
        PerReplica& pr = acc[rep];
        pr.valley = valley;
        pr.window_ok = -w <= valley->left_wall && valley->right_wall <= w;
        const double sbot = pot.at(valley->bottom);
        for (Site j = valley->left_wall; j <= valley->right_wall && !pr.dipped; ++j)
            pr.dipped = pot.at(j) < sbot;
        if (pr.window_ok && !pr.dipped)
            pr.occ_unit = off_core_expected_occupation(env, *valley, 1.0);
    });

    GoodEnvRate out;
    out.replicas = replicas;
    std::vector<double> occ;
    for (const auto& pr : acc) {
        if (!pr.valley) continue;
        ++out.valleys_found;
        if (pr.dipped) ++out.dipped;
        if (pr.window_ok && !pr.dipped) occ.push_back(pr.occ_unit);
    }
    out.calibration_count = static_cast<int>(occ.size());
    require(!occ.empty(), "no calibration-eligible valleys; cannot calibrate c0");
    out.c0 = 2.0 * mean_se(occ).mean;
    out.c3 = 64.0 * out.c0 * out.c0;
    out.core = out.c3 / ((1.0 - beta) * (1.0 - beta));

    const double threshold = 2.0 * out.c0 / std::sqrt(out.core);
    int good = 0;
    std::vector<int> okx(static_cast<std::size_t>(replicas), 0);
    parallel_for(static_cast<std::size_t>(replicas), workers, [&](std::size_t rep) {
        const PerReplica& pr = acc[rep];
        if (!pr.valley || !pr.window_ok) return;
        Environment env(dist, derive_seed(seed, kEnvStream, rep));
        const double occ_core =
            off_core_expected_occupation(env, *pr.valley, out.core);
        okx[rep] = occ_core <= threshold ? 1 : 0;
    });
    for (std::size_t rep = 0; rep < acc.size(); ++rep) {
        if (!acc[rep].valley) continue;
        if (acc[rep].window_ok) {
            ++out.window_ok;
            if (okx[rep]) {
                ++out.expectation_ok;
                ++good;
            }
        }
    }
    out.rate = static_cast<double>(good) / static_cast<double>(replicas);
    out.se = binomial_se(out.rate, static_cast<std::size_t>(replicas));
    out.pass = out.rate >= 0.5 - 3.0 * out.se;
    return out;
}

// ---------------------------------------------------------------------------
// Concentration probes along the schedule

struct ConcentrationRow {
    int replica = 0;
    std::uint64_t env_seed = 0;
    std::uint64_t walk_seed = 0;
    std::int64_t n = 0;
    std::int64_t max_local_time = 0;
    Site fav_min = 0, fav_max = 0;
    std::vector<std::int64_t> y;  // concentration radius per campaign beta
};

struct ReplicaTrack {
    int replica = 0;
    std::vector<std::int64_t> terminal_min_y;  // per beta: min over schedule
    double terminal_max_ratio = 0.0;           // max over schedule of L*(n)/n
    Site terminal_min_spread = 0;              // min over schedule of favorite spread
    bool inclusion_violation = false;
};

struct ConcentrationReport {
    std::vector<ConcentrationRow> rows;        // sorted by (replica, n)
    std::vector<ReplicaTrack> tracks;          // one per replica
    std::vector<double> median_terminal_min_y; // per beta
    double median_terminal_max_ratio = 0.0;
    bool all_finite = true;
};

// Largest mass carried by any window of radius h (width 2h + 1).
inline std::int64_t concentration_window_mass(const LocalTimeField& field, Site h) {
    require(h >= 0, "radius must be nonnegative");
    const auto counts = field.dense();
    const auto len = static_cast<std::int64_t>(counts.size());
    std::int64_t best = 0, sum = 0;
    const std::int64_t width = 2 * h + 1;
    for (std::int64_t e = 0; e < len; ++e) {
        sum += counts[static_cast<std::size_t>(e)];
        if (e - width >= 0) sum -= counts[static_cast<std::size_t>(e - width)];
        best = std::max(best, sum);
    }
    return best;
}

// Runs each replica once to the end of the schedule, snapshotting the
// concentration statistics at every schedule point and maintaining the
// running min (for Y) and max (for L*/n) trackers the liminf/limsup
// statements are probed through. The optional inclusion half-widths check,
// at every snapshot, that a window of radius h carrying more than
// n - L*(n) forces the favorite spread to be <= 2h.
inline ConcentrationReport probe_concentration(
    const Campaign& campaign, const std::vector<Site>& inclusion_halfwidths = {}) {
    campaign.validate();
    const auto nbeta = campaign.betas.size();
    const auto nrep = static_cast<std::size_t>(campaign.replicas);

    std::vector<std::vector<ConcentrationRow>> rows(nrep);
    std::vector<ReplicaTrack> tracks(nrep);

    parallel_for(nrep, campaign.workers, [&](std::size_t rep) {
        const std::uint64_t es = campaign.env_seed(static_cast<int>(rep));
        const std::uint64_t ws = campaign.walk_seed(static_cast<int>(rep));
        Environment env(campaign.dist, es);
        UnitStream stream(ws);
        WalkState w{0, 0};
        LocalTimeField field(0);

        ReplicaTrack& tr = tracks[rep];
        tr.replica = static_cast<int>(rep);
        tr.terminal_min_y.assign(nbeta, std::numeric_limits<std::int64_t>::max());
        tr.terminal_min_spread = std::numeric_limits<Site>::max();

        for (std::int64_t n : campaign.schedule) {
            while (w.step_count < n) {
                step(env, w, stream);
                field.record_visit(w.position);
            }
            const ConcentrationStats st = stats(field);
            ConcentrationRow row;
            row.replica = static_cast<int>(rep);
            row.env_seed = es;
            row.walk_seed = ws;
            row.n = n;
            row.max_local_time = st.max_local_time;
            row.fav_min = st.favorites.front();
            row.fav_max = st.favorites.back();
            for (std::size_t b = 0; b < nbeta; ++b) {
                const std::int64_t y = concentration_radius(field, campaign.betas[b]);
                row.y.push_back(y);
                tr.terminal_min_y[b] = std::min(tr.terminal_min_y[b], y);
            }
            tr.terminal_max_ratio =
                std::max(tr.terminal_max_ratio,
                         static_cast<double>(st.max_local_time) / static_cast<double>(n));
            tr.terminal_min_spread =
                std::min(tr.terminal_min_spread, st.favorite_spread);

            for (Site h : inclusion_halfwidths) {
                const std::int64_t inside =
                    concentration_window_mass(field, h);
                if (inside > n - st.max_local_time &&
                    st.favorite_spread > 2 * h)
                    tr.inclusion_violation = true;
            }
            rows[rep].push_back(std::move(row));
        }
    });

    ConcentrationReport out;
    out.tracks = std::move(tracks);
    for (auto& rr : rows)
        for (auto& row : rr) out.rows.push_back(std::move(row));

    for (std::size_t b = 0; b < nbeta; ++b) {
        std::vector<double> term;
        for (const auto& tr : out.tracks) {
            const auto y = tr.terminal_min_y[b];
            if (y == std::numeric_limits<std::int64_t>::max()) out.all_finite = false;
            term.push_back(static_cast<double>(y));
        }
        out.median_terminal_min_y.push_back(median(term));
    }
    std::vector<double> ratios;
    for (const auto& tr : out.tracks) ratios.push_back(tr.terminal_max_ratio);
    out.median_terminal_max_ratio = median(ratios);
    return out;
}

// ---------------------------------------------------------------------------
// Scaling of the terminal concentration radius in 1/(1-beta)

struct BetaScaling {
    std::vector<double> betas;
    std::vector<double> medians;  // terminal min Y per beta
    double slope = 0.0;
    double slope_se = 0.0;
    bool degenerate = false;  // all medians equal; slope not meaningful
    bool pass = false;        // slope <= 2.5
};

inline BetaScaling probe_beta_scaling(const Campaign& campaign) {
    campaign.validate();
    require(campaign.betas.size() >= 4, "need at least four betas");
    for (std::size_t b = 0; b + 1 < campaign.betas.size(); ++b)
        require(campaign.betas[b] < campaign.betas[b + 1], "betas must increase");

    const ConcentrationReport rep = probe_concentration(campaign);
    BetaScaling out;
    out.betas = campaign.betas;
    out.medians = rep.median_terminal_min_y;

    bool all_equal = true;
    for (double m : out.medians) all_equal = all_equal && m == out.medians.front();
    if (all_equal) {
        out.degenerate = true;
        out.pass = true;  // zero growth cannot exceed the quadratic bound
        return out;
    }
    std::vector<double> lx, ly;
    for (std::size_t b = 0; b < out.betas.size(); ++b) {
        lx.push_back(std::log(1.0 / (1.0 - out.betas[b])));
        ly.push_back(std::log(std::max(out.medians[b], 1.0)));
    }
    const LineFit f = fit_line(lx, ly);
    out.slope = f.slope;
    out.slope_se = f.slope_se;
    out.pass = f.slope <= 2.5;
    return out;
}

// ---------------------------------------------------------------------------
// Favorite sites: spread tracker and the window/favorite inclusion

struct FavoriteSitesReport {
    std::vector<ReplicaTrack> tracks;
    std::int64_t inclusion_checks = 0;
    std::int64_t inclusion_violations = 0;
    double spread_median = 0.0;     // median terminal min spread
    double c2_lower_decile = 0.0;   // lower decile of terminal max L*/n
    double c4 = 0.0;                // 64 c0^2 / c2^2 when campaign.c0 is set
};

inline FavoriteSitesReport probe_favorite_sites(
    const Campaign& campaign, std::vector<Site> inclusion_halfwidths = {1, 2, 4, 8}) {
    campaign.validate();
    const ConcentrationReport rep =
        probe_concentration(campaign, inclusion_halfwidths);

    FavoriteSitesReport out;
    out.tracks = rep.tracks;
    out.inclusion_checks =
        static_cast<std::int64_t>(rep.rows.size()) *
        static_cast<std::int64_t>(inclusion_halfwidths.size());
    std::vector<double> spreads, ratios;
    for (const auto& tr : rep.tracks) {
        if (tr.inclusion_violation) ++out.inclusion_violations;
        spreads.push_back(static_cast<double>(tr.terminal_min_spread));
        ratios.push_back(tr.terminal_max_ratio);
    }
    out.spread_median = median(spreads);
    std::sort(ratios.begin(), ratios.end());
    out.c2_lower_decile = ratios[ratios.size() / 10];
    if (campaign.c0 > 0.0 && out.c2_lower_decile > 0.0) {
        const double c3 = 64.0 * campaign.c0 * campaign.c0;
        out.c4 = c3 / (out.c2_lower_decile * out.c2_lower_decile);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Constancy probe: dispersion of max_n L*(n)/n within vs between environments

struct ZeroOneReport {
    int environments = 0;
    int walks_per_env = 0;
    double within_sd = 0.0;   // mean over envs of the across-walk sd
    double between_sd = 0.0;  // sd across envs of the across-walk mean
    double ratio = 0.0;       // between / within
    double ratio_se = 0.0;    // jackknife over environments
    bool between_defined = false;  // needs at least two environments
};

// Production runs use >= 50 environments x >= 20 walks; a single
// environment yields a within-dispersion-only report.
inline ZeroOneReport probe_zero_one(const Campaign& campaign, int environments,
                                    int walks_per_env) {
    campaign.validate();
    require(environments >= 1, "need at least one environment");
    require(walks_per_env >= 2, "need at least two walks per environment");

    const auto ne = static_cast<std::size_t>(environments);
    const auto nw = static_cast<std::size_t>(walks_per_env);
    std::vector<std::vector<double>> v(ne, std::vector<double>(nw, 0.0));
    parallel_for(ne * nw, campaign.workers, [&](std::size_t idx) {
        const std::size_t e = idx / nw, k = idx % nw;
        Environment env(campaign.dist, derive_seed(campaign.seed, kEnvStream, e));
        UnitStream stream(
            derive_seed(campaign.seed, kWalkStream, e * 1000003ULL + k));
        WalkState w{0, 0};
        LocalTimeField field(0);
        double best = 0.0;
        for (std::int64_t n : campaign.schedule) {
            while (w.step_count < n) {
                step(env, w, stream);
                field.record_visit(w.position);
            }
            const ConcentrationStats st = stats(field);
            best = std::max(best, static_cast<double>(st.max_local_time) /
                                      static_cast<double>(n));
        }
        v[e][k] = best;
    });

    auto summarize = [&](const std::vector<std::size_t>& envs) {
        double within = 0.0;
        std::vector<double> means;
        for (std::size_t e : envs) {
            MeanSE m = mean_se(v[e]);
            means.push_back(m.mean);
            within += m.se * std::sqrt(static_cast<double>(nw));  // sd, not se
        }
        within /= static_cast<double>(envs.size());
        const MeanSE across = mean_se(means);
        const double between =
            across.se * std::sqrt(static_cast<double>(means.size()));
        return std::pair<double, double>(within, between);
    };

    std::vector<std::size_t> all(ne);
    for (std::size_t e = 0; e < ne; ++e) all[e] = e;
    auto [within, between] = summarize(all);

    ZeroOneReport out;
    out.environments = environments;
    out.walks_per_env = walks_per_env;
    out.within_sd = within;
    out.between_defined = ne >= 2;
    out.between_sd = out.between_defined ? between : 0.0;
    out.ratio = out.between_defined && within > 0.0 ? between / within : 0.0;

    if (ne >= 3) {
        // jackknife the ratio over environments
        std::vector<double> jack;
        for (std::size_t drop = 0; drop < ne; ++drop) {
            std::vector<std::size_t> rest;
            for (std::size_t e = 0; e < ne; ++e)
                if (e != drop) rest.push_back(e);
            auto [wi, be] = summarize(rest);
            jack.push_back(wi > 0.0 ? be / wi : 0.0);
        }
        // jackknife se inflates the leave-one-out spread by (n - 1)
        const MeanSE jm = mean_se(jack);
        out.ratio_se = jm.se * static_cast<double>(ne - 1);
    }
    return out;
}

}  // namespace rwre
