#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "rwre/potential.hpp"

namespace rwre {

// Depth a valley must reach before the walk localizes in it by time n:
// log n + 12 log log n. The floor n >= 16 keeps log log n comfortably
// positive.
inline double depth_threshold(std::int64_t n) {
    require(n >= 16, "depth threshold needs n >= 16");
    const double ln = std::log(static_cast<double>(n));
    return ln + 12.0 * std::log(ln);
}

// The 12 log log n side condition that keeps the valley wall on the origin
// side strictly dominant over everything between the origin and the bottom.
inline double side_margin(std::int64_t n) {
    require(n >= 16, "side margin needs n >= 16");
    return 12.0 * std::log(std::log(static_cast<double>(n)));
}

// Confinement scale for the basic valley. A wall must clear up to
// depth + margin above the bottom, and a height h is first reached at the
// diffusive scale (h/sigma)^2; the factor 2 inside the square covers the
// upper tail of that hitting scale. Asymptotically (2(depth+margin)/sigma)^2
// is (4 + o(1)) (log n / sigma)^2, the classical window.
inline Site window_bound(std::int64_t n, double sigma) {
    require(sigma > 0.0, "sigma must be positive");
    const double h = depth_threshold(n) + side_margin(n);
    return static_cast<Site>(std::ceil(std::pow(2.0 * h / sigma, 2)));
}

// A valley {M', m, M''}: bottom flanked by one-sided maxima.
struct Valley {
    Site left_wall = 0;
    Site bottom = 0;
    Site right_wall = 0;

    double depth(const Potential& pot) const {
        const double sm = pot.at(bottom);
        return std::min(pot.at(left_wall) - sm, pot.at(right_wall) - sm);
    }
};

// Right refinement: the steepest descent (peak before trough) inside
// [bottom, right_wall]. peak == trough signals "no strict descent".
struct RightRefinement {
    Site peak = 0;    // M_1
    Site trough = 0;  // m_1
    double drop = 0.0;
};

// Left refinement: the steepest ascent (trough before peak) inside
// [left_wall, bottom].
struct LeftRefinement {
    Site trough = 0;  // m_1
    Site peak = 0;    // M_1
    double rise = 0.0;
};

namespace detail {

// Core scan shared by both refinements. Over sites lo..hi of `s`
// (site k stored at s[k - base]), maximize s[p] - s[t] for p <= t.
// Ties resolved lexicographically on (|t|, |p|, p, t); the last two keys
// reproduce scan order (p ascending, then t), so a full tie goes to the
// leftmost pair. Single-direction O(n) passes.
struct DropPair {
    Site peak = 0;
    Site trough = 0;
    double drop = 0.0;
};

inline DropPair max_drop(const std::vector<double>& s, Site base, Site lo, Site hi) {
    auto at = [&](Site k) { return s[static_cast<std::size_t>(k - base)]; };

    double prefmax = -std::numeric_limits<double>::infinity();
    double best = -std::numeric_limits<double>::infinity();
    for (Site t = lo; t <= hi; ++t) {
        prefmax = std::max(prefmax, at(t));
        best = std::max(best, prefmax - at(t));
    }

    // Troughs achieving the maximal drop, keeping only the smallest |t|;
    // at most two sites (+-v) can share it.
    Site cand[2];
    int ncand = 0;
    Site best_abs = std::numeric_limits<Site>::max();
    prefmax = -std::numeric_limits<double>::infinity();
    for (Site t = lo; t <= hi; ++t) {
        prefmax = std::max(prefmax, at(t));
        if (prefmax - at(t) == best) {
            const Site a = t < 0 ? -t : t;
            if (a < best_abs) {
                best_abs = a;
                cand[0] = t;
                ncand = 1;
            } else if (a == best_abs && ncand < 2 && cand[ncand - 1] != t) {
                cand[ncand++] = t;
            }
        }
    }

    DropPair out;
    bool have = false;
    for (int c = 0; c < ncand; ++c) {
        const Site t = cand[c];
        // peak: any p whose rounded drop against this trough equals the
        // maximum (subtraction can round away sub-ulp height differences,
        // so this is a wider set than the argmax of s); smallest |p|, then
        // leftmost
        Site bestp = lo;
        bool havep = false;
        for (Site p = lo; p <= t; ++p) {
            if (at(p) - at(t) != best) continue;
            if (!havep) {
                bestp = p;
                havep = true;
                continue;
            }
            const Site ap = p < 0 ? -p : p, ab = bestp < 0 ? -bestp : bestp;
            if (ap < ab || (ap == ab && p < bestp)) bestp = p;
        }
        DropPair pair{bestp, t, best};
        if (!have) {
            out = pair;
            have = true;
            continue;
        }
        const Site ap = pair.peak < 0 ? -pair.peak : pair.peak;
        const Site ao = out.peak < 0 ? -out.peak : out.peak;
        if (ap < ao || (ap == ao && (pair.peak < out.peak ||
                                     (pair.peak == out.peak && pair.trough < out.trough))))
            out = pair;
    }
    return out;
}

}  // namespace detail

inline RightRefinement refine_right(const Potential& pot, const Valley& v) {
    require(v.bottom <= v.right_wall, "malformed valley");
    std::vector<double> s = pot.slice(v.bottom, v.right_wall);
    auto r = detail::max_drop(s, v.bottom, v.bottom, v.right_wall);
    return {r.peak, r.trough, r.drop};
}

// The mirror operation, realized as a right refinement of the reflected
// potential so the two stay exact mirror images of one another.
inline LeftRefinement refine_left(const Potential& pot, const Valley& v) {
    require(v.left_wall <= v.bottom, "malformed valley");
    std::vector<double> s = pot.slice(v.left_wall, v.bottom);
    std::vector<double> rs(s.rbegin(), s.rend());
    auto r = detail::max_drop(rs, -v.bottom, -v.bottom, -v.left_wall);
    return {-r.trough, -r.peak, r.drop};
}

// The basic valley around the origin: bottom plus the two walls defined
// directly from it.
struct BasicValley {
    Site left_wall = 0;   // in Z_-
    Site bottom = 0;
    Site right_wall = 0;  // in Z_+
    double gamma = 0.0;   // required depth
    double margin = 0.0;  // required side dominance
    double depth = 0.0;   // realized depth
};

namespace detail {

struct Def6Check {
    bool valley_shape = false;
    bool contains_origin = false;
    bool deep_enough = false;
    bool margin_ok = false;

    bool ok() const {
        return valley_shape && contains_origin && deep_enough && margin_ok;
    }
};

// Re-scan S to test every clause a valley of depth gamma containing the
// origin must satisfy. Also used verbatim by the unit tests as the
// independent verification of basic_valley output.
inline Def6Check check_def6(const Potential& pot, const Valley& v, double gamma,
                            double margin) {
    Def6Check c;
    if (!(v.left_wall <= v.bottom && v.bottom <= v.right_wall)) return c;
    std::vector<double> s = pot.slice(v.left_wall, v.right_wall);
    auto at = [&](Site k) { return s[static_cast<std::size_t>(k - v.left_wall)]; };

    double lmax = -std::numeric_limits<double>::infinity();
    for (Site t = v.left_wall; t <= v.bottom; ++t) lmax = std::max(lmax, at(t));
    double rmax = -std::numeric_limits<double>::infinity();
    for (Site t = v.bottom; t <= v.right_wall; ++t) rmax = std::max(rmax, at(t));
    double vmin = std::numeric_limits<double>::infinity();
    for (Site t = v.left_wall; t <= v.right_wall; ++t) vmin = std::min(vmin, at(t));
    c.valley_shape = at(v.left_wall) == lmax && at(v.right_wall) == rmax &&
                     at(v.bottom) == vmin;

    c.contains_origin = v.left_wall <= 0 && 0 <= v.right_wall;
    c.deep_enough = std::min(at(v.left_wall), at(v.right_wall)) - at(v.bottom) >= gamma;
    if (!c.contains_origin) return c;  // the side clause references [0, bottom]

    if (v.bottom > 0) {
        double inner = -std::numeric_limits<double>::infinity();
        for (Site t = 0; t <= v.bottom; ++t) inner = std::max(inner, at(t));
        c.margin_ok = at(v.left_wall) - inner >= margin;
    } else if (v.bottom < 0) {
        double inner = -std::numeric_limits<double>::infinity();
        for (Site t = v.bottom; t <= 0; ++t) inner = std::max(inner, at(t));
        c.margin_ok = at(v.right_wall) - inner >= margin;
    } else {
        c.margin_ok = true;
    }
    return c;
}

}  // namespace detail

// Smallest valley of depth >= gamma containing the origin, then the two
// walls recomputed from its bottom:
//
//   bottom > 0:  left wall  = nearest l <= -1 with S_l - S_bot >= gamma and
//                             S_l - max_{[0,bot]} S >= margin
//                right wall = nearest l > bot with S_l - S_bot >= gamma
//   bottom < 0:  mirrored;   bottom == 0: both plain.
//
// Construction: each flank is scanned outward for the first site whose
// potential rises gamma above the running minimum on that side; the lowest
// point enclosed by those rise events is the coarse bottom (when only one
// side produces a rise event in the window, its pit is the bottom and the
// opposite wall is taken directly from the wall formulas). The coarse
// valley is then refined — repeatedly split at its steepest interior
// counter-slope, keeping an admissible piece around the origin — until no
// refinement yields a valley satisfying all the clauses; candidates are
// tried right-split first, outer piece first. Finally the two walls are
// recomputed from the surviving bottom by the formulas above.
//
// absent (nullopt) when the window is exhausted before both walls exist.
inline std::optional<BasicValley> basic_valley(const Potential& pot, double gamma,
                                               double margin, SiteRange window) {
    require(gamma > 0.0, "gamma must be positive");
    require(margin >= 0.0, "margin must be nonnegative");
    require(window.contains(0), "search window must contain the origin");
    require(window.lo < 0 && window.hi > 0, "window must extend past both walls");

    const auto sbig = pot.slice(window.lo, window.hi);
    auto at = [&](Site k) { return sbig[static_cast<std::size_t>(k - window.lo)]; };

    auto inner_max = [&](Site from, Site to) {  // max of S over [from, to]
        double m = -std::numeric_limits<double>::infinity();
        for (Site t = from; t <= to; ++t) m = std::max(m, at(t));
        return m;
    };

    // Nearest qualifying walls for a given bottom per the formulas above.
    auto left_wall_for = [&](Site bot) -> std::optional<Site> {
        const double need_depth = at(bot) + gamma;
        const double need_side =
            bot > 0 ? inner_max(0, bot) + margin
                    : -std::numeric_limits<double>::infinity();
        const Site start = bot < 0 ? bot - 1 : Site{-1};
        for (Site l = start; l >= window.lo; --l)
            if (at(l) >= need_depth && at(l) >= need_side) return l;
        return std::nullopt;
    };
    auto right_wall_for = [&](Site bot) -> std::optional<Site> {
        const double need_depth = at(bot) + gamma;
        const double need_side =
            bot < 0 ? inner_max(bot, 0) + margin
                    : -std::numeric_limits<double>::infinity();
        const Site start = bot > 0 ? bot + 1 : Site{1};
        for (Site r = start; r <= window.hi; ++r)
            if (at(r) >= need_depth && at(r) >= need_side) return r;
        return std::nullopt;
    };

    // First gamma-rise above the running minimum on each flank.
    std::optional<Site> rise_right, rise_left;
    {
        double runmin = at(0);
        for (Site r = 1; r <= window.hi; ++r) {
            runmin = std::min(runmin, at(r));
            if (at(r) - runmin >= gamma) {
                rise_right = r;
                break;
            }
        }
        runmin = at(0);
        for (Site l = -1; l >= window.lo; --l) {
            runmin = std::min(runmin, at(l));
            if (at(l) - runmin >= gamma) {
                rise_left = l;
                break;
            }
        }
    }
    if (!rise_right && !rise_left) return std::nullopt;

    // Coarse bottom: the lowest site enclosed by the rise events (one-sided
    // scans stop at the origin). Ties go to small |site|, then leftward.
    const Site span_lo = rise_left ? *rise_left : Site{0};
    const Site span_hi = rise_right ? *rise_right : Site{0};
    Site bot = span_lo;
    for (Site k = span_lo; k <= span_hi; ++k) {
        const double v = at(k), b = at(bot);
        const Site ak = k < 0 ? -k : k, ab = bot < 0 ? -bot : bot;
        if (v < b || (v == b && (ak < ab || (ak == ab && k < bot)))) bot = k;
    }

    // Coarse valley for the refinement pass. One-sided argmax walls inside
    // the rise span when both rises exist; otherwise the formula wall
    // supplies the missing side.
    auto coarse_wall = [&](Site from, Site to, bool leftmost) {
        Site best = leftmost ? to : from;
        for (Site k = from; k <= to; ++k)
            if (at(k) > at(best) || (at(k) == at(best) && (leftmost ? k < best : k > best)))
                best = k;
        return best;
    };
    std::optional<Site> lw0 =
        rise_left ? std::optional<Site>(coarse_wall(span_lo, bot, true))
                  : left_wall_for(bot);
    std::optional<Site> rw0 =
        rise_right ? std::optional<Site>(coarse_wall(bot, span_hi, false))
                   : right_wall_for(bot);
    if (!lw0 || !rw0) return std::nullopt;

    // Refine to minimality: keep splitting while some piece containing the
    // origin still satisfies every clause.
    Valley v{*lw0, bot, *rw0};
    for (;;) {
        Valley next;
        bool found = false;
        auto admit = [&](const Valley& cand) {
            if (found) return;
            if (cand.right_wall - cand.left_wall >= v.right_wall - v.left_wall) return;
            if (detail::check_def6(pot, cand, gamma, margin).ok()) {
                next = cand;
                found = true;
            }
        };
        const auto rr = refine_right(pot, v);
        if (rr.peak < rr.trough && rr.drop > 0.0) {
            admit({v.left_wall, v.bottom, rr.peak});
            admit({rr.peak, rr.trough, v.right_wall});
        }
        const auto lr = refine_left(pot, v);
        if (lr.trough < lr.peak && lr.rise > 0.0) {
            admit({v.left_wall, lr.trough, lr.peak});
            admit({lr.peak, v.bottom, v.right_wall});
        }
        if (!found) break;
        v = next;
    }

    // Walls recomputed from the final bottom over the full window.
    auto lw = left_wall_for(v.bottom);
    auto rw = right_wall_for(v.bottom);
    if (!lw || !rw) return std::nullopt;

    BasicValley out;
    out.left_wall = *lw;
    out.bottom = v.bottom;
    out.right_wall = *rw;
    out.gamma = gamma;
    out.margin = margin;
    out.depth = std::min(at(*lw), at(*rw)) - at(v.bottom);
    return out;
}

// The two flanks of the valley with the core |j - bottom| < width removed:
// [left_wall, bottom - width] and [bottom + width, right_wall], as inclusive
// integer ranges (empty ranges have lo > hi).
struct OffCoreSites {
    SiteRange left;
    SiteRange right;

    bool left_empty() const { return left.lo > left.hi; }
    bool right_empty() const { return right.lo > right.hi; }
};

inline OffCoreSites off_core_sites(const BasicValley& v, double core_width) {
    require(core_width >= 0.0, "core width must be nonnegative");
    // clamp in double before converting: enormous core widths must yield
    // empty ranges, not overflowed casts
    const auto lo_d = std::max(std::floor(static_cast<double>(v.bottom) - core_width),
                               static_cast<double>(v.left_wall) - 1.0);
    const auto hi_d = std::min(std::ceil(static_cast<double>(v.bottom) + core_width),
                               static_cast<double>(v.right_wall) + 1.0);
    OffCoreSites o;
    o.left = {v.left_wall, static_cast<Site>(lo_d)};
    o.right = {static_cast<Site>(hi_d), v.right_wall};
    return o;
}

// Both sides of the band-decomposition bound on each flank:
//
//   sum_j e^{-(S_j - S_bot)}
//     <= sum_{i=1}^{N+1} e^{-a(i-1)} #{j : S_j - S_bot in [a(i-1), a i)}
//
// with N = floor((gamma + L)/a), j running over an off-core flank. Returns
// the exact left- and right-hand values of both inequalities so callers can
// assert lhs <= rhs.
struct SliceBound {
    double left_lhs = 0.0, left_rhs = 0.0;
    double right_lhs = 0.0, right_rhs = 0.0;
    int bands = 0;                     // N + 1, the nominal band count
    int bands_used = 0;                // N + 1 extended to the realized heights
    std::int64_t below_bottom = 0;     // flank sites under the bottom
};

// Both sides of the band-decomposition inequality. Each flank site with
// height h in band i contributes e^{-h} to the left side and e^{-a(i-1)}
// to the right; the two sums are accumulated in the same site order, and
// the band index is repaired after the floor so that a(i-1) <= h holds as
// compared — with a monotone exp, every right term then dominates its left
// partner and the summed inequality survives rounding verbatim.
//
// The nominal family stops at N + 1 = (gamma + L)/a + 1 bands, enough for
// every height a first crossing can reach; the side condition can push a
// wall higher, so the family is extended band by band to cover whatever
// heights the flanks realize (the per-site bound is the same). Sites below
// the bottom have no covering band at all — they contribute to the left
// side only and are counted in below_bottom.
inline SliceBound slice_upper_bound(const Potential& pot, const BasicValley& v,
                                    double core_width, double band_width) {
    require(band_width > 0.0, "band width must be positive");
    const double lam = pot.environment().distribution().log_odds_bound();
    const int nbands = static_cast<int>(std::floor((v.gamma + lam) / band_width)) + 1;

    const OffCoreSites oc = off_core_sites(v, core_width);
    const double sbot = pot.at(v.bottom);

    SliceBound out;
    out.bands = nbands;
    out.bands_used = nbands;
    auto flank = [&](SiteRange r, double& lhs, double& rhs) {
        if (r.lo > r.hi) return;
        for (Site j = r.lo; j <= r.hi; ++j) {
            const double h = pot.at(j) - sbot;
            lhs += std::exp(-h);
            auto band = static_cast<std::int64_t>(std::floor(h / band_width));
            while (band > 0 && band_width * static_cast<double>(band) > h) --band;
            while (band_width * static_cast<double>(band + 1) <= h) ++band;
            if (band >= 0) {
                rhs += std::exp(-band_width * static_cast<double>(band));
                out.bands_used = std::max(out.bands_used, static_cast<int>(band) + 1);
            } else {
                ++out.below_bottom;
            }
        }
    };
    flank(oc.left, out.left_lhs, out.left_rhs);
    flank(oc.right, out.right_lhs, out.right_rhs);
    return out;
}

}  // namespace rwre
