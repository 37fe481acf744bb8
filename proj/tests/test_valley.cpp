#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <optional>
#include <vector>

#include "rwre/good_environment.hpp"
#include "rwre/valley.hpp"
#include "rwre/walk.hpp"
#include "test_support.hpp"

using namespace rwre;
using Catch::Approx;

namespace {

// Exhaustive-pair oracles for the refinement operations, sharing the
// documented tie rules: drop first, then smallest |trough|, smallest
// |peak|, then scan order (leftmost peak, then trough, for the right
// refinement; mirrored for the left one).
struct Pair {
    Site peak, trough;
    double value;
};

Pair brute_refine_right(const Potential& pot, Site lo, Site hi) {
    std::optional<Pair> best;
    for (Site p = lo; p <= hi; ++p) {
        for (Site t = p; t <= hi; ++t) {
            const double drop = pot.at(p) - pot.at(t);
            Pair cand{p, t, drop};
            if (!best) {
                best = cand;
                continue;
            }
            auto abs_ = [](Site s) { return s < 0 ? -s : s; };
            const bool better =
                drop > best->value ||
                (drop == best->value &&
                 (abs_(t) < abs_(best->trough) ||
                  (abs_(t) == abs_(best->trough) &&
                   (abs_(p) < abs_(best->peak) ||
                    (abs_(p) == abs_(best->peak) &&
                     (p < best->peak || (p == best->peak && t < best->trough)))))));
            if (better) best = cand;
        }
    }
    return *best;
}

Pair brute_refine_left(const Potential& pot, Site lo, Site hi) {
    std::optional<Pair> best;
    for (Site t = lo; t <= hi; ++t) {
        for (Site p = t; p <= hi; ++p) {
            const double rise = pot.at(p) - pot.at(t);
            Pair cand{p, t, rise};
            if (!best) {
                best = cand;
                continue;
            }
            auto abs_ = [](Site s) { return s < 0 ? -s : s; };
            // mirror of the right-refinement scan order: rightmost first
            const bool better =
                rise > best->value ||
                (rise == best->value &&
                 (abs_(t) < abs_(best->trough) ||
                  (abs_(t) == abs_(best->trough) &&
                   (abs_(p) < abs_(best->peak) ||
                    (abs_(p) == abs_(best->peak) &&
                     (p > best->peak || (p == best->peak && t > best->trough)))))));
            if (better) best = cand;
        }
    }
    return *best;
}

Environment random_env(std::uint64_t seed) {
    // a law with flat stretches so exact tie-breaking gets exercised
    const auto dist = seed % 3 == 0
                          ? EnvDistribution::tabulated({0.5, 0.3, 0.7}, {2.0, 1.0, 1.0})
                          : EnvDistribution::symmetric_two_point(0.3);
    return Environment(dist, seed);
}

}  // namespace

TEST_CASE("depth threshold values") {
    CHECK(depth_threshold(1000000) == Approx(45.325013531676404).epsilon(1e-14));
    CHECK(depth_threshold(16) == Approx(15.009966008698497).epsilon(1e-14));
    CHECK(side_margin(1000000) == Approx(31.509502973712130).epsilon(1e-14));
    CHECK_THROWS_AS(depth_threshold(15), std::invalid_argument);
}

TEST_CASE("right refinement: pinned drop") {
    // S at sites 0..5: 0, 4, -2, 3, -1, 5; valley {1, 2, 5}
    Environment env = test::env_from_potential(0, {0, 4, -2, 3, -1, 5});
    Potential pot(env);
    const auto r = refine_right(pot, {1, 2, 5});
    CHECK(r.peak == 3);
    CHECK(r.trough == 4);
    CHECK(r.drop == Approx(4.0).margin(1e-12));
}

TEST_CASE("right refinement: monotone flank degenerates to the bottom") {
    Environment env = test::env_from_potential(0, {0, 1, 2, 3, 4});
    Potential pot(env);
    const auto r = refine_right(pot, {0, 0, 4});
    CHECK(r.peak == 0);
    CHECK(r.trough == 0);
    CHECK(r.drop == 0.0);
}

TEST_CASE("right refinement: exact ties resolve toward small |site|") {
    // One peak, three exactly-tied troughs (the flat stretches are exact
    // zeros because alpha = 1/2 gives log-odds exactly 0).
    // S = (h, 0, 0, 0) on sites -2..1 via one descent step at -1
    // (eps_{-1} = -1, so alpha_{-1} = 1/(1 + e^{-1})).
    const double descend = 1.0 / (1.0 + std::exp(-1.0));
    Environment env2 = Environment::with_overrides(
        EnvDistribution::uniform(0.3), 1, -1, {descend, 0.5, 0.5, 0.5});
    Potential pot(env2);
    REQUIRE(pot.at(-2) > 0.0);
    REQUIRE(pot.at(-1) == 0.0);
    REQUIRE(pot.at(0) == 0.0);
    REQUIRE(pot.at(1) == 0.0);
    const auto r = refine_right(pot, {-2, -2, 1});
    CHECK(r.peak == -2);
    CHECK(r.trough == 0);  // |0| beats |-1| and |1|

    // fully flat: everything ties, the origin pair wins
    Environment flat = test::constant_env(0.5);
    Potential fp(flat);
    const auto f = refine_right(fp, {-3, -3, 3});
    CHECK(f.peak == 0);
    CHECK(f.trough == 0);
}

TEST_CASE("refinements agree with exhaustive pair search") {
    for (std::uint64_t t = 0; t < 250; ++t) {
        Environment env = random_env(1000 + t);
        Potential pot(env);
        const Site half = 4 + static_cast<Site>(t % 60);
        const Site lo = -half, hi = half;

        const auto rr = refine_right(pot, {lo, lo, hi});
        const auto br = brute_refine_right(pot, lo, hi);
        REQUIRE(rr.peak == br.peak);
        REQUIRE(rr.trough == br.trough);
        REQUIRE(rr.drop == br.value);

        const auto lr = refine_left(pot, {lo, hi, hi});
        const auto bl = brute_refine_left(pot, lo, hi);
        REQUIRE(lr.peak == bl.peak);
        REQUIRE(lr.trough == bl.trough);
        REQUIRE(lr.rise == bl.value);
    }
}

TEST_CASE("left refinement mirrors the right one under site negation") {
    // Compare against a brute-force right refinement of the reflected
    // values of the same slice: identical doubles, so the mirror is exact
    // even through tie cases.
    for (std::uint64_t t = 0; t < 60; ++t) {
        Environment env = random_env(4000 + t);
        Potential pot(env);
        const Site half = 5 + static_cast<Site>(t % 40);
        auto s = pot.slice(-half, half);
        std::vector<double> rs(s.rbegin(), s.rend());
        Environment mirror_holder = test::constant_env(0.5);  // placeholder law
        (void)mirror_holder;

        // brute right refinement over the reflected values
        std::optional<Pair> best;
        auto at = [&](Site k) { return rs[static_cast<std::size_t>(k + half)]; };
        auto abs_ = [](Site x) { return x < 0 ? -x : x; };
        for (Site p = -half; p <= half; ++p)
            for (Site tr = p; tr <= half; ++tr) {
                const double drop = at(p) - at(tr);
                Pair cand{p, tr, drop};
                const bool better =
                    !best || drop > best->value ||
                    (drop == best->value &&
                     (abs_(tr) < abs_(best->trough) ||
                      (abs_(tr) == abs_(best->trough) &&
                       (abs_(p) < abs_(best->peak) ||
                        (abs_(p) == abs_(best->peak) &&
                         (p < best->peak ||
                          (p == best->peak && tr < best->trough)))))));
                if (better) best = cand;
            }

        const auto lr = refine_left(pot, {-half, half, half});
        REQUIRE(lr.peak == -best->peak);
        REQUIRE(lr.trough == -best->trough);
        REQUIRE(lr.rise == best->value);
    }
}

namespace {

// Literal wall formulas given the bottom, margin included; the scan is an
// independent re-derivation used to check basic_valley output.
std::optional<Site> formula_left_wall(const Potential& pot, Site bottom,
                                      double gamma, double margin, Site lo) {
    double need = pot.at(bottom) + gamma;
    if (bottom > 0) {
        double inner = -1e300;
        for (Site t = 0; t <= bottom; ++t) inner = std::max(inner, pot.at(t));
        need = std::max(need, inner + margin);
    }
    const Site start = bottom < 0 ? bottom - 1 : Site{-1};
    for (Site l = start; l >= lo; --l)
        if (pot.at(l) >= need) return l;
    return std::nullopt;
}

std::optional<Site> formula_right_wall(const Potential& pot, Site bottom,
                                       double gamma, double margin, Site hi) {
    double need = pot.at(bottom) + gamma;
    if (bottom < 0) {
        double inner = -1e300;
        for (Site t = bottom; t <= 0; ++t) inner = std::max(inner, pot.at(t));
        need = std::max(need, inner + margin);
    }
    const Site start = bottom > 0 ? bottom + 1 : Site{1};
    for (Site r = start; r <= hi; ++r)
        if (pot.at(r) >= need) return r;
    return std::nullopt;
}

}  // namespace

TEST_CASE("basic valley: pinned hand-made example") {
    // S on [-5, 7], shifted so S_0 = 0 (only differences matter):
    //   4 3 2 3 1 0 -1 -2 0 1 2 3 4
    // gamma 5, margin 1 (nudged below the exact thresholds so the sites
    // sitting exactly at height 5 still qualify after the alpha round trip)
    std::vector<double> s = {4, 3, 2, 3, 1, 0, -1, -2, 0, 1, 2, 3, 4};
    Environment env = test::env_from_potential(-5, s);
    Potential pot(env);
    const double gamma = 5.0 - 1e-9, margin = 1.0 - 1e-9;
    const auto v = basic_valley(pot, gamma, margin, {-5, 7});
    REQUIRE(v);
    CHECK(v->bottom == 2);
    CHECK(v->left_wall == -2);
    CHECK(v->right_wall == 6);
    CHECK(v->depth == Approx(5.0).margin(1e-9));

    // walls re-derived from the literal formulas
    CHECK(formula_left_wall(pot, v->bottom, gamma, margin, -5) == v->left_wall);
    CHECK(formula_right_wall(pot, v->bottom, gamma, margin, 7) == v->right_wall);

    // the reported valley satisfies every clause, independently re-scanned
    const auto c = rwre::detail::check_def6(
        pot, {v->left_wall, v->bottom, v->right_wall}, gamma, margin);
    CHECK(c.ok());
}

TEST_CASE("basic valley: symmetric W-shape puts the bottom at the origin") {
    std::vector<double> s;
    for (Site k = -6; k <= 6; ++k) s.push_back(static_cast<double>(k < 0 ? -k : k));
    Environment env = test::env_from_potential(-6, s);
    Potential pot(env);
    const auto v = basic_valley(pot, 5.0 - 1e-9, 0.5, {-6, 6});
    REQUIRE(v);
    CHECK(v->bottom == 0);
    CHECK(v->left_wall == -5);
    CHECK(v->right_wall == 5);
}

TEST_CASE("basic valley: absent when the walls cannot be reached") {
    Environment flat = test::constant_env(0.5);
    Potential pot(flat);
    CHECK_FALSE(basic_valley(pot, 1.0, 0.0, {-2000, 2000}));

    Environment env(EnvDistribution::symmetric_two_point(0.3), 4);
    Potential p2(env);
    CHECK_FALSE(basic_valley(p2, 1e6, 0.0, {-5000, 5000}));

    // malformed input is an error, not absence
    CHECK_THROWS_AS(basic_valley(p2, 1.0, 0.0, {5, 10}), std::invalid_argument);
    CHECK_THROWS_AS(basic_valley(p2, -1.0, 0.0, {-10, 10}), std::invalid_argument);
}

TEST_CASE("basic valley output is formula-consistent on random environments") {
    int found = 0, shaped = 0;
    for (std::uint64_t t = 0; t < 50; ++t) {
        Environment env(EnvDistribution::symmetric_two_point(0.3), 9000 + t);
        Potential pot(env);
        const std::int64_t n = 4096;
        const double gamma = depth_threshold(n), margin = side_margin(n);
        const Site w = window_bound(n, env.distribution().sigma());
        const auto v = basic_valley(pot, gamma, margin, {-4 * w, 4 * w});
        if (!v) continue;
        ++found;

        // walls equal the literal formulas given the bottom
        REQUIRE(formula_left_wall(pot, v->bottom, gamma, margin, -4 * w) ==
                v->left_wall);
        REQUIRE(formula_right_wall(pot, v->bottom, gamma, margin, 4 * w) ==
                v->right_wall);

        // containment, depth and the side clause, independently re-scanned
        REQUIRE(v->left_wall <= -1);
        REQUIRE(v->right_wall >= 1);
        const double sbot = pot.at(v->bottom);
        REQUIRE(pot.at(v->left_wall) - sbot >= gamma);
        REQUIRE(pot.at(v->right_wall) - sbot >= gamma);
        if (v->bottom > 0) {
            double inner = -1e300;
            for (Site k = 0; k <= v->bottom; ++k) inner = std::max(inner, pot.at(k));
            REQUIRE(pot.at(v->left_wall) - inner >= margin);
        } else if (v->bottom < 0) {
            double inner = -1e300;
            for (Site k = v->bottom; k <= 0; ++k) inner = std::max(inner, pot.at(k));
            REQUIRE(pot.at(v->right_wall) - inner >= margin);
        }

        // the bottom is the minimum of the stretch joining it to the origin
        for (Site k = std::min<Site>(v->bottom, 0); k <= std::max<Site>(v->bottom, 0); ++k)
            REQUIRE(pot.at(k) >= sbot);

        // when the wall stretches stay above the bottom, every valley
        // clause holds verbatim (the side condition can drag a wall past
        // deeper terrain, in which case the triple is wall-formula data,
        // not a shape-checked valley)
        double hmin = 0.0;
        for (Site k = v->left_wall; k <= v->right_wall; ++k)
            hmin = std::min(hmin, pot.at(k) - sbot);
        if (hmin >= 0.0) {
            ++shaped;
            const Valley tri{v->left_wall, v->bottom, v->right_wall};
            REQUIRE(rwre::detail::check_def6(pot, tri, gamma, margin).ok());
        }

        // idempotence
        const auto v2 = basic_valley(pot, gamma, margin, {-4 * w, 4 * w});
        REQUIRE(v2);
        REQUIRE(v2->bottom == v->bottom);
        REQUIRE(v2->left_wall == v->left_wall);
        REQUIRE(v2->right_wall == v->right_wall);
    }
    CHECK(found >= 40);   // presence is the rule at this scale
    CHECK(shaped >= 25);  // and most valleys are fully shape-checked
}

TEST_CASE("basic valley is refinement-minimal on hand-made potentials") {
    // pinned example: its formula walls coincide with the refined valley,
    // so minimality is directly assertable
    std::vector<double> s = {4, 3, 2, 3, 1, 0, -1, -2, 0, 1, 2, 3, 4};
    Environment env = test::env_from_potential(-5, s);
    Potential pot(env);
    const double gamma = 5.0 - 1e-9, margin = 1.0 - 1e-9;
    const auto v = basic_valley(pot, gamma, margin, {-5, 7});
    REQUIRE(v);
    const Valley tri{v->left_wall, v->bottom, v->right_wall};
    REQUIRE(rwre::detail::check_def6(pot, tri, gamma, margin).ok());

    const auto rr = refine_right(pot, tri);
    if (rr.peak < rr.trough && rr.drop > 0.0) {
        CHECK_FALSE(rwre::detail::check_def6(
                        pot, {tri.left_wall, tri.bottom, rr.peak}, gamma, margin)
                        .ok());
        CHECK_FALSE(rwre::detail::check_def6(
                        pot, {rr.peak, rr.trough, tri.right_wall}, gamma, margin)
                        .ok());
    }
    const auto lr = refine_left(pot, tri);
    if (lr.trough < lr.peak && lr.rise > 0.0) {
        CHECK_FALSE(rwre::detail::check_def6(
                        pot, {tri.left_wall, lr.trough, lr.peak}, gamma, margin)
                        .ok());
        CHECK_FALSE(rwre::detail::check_def6(
                        pot, {lr.peak, tri.bottom, tri.right_wall}, gamma, margin)
                        .ok());
    }
}

TEST_CASE("off-core site ranges") {
    BasicValley v;
    v.left_wall = -10;
    v.bottom = 3;
    v.right_wall = 12;
    const auto oc = off_core_sites(v, 2.0);
    CHECK(oc.left.lo == -10);
    CHECK(oc.left.hi == 1);
    CHECK(oc.right.lo == 5);
    CHECK(oc.right.hi == 12);

    const auto wide = off_core_sites(v, 100.0);
    CHECK(wide.left_empty());
    CHECK(wide.right_empty());

    // fractional width rounds toward the walls
    const auto frac = off_core_sites(v, 2.5);
    CHECK(frac.left.hi == 0);   // floor(3 - 2.5)
    CHECK(frac.right.lo == 6);  // ceil(3 + 2.5)
}

TEST_CASE("slice bound: flat potential gives exact equality") {
    Environment flat = test::constant_env(0.5);
    Potential pot(flat);
    BasicValley v;
    v.left_wall = -3;
    v.bottom = 0;
    v.right_wall = 4;
    v.gamma = 3.0;
    const auto sb = slice_upper_bound(pot, v, 1.0, 1.0);
    CHECK(sb.left_lhs == 3.0);   // sites -3..-1, all heights exactly 0
    CHECK(sb.left_rhs == 3.0);
    CHECK(sb.right_lhs == 4.0);  // sites 1..4
    CHECK(sb.right_rhs == 4.0);
}

TEST_CASE("slice bound: one off-core site at a band edge") {
    // S = (0, h) with the band width set to the realized h: the single
    // right-flank site falls exactly at the lower edge of band 2, so both
    // sides reduce to e^{-h} and agree exactly.
    Environment env = test::env_from_potential(0, {0.0, 1.0});
    Potential pot(env);
    const double h = pot.at(1) - pot.at(0);
    BasicValley v;
    v.left_wall = 0;  // empty left flank
    v.bottom = 0;
    v.right_wall = 1;
    v.gamma = h;
    const auto sb = slice_upper_bound(pot, v, 1.0, h);
    CHECK(sb.right_lhs == std::exp(-h));
    CHECK(sb.right_rhs == std::exp(-h));
    CHECK(sb.left_lhs == 0.0);
}

TEST_CASE("slice bound: lhs <= rhs on sampled environments") {
    // The inequality presumes flanks above the bottom; realizations where
    // the side condition drags a wall across deeper terrain are excluded
    // (their e^{-h} terms with h < 0 have no covering band at all).
    int found = 0, checked = 0;
    for (std::uint64_t t = 0; t < 40; ++t) {
        Environment env(EnvDistribution::symmetric_two_point(0.3), 500 + t);
        Potential pot(env);
        const std::int64_t n = 4096;
        const Site w = window_bound(n, env.distribution().sigma());
        const auto v =
            basic_valley(pot, depth_threshold(n), side_margin(n), {-4 * w, 4 * w});
        if (!v) continue;
        ++found;
        double hmin = 0.0;
        const double sbot = pot.at(v->bottom);
        for (Site k = v->left_wall; k <= v->right_wall; ++k)
            hmin = std::min(hmin, pot.at(k) - sbot);
        if (hmin < 0.0) continue;
        ++checked;
        const double a = env.distribution().log_odds_bound() / 4.0;
        const auto sb = slice_upper_bound(pot, *v, 1.0, a);
        REQUIRE(sb.left_lhs <= sb.left_rhs);
        REQUIRE(sb.right_lhs <= sb.right_rhs);
        REQUIRE(sb.right_lhs < sb.right_rhs);  // strict in the generic case
    }
    CHECK(found >= 30);
    CHECK(checked >= 20);
}

TEST_CASE("good environment: flat potential has no valley") {
    Environment flat = test::constant_env(0.5);
    GoodEnvParams params(65536, 0.5, 1.0, 1.0, 0.8);
    const auto r = is_good_environment(flat, params);
    CHECK_FALSE(r.valley_exists);
    CHECK_FALSE(r.good());
}

TEST_CASE("good environment parameter validation") {
    CHECK_THROWS_AS(GoodEnvParams(8, 0.5, 1.0, 1.0, 0.8), std::invalid_argument);
    CHECK_THROWS_AS(GoodEnvParams(64, 1.0, 1.0, 1.0, 0.8), std::invalid_argument);
    CHECK_THROWS_AS(GoodEnvParams(64, 0.5, -1.0, 1.0, 0.8), std::invalid_argument);
    CHECK_THROWS_AS(GoodEnvParams(64, 0.5, 1.0, 1.0, 0.0), std::invalid_argument);
    GoodEnvParams p(1024, 0.5, 2.0, 128.0, 0.8);
    CHECK(p.core_halfwidth() == Approx(512.0));
    CHECK(p.occupation_bound() == Approx(4.0 / std::sqrt(512.0)));
}

TEST_CASE("good environment: off-core expectation bridges to excursions") {
    // Deterministic fixture: the first seed >= 7 whose basic valley exists
    // at n = 10^4 for the symmetric two-point law. The closed-form off-core
    // expectation is compared against the excursion estimator started at
    // the valley bottom.
    const auto dist = EnvDistribution::symmetric_two_point(0.3);
    const std::int64_t n = 10000;
    std::optional<BasicValley> valley;
    std::uint64_t seed = 7;
    std::optional<Environment> env;
    for (; seed < 27; ++seed) {
        env.emplace(dist, seed);
        Potential pot(*env);
        const Site w = window_bound(n, dist.sigma());
        valley = basic_valley(pot, depth_threshold(n), side_margin(n), {-8 * w, 8 * w});
        if (valley) break;
    }
    REQUIRE(valley);
    INFO("fixture seed " << seed);

    // Restrict the bridge to off-core sites whose path from the bottom
    // climbs at most 7: a site behind a higher barrier is visited in rare
    // e^{-barrier} bursts that 20k excursions cannot sample, although its
    // closed-form share is still real. The closed sum and the simulation
    // target use the same set, so the comparison stays apples to apples.
    const double core = 4.0, barrier_cap = 7.0;
    Potential pot(*env);
    const double sbot = pot.at(valley->bottom);
    const auto oc = off_core_sites(*valley, core);
    std::vector<Site> targets;
    for (int dir : {-1, +1}) {
        double climb = 0.0;
        for (Site s = valley->bottom + dir;
             s >= valley->left_wall && s <= valley->right_wall; s += dir) {
            climb = std::max(climb, pot.at(s) - sbot);
            if (climb > barrier_cap) break;
            const bool off_core = (s >= oc.left.lo && s <= oc.left.hi) ||
                                  (s >= oc.right.lo && s <= oc.right.hi);
            if (off_core) targets.push_back(s);
        }
    }
    REQUIRE(!targets.empty());
    double closed = 0.0;
    for (Site s : targets) closed += expected_local_time(*env, valley->bottom, s);

    UnitStream stream(4242);
    const auto est = excursion_local_time(*env, stream, valley->bottom, targets,
                                          20000, 200000);
    CHECK(est.mean_occupation == Approx(closed).margin(3.0 * est.se + 0.01));
}
