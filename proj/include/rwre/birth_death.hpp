#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "rwre/environment.hpp"
#include "rwre/potential.hpp"

namespace rwre {

// A finite window [a, b] of the chain with absorbing boundaries, for
// first-passage questions about the walk restricted to it.
struct ChainSegment {
    const Environment* env;
    Site a;
    Site b;

    ChainSegment(const Environment& e, Site lo, Site hi) : env(&e), a(lo), b(hi) {
        require(lo < hi, "segment needs a < b");
    }
};

enum class HitTarget { below, above };  // absorb at a first / at b first

// Closed-form first-passage probability for the inhomogeneous birth-death
// chain via the difference-equation solution,
//
//   P_x[T_b < T_a] = sum_{j=a}^{x-1} e^{S_j - S_a} / sum_{j=a}^{b-1} e^{S_j - S_a}.
//
// All exponentials are taken relative to the running maximum of S over
// [a, b-1], so potentials of amplitude several hundred stay in range.
// Both one-sided shares are formed over a single shared denominator, hence
// below + above == 1 up to one rounding of the final divisions.
//
// Starting on a boundary returns the trivial answer (the boundary counts
// as already hit).
inline double hit_prob(const ChainSegment& seg, Site x, HitTarget target) {
    require(seg.a <= x && x <= seg.b, "start must lie in [a, b]");
    if (x == seg.a) return target == HitTarget::below ? 1.0 : 0.0;
    if (x == seg.b) return target == HitTarget::above ? 1.0 : 0.0;

    Potential pot(*seg.env);
    std::vector<double> s = pot.slice(seg.a, seg.b - 1);
    const double shift = *std::max_element(s.begin(), s.end());

    double below_mass = 0.0;  // j in [x, b-1]
    double above_mass = 0.0;  // j in [a, x-1]
    for (Site j = seg.a; j <= seg.b - 1; ++j) {
        double w = std::exp(s[static_cast<std::size_t>(j - seg.a)] - shift);
        (j < x ? above_mass : below_mass) += w;
    }
    const double den = above_mass + below_mass;
    return (target == HitTarget::above ? above_mass : below_mass) / den;
}

// Independent check: solve the tridiagonal boundary-value problem
//   h_a = 0, h_b = 1, h_i = alpha_i h_{i+1} + beta_i h_{i-1}
// by direct elimination and read off h_x = P_x[T_b < T_a].
inline double oracle_hit_prob(const ChainSegment& seg, Site x) {
    require(seg.a < x && x < seg.b, "oracle start must be interior");
    require(seg.b - seg.a <= 10000, "oracle interval too large");

    const std::size_t n = static_cast<std::size_t>(seg.b - seg.a - 1);
    std::vector<double> sub(n), diag(n), sup(n), rhs(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const Site i = seg.a + 1 + static_cast<Site>(k);
        const double al = seg.env->alpha(i);
        diag[k] = 1.0;
        sub[k] = -(1.0 - al);  // coefficient of h_{i-1}
        sup[k] = -al;          // coefficient of h_{i+1}
    }
    rhs[n - 1] = seg.env->alpha(seg.b - 1);  // h_b = 1 folded into the rhs

    // Thomas sweep
    for (std::size_t k = 1; k < n; ++k) {
        const double w = sub[k] / diag[k - 1];
        diag[k] -= w * sup[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    std::vector<double> h(n);
    h[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) h[k] = (rhs[k] - sup[k] * h[k + 1]) / diag[k];
    return h[static_cast<std::size_t>(x - seg.a - 1)];
}

// Expected number of visits to x during steps 1..T_i of a walk started
// at i (the time-0 presence at i is not counted, and the deterministic
// final visit *to i* is likewise outside the sum). Combination of the
// two first-passage shares:
//
//   x > i:  alpha_i P_{i+1}[T_x < T_i] / (beta_x  P_{x-1}[T_x > T_i])
//   x < i:  beta_i  P_{i-1}[T_x < T_i] / (alpha_x P_{x+1}[T_x > T_i])
inline double expected_local_time(const Environment& env, Site i, Site x) {
    require(x != i, "local time at the return site is excluded");
    if (x > i) {
        ChainSegment seg(env, i, x);
        const double reach = hit_prob(seg, i + 1, HitTarget::above);
        const double leave = hit_prob(seg, x - 1, HitTarget::below);
        return env.alpha(i) * reach / ((1.0 - env.alpha(x)) * leave);
    }
    ChainSegment seg(env, x, i);
    const double reach = hit_prob(seg, i - 1, HitTarget::below);
    const double leave = hit_prob(seg, x + 1, HitTarget::above);
    return (1.0 - env.alpha(i)) * reach / (env.alpha(x) * leave);
}

// Bulk form of expected_local_time for every x in [lo, hi] around a fixed
// return site: the shared denominators of the two first-passage shares
// cancel, leaving
//
//   E_i[L(x, T_i)] = (alpha_i / beta_x) e^{-(S_{x-1} - S_i)}     for x > i
//   E_i[L(x, T_i)] = (beta_i / alpha_x) e^{-(S_x - S_{i-1})}     for x < i
//
// which one pass over the potential evaluates in O(hi - lo). Agrees with
// expected_local_time to rounding; the unit tests pin the equivalence.
inline std::vector<double> expected_local_time_profile(const Environment& env,
                                                       Site i, Site lo, Site hi) {
    require(lo <= hi, "profile needs lo <= hi");
    Potential pot(env);
    const Site base = std::min(lo, i) - 1;
    std::vector<double> s = pot.slice(base, std::max(hi, i) + 1);
    auto at = [&](Site k) { return s[static_cast<std::size_t>(k - base)]; };
    const double ai = env.alpha(i);
    const double bi = 1.0 - ai;

    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(hi - lo + 1));
    for (Site x = lo; x <= hi; ++x) {
        if (x == i) {
            out.push_back(0.0);  // excluded site; caller skips it
            continue;
        }
        const double ax = env.alpha(x);
        if (x > i)
            out.push_back(ai / (1.0 - ax) * std::exp(at(i) - at(x - 1)));
        else
            out.push_back(bi / ax * std::exp(at(i - 1) - at(x)));
    }
    return out;
}

// Independent check for the expected local time: expected occupation of x
// before absorption at i, solved as a linear system over [i, x] (or [x, i])
// in which the outer boundary at x folds the almost-sure return from beyond
// x into a self-loop. Direct elimination, no first-passage ratios.
inline double oracle_expected_local_time(const Environment& env, Site i, Site x) {
    require(x != i, "local time at the return site is excluded");
    require(std::llabs(x - i) <= 1000, "oracle span too large");

    // Mirror x < i onto the x > i layout: unknowns g_1..g_n are expected
    // visit counts at i+dir, i+2*dir, ..., x with absorption at i.
    const Site dir = x > i ? 1 : -1;
    const std::size_t n = static_cast<std::size_t>(dir * (x - i));
    auto up = [&](Site site) { return env.alpha(site); };

    std::vector<double> sub(n, 0.0), diag(n, 0.0), sup(n, 0.0), rhs(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        const Site site = i + dir * static_cast<Site>(k + 1);
        const double out_ = dir > 0 ? up(site) : 1.0 - up(site);   // toward x
        const double back = dir > 0 ? 1.0 - up(site) : up(site);   // toward i
        if (k + 1 < n) {
            // g_k = out * g_{k+1} + back * g_{k-1}
            diag[k] = 1.0;
            sup[k] = -out_;
            if (k > 0) sub[k] = -back;
        } else {
            // at x: one visit counted per arrival, steps beyond x return
            // almost surely, so the outward move self-loops
            diag[k] = 1.0 - out_;
            if (k > 0) sub[k] = -back;
            rhs[k] = 1.0;
        }
    }
    for (std::size_t k = 1; k < n; ++k) {
        const double w = sub[k] / diag[k - 1];
        diag[k] -= w * sup[k - 1];
        rhs[k] -= w * rhs[k - 1];
    }
    std::vector<double> g(n);
    g[n - 1] = rhs[n - 1] / diag[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) g[k] = (rhs[k] - sup[k] * g[k + 1]) / diag[k];

    const double first = dir > 0 ? up(i) : 1.0 - up(i);  // step that enters the span
    return first * g[0];
}

struct SandwichBounds {
    double lower = 0.0;
    double value = 0.0;
    double upper = 0.0;
};

// Deterministic envelope for the expected local time per excursion:
//   eta0/(1-eta0) e^{-(S_k - S_m)}  <=  E_m[L(k, T_m)]  <=  (1/eta0) e^{-(S_k - S_m)}
inline SandwichBounds sandwich_bounds(const Environment& env, Site m, Site k) {
    require(k != m, "k must differ from the return site");
    Potential pot(env);
    const double gap = pot.at(k) - pot.at(m);
    const double eta0 = env.distribution().eta0();
    const double envelope = std::exp(-gap);
    return {eta0 / (1.0 - eta0) * envelope,
            expected_local_time(env, m, k),
            envelope / eta0};
}

struct WaldBounds {
    double down_before_up = 0.0;  // bound on Q[V-_a < V+_d]
    double up_before_down = 0.0;  // bound on Q[V-_a > V+_d]
};

// Wald-equality bounds on which potential threshold is crossed first:
//   Q[V-_a < V+_d] <= (d + L)/(d + a + L),  L = log((1-eta0)/eta0),
// and symmetrically with a and d exchanged.
inline WaldBounds wald_bound(double a, double d, double eta0) {
    require(a > 0.0 && d > 0.0, "thresholds must be positive");
    require(eta0 > 0.0 && eta0 < 0.5, "eta0 must lie in (0, 1/2)");
    const double lam = step_log_odds(eta0);
    return {(d + lam) / (d + a + lam), (a + lam) / (d + a + lam)};
}

}  // namespace rwre
