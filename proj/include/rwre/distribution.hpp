#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "rwre/common.hpp"
#include "rwre/rng.hpp"

namespace rwre {

// log((1 - a) / a): the potential increment contributed by a site whose
// up-step probability is a. Antisymmetric around a = 1/2.
inline double step_log_odds(double a) { return std::log((1.0 - a) / a); }

// Law of the i.i.d. site probabilities alpha_i. Three kinds:
//   two_point  – mass p at atom_lo, 1-p at atom_hi
//   uniform    – uniform on [eta0, 1 - eta0]
//   tabulated  – arbitrary finite support with weights
//
// eta0 is the regularity floor: every admissible law must be supported in
// [eta0, 1 - eta0] with 0 < eta0 < 1/2. Construction enforces the support
// condition hard; the recurrence hypotheses (zero mean, positive variance
// of the log-odds) are *reported* by check_hypotheses, not enforced, so
// deliberately drifted test laws remain constructible.
class EnvDistribution {
  public:
    enum class Kind { two_point, uniform, tabulated };

    static EnvDistribution two_point(double atom_lo, double atom_hi,
                                     double p = 0.5, double eta0 = -1.0) {
        require(atom_lo > 0.0 && atom_lo < 1.0 && atom_hi > 0.0 && atom_hi < 1.0,
                "two_point atoms must lie in (0,1)");
        require(p > 0.0 && p < 1.0, "two_point weight must lie in (0,1)");
        if (atom_lo > atom_hi) {
            std::swap(atom_lo, atom_hi);
            p = 1.0 - p;
        }
        if (eta0 < 0.0) eta0 = std::min(atom_lo, 1.0 - atom_hi);
        EnvDistribution d;
        d.kind_ = Kind::two_point;
        d.eta0_ = eta0;
        d.values_ = {atom_lo, atom_hi};
        d.weights_ = {p, 1.0 - p};
        d.validate();
        return d;
    }

    // The symmetric workhorse law {a, 1-a} with equal weights.
    static EnvDistribution symmetric_two_point(double a) {
        double lo = std::min(a, 1.0 - a);
        return two_point(lo, 1.0 - lo, 0.5, lo);
    }

    static EnvDistribution uniform(double eta0) {
        EnvDistribution d;
        d.kind_ = Kind::uniform;
        d.eta0_ = eta0;
        d.validate();
        return d;
    }

    static EnvDistribution tabulated(std::vector<double> values,
                                     std::vector<double> weights,
                                     double eta0 = -1.0) {
        require(!values.empty() && values.size() == weights.size(),
                "tabulated law needs matching nonempty values/weights");
        if (eta0 < 0.0) {
            double lo = *std::min_element(values.begin(), values.end());
            double hi = *std::max_element(values.begin(), values.end());
            eta0 = std::min(lo, 1.0 - hi);
        }
        EnvDistribution d;
        d.kind_ = Kind::tabulated;
        d.eta0_ = eta0;
        d.values_ = std::move(values);
        d.weights_ = std::move(weights);
        double total = std::accumulate(d.weights_.begin(), d.weights_.end(), 0.0);
        require(total > 0.0, "tabulated weights must have positive mass");
        for (double& w : d.weights_) {
            require(w >= 0.0, "tabulated weights must be nonnegative");
            w /= total;
        }
        d.validate();
        return d;
    }

    Kind kind() const { return kind_; }
    double eta0() const { return eta0_; }

    // log((1 - eta0)/eta0): the largest |log-odds| the law can produce.
    double log_odds_bound() const { return step_log_odds(eta0_); }

    // alpha drawn from the law via one uniform in [0,1).
    double quantile(double u) const {
        switch (kind_) {
            case Kind::uniform:
                return eta0_ + u * (1.0 - 2.0 * eta0_);
            case Kind::two_point:
            case Kind::tabulated: {
                double acc = 0.0;
                for (std::size_t k = 0; k + 1 < values_.size(); ++k) {
                    acc += weights_[k];
                    if (u < acc) return values_[k];
                }
                return values_.back();
            }
        }
        return 0.5;  // unreachable
    }

    // Exact first two moments of the step log-odds. Two-point/tabulated are
    // closed-form sums; the uniform mean vanishes by the a <-> 1-a symmetry
    // and its second moment is evaluated by fixed-order Gauss-Legendre on
    // the smooth integrand (eta0 > 0 keeps the endpoints regular).
    double mean_log_odds() const {
        switch (kind_) {
            case Kind::uniform:
                return 0.0;
            case Kind::two_point:
            case Kind::tabulated: {
                double m = 0.0;
                for (std::size_t k = 0; k < values_.size(); ++k)
                    m += weights_[k] * step_log_odds(values_[k]);
                return m;
            }
        }
        return 0.0;
    }

    double variance_log_odds() const {
        const double m = mean_log_odds();
        switch (kind_) {
            case Kind::uniform: {
                return gauss_legendre_mean_square();
            }
            case Kind::two_point:
            case Kind::tabulated: {
                double s = 0.0;
                for (std::size_t k = 0; k < values_.size(); ++k) {
                    double e = step_log_odds(values_[k]);
                    s += weights_[k] * e * e;
                }
                return s - m * m;
            }
        }
        return 0.0;
    }

    double sigma() const { return std::sqrt(variance_log_odds()); }

    std::string kind_name() const {
        switch (kind_) {
            case Kind::two_point: return "two_point";
            case Kind::uniform: return "uniform";
            case Kind::tabulated: return "tabulated";
        }
        return "?";
    }

    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& weights() const { return weights_; }

  private:
    EnvDistribution() = default;

    void validate() const {
        require(eta0_ > 0.0 && eta0_ < 0.5, "eta0 must lie in (0, 1/2)");
        for (double v : values_)
            require(v >= eta0_ - 1e-15 && v <= 1.0 - eta0_ + 1e-15,
                    "support must lie within [eta0, 1 - eta0]");
    }

    // E[eps^2] for the uniform law; 64-node composite rule is far below
    // 1e-14 relative error on this integrand.
    double gauss_legendre_mean_square() const {
        static constexpr std::array<double, 8> node = {
            0.095012509837637454, 0.28160355077925892,
            0.45801677765722737,  0.61787624440264377,
            0.755404408355003,    0.86563120238783176,
            0.9445750230732326,   0.98940093499164994};
        static constexpr std::array<double, 8> wt = {
            0.18945061045506859,  0.18260341504492361,
            0.16915651939500262,  0.14959598881657676,
            0.12462897125553403,  0.095158511682492591,
            0.062253523938647706, 0.027152459411754037};
        const double lo = eta0_, hi = 1.0 - eta0_;
        const int pieces = 4;
        const double h = (hi - lo) / pieces;
        double acc = 0.0;
        for (int p = 0; p < pieces; ++p) {
            const double c = lo + (p + 0.5) * h;
            for (std::size_t k = 0; k < node.size(); ++k) {
                double e1 = step_log_odds(c + 0.5 * h * node[k]);
                double e2 = step_log_odds(c - 0.5 * h * node[k]);
                acc += 0.5 * h * wt[k] * (e1 * e1 + e2 * e2);
            }
        }
        return acc / (hi - lo);
    }

    Kind kind_ = Kind::uniform;
    double eta0_ = 0.25;
    std::vector<double> values_;
    std::vector<double> weights_;
};

// Flags for the three standing hypotheses on the environment law:
// zero-mean log-odds (recurrence), positive variance (genuine disorder),
// and the eta0 regularity floor.
struct HypothesisReport {
    double mean = 0.0;
    double variance = 0.0;
    bool mean_zero_ok = false;
    bool variance_ok = false;
    bool eta0_ok = false;

    bool all_ok() const { return mean_zero_ok && variance_ok && eta0_ok; }
};

inline HypothesisReport check_hypotheses(const EnvDistribution& dist,
                                         double tolerance = 1e-12) {
    require(tolerance > 0.0, "tolerance must be positive");
    HypothesisReport r;
    r.mean = dist.mean_log_odds();
    r.variance = dist.variance_log_odds();
    r.mean_zero_ok = std::abs(r.mean) <= tolerance;
    r.variance_ok = r.variance > tolerance;
    r.eta0_ok = dist.eta0() > 0.0 && dist.eta0() < 0.5;
    return r;
}

}  // namespace rwre
