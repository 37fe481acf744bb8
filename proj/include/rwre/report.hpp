#pragma once

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "rwre/common.hpp"

namespace rwre {

// Shortest round-trippable decimal form; deterministic across platforms.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// A rectangular table of report rows destined for CSV. Cells are typed so
// integers (seeds, counts) never pass through floating-point formatting.
class Table {
  public:
    using Cell = std::variant<std::int64_t, std::uint64_t, double, std::string>;

    explicit Table(std::vector<std::string> columns)
        : columns_(std::move(columns)) {}

    void add_row(std::vector<Cell> row) {
        require(row.size() == columns_.size(), "row width mismatch");
        rows_.push_back(std::move(row));
    }

    std::size_t size() const { return rows_.size(); }
    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<Cell>>& rows() const { return rows_; }

    // CSV: leading schema comment, header line, LF endings, deterministic
    // row order (callers append in sorted order).
    void write_csv(std::ostream& os, const std::string& schema) const {
        os << "# schema=" << schema << "\n";
        for (std::size_t c = 0; c < columns_.size(); ++c)
            os << (c ? "," : "") << columns_[c];
        os << "\n";
        for (const auto& row : rows_) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) os << ",";
                const Cell& cell = row[c];
                if (std::holds_alternative<std::int64_t>(cell)) {
                    os << std::get<std::int64_t>(cell);
                } else if (std::holds_alternative<std::uint64_t>(cell)) {
                    os << std::get<std::uint64_t>(cell);
                } else if (std::holds_alternative<double>(cell)) {
                    os << format_double(std::get<double>(cell));
                } else {
                    os << std::get<std::string>(cell);
                }
            }
            os << "\n";
        }
    }

    void save_csv(const std::string& path, const std::string& schema) const {
        std::ofstream f(path, std::ios::binary);  // binary: keep LF on all hosts
        if (!f) throw std::runtime_error("cannot open " + path);
        write_csv(f, schema);
        if (!f) throw std::runtime_error("failed writing " + path);
    }

  private:
    std::vector<std::string> columns_;
    std::vector<std::vector<Cell>> rows_;
};

// Mean and standard error across independent replicas.
struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    std::size_t count = 0;
};

inline MeanSE mean_se(const std::vector<double>& xs) {
    MeanSE r;
    r.count = xs.size();
    if (xs.empty()) return r;
    double s = 0.0;
    for (double x : xs) s += x;
    r.mean = s / static_cast<double>(xs.size());
    if (xs.size() < 2) {
        r.se = std::numeric_limits<double>::quiet_NaN();
        return r;
    }
    double q = 0.0;
    for (double x : xs) q += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(q / (static_cast<double>(xs.size()) *
                          static_cast<double>(xs.size() - 1)));
    return r;
}

inline double binomial_se(double phat, std::size_t n) {
    if (n == 0) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(std::max(0.0, phat * (1.0 - phat)) / static_cast<double>(n));
}

inline double median(std::vector<double> xs) {
    require(!xs.empty(), "median of empty set");
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

// Ordinary least squares y = slope * x + icpt with the usual slope
// standard error (n - 2 degrees of freedom).
struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};

inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    require(x.size() == y.size() && x.size() >= 2, "need >= 2 points");
    const auto n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    require(sxx > 0.0, "degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double rss = 0;
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - (f.intercept + f.slope * x[i]);
            rss += r * r;
        }
        f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
    }
    return f;
}

}  // namespace rwre
