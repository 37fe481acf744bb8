#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "rwre/common.hpp"

namespace rwre {

// SplitMix64 finalizer. Bijective on 64-bit words, good avalanche; the
// workhorse behind both per-site environment draws and seed derivation.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Top 53 bits -> [0, 1). Explicit conversion so results do not depend on
// the standard library's distribution implementations.
inline double unit_double(std::uint64_t bits) {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Uniform in [0,1) attached to lattice position i under a fixed seed.
// Counter-based: the value depends only on (seed, i), never on query order,
// which is what makes environment windows extension- and thread-stable.
inline double site_uniform(std::uint64_t seed, Site i) {
    const auto s = static_cast<std::uint64_t>(i);
    return unit_double(mix64(seed ^ mix64(s)));
}

// Distinct named streams derived from one master seed. Used to keep
// environment randomness, walk randomness and replica indexing on
// independent streams of a single top-level seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index = 0) {
    return mix64(master ^ mix64(stream * 0x9e3779b97f4a7c15ULL + 1) ^
                 mix64(index * 0xd1342543de82ef95ULL + 2));
}

// Walk step stream. mt19937_64's output sequence is pinned by the standard,
// and the [0,1) conversion above is explicit, so trajectories replay
// bit-identically on any platform.
class UnitStream {
  public:
    explicit UnitStream(std::uint64_t seed) : gen_(seed) {}

    double next() { return unit_double(gen_()); }

  private:
    std::mt19937_64 gen_;
};

// Test double: plays back a fixed pattern of "up" (0.0) / "down" (1.0-eps)
// decisions. Any value below alpha steps up, so 0.0 forces an up-step for
// every admissible alpha.
class ReplayStream {
  public:
    explicit ReplayStream(std::vector<double> values)
        : values_(std::move(values)) {}

    double next() {
        double v = values_[pos_ % values_.size()];
        ++pos_;
        return v;
    }

  private:
    std::vector<double> values_;
    std::size_t pos_ = 0;
};

}  // namespace rwre
