#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rwre {

// Lattice sites are signed 64-bit integers so windows can grow far on
// either side of the origin without overflow concerns.
using Site = std::int64_t;

struct SiteRange {
    Site lo = 0;
    Site hi = 0;

    bool contains(Site s) const { return lo <= s && s <= hi; }
    Site length() const { return hi - lo + 1; }
};

// Parameter-domain violations (bad distribution parameters, empty ranges,
// nonsensical tolerances) throw std::invalid_argument via this helper so
// call sites stay one-liners.
inline void require(bool cond, const std::string& what) {
    if (!cond) throw std::invalid_argument(what);
}

}  // namespace rwre
