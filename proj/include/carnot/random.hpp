#pragma once

#include <cstdint>
#include <random>

#include "carnot/group.hpp"

namespace carnot {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Independent stream per (seed, index); results do not depend on thread layout.
inline std::mt19937_64 stream_rng(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ULL)));
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    // 53 random bits mapped to [0, 1); avoids implementation-defined distributions
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

inline Point random_point(std::mt19937_64& rng, int m, int n2, double lo, double hi) {
    Point p = Point::identity(m, n2);
    for (int i = 0; i < m; ++i) p.x[i] = uniform(rng, lo, hi);
    for (int i = 0; i < n2; ++i) p.z[i] = uniform(rng, lo, hi);
    return p;
}

}  // namespace carnot
