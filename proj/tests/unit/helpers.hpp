#pragma once

#include <cstdint>
#include <random>

#include "carnot/group.hpp"
#include "carnot/random.hpp"

namespace testing_util {

inline carnot::Point pt(std::initializer_list<double> x, std::initializer_list<double> z) {
    carnot::Vec vx(static_cast<Eigen::Index>(x.size())), vz(static_cast<Eigen::Index>(z.size()));
    Eigen::Index i = 0;
    for (double v : x) vx[i++] = v;
    i = 0;
    for (double v : z) vz[i++] = v;
    return {vx, vz};
}

// Generator for property tests: uniform coordinates in [-r, r].
struct PointGen {
    const carnot::GroupSpec& g;
    std::mt19937_64 rng;
    double r;

    PointGen(const carnot::GroupSpec& g_, std::uint64_t seed, double r_ = 1.0) : g(g_), rng(seed), r(r_) {}
    carnot::Point operator()() { return carnot::random_point(rng, g.m(), g.n2(), -r, r); }
    double real(double lo, double hi) { return carnot::uniform(rng, lo, hi); }
};

}  // namespace testing_util
