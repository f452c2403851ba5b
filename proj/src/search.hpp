#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace carnot::detail {

using Objective = std::function<double(const Eigen::VectorXd&)>;

/// Compass search for a local maximum of f starting at x.
inline double pattern_search(const Objective& f, Eigen::VectorXd x, double step, double min_step, int max_evals) {
    double fx = f(x);
    int evals = 1;
    while (step > min_step && evals < max_evals) {
        bool improved = false;
        for (Eigen::Index i = 0; i < x.size() && evals < max_evals; ++i) {
            for (double sign : {1.0, -1.0}) {
                Eigen::VectorXd y = x;
                y[i] += sign * step;
                const double fy = f(y);
                ++evals;
                if (fy > fx) {
                    x = std::move(y);
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return fx;
}

/// Indices of the k largest values, ties broken by index.
inline std::vector<std::size_t> top_indices(const std::vector<double>& v, std::size_t k) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    k = std::min(k, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) { return v[a] > v[b] || (v[a] == v[b] && a < b); });
    idx.resize(k);
    return idx;
}

}  // namespace carnot::detail
