#pragma once

#include <cstddef>
#include <span>

namespace carnot {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

/// Ordinary least squares y ~ slope x + intercept; needs two distinct x values.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

}  // namespace carnot
