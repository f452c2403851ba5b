#pragma once
//
// Truncated singular integral operators on graph patches, and the smoothed
// annular integrals of a kernel over vertical hyperplanes.
//

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "carnot/graphs.hpp"
#include "carnot/kernels.hpp"

namespace carnot {

/// Stack of d_out matrices B_c(i, j) = sqrt(mu_i) K_c(q_j^{-1} q_i) [d(q_i, q_j) > eps] sqrt(mu_j).
struct TruncatedOperator {
    std::string kernel;
    double epsilon = 0.0;
    std::vector<Eigen::MatrixXd> blocks;

    std::size_t size() const { return blocks.empty() ? 0 : static_cast<std::size_t>(blocks.front().rows()); }
};

/// Points and weights only; build_patch output or a hand-made point cloud.
TruncatedOperator assemble(const Kernel& k, const std::vector<Point>& points, std::span<const double> weights,
                           double epsilon);
TruncatedOperator assemble(const Kernel& k, const GraphPatch& patch, double epsilon);

struct NormEstimate {
    double value = 0.0;     ///< largest singular value of the stack
    std::size_t iters = 0;
    double residual = 0.0;  ///< |G v - lambda v| / lambda for the Gram operator G
    bool converged = true;  ///< false when max_iter was reached first
};

/// Power iteration on sum_c B_c^T B_c from the normalised all-ones vector.
NormEstimate operator_norm(const TruncatedOperator& op, double tol = 1e-8, std::size_t max_iter = 20000);

/// max d(q_i, q_j) under the kernel's norm.
double patch_diameter(const Kernel& k, const std::vector<Point>& points);

/// n rungs top, top/2, ..., top/2^{n-1}.
std::vector<double> dyadic_ladder(double top, std::size_t rungs);

struct SweepOptions {
    double tol = 1e-8;
    std::size_t max_iter = 20000;
    /// Rungs must not go below this; build_patch grid spacing by default.
    double min_epsilon = 0.0;
};

struct SweepResult {
    std::string kernel;
    std::string family;
    std::vector<double> epsilons;
    std::vector<double> norms;
    std::vector<std::size_t> iters;
    std::vector<double> residuals;
    std::vector<bool> converged;
    std::size_t n_points = 0;
    double diameter = 0.0;
    double grid_spacing = 0.0;
};

/// Throws InputError unless the ladder is non-empty, strictly decreasing by exact halving and stays at or
/// above min_epsilon (> 0).
void validate_ladder(std::span<const double> ladder, double min_epsilon);

/// Operator norms along the ladder. Each rung adds the annulus between it and the previous rung
/// to the previous rung's matrices.
SweepResult epsilon_sweep(const Kernel& k, const std::vector<Point>& points, std::span<const double> weights,
                          std::span<const double> ladder, const SweepOptions& o);
SweepResult epsilon_sweep(const Kernel& k, const GraphPatch& patch, std::span<const double> ladder,
                          SweepOptions o = {});

/// Smooth radial cutoff: 1 on [0, 1/2], 0 on [2, inf).
double bump_profile(double u);

struct ABOptions {
    int shells_per_dyad = 2;
    int pts_per_axis = 32;  ///< even, so the grid is symmetric under each coordinate sign flip
};

/// Largest even per-axis count, at most 64, whose grid stays within 2^15 points on a dim-dimensional W.
int default_pts_per_axis(int dim);

/// Midpoint-rule estimate of int_W (psi^R - psi^r)(w) K(w) dw, psi^r(p) = bump_profile(r ||p||).
Eigen::VectorXd ab_quadrature(const Kernel& k, const VerticalHyperplane& w, double r, double big_r,
                              const ABOptions& o = {});

struct ABEntry {
    std::size_t hyperplane = 0;
    double r = 0.0;
    double big_r = 0.0;
    Eigen::VectorXd value;
};

struct ABReport {
    std::string kernel;
    std::vector<ABEntry> entries;
    double sup = 0.0;          ///< max |component| over all entries
    double bump_inner = 0.5;   ///< bump_profile == 1 below this
    double bump_outer = 2.0;   ///< bump_profile == 0 above this
};

ABReport ab_sup(const Kernel& k, const std::vector<VerticalHyperplane>& hyperplanes,
                const std::vector<std::pair<double, double>>& pairs, const ABOptions& o = {});

/// Pairs (r, r 2^j) for j = 1..k.
std::vector<std::pair<double, double>> ab_ladder(double r, int k);

struct ABStability {
    ABReport base;     ///< ladder up to 2^k
    ABReport doubled;  ///< ladder up to 2^{2k}
    bool stable = false;  ///< |sup_doubled - sup_base| <= 0.05 max of the two
};

ABStability ab_stability(const Kernel& k, const std::vector<VerticalHyperplane>& hyperplanes, double r, int k_max,
                         const ABOptions& o = {});

}  // namespace carnot
