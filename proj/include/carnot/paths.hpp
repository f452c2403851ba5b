#pragma once
//
// Horizontal polygonal paths: one straight segment for the first layer,
// then lifted squares for the second layer.
//

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "carnot/group.hpp"

namespace carnot {

struct Segment {
    Point start;
    Vec direction;   ///< unit vector in the first layer
    double duration; ///< >= 0
    Point end;       ///< start . (duration * direction, 0)
};

struct HorizontalPath {
    std::vector<Segment> segments;

    std::size_t size() const { return segments.size(); }
    double length() const;
    /// End of the last segment; `fallback` for an empty path.
    const Point& endpoint(const Point& fallback) const;
};

/// Appends the segment start . (duration * direction, 0); direction must be a unit vector.
void append_segment(const GroupSpec& g, HorizontalPath& path, const Point& start, const Vec& direction,
                    double duration);

/// Endpoint of the lifted square from the identity, zero-based 0 <= i < j < m. Orientation +1 runs
/// X_i, X_j, -X_i, -X_j; orientation -1 runs X_j, X_i, -X_j, -X_i.
Point square_displacement(const GroupSpec& g, int i, int j, double s, int orientation);

/// Minimal-norm a (indexed by i < j, lexicographic) with sum a_ij B[.][i][j] = zeta.
/// Throws UnsolvableError when the residual exceeds 1e-10 |zeta|.
Eigen::VectorXd decompose_second_layer(const GroupSpec& g, const Vec& zeta);

/// Horizontal path from p1 to p2; empty when p1 == p2.
HorizontalPath connect(const GroupSpec& g, const Point& p1, const Point& p2);

/// max-abs coordinate gap between the path end and p2, over 1 + ||p2^{-1} p1||.
double endpoint_error(const GroupSpec& g, const HomNorm& nrm, const HorizontalPath& path, const Point& p1,
                      const Point& p2);

struct ScanResult {
    double c_emp = 0.0;         ///< max length / distance
    std::size_t n_max = 0;      ///< max segment count
    double max_endpoint_error = 0.0;
    std::vector<double> ratios; ///< per pair
    std::vector<std::size_t> counts;
};

/// Random pairs with coordinates uniform in [-radius, radius] (scaled by delta_scale).
ScanResult quasiconvexity_scan(const GroupSpec& g, const HomNorm& nrm, std::size_t n_pairs, std::uint64_t seed,
                               double radius = 1.0, double delta_scale = 1.0);

}  // namespace carnot
