#include "carnot/paths.hpp"

#include <algorithm>
#include <cmath>

#include "carnot/random.hpp"

namespace carnot {

double HorizontalPath::length() const {
    double s = 0.0;
    for (const Segment& seg : segments) s += seg.duration;
    return s;
}

const Point& HorizontalPath::endpoint(const Point& fallback) const {
    return segments.empty() ? fallback : segments.back().end;
}

void append_segment(const GroupSpec& g, HorizontalPath& path, const Point& start, const Vec& direction,
                    double duration) {
    if (!(duration >= 0.0)) throw InputError("segment duration must be nonnegative");
    Point step{duration * direction, Vec::Zero(g.n2())};
    path.segments.push_back({start, direction, duration, mul(g, start, step)});
}

namespace {

Vec axis(int m, int i, double sign) {
    Vec e = Vec::Zero(m);
    e[i] = sign;
    return e;
}

void check_pair(const GroupSpec& g, int i, int j) {
    if (i == j) throw InputError("lifted square needs i != j");
    if (i < 0 || j < 0 || i >= g.m() || j >= g.m() || i > j) throw InputError("lifted square needs 0 <= i < j < m");
}

// Four segments of side s starting at `start`; returns the end point.
Point append_square(const GroupSpec& g, HorizontalPath& path, Point start, int i, int j, double s, int orientation) {
    const int a = orientation > 0 ? i : j, b = orientation > 0 ? j : i;
    const std::pair<int, double> legs[4] = {{a, 1.0}, {b, 1.0}, {a, -1.0}, {b, -1.0}};
    for (const auto& [ax, sign] : legs) {
        append_segment(g, path, start, axis(g.m(), ax, sign), s);
        start = path.segments.back().end;
    }
    return start;
}

}  // namespace

Point square_displacement(const GroupSpec& g, int i, int j, double s, int orientation) {
    check_pair(g, i, j);
    if (!(s >= 0.0)) throw InputError("lifted square side must be nonnegative");
    if (orientation != 1 && orientation != -1) throw InputError("orientation must be +1 or -1");
    HorizontalPath tmp;
    return append_square(g, tmp, Point::identity(g.m(), g.n2()), i, j, s, orientation);
}

Eigen::VectorXd decompose_second_layer(const GroupSpec& g, const Vec& zeta) {
    if (zeta.size() != g.n2()) throw InputError("decompose_second_layer: zeta has wrong dimension");
    const Eigen::MatrixXd b = g.bracket_matrix();
    if (g.n2() == 0) return Eigen::VectorXd::Zero(b.cols());
    const Eigen::VectorXd rhs = zeta;
    const Eigen::VectorXd a = b.completeOrthogonalDecomposition().solve(rhs);
    const double res = (b * a - rhs).norm();
    if (!(res <= 1e-10 * rhs.norm()))
        throw UnsolvableError("second-layer target is outside the span of the brackets (residual " +
                              std::to_string(res) + ")");
    return a;
}

HorizontalPath connect(const GroupSpec& g, const Point& p1, const Point& p2) {
    g.check_point(p1);
    g.check_point(p2);
    HorizontalPath path;
    if (p1.x == p2.x && p1.z == p2.z) return path;

    const Point delta = mul(g, inv(g, p1), p2);
    const double len = delta.x.norm();
    const Vec dir = len > 0.0 ? Vec(delta.x / len) : axis(g.m(), 0, 1.0);
    append_segment(g, path, p1, dir, len);
    if (g.n2() == 0) return path;

    const Eigen::VectorXd a = decompose_second_layer(g, delta.z);
    const double floor = 1e-15 * delta.z.norm();
    Point at = path.segments.back().end;
    int col = 0;
    for (int i = 0; i < g.m(); ++i)
        for (int j = i + 1; j < g.m(); ++j, ++col) {
            const double c = a[col];
            if (std::abs(c) <= floor) continue;
            at = append_square(g, path, at, i, j, std::sqrt(std::abs(c)), c > 0.0 ? 1 : -1);
        }
    return path;
}

double endpoint_error(const GroupSpec& g, const HomNorm& nrm, const HorizontalPath& path, const Point& p1,
                      const Point& p2) {
    return coord_distance(path.endpoint(p1), p2) / (1.0 + dist(g, nrm, p1, p2));
}

ScanResult quasiconvexity_scan(const GroupSpec& g, const HomNorm& nrm, std::size_t n_pairs, std::uint64_t seed,
                               double radius, double delta_scale) {
    if (n_pairs == 0) throw InputError("quasiconvexity_scan: n_pairs must be positive");
    if (!(radius > 0.0)) throw InputError("quasiconvexity_scan: radius must be positive");
    ScanResult res;
    res.ratios.assign(n_pairs, 0.0);
    res.counts.assign(n_pairs, 0);
    std::vector<double> errors(n_pairs, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < static_cast<std::ptrdiff_t>(n_pairs); ++k) {
        auto rng = stream_rng(seed, static_cast<std::uint64_t>(k));
        Point p1 = random_point(rng, g.m(), g.n2(), -radius, radius);
        Point p2 = random_point(rng, g.m(), g.n2(), -radius, radius);
        p1 = dilate(g, delta_scale, p1);
        p2 = dilate(g, delta_scale, p2);
        const HorizontalPath path = connect(g, p1, p2);
        const double d = dist(g, nrm, p1, p2);
        res.ratios[k] = d > 0.0 ? path.length() / d : 0.0;
        res.counts[k] = path.size();
        errors[k] = endpoint_error(g, nrm, path, p1, p2);
    }
    for (std::size_t k = 0; k < n_pairs; ++k) {
        res.c_emp = std::max(res.c_emp, res.ratios[k]);
        res.n_max = std::max(res.n_max, res.counts[k]);
        res.max_endpoint_error = std::max(res.max_endpoint_error, errors[k]);
    }
    return res;
}

}  // namespace carnot
