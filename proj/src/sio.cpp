#include "carnot/sio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace carnot {

namespace {

void check_cloud(const Kernel& k, const std::vector<Point>& points, std::span<const double> weights) {
    if (points.empty()) throw InputError("patch is empty");
    if (weights.size() != points.size()) throw InputError("patch needs one weight per point");
    for (const Point& p : points) k.spec().check_point(p);
    for (double w : weights)
        if (!(w >= 0.0) || !std::isfinite(w)) throw InputError("patch weights must be finite and nonnegative");
}

Eigen::MatrixXd distance_matrix(const Kernel& k, const std::vector<Point>& points) {
    const GroupSpec& g = k.spec();
    const HomNorm nrm = k.norm();
    const auto n = static_cast<std::ptrdiff_t>(points.size());
    Eigen::MatrixXd d(n, n);
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        const Point qj_inv = inv(g, points[j]);
        for (std::ptrdiff_t i = 0; i < n; ++i) d(i, j) = i == j ? 0.0 : nrm(mul(g, qj_inv, points[i]));
    }
    return d;
}

// Fills entries with lo < d(i, j) <= hi (hi = inf for the first rung).
void add_annulus(const Kernel& k, const std::vector<Point>& points, std::span<const double> weights,
                 const Eigen::MatrixXd& d, double lo, double hi, std::vector<Eigen::MatrixXd>& blocks) {
    const GroupSpec& g = k.spec();
    const int c_out = k.d_out();
    const auto n = static_cast<std::ptrdiff_t>(points.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t j = 0; j < n; ++j) {
        const Point qj_inv = inv(g, points[j]);
        const double sj = std::sqrt(weights[j]);
        double buf[2 * kMaxDim];
        for (std::ptrdiff_t i = 0; i < n; ++i) {
            const double dij = d(i, j);
            if (i == j || !(dij > lo) || dij > hi) continue;
            k.eval_unchecked(mul(g, qj_inv, points[i]), buf);
            const double s = std::sqrt(weights[i]) * sj;
            for (int c = 0; c < c_out; ++c) blocks[c](i, j) = s * buf[c];
        }
    }
}

}  // namespace

TruncatedOperator assemble(const Kernel& k, const std::vector<Point>& points, std::span<const double> weights,
                           double epsilon) {
    if (!(epsilon > 0.0)) throw InputError("assemble: epsilon must be positive");
    check_cloud(k, points, weights);
    const auto n = static_cast<Eigen::Index>(points.size());
    TruncatedOperator op{k.name(), epsilon, std::vector<Eigen::MatrixXd>(k.d_out(), Eigen::MatrixXd::Zero(n, n))};
    const Eigen::MatrixXd d = distance_matrix(k, points);
    add_annulus(k, points, weights, d, epsilon, std::numeric_limits<double>::infinity(), op.blocks);
    return op;
}

TruncatedOperator assemble(const Kernel& k, const GraphPatch& patch, double epsilon) {
    return assemble(k, patch.points, patch.weights, epsilon);
}

namespace {

// out = sum_c B_c^T B_c v
void gram_apply(const std::vector<Eigen::MatrixXd>& blocks, const Eigen::VectorXd& v, Eigen::VectorXd& u,
                Eigen::VectorXd& out) {
    const Eigen::Index n = v.size();
    constexpr Eigen::Index kRowBlock = 256;
    const Eigen::Index n_blocks = (n + kRowBlock - 1) / kRowBlock;
    out.setZero(n);
    for (const Eigen::MatrixXd& b : blocks) {
        // u = B v, row blocks in parallel; each row sums over j in a fixed order
#pragma omp parallel for schedule(static)
        for (Eigen::Index blk = 0; blk < n_blocks; ++blk) {
            const Eigen::Index r0 = blk * kRowBlock, len = std::min(kRowBlock, n - r0);
            auto seg = u.segment(r0, len);
            seg.setZero();
            for (Eigen::Index j = 0; j < n; ++j) seg.noalias() += v[j] * b.col(j).segment(r0, len);
        }
#pragma omp parallel for schedule(static)
        for (Eigen::Index j = 0; j < n; ++j) out[j] += b.col(j).dot(u);
    }
}

}  // namespace

NormEstimate operator_norm(const TruncatedOperator& op, double tol, std::size_t max_iter) {
    if (!(tol > 0.0)) throw InputError("operator_norm: tol must be positive");
    if (max_iter == 0) throw InputError("operator_norm: max_iter must be positive");
    NormEstimate est;
    const auto n = static_cast<Eigen::Index>(op.size());
    if (n == 0) return est;
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    Eigen::VectorXd u(n), w(n);
    double lambda = 0.0;
    for (std::size_t it = 1; it <= max_iter; ++it) {
        gram_apply(op.blocks, v, u, w);
        est.iters = it;
        lambda = v.dot(w);
        const double wn = w.norm();
        if (!(wn > 0.0) || !(lambda > 0.0)) {
            // v lies in the kernel of a zero (or numerically zero) Gram operator
            if (wn == 0.0) return est;
            lambda = 0.0;
        }
        est.residual = lambda > 0.0 ? (w - lambda * v).norm() / lambda : std::numeric_limits<double>::infinity();
        est.value = std::sqrt(std::max(lambda, 0.0));
        if (est.residual <= tol) return est;
        v = w / wn;
    }
    est.converged = false;
    return est;
}

double patch_diameter(const Kernel& k, const std::vector<Point>& points) {
    if (points.empty()) return 0.0;
    return distance_matrix(k, points).maxCoeff();
}

std::vector<double> dyadic_ladder(double top, std::size_t rungs) {
    if (!(top > 0.0) || !std::isfinite(top)) throw InputError("dyadic_ladder: top must be positive");
    std::vector<double> out;
    for (std::size_t k = 0; k < rungs; ++k) out.push_back(std::ldexp(top, -static_cast<int>(k)));
    return out;
}

void validate_ladder(std::span<const double> ladder, double min_epsilon) {
    if (ladder.empty()) throw InputError("epsilon ladder is empty");
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        if (!(ladder[k] > 0.0) || !std::isfinite(ladder[k])) throw InputError("epsilon ladder entries must be positive");
        if (k > 0 && std::abs(ladder[k - 1] - 2.0 * ladder[k]) > 1e-12 * ladder[k - 1])
            throw InputError("epsilon ladder must halve at every rung");
    }
    if (ladder.back() < min_epsilon)
        throw InputError("epsilon ladder bottom " + std::to_string(ladder.back()) + " is below the grid spacing " +
                         std::to_string(min_epsilon));
}

SweepResult epsilon_sweep(const Kernel& k, const std::vector<Point>& points, std::span<const double> weights,
                          std::span<const double> ladder, const SweepOptions& o) {
    check_cloud(k, points, weights);
    validate_ladder(ladder, o.min_epsilon);
    const auto n = static_cast<Eigen::Index>(points.size());
    const Eigen::MatrixXd d = distance_matrix(k, points);

    SweepResult res;
    res.kernel = k.name();
    res.n_points = points.size();
    res.diameter = d.maxCoeff();
    res.grid_spacing = o.min_epsilon;
    TruncatedOperator op{k.name(), 0.0, std::vector<Eigen::MatrixXd>(k.d_out(), Eigen::MatrixXd::Zero(n, n))};
    double prev = std::numeric_limits<double>::infinity();
    for (double eps : ladder) {
        add_annulus(k, points, weights, d, eps, prev, op.blocks);
        op.epsilon = eps;
        prev = eps;
        const NormEstimate est = operator_norm(op, o.tol, o.max_iter);
        res.epsilons.push_back(eps);
        res.norms.push_back(est.value);
        res.iters.push_back(est.iters);
        res.residuals.push_back(est.residual);
        res.converged.push_back(est.converged);
    }
    return res;
}

SweepResult epsilon_sweep(const Kernel& k, const GraphPatch& patch, std::span<const double> ladder, SweepOptions o) {
    if (o.min_epsilon <= 0.0) o.min_epsilon = patch.grid_spacing();
    SweepResult res = epsilon_sweep(k, patch.points, patch.weights, ladder, o);
    res.family = patch.family;
    return res;
}

double bump_profile(double u) {
    const auto g = [](double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; };
    if (u <= 0.5) return 1.0;
    if (u >= 2.0) return 0.0;
    const double a = g(2.0 - u), b = g(u - 0.5);
    return a / (a + b);
}

namespace {

struct ShellGrid {
    int mw, n2, n;
    double hx, hz;

    double coord(int idx, double h) const { return (idx + 0.5) * h - 0.5 * n * h; }
};

}  // namespace

int default_pts_per_axis(int dim) {
    if (dim < 1) throw InputError("default_pts_per_axis: dim must be positive");
    int n = 64;
    while (n > 2 && std::pow(static_cast<double>(n), dim) > 32768.0) n -= 2;
    return n;
}

Eigen::VectorXd ab_quadrature(const Kernel& k, const VerticalHyperplane& w, double r, double big_r,
                              const ABOptions& o) {
    if (!(r > 0.0) || !std::isfinite(big_r)) throw InputError("ab_quadrature: radii must be positive and finite");
    if (r > big_r) throw InputError("ab_quadrature: need r <= R");
    if (o.shells_per_dyad < 1) throw InputError("ab_quadrature: shells_per_dyad must be >= 1");
    if (o.pts_per_axis < 2 || o.pts_per_axis % 2 != 0) throw InputError("ab_quadrature: pts_per_axis must be even");
    const GroupSpec& g = k.spec();
    if (g.m() < 2) throw InputError("ab_quadrature: needs m >= 2");
    if (w.normal().size() != g.m()) throw InputError("ab_quadrature: hyperplane normal has wrong dimension");

    const int mw = g.m() - 1, n2 = g.n2(), dim = mw + n2, n = o.pts_per_axis, c_out = k.d_out();
    const HomNorm nrm = k.norm();
    const Eigen::MatrixXd& frame = w.frame();
    const double a = 0.5 / big_r, b = 2.0 / r;
    const int dyads = std::max(1, static_cast<int>(std::ceil(std::log2(b / a) - 1e-12)));
    const int n_shells = dyads * o.shells_per_dyad;

    // orbit representatives: first x_W coordinate positive and, if present, first z coordinate positive
    std::size_t reps = 1;
    for (int ax = 0; ax < dim; ++ax) reps *= static_cast<std::size_t>((ax == 0 || ax == mw) ? n / 2 : n);

    std::vector<Eigen::VectorXd> shell_sum(n_shells, Eigen::VectorXd::Zero(c_out));
#pragma omp parallel for schedule(dynamic, 1)
    for (int s = 0; s < n_shells; ++s) {
        const double lo = a * std::exp2(static_cast<double>(s) / o.shells_per_dyad);
        const double hi = a * std::exp2(static_cast<double>(s + 1) / o.shells_per_dyad);
        const ShellGrid grid{mw, n2, n, 2.0 * hi / n, 2.0 * hi * hi / n};
        const double cell = std::pow(grid.hx, mw) * std::pow(grid.hz, n2);
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(c_out);
        Vec xw(mw);
        Point p = Point::identity(g.m(), n2), q = p;
        double k1[2 * kMaxDim], k2[2 * kMaxDim], k3[2 * kMaxDim], k4[2 * kMaxDim];
        for (std::size_t idx = 0; idx < reps; ++idx) {
            std::size_t rem = idx;
            for (int ax = dim; ax-- > 0;) {
                const bool half = ax == 0 || ax == mw;
                const int span = half ? n / 2 : n;
                const int i = static_cast<int>(rem % static_cast<std::size_t>(span)) + (half ? n / 2 : 0);
                rem /= static_cast<std::size_t>(span);
                if (ax < mw)
                    xw[ax] = grid.coord(i, grid.hx);
                else
                    p.z[ax - mw] = grid.coord(i, grid.hz);
            }
            p.x = frame * xw;
            const double nw = nrm(p);
            if (!(nw >= lo && nw < hi)) continue;
            const double weight = (bump_profile(big_r * nw) - bump_profile(r * nw)) * cell;
            if (weight == 0.0) continue;
            k.eval_unchecked(p, k1);
            q.x = -p.x;
            q.z = p.z;
            k.eval_unchecked(q, k2);
            if (n2 == 0) {
                for (int c = 0; c < c_out; ++c) acc[c] += weight * (k1[c] + k2[c]);
                continue;
            }
            q.z = -p.z;
            k.eval_unchecked(q, k3);
            q.x = p.x;
            k.eval_unchecked(q, k4);
            for (int c = 0; c < c_out; ++c) acc[c] += weight * ((k1[c] + k2[c]) + (k3[c] + k4[c]));
        }
        shell_sum[s] = acc;
    }
    Eigen::VectorXd total = Eigen::VectorXd::Zero(c_out);
    for (const auto& v : shell_sum) total += v;
    return total;
}

ABReport ab_sup(const Kernel& k, const std::vector<VerticalHyperplane>& hyperplanes,
                const std::vector<std::pair<double, double>>& pairs, const ABOptions& o) {
    if (hyperplanes.empty()) throw InputError("ab_sup: no hyperplanes");
    if (pairs.empty()) throw InputError("ab_sup: no (r, R) pairs");
    ABReport rep;
    rep.kernel = k.name();
    for (std::size_t h = 0; h < hyperplanes.size(); ++h)
        for (const auto& [r, big_r] : pairs) {
            ABEntry e{h, r, big_r, ab_quadrature(k, hyperplanes[h], r, big_r, o)};
            rep.sup = std::max(rep.sup, e.value.cwiseAbs().maxCoeff());
            rep.entries.push_back(std::move(e));
        }
    return rep;
}

std::vector<std::pair<double, double>> ab_ladder(double r, int k) {
    if (!(r > 0.0)) throw InputError("ab_ladder: r must be positive");
    if (k < 1) throw InputError("ab_ladder: need at least one rung");
    std::vector<std::pair<double, double>> out;
    for (int j = 1; j <= k; ++j) out.emplace_back(r, std::ldexp(r, j));
    return out;
}

ABStability ab_stability(const Kernel& k, const std::vector<VerticalHyperplane>& hyperplanes, double r, int k_max,
                         const ABOptions& o) {
    ABStability st;
    st.base = ab_sup(k, hyperplanes, ab_ladder(r, k_max), o);
    st.doubled = ab_sup(k, hyperplanes, ab_ladder(r, 2 * k_max), o);
    const double a = st.base.sup, b = st.doubled.sup;
    st.stable = std::abs(a - b) <= 0.05 * std::max(a, b);
    return st;
}

}  // namespace carnot
