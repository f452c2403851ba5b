#include "carnot/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "carnot/random.hpp"
#include "search.hpp"

namespace carnot {

Point embed(const WPoint& w) {
    Vec x(w.x.size() + 1);
    x[0] = 0.0;
    x.tail(w.x.size()) = w.x;
    return {x, w.z};
}

WPoint w_coords(const Point& p) { return {p.x.tail(p.x.size() - 1), p.z}; }

GraphFunction::GraphFunction(std::string family, ValueFn value, PartialsFn partials, bool affine)
    : family_(std::move(family)), value_(std::move(value)), partials_(std::move(partials)), affine_(affine) {}

void GraphFunction::partials(const WPoint& w, Vec& dx, Vec& dz) const {
    dx = Vec::Zero(w.x.size());
    dz = Vec::Zero(w.z.size());
    partials_(w, dx, dz);
}

GraphFunction GraphFunction::affine(const Vec& c, double d, int n2) {
    auto value = [c, d](const WPoint& w) { return c.dot(w.x) + d; };
    auto partials = [c, n2](const WPoint&, Vec& dx, Vec& dz) {
        dx = c;
        dz = Vec::Zero(n2);
    };
    return GraphFunction("affine", value, partials, true);
}

GraphFunction GraphFunction::zero(const GroupSpec& g) { return affine(Vec::Zero(g.m() - 1), 0.0, g.n2()); }

GraphFunction GraphFunction::gauss_bump(double amplitude, double sigma, const WPoint& center) {
    if (!(sigma > 0.0)) throw InputError("gauss_bump: sigma must be positive");
    const double inv_s2 = 1.0 / (sigma * sigma);
    auto value = [=](const WPoint& w) {
        return amplitude * std::exp(-((w.x - center.x).squaredNorm() + (w.z - center.z).squaredNorm()) * inv_s2);
    };
    auto partials = [=](const WPoint& w, Vec& dx, Vec& dz) {
        const double f = value(w);
        dx = (-2.0 * inv_s2 * f) * (w.x - center.x);
        dz = (-2.0 * inv_s2 * f) * (w.z - center.z);
    };
    return GraphFunction("gauss", value, partials);
}

GraphFunction GraphFunction::power_decay(double amplitude, double sigma, double theta, double gamma) {
    if (!(sigma > 0.0)) throw InputError("power_decay: sigma must be positive");
    if (!(theta > 0.0 && theta < 1.0)) throw InputError("power_decay: theta must lie in (0, 1)");
    if (!(gamma > 0.0)) throw InputError("power_decay: gamma must be positive");
    const double inv_s4 = std::pow(sigma, -4.0);
    // phi = A u^{-gamma/4}, u = 1 + (|x|^4 + |z|^2) / sigma^4
    auto value = [=](const WPoint& w) {
        const double x2 = w.x.squaredNorm();
        const double u = 1.0 + (x2 * x2 + w.z.squaredNorm()) * inv_s4;
        return amplitude * std::pow(u, -0.25 * gamma);
    };
    auto partials = [=](const WPoint& w, Vec& dx, Vec& dz) {
        const double x2 = w.x.squaredNorm();
        const double u = 1.0 + (x2 * x2 + w.z.squaredNorm()) * inv_s4;
        const double du = amplitude * (-0.25 * gamma) * std::pow(u, -0.25 * gamma - 1.0) * inv_s4;
        dx = (du * 4.0 * x2) * w.x;
        dz = (du * 2.0) * w.z;
    };
    GraphFunction f("power", value, partials);
    f.theta_ = theta;
    f.gamma_ = gamma;
    return f;
}

Point graph_map(const GroupSpec& g, const GraphFunction& phi, const WPoint& w) {
    if (w.x.size() != g.m() - 1 || w.z.size() != g.n2()) throw InputError("graph_map: W-point dimension mismatch");
    Point v = Point::identity(g.m(), g.n2());
    v.x[0] = phi(w);
    return mul(g, embed(w), v);
}

Eigen::MatrixXd y_field_coefficients(const GroupSpec& g, const WPoint& w, double phi_w) {
    const int m = g.m(), n2 = g.n2();
    Eigen::MatrixXd c(m - 1, n2);
    for (int l = 1; l < m; ++l)
        for (int k = 0; k < n2; ++k) {
            double acc = 0.0;
            for (int i = 1; i < m; ++i) acc += g.bracket(k, i, l) * w.x[i - 1];
            c(l - 1, k) = 0.5 * acc + g.bracket(k, 0, l) * phi_w;
        }
    return c;
}

Vec intrinsic_gradient(const GroupSpec& g, const GraphFunction& phi, const WPoint& w) {
    if (w.x.size() != g.m() - 1 || w.z.size() != g.n2())
        throw InputError("intrinsic_gradient: W-point dimension mismatch");
    Vec dx, dz;
    phi.partials(w, dx, dz);
    if (g.n2() == 0) return dx;
    const Eigen::MatrixXd c = y_field_coefficients(g, w, phi(w));
    Vec grad = dx + c * Eigen::VectorXd(dz);
    return grad;
}

TranslatedGraph::TranslatedGraph(const GroupSpec& g, GraphFunction phi, const Point& p0, double tol)
    : g_(&g), phi_(std::move(phi)) {
    g.check_point(p0);
    const double s = p0.x[0];
    Point e = Point::identity(g.m(), g.n2());
    e.x[0] = -s;
    base_ = w_coords(mul(g, p0, e));
    base_value_ = phi_(base_);
    if (!(std::abs(s - base_value_) <= tol * (1.0 + std::abs(s))))
        throw InputError("translate_graph: base point is not on the intrinsic graph");
    base_value_ = s;
}

WPoint TranslatedGraph::source(const WPoint& w) const {
    // wbar . V(phibar) . w . V(-phibar), V(a) = (a e1, 0)
    const GroupSpec& g = *g_;
    Point v = Point::identity(g.m(), g.n2());
    v.x[0] = base_value_;
    Point vi = Point::identity(g.m(), g.n2());
    vi.x[0] = -base_value_;
    Point conj = mul(g, mul(g, v, embed(w)), vi);
    conj.x[0] = 0.0;
    return w_coords(mul(g, embed(base_), conj));
}

double TranslatedGraph::operator()(const WPoint& w) const { return phi_(source(w)) - base_value_; }

Vec TranslatedGraph::gradient(const WPoint& w) const { return intrinsic_gradient(*g_, phi_, source(w)); }

double translate_graph(const GroupSpec& g, const GraphFunction& phi, const Point& p0, const WPoint& w) {
    return TranslatedGraph(g, phi, p0)(w);
}

double affine_residual(const GroupSpec& g, const GraphFunction& phi, const Point& p0, const WPoint& w) {
    TranslatedGraph psi(g, phi, p0);
    const Vec lin = intrinsic_gradient(g, phi, psi.base());
    return std::abs(psi(w) - lin.dot(w.x));
}

namespace {

WPoint raw_to_w(const Eigen::VectorXd& y, int mw, int n2) {
    WPoint w{Vec(mw), Vec(n2)};
    for (int i = 0; i < mw; ++i) w.x[i] = y[i];
    for (int k = 0; k < n2; ++k) w.z[k] = y[mw + k];
    return w;
}

// delta_r applied to a W-point normalised onto the unit sphere.
bool scaled_direction(const HomNorm& nrm, WPoint& w, double r) {
    const double n = nrm(embed(w));
    if (!(n > 0.0)) return false;
    const double t = r / n;
    w.x *= t;
    w.z *= t * t;
    return true;
}

}  // namespace

double c1alpha_constant(const GroupSpec& g, const GraphFunction& phi, double alpha, const C1AlphaSampling& s) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw InputError("c1alpha_constant: alpha must lie in (0, 1]");
    if (s.n_base == 0 || s.n_offsets == 0) throw InputError("c1alpha_constant: empty sample");
    const int mw = g.m() - 1, n2 = g.n2(), dim = mw + n2;
    const HomNorm nrm = s.norm;

    // params: base point (dim), offset direction (dim), offset radius fraction (1)
    const detail::Objective ratio = [&](const Eigen::VectorXd& y) {
        WPoint base = raw_to_w(y.head(dim), mw, n2);
        for (int i = 0; i < mw; ++i) base.x[i] = std::clamp(base.x[i], -s.base_box, s.base_box);
        for (int k = 0; k < n2; ++k) base.z[k] = std::clamp(base.z[k], -s.base_box, s.base_box);
        WPoint w = raw_to_w(y.segment(dim, dim), mw, n2);
        const double r = s.offset_radius * std::clamp(y[2 * dim], 1e-6, 1.0);
        if (!scaled_direction(nrm, w, r)) return 0.0;
        TranslatedGraph psi(g, phi, graph_map(g, phi, base));
        const Vec d = psi.gradient(w) - intrinsic_gradient(g, phi, base);
        return (mw ? d.norm() : 0.0) / std::pow(r, alpha);
    };

    const std::size_t n = s.n_base * s.n_offsets;
    std::vector<Eigen::VectorXd> ys(n);
    std::vector<double> vals(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(n); ++idx) {
        const std::size_t b = static_cast<std::size_t>(idx) / s.n_offsets;
        auto base_rng = stream_rng(s.seed, b);
        auto rng = stream_rng(s.seed ^ 0xa5a5a5a5ULL, static_cast<std::uint64_t>(idx));
        Eigen::VectorXd y(2 * dim + 1);
        for (int c = 0; c < dim; ++c) y[c] = uniform(base_rng, -s.base_box, s.base_box);
        for (int c = 0; c < dim; ++c) y[dim + c] = uniform(rng, -1.0, 1.0);
        y[2 * dim] = uniform(rng, 0.0, 1.0);
        vals[idx] = ratio(y);
        ys[idx] = std::move(y);
    }
    double best = *std::max_element(vals.begin(), vals.end());
    for (std::size_t i : detail::top_indices(vals, 4))
        best = std::max(best, detail::pattern_search(ratio, ys[i], 0.05, 1e-7, 4000));
    return best;
}

HolderFit holder_fit(const GroupSpec& g, const GraphFunction& phi, const WPoint& base, const HolderFitOptions& o) {
    if (o.n_radii < 2) throw InputError("holder_fit: need at least two radii");
    if (!(o.r_min > 0.0 && o.r_max > o.r_min)) throw InputError("holder_fit: need 0 < r_min < r_max");
    if (o.n_directions == 0) throw InputError("holder_fit: need at least one direction");
    const int mw = g.m() - 1, n2 = g.n2();

    std::vector<WPoint> dirs;
    for (std::size_t i = 0; dirs.size() < o.n_directions; ++i) {
        auto rng = stream_rng(o.seed, i);
        WPoint w{Vec(mw), Vec(n2)};
        for (int c = 0; c < mw; ++c) w.x[c] = uniform(rng, -1.0, 1.0);
        for (int c = 0; c < n2; ++c) w.z[c] = uniform(rng, -1.0, 1.0);
        if (scaled_direction(o.norm, w, 1.0)) dirs.push_back(w);
    }

    const Point p0 = graph_map(g, phi, base);
    TranslatedGraph psi(g, phi, p0);
    const Vec lin = intrinsic_gradient(g, phi, psi.base());

    HolderFit fit;
    const double lr0 = std::log(o.r_min), lr1 = std::log(o.r_max);
    for (std::size_t k = 0; k < o.n_radii; ++k) {
        const double r = std::exp(lr0 + (lr1 - lr0) * static_cast<double>(k) / static_cast<double>(o.n_radii - 1));
        double worst = 0.0;
        for (const WPoint& u : dirs) {
            WPoint w{r * u.x, (r * r) * u.z};
            worst = std::max(worst, std::abs(psi(w) - lin.dot(w.x)));
        }
        fit.radii.push_back(r);
        fit.residuals.push_back(worst);
        fit.max_residual = std::max(fit.max_residual, worst);
    }

    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (std::size_t k = 0; k < fit.radii.size(); ++k) {
        if (!(fit.residuals[k] > 0.0)) continue;
        const double lx = std::log(fit.radii[k]), ly = std::log(fit.residuals[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    if (cnt >= 2) {
        const double nn = static_cast<double>(cnt);
        fit.slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
        fit.intercept = (sy - fit.slope * sx) / nn;
    } else {
        fit.slope = std::numeric_limits<double>::quiet_NaN();
        fit.intercept = std::numeric_limits<double>::quiet_NaN();
    }
    return fit;
}

double GraphPatch::total_mass() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

double GraphPatch::grid_spacing() const {
    return steps.empty() ? 0.0 : *std::min_element(steps.begin(), steps.end());
}

GraphPatch build_patch(const GroupSpec& g, const GraphFunction& phi, const Box& box, const std::vector<int>& resolution) {
    const int mw = g.m() - 1, n2 = g.n2();
    const std::size_t dim = static_cast<std::size_t>(mw + n2);
    if (box.intervals.size() != dim) throw InputError("build_patch: box needs one interval per W-axis");
    if (resolution.size() != dim) throw InputError("build_patch: resolution needs one entry per W-axis");
    std::size_t total = 1;
    for (std::size_t a = 0; a < dim; ++a) {
        const auto [lo, hi] = box.intervals[a];
        if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw InputError("build_patch: degenerate box");
        if (resolution[a] < 2) throw InputError("build_patch: resolution must be >= 2 per axis");
        total *= static_cast<std::size_t>(resolution[a]);
        if (total > kMaxPatchPoints) throw InputError("build_patch: more than 1e7 grid points");
    }

    GraphPatch patch;
    patch.box = box;
    patch.resolution = resolution;
    patch.family = phi.family();
    double cell = 1.0;
    for (std::size_t a = 0; a < dim; ++a) {
        const double h = (box.intervals[a].second - box.intervals[a].first) / resolution[a];
        patch.steps.push_back(h);
        cell *= h;
    }
    patch.params.resize(total);
    patch.points.resize(total);
    patch.weights.resize(total);

#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t idx = 0; idx < static_cast<std::ptrdiff_t>(total); ++idx) {
        // last axis varies fastest
        std::size_t rem = static_cast<std::size_t>(idx);
        WPoint w{Vec(mw), Vec(n2)};
        for (std::size_t a = dim; a-- > 0;) {
            const std::size_t k = rem % static_cast<std::size_t>(resolution[a]);
            rem /= static_cast<std::size_t>(resolution[a]);
            const double c = box.intervals[a].first + (static_cast<double>(k) + 0.5) * patch.steps[a];
            if (a < static_cast<std::size_t>(mw))
                w.x[static_cast<Eigen::Index>(a)] = c;
            else
                w.z[static_cast<Eigen::Index>(a) - mw] = c;
        }
        const Vec grad = intrinsic_gradient(g, phi, w);
        patch.weights[idx] = std::sqrt(1.0 + grad.squaredNorm()) * cell;
        patch.points[idx] = graph_map(g, phi, w);
        patch.params[idx] = std::move(w);
    }
    return patch;
}

DecayCertificate certify_decay(const GroupSpec& g, const GraphFunction& phi, double theta, double gamma,
                               HomNorm nrm, std::size_t n_samples, std::uint64_t seed) {
    if (n_samples == 0) throw InputError("certify_decay: n_samples must be positive");
    const int mw = g.m() - 1, n2 = g.n2();
    DecayCertificate c;
    for (std::size_t i = 0; i < n_samples; ++i) {
        auto rng = stream_rng(seed, i);
        WPoint w{Vec(mw), Vec(n2)};
        for (int a = 0; a < mw; ++a) w.x[a] = uniform(rng, -1.0, 1.0);
        for (int a = 0; a < n2; ++a) w.z[a] = uniform(rng, -1.0, 1.0);
        const double r = std::pow(10.0, uniform(rng, 0.0, 3.0));
        if (!scaled_direction(nrm, w, r)) continue;
        const double vr = std::abs(phi(w)) / std::pow(r, 1.0 - theta);
        const double gr = intrinsic_gradient(g, phi, w).norm() * std::pow(r, gamma);
        c.value_ratio_sup = std::max(c.value_ratio_sup, vr);
        c.grad_ratio_sup = std::max(c.grad_ratio_sup, gr);
        if (r <= 10.0) {
            c.value_ratio_inner = std::max(c.value_ratio_inner, vr);
            c.grad_ratio_inner = std::max(c.grad_ratio_inner, gr);
        } else if (r >= 100.0) {
            c.value_ratio_outer = std::max(c.value_ratio_outer, vr);
            c.grad_ratio_outer = std::max(c.grad_ratio_outer, gr);
        }
    }
    c.bounded = std::isfinite(c.value_ratio_sup) && std::isfinite(c.grad_ratio_sup) &&
                c.value_ratio_outer <= c.value_ratio_inner && c.grad_ratio_outer <= c.grad_ratio_inner;
    return c;
}

}  // namespace carnot
