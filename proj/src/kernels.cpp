#include "carnot/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "carnot/random.hpp"
#include "search.hpp"

namespace carnot {

std::string to_string(Symmetry s) {
    switch (s) {
        case Symmetry::DilationAntisymmetric: return "dilation-antisymmetric";
        case Symmetry::Antisymmetric: return "antisymmetric";
        case Symmetry::None: return "none";
    }
    return "none";
}

Kernel::Kernel(std::string name, int d_out, double degree, Symmetry symmetry, std::shared_ptr<const GroupSpec> spec,
               HomNorm nrm, EvalFn fn)
    : name_(std::move(name)),
      d_out_(d_out),
      degree_(degree),
      symmetry_(symmetry),
      spec_(std::move(spec)),
      norm_(nrm),
      fn_(std::move(fn)) {
    if (d_out_ < 1) throw InputError("kernel needs at least one component");
    if (!spec_) throw InputError("kernel needs a group spec");
}

Eigen::VectorXd Kernel::operator()(const Point& p) const {
    Eigen::VectorXd out(d_out_);
    eval(p, std::span<double>(out.data(), static_cast<std::size_t>(d_out_)));
    return out;
}

void Kernel::eval(const Point& p, std::span<double> out) const {
    spec_->check_point(p);
    if (out.size() != static_cast<std::size_t>(d_out_)) throw InputError("kernel output span has wrong size");
    if (p.is_identity()) throw DomainError("kernel '" + name_ + "' evaluated at the identity");
    fn_(p, out.data());
}

namespace {

void require_q3(const GroupSpec& g, const char* what) {
    if (g.homogeneous_dim() < 3) throw InputError(std::string(what) + " needs homogeneous dimension Q >= 3");
}

}  // namespace

Kernel gauge_riesz(const GroupSpec& g, HomNorm nrm) {
    require_q3(g, "gauge_riesz");
    auto spec = std::make_shared<const GroupSpec>(g);
    const int m = g.m(), n2 = g.n2();
    const double q = g.homogeneous_dim();
    auto fn = [spec, m, n2, q](const Point& p, double* out) {
        const double x2 = p.x.squaredNorm();
        const double z2 = n2 ? p.z.squaredNorm() : 0.0;
        const double n4 = x2 * x2 + z2;
        const double n = std::sqrt(std::sqrt(n4));
        const double n3 = n * n * n;
        // (2 - Q) N^{1-Q} / N^3 collects the common factors of dN/dx and dN/dz
        const double c = (2.0 - q) * std::pow(n, 1.0 - q) / n3;
        for (int l = 0; l < m; ++l) {
            double xn = p.x[l] * x2;  // N^3 dN/dx_l
            for (int k = 0; k < n2; ++k) {
                double coef = 0.0;
                for (int i = 0; i < m; ++i) coef += spec->bracket(k, i, l) * p.x[i];
                xn += 0.5 * coef * 0.5 * p.z[k];  // 1/2 (sum_i B x_i) * N^3 dN/dz_k
            }
            out[l] = c * xn;
        }
    };
    return Kernel("gauge_riesz", m, 1.0 - q, Symmetry::DilationAntisymmetric, spec, nrm, std::move(fn));
}

Kernel pseudo_riesz(const GroupSpec& g, HomNorm nrm) {
    require_q3(g, "pseudo_riesz");
    auto spec = std::make_shared<const GroupSpec>(g);
    const int m = g.m(), n2 = g.n2();
    const double q = g.homogeneous_dim();
    auto fn = [nrm, m, n2, q](const Point& p, double* out) {
        const double n = nrm(p);
        const double a = std::pow(n, -q);
        const double b = a / n;
        for (int i = 0; i < m; ++i) out[i] = p.x[i] * a;
        for (int k = 0; k < n2; ++k) out[m + k] = p.z[k] * b;
    };
    return Kernel("pseudo_riesz", m + n2, 1.0 - q, Symmetry::Antisymmetric, spec, nrm, std::move(fn));
}

Kernel control_kernel(const GroupSpec& g, HomNorm nrm) {
    auto spec = std::make_shared<const GroupSpec>(g);
    const double q = g.homogeneous_dim();
    auto fn = [nrm, q](const Point& p, double* out) { out[0] = std::pow(nrm(p), 1.0 - q); };
    return Kernel("control", 1, 1.0 - q, Symmetry::None, spec, nrm, std::move(fn));
}

Kernel adjoint(const Kernel& k) {
    // inv commutes with delta_{-1}, so both symmetry classes are preserved
    auto inner = k;
    auto fn = [inner](const Point& p, double* out) {
        Point pi{-p.x, -p.z};
        inner.eval_unchecked(pi, out);
    };
    std::string name = k.name().starts_with("adjoint(") && k.name().ends_with(")")
                           ? k.name().substr(8, k.name().size() - 9)
                           : "adjoint(" + k.name() + ")";
    return Kernel(name, k.d_out(), k.degree(), k.symmetry(), k.spec_ptr(), k.norm(), std::move(fn));
}

Kernel make_kernel(const std::string& name, const GroupSpec& g, HomNorm nrm) {
    if (name == "gauge_riesz") return gauge_riesz(g, nrm);
    if (name == "pseudo_riesz") return pseudo_riesz(g, nrm);
    if (name == "control") return control_kernel(g, nrm);
    throw InputError("unknown kernel '" + name + "' (expected gauge_riesz, pseudo_riesz or control)");
}

namespace {

Point raw_to_point(const Eigen::VectorXd& y, int m, int n2) {
    Point p = Point::identity(m, n2);
    for (int i = 0; i < m; ++i) p.x[i] = y[i];
    for (int k = 0; k < n2; ++k) p.z[k] = y[m + k];
    return p;
}

// delta_{1/||p||} p; returns false for the identity.
bool to_sphere(const GroupSpec& g, const HomNorm& nrm, Point& p) {
    const double n = nrm(p);
    if (!(n > 0.0)) return false;
    p = dilate(g, 1.0 / n, p);
    return true;
}

}  // namespace

CZEstimate estimate_cz(const Kernel& k, const CZOptions& opts) {
    if (opts.n_samples == 0) throw InputError("estimate_cz: n_samples must be positive");
    if (!(opts.kappa > 0.0 && opts.kappa < 1.0)) throw InputError("estimate_cz: kappa must lie in (0, 1)");
    if (!(opts.beta > 0.0 && opts.beta <= 1.0)) throw InputError("estimate_cz: beta must lie in (0, 1]");
    if (!(opts.cloud_scale > 0.0)) throw InputError("estimate_cz: cloud_scale must be positive");

    const GroupSpec& g = k.spec();
    const HomNorm nrm = k.norm();
    const int m = g.m(), n2 = g.n2(), ntop = g.topological_dim();
    const double q = g.homogeneous_dim();
    const double t = opts.cloud_scale;
    const double beta = opts.beta, kappa = opts.kappa;
    constexpr double kMinStepFraction = 1e-3;

    const detail::Objective growth = [&](const Eigen::VectorXd& y) {
        Point p = raw_to_point(y, m, n2);
        if (!to_sphere(g, nrm, p)) return 0.0;
        p = dilate(g, t, p);
        return k(p).norm() * std::pow(nrm(p), q - 1.0);
    };
    const detail::Objective holder = [&](const Eigen::VectorXd& y) {
        Point p1 = raw_to_point(y.head(ntop), m, n2);
        Point u = raw_to_point(y.segment(ntop, ntop), m, n2);
        if (!to_sphere(g, nrm, p1) || !to_sphere(g, nrm, u)) return 0.0;
        const double s = kappa * std::clamp(y[2 * ntop], kMinStepFraction, 1.0);
        Point p2 = mul(g, p1, dilate(g, s, u));
        p1 = dilate(g, t, p1);
        p2 = dilate(g, t, p2);
        const double d = dist(g, nrm, p1, p2);
        const double n1 = nrm(p1);
        if (!(d > 0.0) || d > kappa * n1 * (1.0 + 1e-12) || p2.is_identity()) return 0.0;
        return (k(p1) - k(p2)).norm() * std::pow(n1, q - 1.0 + beta) / std::pow(d, beta);
    };

    const std::size_t n = opts.n_samples;
    std::vector<Eigen::VectorXd> gy(n), hy(n);
    std::vector<double> gv(n), hv(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
        auto rng = stream_rng(opts.seed, static_cast<std::uint64_t>(i));
        Eigen::VectorXd a(ntop), b(2 * ntop + 1);
        for (int c = 0; c < ntop; ++c) a[c] = uniform(rng, -1.0, 1.0);
        for (int c = 0; c < 2 * ntop; ++c) b[c] = uniform(rng, -1.0, 1.0);
        b[2 * ntop] = uniform(rng, 0.0, 1.0);
        gv[i] = growth(a);
        hv[i] = holder(b);
        gy[i] = std::move(a);
        hy[i] = std::move(b);
    }

    CZEstimate est;
    est.holder_beta = beta;
    est.kappa = kappa;
    est.sample_count = n;
    est.growth_const = *std::max_element(gv.begin(), gv.end());
    est.holder_const = *std::max_element(hv.begin(), hv.end());
    if (opts.refine) {
        for (std::size_t i : detail::top_indices(gv, 4))
            est.growth_const = std::max(est.growth_const, detail::pattern_search(growth, gy[i], 0.05, 1e-7, 4000));
        for (std::size_t i : detail::top_indices(hv, 4))
            est.holder_const = std::max(est.holder_const, detail::pattern_search(holder, hy[i], 0.05, 1e-7, 6000));
    }
    return est;
}

namespace {

template <typename Transform>
double max_residual(const Kernel& k, std::size_t n_samples, std::uint64_t seed, Transform&& tr) {
    const GroupSpec& g = k.spec();
    double worst = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        auto rng = stream_rng(seed, i);
        Point p = random_point(rng, g.m(), g.n2(), -1.0, 1.0);
        if (p.is_identity()) continue;
        const Eigen::VectorXd kp = k(p);
        const double r = tr(p, kp);
        worst = std::max(worst, r);
    }
    return worst;
}

}  // namespace

double check_dilation_antisymmetry(const Kernel& k, std::size_t n_samples, std::uint64_t seed) {
    const GroupSpec& g = k.spec();
    return max_residual(k, n_samples, seed, [&](const Point& p, const Eigen::VectorXd& kp) {
        return (k(dilate(g, -1.0, p)) + kp).norm() / (kp.norm() + 1e-300);
    });
}

double check_antisymmetry(const Kernel& k, std::size_t n_samples, std::uint64_t seed) {
    const GroupSpec& g = k.spec();
    return max_residual(k, n_samples, seed, [&](const Point& p, const Eigen::VectorXd& kp) {
        return (k(inv(g, p)) + kp).norm() / (kp.norm() + 1e-300);
    });
}

double check_homogeneity(const Kernel& k, std::span<const double> ts, std::size_t n_samples, std::uint64_t seed) {
    const GroupSpec& g = k.spec();
    return max_residual(k, n_samples, seed, [&](const Point& p, const Eigen::VectorXd& kp) {
        double worst = 0.0;
        for (double t : ts) {
            const Eigen::VectorXd expect = std::pow(t, k.degree()) * kp;
            worst = std::max(worst, (k(dilate(g, t, p)) - expect).norm() / expect.norm());
        }
        return worst;
    });
}

}  // namespace carnot
