#include "carnot/harness.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <map>

#include <nlohmann/json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "carnot/kernels.hpp"
#include "carnot/paths.hpp"
#include "carnot/random.hpp"
#include "carnot/report.hpp"
#include "carnot/sio.hpp"
#include "carnot/stats.hpp"

#ifndef CARNOT_VERSION
#define CARNOT_VERSION "0.0.0"
#endif

namespace carnot {

using nlohmann::ordered_json;

std::string version() { return CARNOT_VERSION; }

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"group-check", "kernel-check", "ab-check", "holder-fit",
                                                   "norms-sweep", "path",         "scan"};
    return names;
}

namespace {

const std::vector<std::string> kKnownKeys = {
    "group.preset", "group.n",      "group.k",         "group.m",        "group.n2",       "group.bracket",
    "norm",         "kernel.name",  "check.samples",   "check.range",    "check.tol",      "cz.samples",
    "cz.beta",      "cz.kappa",     "graph.family",    "graph.A",        "graph.sigma",    "graph.theta",
    "graph.gamma",  "graph.center", "graph.slope",     "graph.offset",   "graph.normal",   "patch.box",
    "patch.res",    "sweep.top",    "sweep.rungs",     "sweep.epsilons", "sweep.tol",      "sweep.max_iter",
    "ab.r",         "ab.k",         "ab.normals",      "ab.shells_per_dyad", "ab.pts_per_axis", "holder.base",
    "holder.n_radii", "holder.r_min", "holder.r_max",  "holder.directions", "holder.min_slope", "paths.pairs",
    "paths.radius", "path.from",    "path.to",         "output.dir",     "seed",           "threads"};

Vec to_vec(const std::vector<double>& v) {
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i];
    return out;
}

int positive_int(const Config& cfg, const std::string& key, std::int64_t fallback, std::int64_t hi = 1'000'000'000) {
    const std::int64_t v = cfg.integer(key, fallback);
    if (v < 1 || v > hi) cfg.fail(key, "must lie in [1, " + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

double positive_real(const Config& cfg, const std::string& key, double fallback) {
    const double v = cfg.real(key, fallback);
    if (!(v > 0.0)) cfg.fail(key, "must be positive");
    return v;
}

HomNorm norm_from(const Config& cfg) {
    try {
        return HomNorm::parse(cfg.str("norm", "koranyi"));
    } catch (const InputError& e) {
        cfg.fail("norm", e.what());
    }
}

Point point_from(const Config& cfg, const std::string& key, const GroupSpec& g) {
    const std::vector<double> v = cfg.reals(key);
    if (static_cast<int>(v.size()) != g.topological_dim())
        cfg.fail(key, "expected " + std::to_string(g.topological_dim()) + " coordinates (x then z)");
    Point p = Point::identity(g.m(), g.n2());
    for (int i = 0; i < g.m(); ++i) p.x[i] = v[static_cast<std::size_t>(i)];
    for (int k = 0; k < g.n2(); ++k) p.z[k] = v[static_cast<std::size_t>(g.m() + k)];
    return p;
}

struct Output {
    CsvWriter csv{{}};
    ordered_json results = ordered_json::object();
    std::vector<std::string> failures;
};

ordered_json config_echo(const Config& cfg) {
    ordered_json echo = ordered_json::object();
    for (const auto& [k, e] : cfg.entries()) echo[k] = e.value;
    return echo;
}

// ---- subcommands ----

Output group_check(const Config& cfg, const GroupSpec& g, std::uint64_t seed) {
    const int n = positive_int(cfg, "check.samples", 1000);
    const double range = positive_real(cfg, "check.range", 1.0);
    const double tol = positive_real(cfg, "check.tol", 1e-11);
    const HomNorm kor{NormKind::Koranyi}, box{NormKind::Box};

    Output out;
    out.csv = CsvWriter({"sample", "associativity", "inverse", "identity", "dilation", "homogeneity",
                         "left_inv_koranyi", "left_inv_box"});
    std::array<double, 7> worst{};
    for (int s = 0; s < n; ++s) {
        auto rng = stream_rng(seed, static_cast<std::uint64_t>(s));
        const Point p = random_point(rng, g.m(), g.n2(), -range, range);
        const Point q = random_point(rng, g.m(), g.n2(), -range, range);
        const Point r = random_point(rng, g.m(), g.n2(), -range, range);
        const double t = uniform(rng, -3.0, 3.0);
        const Point e = Point::identity(g.m(), g.n2());
        std::array<double, 7> v{};
        v[0] = coord_distance(mul(g, mul(g, p, q), r), mul(g, p, mul(g, q, r)));
        v[1] = std::max(coord_distance(mul(g, p, inv(g, p)), e), coord_distance(mul(g, inv(g, p), p), e));
        v[2] = std::max(coord_distance(mul(g, p, e), p), coord_distance(mul(g, e, p), p));
        v[3] = coord_distance(dilate(g, t, mul(g, p, q)), mul(g, dilate(g, t, p), dilate(g, t, q)));
        v[4] = std::max(std::abs(kor(dilate(g, t, p)) - std::abs(t) * kor(p)) / (1.0 + kor(p)),
                        std::abs(box(dilate(g, t, p)) - std::abs(t) * box(p)) / (1.0 + box(p)));
        v[5] = std::abs(dist(g, kor, mul(g, r, p), mul(g, r, q)) - dist(g, kor, p, q));
        v[6] = std::abs(dist(g, box, mul(g, r, p), mul(g, r, q)) - dist(g, box, p, q));
        out.csv.cell(s);
        for (std::size_t c = 0; c < v.size(); ++c) {
            out.csv.cell(v[c]);
            worst[c] = std::max(worst[c], v[c]);
        }
        out.csv.end_row();
    }
    const char* names[] = {"associativity", "inverse", "identity", "dilation", "homogeneity", "left_inv_koranyi",
                           "left_inv_box"};
    for (std::size_t c = 0; c < worst.size(); ++c) {
        out.results[std::string("max_") + names[c]] = worst[c];
        if (!(worst[c] <= tol)) out.failures.push_back(std::string(names[c]) + " residual above tolerance");
    }
    out.results["tolerance"] = tol;
    out.results["samples"] = n;
    return out;
}

Kernel kernel_from(const Config& cfg, const GroupSpec& g) {
    const HomNorm nrm = norm_from(cfg);
    try {
        return make_kernel(cfg.str("kernel.name", "gauge_riesz"), g, nrm);
    } catch (const InputError& e) {
        cfg.fail("kernel.name", e.what());
    }
}

Output kernel_check(const Config& cfg, const GroupSpec& g, std::uint64_t seed) {
    const Kernel k = kernel_from(cfg, g);
    const std::size_t n = static_cast<std::size_t>(positive_int(cfg, "check.samples", 1000));
    CZOptions cz;
    cz.n_samples = static_cast<std::size_t>(positive_int(cfg, "cz.samples", 4096));
    cz.beta = cfg.real("cz.beta", 1.0);
    cz.kappa = cfg.real("cz.kappa", 0.1);
    cz.seed = seed;

    const std::array<double, 6> ts = {0.1, 0.5, 0.75, 2.0, 3.0, 10.0};
    const double homog = check_homogeneity(k, ts, n, seed);
    const double dil = check_dilation_antisymmetry(k, n, seed);
    const double anti = check_antisymmetry(k, n, seed);
    const CZEstimate e1 = estimate_cz(k, cz);
    CZOptions cz2 = cz;
    cz2.n_samples *= 2;
    const CZEstimate e2 = estimate_cz(k, cz2);
    CZOptions half = cz;
    half.beta = cz.beta / 2.0;
    const CZEstimate adj = estimate_cz(adjoint(k), half);

    Output out;
    out.csv = CsvWriter({"metric", "value"});
    const std::vector<std::pair<std::string, double>> rows = {
        {"homogeneity", homog},
        {"dilation_antisymmetry", dil},
        {"antisymmetry", anti},
        {"growth_const", e1.growth_const},
        {"holder_const", e1.holder_const},
        {"growth_const_doubled", e2.growth_const},
        {"holder_const_doubled", e2.holder_const},
        {"adjoint_holder_half_beta", adj.holder_const},
    };
    for (const auto& [m, v] : rows) {
        out.csv.cell(m).cell(v).end_row();
        out.results[m] = v;
    }
    out.results["kernel"] = k.name();
    out.results["symmetry"] = to_string(k.symmetry());
    out.results["degree"] = k.degree();

    if (!(homog <= 1e-11)) out.failures.push_back("homogeneity residual above 1e-11");
    if (k.symmetry() == Symmetry::DilationAntisymmetric && !(dil <= 1e-12))
        out.failures.push_back("dilation antisymmetry residual above 1e-12");
    if (k.symmetry() == Symmetry::Antisymmetric && !(anti <= 1e-13))
        out.failures.push_back("antisymmetry residual above 1e-13");
    const auto stable = [](double a, double b) { return std::isfinite(a) && std::isfinite(b) && std::abs(a - b) <= 0.05 * std::max(a, b); };
    if (!stable(e1.growth_const, e2.growth_const)) out.failures.push_back("growth constant unstable under doubling");
    if (!stable(e1.holder_const, e2.holder_const)) out.failures.push_back("Holder constant unstable under doubling");
    if (!std::isfinite(adj.holder_const)) out.failures.push_back("adjoint Holder constant not finite");
    return out;
}

std::vector<VerticalHyperplane> hyperplanes_from(const Config& cfg, const GroupSpec& g) {
    std::vector<VerticalHyperplane> hs;
    const auto normals = cfg.tuples("ab.normals");
    if (normals.empty()) {
        for (int i = 0; i < g.m(); ++i) {
            Vec e = Vec::Zero(g.m());
            e[i] = 1.0;
            hs.emplace_back(e);
        }
        hs.emplace_back(Vec::Ones(g.m()));
        return hs;
    }
    for (const auto& t : normals) {
        if (static_cast<int>(t.size()) != g.m()) cfg.fail("ab.normals", "each normal needs m = " + std::to_string(g.m()) + " entries");
        try {
            hs.emplace_back(to_vec(t));
        } catch (const InputError& e) {
            cfg.fail("ab.normals", e.what());
        }
    }
    return hs;
}

Output ab_check(const Config& cfg, const GroupSpec& g) {
    const Kernel k = kernel_from(cfg, g);
    const double r = positive_real(cfg, "ab.r", 1.0);
    const int kmax = positive_int(cfg, "ab.k", 6, 30);
    ABOptions o;
    o.shells_per_dyad = positive_int(cfg, "ab.shells_per_dyad", o.shells_per_dyad, 64);
    o.pts_per_axis = positive_int(cfg, "ab.pts_per_axis", default_pts_per_axis(g.m() - 1 + g.n2()), 4096);
    if (o.pts_per_axis % 2) cfg.fail("ab.pts_per_axis", "must be even");
    const auto hs = hyperplanes_from(cfg, g);
    const ABStability st = ab_stability(k, hs, r, kmax, o);

    Output out;
    out.csv = CsvWriter({"hyperplane", "r", "R", "component", "value"});
    for (const ABEntry& e : st.base.entries)
        for (Eigen::Index c = 0; c < e.value.size(); ++c)
            out.csv.cell(static_cast<std::uint64_t>(e.hyperplane)).cell(e.r).cell(e.big_r).cell(static_cast<int>(c + 1)).cell(e.value[c]).end_row();

    // |value| against log2(R / r), worst case over hyperplanes and components
    std::vector<double> ks, vs;
    for (int j = 1; j <= kmax; ++j) {
        double worst = 0.0;
        for (const ABEntry& e : st.base.entries)
            if (e.big_r == std::ldexp(r, j)) worst = std::max(worst, e.value.cwiseAbs().maxCoeff());
        ks.push_back(j);
        vs.push_back(worst);
    }
    out.results["kernel"] = k.name();
    out.results["hyperplanes"] = hs.size();
    out.results["sup"] = st.base.sup;
    out.results["sup_doubled"] = st.doubled.sup;
    out.results["stable"] = st.stable;
    if (kmax >= 2) {
        const LinearFit f = linear_fit(ks, vs);
        out.results["growth_slope"] = f.slope;
        out.results["growth_r2"] = f.r2;
    }
    out.results["bump_inner"] = st.base.bump_inner;
    out.results["bump_outer"] = st.base.bump_outer;
    if (k.symmetry() != Symmetry::None && !(st.base.sup <= 1e-10))
        out.failures.push_back("cancelling kernel has annular integral above 1e-10");
    return out;
}

struct GraphSetup {
    AdaptedSpec adapted;
    GraphFunction phi;
};

GraphSetup graph_setup(const Config& cfg, const GroupSpec& g) {
    Vec normal = Vec::Zero(g.m());
    normal[0] = 1.0;
    if (cfg.has("graph.normal")) {
        const auto v = cfg.reals("graph.normal");
        if (static_cast<int>(v.size()) != g.m()) cfg.fail("graph.normal", "needs m entries");
        normal = to_vec(v);
    }
    AdaptedSpec a = [&] {
        try {
            return adapt_basis(g, normal);
        } catch (const InputError& e) {
            cfg.fail("graph.normal", e.what());
        }
    }();
    GraphFunction phi = graph_from_config(cfg, a.spec);
    return {std::move(a), std::move(phi)};
}

Output holder_fit_cmd(const Config& cfg, const GroupSpec& g, std::uint64_t seed) {
    const GraphSetup gs = graph_setup(cfg, g);
    const GroupSpec& ga = gs.adapted.spec;
    const int dim = ga.m() - 1 + ga.n2();
    WPoint base = WPoint::zero(ga);
    if (cfg.has("holder.base")) {
        const auto v = cfg.reals("holder.base");
        if (static_cast<int>(v.size()) != dim) cfg.fail("holder.base", "needs " + std::to_string(dim) + " entries");
        for (int i = 0; i < ga.m() - 1; ++i) base.x[i] = v[static_cast<std::size_t>(i)];
        for (int k = 0; k < ga.n2(); ++k) base.z[k] = v[static_cast<std::size_t>(ga.m() - 1 + k)];
    }
    HolderFitOptions o;
    o.n_radii = static_cast<std::size_t>(positive_int(cfg, "holder.n_radii", 40));
    o.r_min = positive_real(cfg, "holder.r_min", o.r_min);
    o.r_max = positive_real(cfg, "holder.r_max", o.r_max);
    o.n_directions = static_cast<std::size_t>(positive_int(cfg, "holder.directions", 16));
    o.norm = norm_from(cfg);
    o.seed = seed;
    const HolderFit fit = holder_fit(ga, gs.phi, base, o);

    Output out;
    out.csv = CsvWriter({"radius", "residual"});
    for (std::size_t i = 0; i < fit.radii.size(); ++i) out.csv.cell(fit.radii[i]).cell(fit.residuals[i]).end_row();
    out.results["family"] = gs.phi.family();
    out.results["slope"] = fit.slope;
    out.results["intercept"] = fit.intercept;
    out.results["max_residual"] = fit.max_residual;
    if (gs.phi.is_affine()) {
        if (!(fit.max_residual <= 1e-12)) out.failures.push_back("affine graph residual above 1e-12");
    } else if (!std::isfinite(fit.slope)) {
        out.failures.push_back("residual slope is not finite");
    }
    if (cfg.has("holder.min_slope")) {
        const double min_slope = cfg.real("holder.min_slope", 0.0);
        out.results["min_slope"] = min_slope;
        if (!(fit.slope >= min_slope)) out.failures.push_back("residual slope below holder.min_slope");
    }
    return out;
}

Output norms_sweep(const Config& cfg, const GroupSpec& g) {
    const GraphSetup gs = graph_setup(cfg, g);
    const GroupSpec& ga = gs.adapted.spec;
    const Kernel k = kernel_from(cfg, ga);
    const std::size_t dim = static_cast<std::size_t>(ga.m() - 1 + ga.n2());

    Box box;
    const auto bv = cfg.reals("patch.box");
    if (bv.empty()) {
        box.intervals.assign(dim, {-1.0, 1.0});
    } else if (bv.size() == 2 || bv.size() == 2 * dim) {
        for (std::size_t a = 0; a < dim; ++a) {
            const std::size_t o = bv.size() == 2 ? 0 : 2 * a;
            box.intervals.emplace_back(bv[o], bv[o + 1]);
        }
    } else {
        cfg.fail("patch.box", "needs 2 or " + std::to_string(2 * dim) + " numbers (lo, hi per axis)");
    }
    std::vector<int> res;
    const auto rv = cfg.reals("patch.res");
    if (rv.empty()) res.assign(dim, 20);
    for (double v : rv) {
        if (v != std::floor(v) || v < 2 || v > 1e7) cfg.fail("patch.res", "entries must be integers >= 2");
        res.push_back(static_cast<int>(v));
    }
    if (res.size() == 1) res.assign(dim, res.front());
    if (res.size() != dim) cfg.fail("patch.res", "needs 1 or " + std::to_string(dim) + " entries");

    const GraphPatch patch = [&] {
        try {
            return build_patch(ga, gs.phi, box, res);
        } catch (const InputError& e) {
            cfg.fail(bv.empty() ? "patch.res" : "patch.box", e.what());
        }
    }();

    std::vector<double> ladder = cfg.reals("sweep.epsilons");
    if (ladder.empty()) {
        const double top = cfg.has("sweep.top") ? positive_real(cfg, "sweep.top", 1.0) : patch_diameter(k, patch.points);
        ladder = dyadic_ladder(top, static_cast<std::size_t>(positive_int(cfg, "sweep.rungs", 8, 60)));
    }
    try {
        validate_ladder(ladder, patch.grid_spacing());
    } catch (const InputError& e) {
        cfg.fail(cfg.has("sweep.epsilons") ? "sweep.epsilons" : "sweep.rungs", e.what());
    }
    SweepOptions so;
    so.tol = positive_real(cfg, "sweep.tol", 1e-6);
    so.max_iter = static_cast<std::size_t>(positive_int(cfg, "sweep.max_iter", 20000));
    const SweepResult sw = epsilon_sweep(k, patch, ladder, so);

    Output out;
    out.csv = CsvWriter({"epsilon", "norm", "iters", "residual"});
    bool all_converged = true;
    for (std::size_t i = 0; i < sw.epsilons.size(); ++i) {
        out.csv.cell(sw.epsilons[i]).cell(sw.norms[i]).cell(static_cast<std::uint64_t>(sw.iters[i])).cell(sw.residuals[i]).end_row();
        all_converged = all_converged && sw.converged[i];
        if (!std::isfinite(sw.norms[i])) out.failures.push_back("non-finite operator norm");
    }
    out.results["kernel"] = sw.kernel;
    out.results["family"] = sw.family;
    out.results["points"] = sw.n_points;
    out.results["diameter"] = sw.diameter;
    out.results["grid_spacing"] = sw.grid_spacing;
    out.results["total_mass"] = patch.total_mass();
    out.results["all_converged"] = all_converged;
    return out;
}

Output path_cmd(const Config& cfg, const GroupSpec& g) {
    if (!cfg.has("path.from") || !cfg.has("path.to")) throw InputError("path needs path.from and path.to");
    const HomNorm nrm = norm_from(cfg);
    const Point p1 = point_from(cfg, "path.from", g), p2 = point_from(cfg, "path.to", g);
    const HorizontalPath path = connect(g, p1, p2);

    std::vector<std::string> header = {"segment"};
    for (int i = 1; i <= g.m(); ++i) header.push_back("start_x" + std::to_string(i));
    for (int k = 1; k <= g.n2(); ++k) header.push_back("start_z" + std::to_string(k));
    for (int i = 1; i <= g.m(); ++i) header.push_back("dir_" + std::to_string(i));
    header.push_back("duration");
    Output out;
    out.csv = CsvWriter(header);
    for (std::size_t s = 0; s < path.size(); ++s) {
        const Segment& seg = path.segments[s];
        out.csv.cell(static_cast<std::uint64_t>(s));
        for (int i = 0; i < g.m(); ++i) out.csv.cell(seg.start.x[i]);
        for (int k = 0; k < g.n2(); ++k) out.csv.cell(seg.start.z[k]);
        for (int i = 0; i < g.m(); ++i) out.csv.cell(seg.direction[i]);
        out.csv.cell(seg.duration).end_row();
    }
    const double d = dist(g, nrm, p1, p2);
    const double err = endpoint_error(g, nrm, path, p1, p2);
    const std::size_t bound = 1 + 2 * static_cast<std::size_t>(g.m()) * static_cast<std::size_t>(g.m() - 1);
    out.results["segments"] = path.size();
    out.results["length"] = path.length();
    out.results["distance"] = d;
    out.results["ratio"] = d > 0.0 ? path.length() / d : 0.0;
    out.results["endpoint_error"] = err;
    if (!(err <= 1e-12)) out.failures.push_back("path endpoint misses the target");
    if (path.size() > bound) out.failures.push_back("segment count above 1 + 2m(m-1)");
    return out;
}

Output scan_cmd(const Config& cfg, const GroupSpec& g, std::uint64_t seed) {
    const HomNorm nrm = norm_from(cfg);
    const std::size_t pairs = static_cast<std::size_t>(positive_int(cfg, "paths.pairs", 1000));
    const double radius = positive_real(cfg, "paths.radius", 1.0);
    const ScanResult s = quasiconvexity_scan(g, nrm, pairs, seed, radius);
    Output out;
    out.csv = CsvWriter({"pair", "ratio", "segments"});
    for (std::size_t i = 0; i < pairs; ++i)
        out.csv.cell(static_cast<std::uint64_t>(i)).cell(s.ratios[i]).cell(static_cast<std::uint64_t>(s.counts[i])).end_row();
    const std::size_t bound = 1 + 2 * static_cast<std::size_t>(g.m()) * static_cast<std::size_t>(g.m() - 1);
    out.results["c_emp"] = s.c_emp;
    out.results["n_max"] = s.n_max;
    out.results["segment_bound"] = bound;
    out.results["max_endpoint_error"] = s.max_endpoint_error;
    if (!(s.max_endpoint_error <= 1e-12)) out.failures.push_back("path endpoint misses the target");
    if (s.n_max > bound) out.failures.push_back("segment count above 1 + 2m(m-1)");
    return out;
}

}  // namespace

GroupSpec group_from_config(const Config& cfg) {
    const bool custom = cfg.has("group.bracket");
    const std::string preset = cfg.str("group.preset", custom ? "custom" : "heisenberg");
    try {
        if (preset == "heisenberg") return GroupSpec::heisenberg(positive_int(cfg, "group.n", 1, 16));
        if (preset == "free") return GroupSpec::free_step2(positive_int(cfg, "group.k", 3, 8));
        if (preset == "abelian") return GroupSpec::abelian(positive_int(cfg, "group.m", 2, kMaxDim));
    } catch (const ConfigError&) {
        throw;
    } catch (const InputError& e) {
        cfg.fail("group.preset", e.what());
    }
    if (preset != "custom") cfg.fail("group.preset", "unknown preset '" + preset + "' (heisenberg, free, abelian, custom)");

    if (!cfg.has("group.m") || !cfg.has("group.n2")) throw InputError("custom group needs group.m and group.n2");
    const int m = positive_int(cfg, "group.m", 1, kMaxDim);
    const std::int64_t n2 = cfg.integer("group.n2", 0);
    if (n2 < 0 || n2 > kMaxDim) cfg.fail("group.n2", "must lie in [0, " + std::to_string(kMaxDim) + "]");
    std::vector<double> b(static_cast<std::size_t>(n2) * m * m, 0.0);
    std::vector<bool> set(b.size(), false);
    const auto idx = [&](int l, int i, int j) { return (static_cast<std::size_t>(l) * m + i) * m + j; };
    for (const auto& t : cfg.tuples("group.bracket")) {
        if (t.size() != 4) cfg.fail("group.bracket", "entries are (l, i, j, value)");
        for (int c = 0; c < 3; ++c)
            if (t[c] != std::floor(t[c])) cfg.fail("group.bracket", "indices must be integers");
        const int l = static_cast<int>(t[0]) - 1, i = static_cast<int>(t[1]) - 1, j = static_cast<int>(t[2]) - 1;
        if (l < 0 || l >= n2 || i < 0 || i >= m || j < 0 || j >= m) cfg.fail("group.bracket", "index out of range");
        if (i == j) {
            if (t[3] != 0.0) cfg.fail("group.bracket", "diagonal entries must be zero");
            continue;
        }
        for (const auto& [a, c, v] : {std::tuple{i, j, t[3]}, std::tuple{j, i, -t[3]}}) {
            const std::size_t k = idx(l, a, c);
            if (set[k] && b[k] != v) cfg.fail("group.bracket", "conflicting entries for the same bracket");
            b[k] = v;
            set[k] = true;
        }
    }
    return GroupSpec(m, static_cast<int>(n2), std::move(b), "custom");
}

GraphFunction graph_from_config(const Config& cfg, const GroupSpec& g) {
    const std::string family = cfg.str("graph.family", "gauss");
    const int mw = g.m() - 1, n2 = g.n2();
    try {
        if (family == "gauss") {
            WPoint c = WPoint::zero(g);
            if (cfg.has("graph.center")) {
                const auto v = cfg.reals("graph.center");
                if (static_cast<int>(v.size()) != mw + n2) cfg.fail("graph.center", "needs one entry per W-axis");
                for (int i = 0; i < mw; ++i) c.x[i] = v[static_cast<std::size_t>(i)];
                for (int k = 0; k < n2; ++k) c.z[k] = v[static_cast<std::size_t>(mw + k)];
            }
            return GraphFunction::gauss_bump(cfg.real("graph.A", 1.0), cfg.real("graph.sigma", 1.0), c);
        }
        if (family == "power")
            return GraphFunction::power_decay(cfg.real("graph.A", 1.0), cfg.real("graph.sigma", 1.0),
                                              cfg.real("graph.theta", 0.5), cfg.real("graph.gamma", 1.0));
        if (family == "affine") {
            Vec c = Vec::Zero(mw);
            if (cfg.has("graph.slope")) {
                const auto v = cfg.reals("graph.slope");
                if (static_cast<int>(v.size()) != mw) cfg.fail("graph.slope", "needs m - 1 entries");
                c = to_vec(v);
            }
            return GraphFunction::affine(c, cfg.real("graph.offset", 0.0), n2);
        }
        if (family == "zero") return GraphFunction::zero(g);
    } catch (const ConfigError&) {
        throw;
    } catch (const InputError& e) {
        cfg.fail("graph.family", e.what());
    }
    cfg.fail("graph.family", "unknown family '" + family + "' (gauss, power, affine, zero)");
}

int run_config(const std::string& subcommand, const Config& cfg, std::ostream& err) {
    const auto& names = subcommands();
    if (std::find(names.begin(), names.end(), subcommand) == names.end()) {
        err << "error: unknown subcommand '" << subcommand << "'\n";
        return kExitInput;
    }
    Output out;
    std::filesystem::path dir;
    std::uint64_t seed = 1;
    try {
        cfg.require_known(kKnownKeys);
        seed = cfg.u64("seed", 1);
        dir = cfg.str("output.dir", ".");
        if (cfg.has("threads")) {
            const int t = positive_int(cfg, "threads", 1, 4096);
#ifdef _OPENMP
            omp_set_num_threads(t);
#else
            (void)t;
#endif
        }
        const GroupSpec g = group_from_config(cfg);
        if (subcommand == "group-check") out = group_check(cfg, g, seed);
        else if (subcommand == "kernel-check") out = kernel_check(cfg, g, seed);
        else if (subcommand == "ab-check") out = ab_check(cfg, g);
        else if (subcommand == "holder-fit") out = holder_fit_cmd(cfg, g, seed);
        else if (subcommand == "norms-sweep") out = norms_sweep(cfg, g);
        else if (subcommand == "path") out = path_cmd(cfg, g);
        else out = scan_cmd(cfg, g, seed);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const UnsolvableError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const auto csv_path = dir / (subcommand + ".csv");
    const auto json_path = dir / (subcommand + ".json");
    {
        std::ofstream f(csv_path, std::ios::binary);
        if (!f) {
            err << "error: cannot write " << csv_path.string() << '\n';
            return kExitInput;
        }
        out.csv.write(f);
    }
    ordered_json summary;
    summary["version"] = version();
    summary["subcommand"] = subcommand;
    summary["config"] = config_echo(cfg);
    summary["seed"] = seed;
    summary["status"] = out.failures.empty() ? "ok" : "invariant_failure";
    summary["failures"] = out.failures;
    summary["results"] = out.results;
    summary["csv"] = csv_path.filename().string();
    {
        std::ofstream f(json_path, std::ios::binary);
        if (!f) {
            err << "error: cannot write " << json_path.string() << '\n';
            return kExitInput;
        }
        f << summary.dump(2) << '\n';
    }
    for (const auto& msg : out.failures) err << "invariant failure: " << msg << '\n';
    return out.failures.empty() ? kExitOk : kExitInvariant;
}

int run(const RunRequest& req, std::ostream& err) {
    Config cfg;
    try {
        cfg = Config::load(req.config_path);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
    if (req.out_dir) cfg.set("output.dir", *req.out_dir);
    if (req.seed) cfg.set("seed", std::to_string(*req.seed));
    if (req.threads) cfg.set("threads", std::to_string(*req.threads));
    return run_config(req.subcommand, cfg, err);
}

}  // namespace carnot
