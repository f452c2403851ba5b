#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "carnot/graphs.hpp"
#include "helpers.hpp"

using namespace carnot;
using testing_util::pt;

namespace {

WPoint random_w(const GroupSpec& g, std::mt19937_64& rng, double r) {
    WPoint w = WPoint::zero(g);
    for (int i = 0; i < w.x.size(); ++i) w.x[i] = uniform(rng, -r, r);
    for (int k = 0; k < w.z.size(); ++k) w.z[k] = uniform(rng, -r, r);
    return w;
}

std::vector<GraphFunction> families(const GroupSpec& g) {
    Vec c(g.m() - 1);
    for (int i = 0; i < c.size(); ++i) c[i] = 0.3 - 0.7 * i;
    WPoint center = WPoint::zero(g);
    center.x[0] = 0.2;
    return {GraphFunction::gauss_bump(1.0, 1.0, center), GraphFunction::power_decay(0.8, 1.3, 0.5, 1.0),
            GraphFunction::affine(c, 0.4, g.n2())};
}

// Flow of Y_l through w, integrated with RK4; the coefficients are read off the group law
// by hand: Y_l = d/dx_l + sum_k (1/2 sum_{i>=2} B[k][i][l] x_i + B[k][1][l] phi) d/dz_k.
WPoint y_flow(const GroupSpec& g, const GraphFunction& phi, WPoint w, int l, double t, int steps) {
    const auto field = [&](const WPoint& p) {
        WPoint d = WPoint::zero(g);
        d.x[l - 1] = 1.0;
        const double f = phi(p);
        for (int k = 0; k < g.n2(); ++k) {
            double acc = 0.0;
            for (int i = 1; i < g.m(); ++i) acc += g.bracket(k, i, l) * p.x[i - 1];
            d.z[k] = 0.5 * acc + g.bracket(k, 0, l) * f;
        }
        return d;
    };
    const auto axpy = [](const WPoint& p, double h, const WPoint& d) { return WPoint{p.x + h * d.x, p.z + h * d.z}; };
    const double h = t / steps;
    for (int s = 0; s < steps; ++s) {
        const WPoint k1 = field(w), k2 = field(axpy(w, h / 2, k1)), k3 = field(axpy(w, h / 2, k2)),
                     k4 = field(axpy(w, h, k3));
        w.x += h / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x);
        w.z += h / 6 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z);
    }
    return w;
}

}  // namespace

TEST(Graphs, GraphMapHeisenberg) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const GraphFunction phi = GraphFunction::affine(Vec::Zero(1), 2.0, 1);
    const WPoint w{pt({3}, {}).x, pt({}, {5}).z};
    const Point p = graph_map(g, phi, w);
    EXPECT_EQ(p.x[0], 2.0);
    EXPECT_EQ(p.x[1], 3.0);
    EXPECT_EQ(p.z[0], 5.0 - 3.0);
}

TEST(Graphs, IntrinsicGradientMatchesYFlow) {
    for (const GroupSpec& g : {GroupSpec::heisenberg(1), GroupSpec::free_step2(3)})
        for (const GraphFunction& phi : families(g)) {
            std::mt19937_64 rng(31);
            for (int s = 0; s < 100; ++s) {
                const WPoint w = random_w(g, rng, 1.5);
                const Vec grad = intrinsic_gradient(g, phi, w);
                for (int l = 1; l < g.m(); ++l) {
                    const double h = 1e-3;
                    const double fd = (phi(y_flow(g, phi, w, l, h, 8)) - phi(y_flow(g, phi, w, l, -h, 8))) / (2 * h);
                    EXPECT_LE(std::abs(fd - grad[l - 1]), 1e-6 * (1.0 + std::abs(grad[l - 1])))
                        << g.name() << " " << phi.family();
                }
            }
        }
}

TEST(Graphs, IntrinsicGradientMatchesGroupLawDerivative) {
    // d/du of phi^{(p^{-1})}(u e_l, 0) at u = 0, where the translated function only uses
    // group multiplication and phi itself
    for (const GroupSpec& g : {GroupSpec::heisenberg(1), GroupSpec::free_step2(3)})
        for (const GraphFunction& phi : families(g)) {
            std::mt19937_64 rng(32);
            for (int s = 0; s < 100; ++s) {
                const WPoint base = random_w(g, rng, 1.5);
                const TranslatedGraph psi(g, phi, graph_map(g, phi, base));
                const Vec grad = intrinsic_gradient(g, phi, base);
                for (int l = 1; l < g.m(); ++l) {
                    const double h = 1e-4;
                    WPoint a = WPoint::zero(g), b = WPoint::zero(g);
                    a.x[l - 1] = h;
                    b.x[l - 1] = -h;
                    const double fd = (psi(a) - psi(b)) / (2 * h);
                    EXPECT_LE(std::abs(fd - grad[l - 1]), 1e-6 * (1.0 + std::abs(grad[l - 1])));
                }
            }
        }
}

TEST(Graphs, TranslatedGraphIsLeftTranslate) {
    // Phi_psi(w) = p0^{-1} Phi_phi(source(w)), and projecting back onto W recovers w
    for (const GroupSpec& g : {GroupSpec::heisenberg(1), GroupSpec::free_step2(3)})
        for (const GraphFunction& phi : families(g)) {
            std::mt19937_64 rng(33);
            for (int s = 0; s < 50; ++s) {
                const Point p0 = graph_map(g, phi, random_w(g, rng, 1.0));
                const TranslatedGraph psi(g, phi, p0);
                const WPoint w = random_w(g, rng, 1.0);
                const Point lhs = graph_map(g, GraphFunction::affine(Vec::Zero(g.m() - 1), psi(w), g.n2()), w);
                const Point rhs = mul(g, inv(g, p0), graph_map(g, phi, psi.source(w)));
                EXPECT_LE(coord_distance(lhs, rhs), 1e-13);
                Vec e1 = Vec::Zero(g.m());
                e1[0] = 1;
                const Projection pr = project(g, VerticalHyperplane(e1), rhs);
                EXPECT_LE(coord_distance(pr.pw, embed(w)), 1e-13);
                EXPECT_NEAR(psi(WPoint::zero(g)), 0.0, 1e-15);
            }
        }
}

TEST(Graphs, TranslatedGradientIdentity) {
    const GroupSpec g = GroupSpec::free_step2(3);
    const GraphFunction phi = families(g).front();
    std::mt19937_64 rng(34);
    for (int s = 0; s < 30; ++s) {
        const TranslatedGraph psi(g, phi, graph_map(g, phi, random_w(g, rng, 1.0)));
        const WPoint w = random_w(g, rng, 0.5);
        // psi as a GraphFunction for the flow oracle
        const GraphFunction as_fn("translated", [&](const WPoint& u) { return psi(u); },
                                  [](const WPoint&, Vec&, Vec&) {});
        const Vec grad = psi.gradient(w);
        for (int l = 1; l < g.m(); ++l) {
            const double h = 1e-3;
            const double fd =
                (as_fn(y_flow(g, as_fn, w, l, h, 8)) - as_fn(y_flow(g, as_fn, w, l, -h, 8))) / (2 * h);
            EXPECT_LE(std::abs(fd - grad[l - 1]), 1e-6 * (1.0 + std::abs(grad[l - 1])));
        }
    }
}

TEST(Graphs, OffGraphBaseRejected) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const GraphFunction phi = GraphFunction::gauss_bump(1.0, 1.0, WPoint::zero(g));
    EXPECT_THROW(TranslatedGraph(g, phi, pt({0.3, 0}, {0})), InputError);
    EXPECT_NO_THROW(TranslatedGraph(g, phi, pt({1.0, 0}, {0})));
}

TEST(Graphs, AffineResidualVanishes) {
    for (const GroupSpec& g : {GroupSpec::heisenberg(1), GroupSpec::free_step2(3)}) {
        const GraphFunction phi = families(g).back();
        std::mt19937_64 rng(35);
        for (int s = 0; s < 100; ++s) {
            const Point p0 = graph_map(g, phi, random_w(g, rng, 2.0));
            EXPECT_LE(affine_residual(g, phi, p0, random_w(g, rng, 2.0)), 1e-12);
        }
    }
}

TEST(Graphs, HolderFitSlopeOnBump) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const GraphFunction phi = GraphFunction::gauss_bump(1.0, 1.0, WPoint::zero(g));
    const HolderFit fit = holder_fit(g, phi, WPoint::zero(g), HolderFitOptions{});
    ASSERT_EQ(fit.radii.size(), 40u);
    EXPECT_GE(fit.slope, 1.45);
    EXPECT_LE(fit.slope, 2.2);
}

TEST(Graphs, C1AlphaConstant) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    C1AlphaSampling s;
    s.n_base = 8;
    s.n_offsets = 64;
    const double bump = c1alpha_constant(g, GraphFunction::gauss_bump(1.0, 1.0, WPoint::zero(g)), 1.0, s);
    EXPECT_TRUE(std::isfinite(bump));
    EXPECT_GT(bump, 0.0);
    const double flat = c1alpha_constant(g, families(g).back(), 1.0, s);
    EXPECT_LE(flat, 1e-9);
}

TEST(Graphs, PatchMassRichardson) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const GraphFunction phi = GraphFunction::gauss_bump(1.0, 0.7, WPoint::zero(g));
    const Box box{{{-1.0, 1.0}, {-1.0, 1.0}}};
    std::vector<double> mass;
    for (int n : {16, 32, 64}) mass.push_back(build_patch(g, phi, box, {n, n}).total_mass());
    const double ratio = (mass[1] - mass[0]) / (mass[2] - mass[1]);
    EXPECT_GE(ratio, 3.5);
    EXPECT_LE(ratio, 4.5);
}

TEST(Graphs, FlatPatchMassIsArea) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const GraphPatch p = build_patch(g, GraphFunction::zero(g), Box{{{0.0, 2.0}, {-1.0, 0.5}}}, {4, 3});
    EXPECT_EQ(p.size(), 12u);
    EXPECT_NEAR(p.total_mass(), 3.0, 1e-14);
    EXPECT_DOUBLE_EQ(p.grid_spacing(), 0.5);
}

TEST(Graphs, PatchRejectsBadGrids) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const GraphFunction phi = GraphFunction::zero(g);
    const Box box{{{-1.0, 1.0}, {-1.0, 1.0}}};
    EXPECT_THROW(build_patch(g, phi, box, {1, 4}), InputError);
    EXPECT_THROW(build_patch(g, phi, box, {4}), InputError);
    EXPECT_THROW(build_patch(g, phi, box, {5000, 5000}), InputError);
    EXPECT_THROW(build_patch(g, phi, Box{{{1.0, 1.0}, {-1.0, 1.0}}}, {4, 4}), InputError);
}

TEST(Graphs, PowerDecayCertificate) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const GraphFunction phi = GraphFunction::power_decay(1.0, 1.0, 0.5, 1.0);
    EXPECT_EQ(phi.decay_exponents().first, 0.5);
    const DecayCertificate c = certify_decay(g, phi, 0.5, 1.0, HomNorm{}, 4000);
    EXPECT_TRUE(c.bounded);
    EXPECT_TRUE(std::isfinite(c.grad_ratio_sup));
    EXPECT_THROW(GraphFunction::power_decay(1.0, 1.0, 1.5, 1.0), InputError);
}
