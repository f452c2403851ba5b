#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "carnot/sio.hpp"
#include "carnot/stats.hpp"
#include "helpers.hpp"

using namespace carnot;
using testing_util::PointGen;
using testing_util::pt;

namespace {

struct Cloud {
    std::vector<Point> points;
    std::vector<double> weights;
};

Cloud random_cloud(const GroupSpec& g, std::size_t n, std::uint64_t seed) {
    PointGen gen(g, seed);
    Cloud c;
    for (std::size_t i = 0; i < n; ++i) {
        c.points.push_back(gen());
        c.weights.push_back(gen.real(0.5, 2.0));
    }
    return c;
}

// Largest singular value of the stacked (d_out n) x n matrix.
double stacked_svd(const TruncatedOperator& op) {
    const Eigen::Index n = static_cast<Eigen::Index>(op.size());
    Eigen::MatrixXd s(n * static_cast<Eigen::Index>(op.blocks.size()), n);
    for (std::size_t c = 0; c < op.blocks.size(); ++c) s.middleRows(static_cast<Eigen::Index>(c) * n, n) = op.blocks[c];
    return Eigen::JacobiSVD<Eigen::MatrixXd>(s).singularValues()[0];
}

Vec axis(int m, int i) {
    Vec e = Vec::Zero(m);
    e[i] = 1.0;
    return e;
}

}  // namespace

TEST(Sio, SinglePointIsZero) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const std::vector<double> w = {1.0};
    const TruncatedOperator op = assemble(gauge_riesz(g), {pt({1, 2}, {3})}, w, 0.1);
    ASSERT_EQ(op.size(), 1u);
    EXPECT_EQ(op.blocks[0](0, 0), 0.0);
    EXPECT_EQ(operator_norm(op).value, 0.0);
}

TEST(Sio, EpsilonAboveDiameterIsZero) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const Cloud c = random_cloud(g, 20, 41);
    const Kernel k = gauge_riesz(g);
    const double diam = patch_diameter(k, c.points);
    const TruncatedOperator op = assemble(k, c.points, c.weights, 1.01 * diam);
    for (const auto& b : op.blocks) EXPECT_EQ(b.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ(operator_norm(op).value, 0.0);
}

TEST(Sio, TwoPointEntriesAndExactSvd) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const Point q1 = pt({0.3, -0.2}, {0.1}), q2 = pt({-0.5, 0.4}, {0.7});
    const std::vector<double> mu = {0.7, 1.9};
    for (const Kernel& k : {gauge_riesz(g), pseudo_riesz(g), control_kernel(g)}) {
        const TruncatedOperator op = assemble(k, {q1, q2}, mu, 1e-3);
        const Eigen::VectorXd k12 = k(mul(g, inv(g, q2), q1)), k21 = k(mul(g, inv(g, q1), q2));
        for (int c = 0; c < k.d_out(); ++c) {
            EXPECT_DOUBLE_EQ(op.blocks[c](0, 1), std::sqrt(mu[0]) * k12[c] * std::sqrt(mu[1]));
            EXPECT_DOUBLE_EQ(op.blocks[c](1, 0), std::sqrt(mu[1]) * k21[c] * std::sqrt(mu[0]));
            EXPECT_EQ(op.blocks[c](0, 0), 0.0);
        }
        // Gram operator is diag(|B_21|^2, |B_12|^2)
        const double exact = std::sqrt(mu[0] * mu[1]) * std::max(k12.norm(), k21.norm());
        for (double tol : {1e-6, 1e-10}) {
            const NormEstimate e = operator_norm(op, tol);
            EXPECT_LE(std::abs(e.value - exact), tol * exact) << k.name();
        }
        EXPECT_NEAR(stacked_svd(op), exact, 1e-14 * exact);
    }
}

TEST(Sio, PowerIterationMatchesSvdOnRandomCloud) {
    for (const GroupSpec& g : {GroupSpec::heisenberg(1), GroupSpec::free_step2(3)}) {
        const Cloud c = random_cloud(g, 60, 42);
        for (const Kernel& k : {gauge_riesz(g), control_kernel(g)}) {
            const TruncatedOperator op = assemble(k, c.points, c.weights, 0.2);
            const NormEstimate e = operator_norm(op, 1e-12, 100000);
            EXPECT_TRUE(e.converged);
            EXPECT_NEAR(e.value, stacked_svd(op), 1e-8 * e.value);
        }
    }
}

TEST(Sio, MaxIterFlagged) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const Cloud c = random_cloud(g, 40, 43);
    const NormEstimate e = operator_norm(assemble(gauge_riesz(g), c.points, c.weights, 0.1), 1e-15, 3);
    EXPECT_FALSE(e.converged);
    EXPECT_EQ(e.iters, 3u);
}

TEST(Sio, RelabelingInvariance) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    Cloud c = random_cloud(g, 50, 44);
    const Kernel k = pseudo_riesz(g);
    const double a = operator_norm(assemble(k, c.points, c.weights, 0.15), 1e-12).value;
    std::vector<std::size_t> perm(c.points.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937_64 rng(1);
    std::shuffle(perm.begin(), perm.end(), rng);
    Cloud d;
    for (std::size_t i : perm) {
        d.points.push_back(c.points[i]);
        d.weights.push_back(c.weights[i]);
    }
    const double b = operator_norm(assemble(k, d.points, d.weights, 0.15), 1e-12).value;
    EXPECT_NEAR(a, b, 1e-9 * a);
}

TEST(Sio, LeftTranslationKeepsEntries) {
    const GroupSpec g = GroupSpec::free_step2(3);
    const Cloud c = random_cloud(g, 30, 45);
    const Point shift = pt({0.7, -1.1, 0.4}, {0.3, 0.9, -0.6});
    Cloud t = c;
    for (Point& p : t.points) p = mul(g, shift, p);
    const Kernel k = gauge_riesz(g);
    const TruncatedOperator a = assemble(k, c.points, c.weights, 0.3), b = assemble(k, t.points, t.weights, 0.3);
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        // the truncation mask may flip only for pairs sitting within rounding of epsilon
        const Eigen::MatrixXd diff = (a.blocks[i] - b.blocks[i]).cwiseAbs();
        EXPECT_LE(diff.maxCoeff(), 1e-12 * (1.0 + a.blocks[i].cwiseAbs().maxCoeff()));
    }
}

TEST(Sio, ScaleCovariance) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const Cloud c = random_cloud(g, 40, 46);
    const double q = g.homogeneous_dim();
    for (const Kernel& k : {gauge_riesz(g), control_kernel(g)})
        for (double t : {0.25, 3.0}) {
            Cloud d = c;
            for (auto& p : d.points) p = dilate(g, t, p);
            for (auto& w : d.weights) w *= std::pow(t, q - 1.0);
            const double a = operator_norm(assemble(k, c.points, c.weights, 0.2), 1e-13, 100000).value;
            const double b = operator_norm(assemble(k, d.points, d.weights, 0.2 * t), 1e-13, 100000).value;
            EXPECT_NEAR(a, b, 1e-10 * a) << k.name();
        }
}

TEST(Sio, ControlKernelGrowsAlongLadder) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const GraphPatch patch = build_patch(g, GraphFunction::zero(g), Box{{{-1.0, 1.0}, {-1.0, 1.0}}}, {20, 20});
    const Kernel k = control_kernel(g);
    const std::vector<double> ladder = dyadic_ladder(0.8, 4);
    const SweepResult s = epsilon_sweep(k, patch, ladder);
    for (std::size_t i = 1; i < s.norms.size(); ++i) EXPECT_GT(s.norms[i], s.norms[i - 1]);
}

TEST(Sio, SweepMatchesDirectAssembly) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const GraphPatch patch =
        build_patch(g, GraphFunction::gauss_bump(1.0, 1.0, WPoint::zero(g)), Box{{{-1.0, 1.0}, {-1.0, 1.0}}}, {12, 12});
    const Kernel k = gauge_riesz(g);
    const std::vector<double> ladder = dyadic_ladder(1.6, 4);
    SweepOptions o;
    o.tol = 1e-12;
    const SweepResult s = epsilon_sweep(k, patch, ladder, o);
    ASSERT_EQ(s.norms.size(), 4u);
    for (std::size_t i = 0; i < ladder.size(); ++i) {
        const double direct = stacked_svd(assemble(k, patch, ladder[i]));
        EXPECT_NEAR(s.norms[i], direct, 1e-9 * direct);
    }
}

TEST(Sio, AllRungsAboveDiameterGiveZero) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const GraphPatch patch = build_patch(g, GraphFunction::zero(g), Box{{{-1.0, 1.0}, {-1.0, 1.0}}}, {6, 6});
    const Kernel k = gauge_riesz(g);
    const double diam = patch_diameter(k, patch.points);
    const SweepResult s = epsilon_sweep(k, patch, dyadic_ladder(8 * diam, 3));
    for (double n : s.norms) EXPECT_EQ(n, 0.0);
}

TEST(Sio, LadderValidation) {
    EXPECT_THROW(validate_ladder(std::vector<double>{}, 0.1), InputError);
    EXPECT_THROW(validate_ladder(std::vector<double>{1.0, 0.4}, 0.1), InputError);
    EXPECT_THROW(validate_ladder(std::vector<double>{0.4, 0.2, 0.1, 0.05}, 0.1), InputError);
    EXPECT_NO_THROW(validate_ladder(std::vector<double>{0.4, 0.2, 0.1}, 0.1));
    EXPECT_THROW(assemble(control_kernel(GroupSpec::heisenberg(1)), {pt({1, 0}, {0})}, std::vector<double>{1.0}, 0.0),
                 InputError);
}

TEST(Sio, BumpProfile) {
    EXPECT_EQ(bump_profile(0.0), 1.0);
    EXPECT_EQ(bump_profile(0.5), 1.0);
    EXPECT_EQ(bump_profile(2.0), 0.0);
    EXPECT_EQ(bump_profile(7.0), 0.0);
    double prev = 1.0;
    for (double u = 0.5; u <= 2.0; u += 0.01) {
        const double v = bump_profile(u);
        EXPECT_LE(v, prev + 1e-15);
        prev = v;
    }
}

TEST(Sio, AbEqualRadiiIsZero) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const Eigen::VectorXd v = ab_quadrature(control_kernel(g), VerticalHyperplane(axis(2, 0)), 1.5, 1.5);
    EXPECT_EQ(v[0], 0.0);
    EXPECT_THROW(ab_quadrature(control_kernel(g), VerticalHyperplane(axis(2, 0)), 2.0, 1.0), InputError);
}

TEST(Sio, AbCancellingKernelsVanish) {
    for (const GroupSpec& g : {GroupSpec::heisenberg(1), GroupSpec::free_step2(3)}) {
        Vec v = Vec::Ones(g.m());
        v[0] = 0.3;
        ABOptions o;
        o.pts_per_axis = g.m() == 2 ? 32 : 6;
        for (const Kernel& k : {gauge_riesz(g), pseudo_riesz(g)}) {
            const Eigen::VectorXd val = ab_quadrature(k, VerticalHyperplane(v), 1.0, 16.0, o);
            EXPECT_LE(val.cwiseAbs().maxCoeff(), 1e-12) << k.name();
        }
    }
}

TEST(Sio, AbControlGrowsAtFrullaniRate) {
    // int_W (psi^R - psi^r) N^{-3} dw = -log(R/r) sigma(S), sigma(S) = 3 |{y^4 + t^2 < 1}|
    const GroupSpec g = GroupSpec::heisenberg(1);
    const double ball = std::tgamma(0.25) * std::tgamma(1.5) / std::tgamma(1.75);
    const double expected_slope = 3.0 * ball * std::log(2.0);
    ABOptions o;
    o.pts_per_axis = 64;
    std::vector<double> ks, vs;
    for (int k = 1; k <= 6; ++k) {
        const double v = ab_quadrature(control_kernel(g), VerticalHyperplane(axis(2, 0)), 1.0, std::ldexp(1.0, k), o)[0];
        EXPECT_LT(v, 0.0);
        ks.push_back(k);
        vs.push_back(std::abs(v));
    }
    const LinearFit f = linear_fit(ks, vs);
    EXPECT_GT(f.r2, 0.9999);
    EXPECT_NEAR(f.slope, expected_slope, 0.02 * expected_slope);
}

TEST(Sio, AbStabilityFlags) {
    const GroupSpec g = GroupSpec::heisenberg(1);
    const std::vector<VerticalHyperplane> hs = {VerticalHyperplane(axis(2, 0)), VerticalHyperplane(axis(2, 1))};
    ABOptions o;
    o.pts_per_axis = 16;
    EXPECT_FALSE(ab_stability(control_kernel(g), hs, 1.0, 3, o).stable);
    const ABStability p = ab_stability(pseudo_riesz(g), hs, 1.0, 3, o);
    EXPECT_TRUE(p.stable);
    EXPECT_EQ(p.base.entries.size(), 6u);
    EXPECT_THROW(ab_sup(pseudo_riesz(g), {}, ab_ladder(1.0, 2)), InputError);
}

TEST(ABQuadrature, DefaultGridScalesWithDimension) {
    EXPECT_EQ(default_pts_per_axis(2), 64);
    EXPECT_EQ(default_pts_per_axis(3), 32);
    EXPECT_EQ(default_pts_per_axis(5), 8);
    EXPECT_EQ(default_pts_per_axis(1), 64);
}
