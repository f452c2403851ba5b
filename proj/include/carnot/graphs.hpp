#pragma once
//
// Intrinsic graphs over the vertical hyperplane W = {x_1 = 0} of an adapted
// group (see adapt_basis). A point of W has coordinates (x_W, z) with
// x_W = (x_2, ..., x_m); the graph of phi is Phi(w) = w . (phi(w) e_1, 0).
//

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "carnot/group.hpp"

namespace carnot {

struct WPoint {
    Vec x;  ///< x_2 .. x_m
    Vec z;

    static WPoint zero(const GroupSpec& g) { return {Vec::Zero(g.m() - 1), Vec::Zero(g.n2())}; }
};

/// (0, x_W, z) as a group point.
Point embed(const WPoint& w);
/// Inverse of embed; ignores x_1.
WPoint w_coords(const Point& p);

class GraphFunction {
public:
    using ValueFn = std::function<double(const WPoint&)>;
    using PartialsFn = std::function<void(const WPoint&, Vec& dx, Vec& dz)>;

    GraphFunction(std::string family, ValueFn value, PartialsFn partials, bool affine = false);

    /// phi(w) = <c, x_W> + d.
    static GraphFunction affine(const Vec& c, double d, int n2);
    static GraphFunction zero(const GroupSpec& g);
    /// phi(w) = A exp(-(|x_W - c_x|^2 + |z - c_z|^2) / sigma^2).
    static GraphFunction gauss_bump(double amplitude, double sigma, const WPoint& center);
    /// phi(w) = A (1 + (|x_W|^4 + |z|^2) / sigma^4)^{-gamma/4}; theta and gamma are the decay
    /// exponents it is certified against.
    static GraphFunction power_decay(double amplitude, double sigma, double theta, double gamma);

    const std::string& family() const { return family_; }
    bool is_affine() const { return affine_; }

    double operator()(const WPoint& w) const { return value_(w); }
    /// Euclidean partial derivatives in (x_W, z).
    void partials(const WPoint& w, Vec& dx, Vec& dz) const;

    /// Decay exponents (theta, gamma) for the power_decay family, zero otherwise.
    std::pair<double, double> decay_exponents() const { return {theta_, gamma_}; }

private:
    std::string family_;
    ValueFn value_;
    PartialsFn partials_;
    bool affine_ = false;
    double theta_ = 0.0;
    double gamma_ = 0.0;
};

/// Phi(w) = embed(w) . delta_{phi(w)}((e_1, 0)).
Point graph_map(const GroupSpec& g, const GraphFunction& phi, const WPoint& w);

/// Coefficients c_{l,k}(w) of Y_l = d/dx_l + sum_k c_{l,k} d/dz_k, l = 2..m.
/// Rows index l - 2, columns k.
Eigen::MatrixXd y_field_coefficients(const GroupSpec& g, const WPoint& w, double phi_w);

/// (Y_2 phi, ..., Y_m phi)(w).
Vec intrinsic_gradient(const GroupSpec& g, const GraphFunction& phi, const WPoint& w);

/// phi^{(p0^{-1})}, the function whose intrinsic graph is p0^{-1} Sigma(phi), for p0 on Sigma(phi).
class TranslatedGraph {
public:
    /// Throws InputError if p0 is off the graph by more than `tol` (relative).
    TranslatedGraph(const GroupSpec& g, GraphFunction phi, const Point& p0, double tol = 1e-10);

    const WPoint& base() const { return base_; }
    double base_value() const { return base_value_; }

    /// w' with Phi(w') = p0 . Phi_psi(w).
    WPoint source(const WPoint& w) const;
    double operator()(const WPoint& w) const;
    /// Intrinsic gradient of the translated function at w; equals grad^phi phi(source(w)).
    Vec gradient(const WPoint& w) const;

private:
    const GroupSpec* g_;
    GraphFunction phi_;
    WPoint base_;
    double base_value_;
};

double translate_graph(const GroupSpec& g, const GraphFunction& phi, const Point& p0, const WPoint& w);

/// |phi^{(p0^{-1})}(w) - grad phi(wbar) . x_w|.
double affine_residual(const GroupSpec& g, const GraphFunction& phi, const Point& p0, const WPoint& w);

struct C1AlphaSampling {
    std::size_t n_base = 64;
    std::size_t n_offsets = 256;
    double base_box = 1.0;      ///< base points wbar uniform in [-base_box, base_box]^{dim W}
    double offset_radius = 1.0; ///< offsets w with ||w|| <= offset_radius
    HomNorm norm{NormKind::Koranyi};
    std::uint64_t seed = 1;
};

/// Empirical H in |grad psi_p(w) - grad psi_p(0)| <= H ||w||^alpha over sampled p on Sigma(phi), w in W.
double c1alpha_constant(const GroupSpec& g, const GraphFunction& phi, double alpha, const C1AlphaSampling& s);

struct HolderFitOptions {
    std::size_t n_radii = 40;
    double r_min = 1e-3;
    double r_max = 1e-1;
    std::size_t n_directions = 16;
    HomNorm norm{NormKind::Koranyi};
    std::uint64_t seed = 7;
};

struct HolderFit {
    std::vector<double> radii;
    std::vector<double> residuals;  ///< max over directions at each radius
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
};

/// Least-squares slope of log(residual) against log ||w|| over delta_r-scaled unit directions.
HolderFit holder_fit(const GroupSpec& g, const GraphFunction& phi, const WPoint& base, const HolderFitOptions& o);

struct Box {
    std::vector<std::pair<double, double>> intervals;  ///< one per W-axis: x_2..x_m, then z
};

struct GraphPatch {
    std::vector<WPoint> params;
    std::vector<Point> points;   ///< Phi(w_j)
    std::vector<double> weights; ///< sqrt(1 + |grad phi|^2) dw
    std::vector<double> steps;   ///< parameter step per axis
    std::vector<int> resolution;
    Box box;
    std::string family;

    std::size_t size() const { return points.size(); }
    double total_mass() const;
    /// Smallest parameter step over the axes.
    double grid_spacing() const;
};

inline constexpr std::size_t kMaxPatchPoints = 10'000'000;

/// Tensor midpoint rule on `box` with `resolution` cells per axis.
GraphPatch build_patch(const GroupSpec& g, const GraphFunction& phi, const Box& box, const std::vector<int>& resolution);

struct DecayCertificate {
    double value_ratio_inner = 0.0;  ///< sup |phi| / ||w||^{1-theta} on 1 <= ||w|| <= 10
    double value_ratio_outer = 0.0;  ///< same on 100 <= ||w|| <= 1000
    double grad_ratio_inner = 0.0;   ///< sup |grad phi| ||w||^gamma on 1 <= ||w|| <= 10
    double grad_ratio_outer = 0.0;
    double value_ratio_sup = 0.0;
    double grad_ratio_sup = 0.0;
    bool bounded = false;            ///< outer sups do not exceed inner sups
};

/// Samples both decay bounds over 1 <= ||w|| <= 1000.
DecayCertificate certify_decay(const GroupSpec& g, const GraphFunction& phi, double theta, double gamma,
                               HomNorm nrm, std::size_t n_samples, std::uint64_t seed = 3);

}  // namespace carnot
