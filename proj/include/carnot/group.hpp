#pragma once
//
// Step-2 Carnot groups in exponential coordinates.
//
// A point is p = (x, z) with x in the first layer (R^m) and z in the second
// layer (R^n2). With the bracket tensor B, [X_i, X_j] = sum_l B[l][i][j] Z_l,
// the group law reads
//
//     (x, z) . (x', z') = (x + x', z + z' + 1/2 omega(x, x')),
//     omega(x, x')_l    = sum_{i,j} B[l][i][j] x_i x'_j.
//

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "carnot/error.hpp"

namespace carnot {

/// Upper bound on either layer dimension; vectors live on the stack.
inline constexpr int kMaxDim = 32;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim, 1>;

struct Point {
    Vec x;
    Vec z;

    Point() = default;
    Point(Vec x_, Vec z_) : x(std::move(x_)), z(std::move(z_)) {}

    static Point identity(int m, int n2) { return {Vec::Zero(m), Vec::Zero(n2)}; }

    bool is_identity() const { return (x.size() == 0 || x.isZero(0.0)) && (z.size() == 0 || z.isZero(0.0)); }
};

/// Max-abs coordinate difference; used for tolerance checks.
double coord_distance(const Point& p, const Point& q);

class GroupSpec {
public:
    GroupSpec() = default;

    /// `bracket` has n2*m*m entries indexed [(l*m + i)*m + j], zero-based.
    /// Throws InputError unless the tensor is antisymmetric in (i, j).
    GroupSpec(int m, int n2, std::vector<double> bracket, std::string name = "custom");

    /// Heisenberg group H^n: m = 2n, n2 = 1, [X_i, X_{n+i}] = Z.
    static GroupSpec heisenberg(int n);
    /// Free step-2 group on k generators, Z_{(i,j)} = [X_i, X_j] for i < j in lexicographic order.
    static GroupSpec free_step2(int k);
    /// R^m with the trivial bracket (n2 = 0).
    static GroupSpec abelian(int m);

    int m() const { return m_; }
    int n2() const { return n2_; }
    int homogeneous_dim() const { return m_ + 2 * n2_; }
    int topological_dim() const { return m_ + n2_; }
    const std::string& name() const { return name_; }

    double bracket(int l, int i, int j) const { return b_[(static_cast<std::size_t>(l) * m_ + i) * m_ + j]; }
    const std::vector<double>& bracket_tensor() const { return b_; }

    /// n2 x m(m-1)/2 matrix with columns B[.][i][j], i < j, lexicographic.
    Eigen::MatrixXd bracket_matrix() const;
    bool is_bracket_generating() const;

    Vec omega(const Vec& x, const Vec& y) const;

    void check_point(const Point& p) const;

    bool operator==(const GroupSpec& other) const = default;

private:
    int m_ = 0;
    int n2_ = 0;
    std::vector<double> b_;
    std::string name_;
};

Point mul(const GroupSpec& g, const Point& p, const Point& q);
Point inv(const GroupSpec& g, const Point& p);
Point dilate(const GroupSpec& g, double t, const Point& p);

enum class NormKind { Koranyi, Box };

struct HomNorm {
    NormKind kind = NormKind::Koranyi;

    double operator()(const Point& p) const;
    std::string name() const;
    static HomNorm parse(const std::string& s);
};

double norm(const GroupSpec& g, const HomNorm& nrm, const Point& p);
/// d(p, q) = ||q^{-1} p||.
double dist(const GroupSpec& g, const HomNorm& nrm, const Point& p, const Point& q);

/// Vertical hyperplane W = {p : <x_p, v> = 0} with an orthonormal frame of v-perp.
class VerticalHyperplane {
public:
    VerticalHyperplane() = default;
    /// Normalises v; throws InputError on a zero vector.
    explicit VerticalHyperplane(const Vec& v);

    const Vec& normal() const { return v_; }
    /// m x (m-1) matrix with orthonormal columns spanning v-perp.
    const Eigen::MatrixXd& frame() const { return frame_; }

    /// W-coordinates (frame^T x, z) of a point of W, and back.
    Point embed(const Vec& xw, const Vec& z) const;

private:
    Vec v_;
    Eigen::MatrixXd frame_;
};

struct Projection {
    Point pw;  ///< factor in W
    double s;  ///< p_V = delta_s((v, 0))
};

/// p = p_W . p_V with p_V = delta_s((v, 0)), s = <x_p, v>.
Projection project(const GroupSpec& g, const VerticalHyperplane& w, const Point& p);

struct AdaptedSpec {
    GroupSpec spec;
    /// Orthogonal m x m matrix with R e1 = v; (x, z) -> (R^T x, z) maps into the adapted group.
    Eigen::MatrixXd rotation;
};

/// Rotate the first layer so that v becomes e1: B'(x, x') = B(Rx, Rx').
AdaptedSpec adapt_basis(const GroupSpec& g, const Vec& v);

/// (x, z) -> (R^T x, z); a group isomorphism onto the adapted spec.
Point to_adapted(const AdaptedSpec& a, const Point& p);
Point from_adapted(const AdaptedSpec& a, const Point& p);

}  // namespace carnot
