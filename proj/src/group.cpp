#include "carnot/group.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace carnot {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw InputError(msg);
}

// Orthonormal basis (v, f_2, ..., f_m): Gram-Schmidt over the standard basis,
// leaving out the coordinate axis most aligned with v.
Eigen::MatrixXd completed_basis(const Vec& v) {
    const int m = static_cast<int>(v.size());
    Eigen::MatrixXd r(m, m);
    r.col(0) = v;
    Eigen::Index skip = 0;
    v.cwiseAbs().maxCoeff(&skip);
    int col = 1;
    for (int k = 0; k < m; ++k) {
        if (k == skip) continue;
        Eigen::VectorXd e = Eigen::VectorXd::Unit(m, k);
        // two passes of modified Gram-Schmidt
        for (int pass = 0; pass < 2; ++pass)
            for (int c = 0; c < col; ++c) e -= r.col(c).dot(e) * r.col(c);
        r.col(col++) = e.normalized();
    }
    return r;
}

}  // namespace

double coord_distance(const Point& p, const Point& q) {
    double d = 0.0;
    if (p.x.size()) d = std::max(d, (p.x - q.x).cwiseAbs().maxCoeff());
    if (p.z.size()) d = std::max(d, (p.z - q.z).cwiseAbs().maxCoeff());
    return d;
}

GroupSpec::GroupSpec(int m, int n2, std::vector<double> bracket, std::string name)
    : m_(m), n2_(n2), b_(std::move(bracket)), name_(std::move(name)) {
    require(m >= 2 && m <= kMaxDim, "group.m must lie in [2, " + std::to_string(kMaxDim) + "]");
    require(n2 >= 0 && n2 <= kMaxDim, "group.n2 must lie in [0, " + std::to_string(kMaxDim) + "]");
    require(b_.size() == static_cast<std::size_t>(n2) * m * m, "bracket tensor has wrong size");
    for (int l = 0; l < n2; ++l)
        for (int i = 0; i < m; ++i)
            for (int j = i; j < m; ++j)
                if (this->bracket(l, i, j) != -this->bracket(l, j, i)) {
                    std::ostringstream os;
                    os << "bracket tensor not antisymmetric at (l,i,j) = (" << l + 1 << "," << i + 1 << "," << j + 1
                       << ")";
                    throw InputError(os.str());
                }
}

GroupSpec GroupSpec::heisenberg(int n) {
    require(n >= 1 && 2 * n <= kMaxDim, "heisenberg: n out of range");
    const int m = 2 * n;
    std::vector<double> b(static_cast<std::size_t>(m) * m, 0.0);
    for (int i = 0; i < n; ++i) {
        b[static_cast<std::size_t>(i) * m + (n + i)] = 1.0;
        b[static_cast<std::size_t>(n + i) * m + i] = -1.0;
    }
    return GroupSpec(m, 1, std::move(b), "heisenberg" + std::to_string(n));
}

GroupSpec GroupSpec::free_step2(int k) {
    require(k >= 2 && k <= kMaxDim, "free_step2: k out of range");
    const int n2 = k * (k - 1) / 2;
    require(n2 <= kMaxDim, "free_step2: second layer too large");
    std::vector<double> b(static_cast<std::size_t>(n2) * k * k, 0.0);
    int l = 0;
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j, ++l) {
            b[(static_cast<std::size_t>(l) * k + i) * k + j] = 1.0;
            b[(static_cast<std::size_t>(l) * k + j) * k + i] = -1.0;
        }
    return GroupSpec(k, n2, std::move(b), "free" + std::to_string(k));
}

GroupSpec GroupSpec::abelian(int m) { return GroupSpec(m, 0, {}, "abelian" + std::to_string(m)); }

Eigen::MatrixXd GroupSpec::bracket_matrix() const {
    const int cols = m_ * (m_ - 1) / 2;
    Eigen::MatrixXd a(n2_, cols);
    int c = 0;
    for (int i = 0; i < m_; ++i)
        for (int j = i + 1; j < m_; ++j, ++c)
            for (int l = 0; l < n2_; ++l) a(l, c) = bracket(l, i, j);
    return a;
}

bool GroupSpec::is_bracket_generating() const {
    if (n2_ == 0) return true;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(bracket_matrix());
    lu.setThreshold(1e-12);
    return lu.rank() == n2_;
}

Vec GroupSpec::omega(const Vec& x, const Vec& y) const {
    Vec w = Vec::Zero(n2_);
    const double* b = b_.data();
    for (int l = 0; l < n2_; ++l) {
        double acc = 0.0;
        for (int i = 0; i < m_; ++i) {
            if (x[i] == 0.0) {
                b += m_;
                continue;
            }
            double row = 0.0;
            for (int j = 0; j < m_; ++j) row += b[j] * y[j];
            acc += x[i] * row;
            b += m_;
        }
        w[l] = acc;
    }
    return w;
}

void GroupSpec::check_point(const Point& p) const {
    if (p.x.size() != m_ || p.z.size() != n2_) {
        std::ostringstream os;
        os << "point dimensions (" << p.x.size() << "," << p.z.size() << ") do not match group (" << m_ << ","
           << n2_ << ")";
        throw InputError(os.str());
    }
}

Point mul(const GroupSpec& g, const Point& p, const Point& q) {
    g.check_point(p);
    g.check_point(q);
    Point r;
    r.x = p.x + q.x;
    r.z = p.z + q.z;
    if (g.n2() > 0) r.z += 0.5 * g.omega(p.x, q.x);
    return r;
}

Point inv(const GroupSpec& g, const Point& p) {
    g.check_point(p);
    return {-p.x, -p.z};
}

Point dilate(const GroupSpec& g, double t, const Point& p) {
    g.check_point(p);
    return {t * p.x, (t * t) * p.z};
}

double HomNorm::operator()(const Point& p) const {
    const double hx = p.x.size() ? p.x.norm() : 0.0;
    const double hz = p.z.size() ? p.z.norm() : 0.0;
    if (hz == 0.0) return hx;
    switch (kind) {
        case NormKind::Koranyi: {
            const double x2 = hx * hx;
            return std::sqrt(std::sqrt(x2 * x2 + hz * hz));
        }
        case NormKind::Box:
            return std::max(hx, std::sqrt(hz));
    }
    return 0.0;
}

std::string HomNorm::name() const { return kind == NormKind::Koranyi ? "koranyi" : "box"; }

HomNorm HomNorm::parse(const std::string& s) {
    if (s == "koranyi" || s == "Koranyi") return {NormKind::Koranyi};
    if (s == "box" || s == "Box") return {NormKind::Box};
    throw InputError("unknown norm '" + s + "' (expected koranyi or box)");
}

double norm(const GroupSpec& g, const HomNorm& nrm, const Point& p) {
    g.check_point(p);
    return nrm(p);
}

double dist(const GroupSpec& g, const HomNorm& nrm, const Point& p, const Point& q) {
    return nrm(mul(g, inv(g, q), p));
}

VerticalHyperplane::VerticalHyperplane(const Vec& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw InputError("hyperplane normal must be a nonzero finite vector");
    if (v.size() < 2) throw InputError("hyperplane normal needs dimension >= 2");
    v_ = v / n;
    Eigen::MatrixXd r = completed_basis(v_);
    frame_ = r.rightCols(r.cols() - 1);
}

Point VerticalHyperplane::embed(const Vec& xw, const Vec& z) const {
    if (xw.size() != frame_.cols()) throw InputError("W-coordinate dimension mismatch");
    Vec x = frame_ * Eigen::VectorXd(xw);
    return {x, z};
}

Projection project(const GroupSpec& g, const VerticalHyperplane& w, const Point& p) {
    g.check_point(p);
    if (w.normal().size() != g.m()) throw InputError("hyperplane dimension does not match group");
    const double s = p.x.dot(w.normal());
    Point pv_inv{-s * w.normal(), Vec::Zero(g.n2())};
    Point pw = mul(g, p, pv_inv);
    // the horizontal part lies in v-perp up to rounding; remove the residue
    pw.x -= pw.x.dot(w.normal()) * w.normal();
    return {pw, s};
}

AdaptedSpec adapt_basis(const GroupSpec& g, const Vec& v) {
    if (v.size() != g.m()) throw InputError("adapt_basis: vector dimension mismatch");
    const double n = v.norm();
    if (!(n > 0.0)) throw InputError("adapt_basis: zero vector");
    Eigen::MatrixXd r = completed_basis(v / n);
    const int m = g.m(), n2 = g.n2();
    std::vector<double> b(static_cast<std::size_t>(n2) * m * m, 0.0);
    for (int l = 0; l < n2; ++l) {
        Eigen::MatrixXd bl(m, m);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) bl(i, j) = g.bracket(l, i, j);
        Eigen::MatrixXd rotated = r.transpose() * bl * r;
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
                // enforce exact antisymmetry after rounding
                const double val = i == j ? 0.0 : (i < j ? rotated(i, j) : -rotated(j, i));
                b[(static_cast<std::size_t>(l) * m + i) * m + j] = val;
            }
    }
    return {GroupSpec(m, n2, std::move(b), g.name() + "-adapted"), r};
}

Point to_adapted(const AdaptedSpec& a, const Point& p) {
    Vec x = a.rotation.transpose() * Eigen::VectorXd(p.x);
    return {x, p.z};
}

Point from_adapted(const AdaptedSpec& a, const Point& p) {
    Vec x = a.rotation * Eigen::VectorXd(p.x);
    return {x, p.z};
}

}  // namespace carnot
