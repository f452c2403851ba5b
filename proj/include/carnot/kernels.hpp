#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "carnot/group.hpp"

namespace carnot {

enum class Symmetry { DilationAntisymmetric, Antisymmetric, None };

std::string to_string(Symmetry s);

/// A vector-valued kernel on G \ {0}, homogeneous of degree `degree`.
class Kernel {
public:
    /// Writes d_out components for a non-identity point.
    using EvalFn = std::function<void(const Point&, double*)>;

    Kernel(std::string name, int d_out, double degree, Symmetry symmetry, std::shared_ptr<const GroupSpec> spec,
           HomNorm nrm, EvalFn fn);

    const std::string& name() const { return name_; }
    int d_out() const { return d_out_; }
    double degree() const { return degree_; }
    Symmetry symmetry() const { return symmetry_; }
    const GroupSpec& spec() const { return *spec_; }
    std::shared_ptr<const GroupSpec> spec_ptr() const { return spec_; }
    const HomNorm& norm() const { return norm_; }

    /// Throws DomainError at the identity.
    Eigen::VectorXd operator()(const Point& p) const;
    void eval(const Point& p, std::span<double> out) const;
    /// No identity check; for inner loops that already exclude it.
    void eval_unchecked(const Point& p, double* out) const { fn_(p, out); }

private:
    std::string name_;
    int d_out_;
    double degree_;
    Symmetry symmetry_;
    std::shared_ptr<const GroupSpec> spec_;
    HomNorm norm_;
    EvalFn fn_;
};

/// Horizontal gradient of N^{2-Q}, N the Koranyi gauge; d_out = m.
/// `nrm` is the norm used for measuring the kernel, not for its formula.
Kernel gauge_riesz(const GroupSpec& g, HomNorm nrm = {NormKind::Koranyi});
/// (x / ||p||^Q, z / ||p||^{Q+1}); d_out = m + n2.
Kernel pseudo_riesz(const GroupSpec& g, HomNorm nrm = {NormKind::Koranyi});
/// ||p||^{1-Q}, scalar and positive. Satisfies the size conditions but has no cancellation.
Kernel control_kernel(const GroupSpec& g, HomNorm nrm = {NormKind::Koranyi});
/// K*(p) = K(p^{-1}).
Kernel adjoint(const Kernel& k);

/// Looks up "gauge_riesz", "pseudo_riesz" or "control".
Kernel make_kernel(const std::string& name, const GroupSpec& g, HomNorm nrm);

struct CZEstimate {
    double growth_const = 0.0;
    double holder_const = 0.0;
    double holder_beta = 0.0;
    double kappa = 0.0;
    std::size_t sample_count = 0;
};

struct CZOptions {
    double beta = 1.0;
    double kappa = 0.1;
    std::size_t n_samples = 4096;
    std::uint64_t seed = 1;
    /// Sample clouds are pushed through delta_t before evaluation.
    double cloud_scale = 1.0;
    /// Local pattern-search polish of the best raw samples.
    bool refine = true;
};

/// Empirical growth and Holder constants of the CZ conditions. Sup over
/// unit-sphere samples of |K| ||p||^{Q-1}, and over pairs with
/// d(p1, p2) <= kappa ||p1|| of |K(p1) - K(p2)| ||p1||^{Q-1+beta} / d^beta.
CZEstimate estimate_cz(const Kernel& k, const CZOptions& opts);

/// max over random p of |K(delta_{-1} p) + K(p)| / (|K(p)| + 1e-300).
double check_dilation_antisymmetry(const Kernel& k, std::size_t n_samples, std::uint64_t seed = 1);

/// max over random p of |K(p^{-1}) + K(p)| / (|K(p)| + 1e-300).
double check_antisymmetry(const Kernel& k, std::size_t n_samples, std::uint64_t seed = 1);

/// max over random p and the given t of |K(delta_t p) - t^degree K(p)| / |t^degree K(p)|.
double check_homogeneity(const Kernel& k, std::span<const double> ts, std::size_t n_samples, std::uint64_t seed = 1);

}  // namespace carnot
