#pragma once

// Orthonormal basis expansion of the lagged covariates and the cached
// design/Gram quantities the solver works from.

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "savar/component.hpp"
#include "savar/process.hpp"

namespace savar {

enum class BasisKind {
    fourier,   // orthonormal trigonometric system on [-c0, c0]
    identity,  // psi(x) = x, a single feature (linear VAR baseline)
};

/// Fourier elements, in order: 1/sqrt(2 c0), then cos(m pi x / c0)/sqrt(c0),
/// sin(m pi x / c0)/sqrt(c0) for m = 1, 2, ... Arguments outside [-c0, c0]
/// are clamped to the boundary. With include_constant = false the constant
/// element is skipped and the family starts at the first cosine.
struct BasisFamily {
    BasisKind kind = BasisKind::fourier;
    std::size_t size = 6;  // L, elements per covariate
    double c0 = 1.0;
    bool include_constant = true;

    void validate() const;
    /// Uniform bound B on |psi_l| over the family (identity: +inf).
    double bound() const;
    /// Element `index` (zero-based, < size) at x.
    double eval(std::size_t index, double x) const;
    void eval_all(double x, std::span<double> out) const;
    /// Evaluates every element on a column of inputs; out is column-major
    /// with leading dimension ld (>= x.size()), one column per element.
    void eval_columns(std::span<const double> x, double* out, std::size_t ld) const;

    static BasisFamily identity_feature();
};

/// 3 x pooled standard deviation of the panel (columns centred first).
double default_support_half_width(const TimeSeriesPanel& panel);

/// Symmetric eigendecomposition of one Gram block.
struct GramFactor {
    Eigen::VectorXd eigenvalues;  // ascending
    Eigen::MatrixXd eigenvectors;

    double min_eigenvalue() const { return eigenvalues.size() ? eigenvalues(0) : 0.0; }
    bool degenerate(double ridge_floor) const { return min_eigenvalue() < ridge_floor; }
    /// Eigenvalues after the ridge floor: shifted by ridge_floor when the
    /// smallest one is below it.
    Eigen::VectorXd floored(double ridge_floor) const;
    Eigen::MatrixXd inv_sqrt(double ridge_floor) const;
    Eigen::MatrixXd sqrt(double ridge_floor) const;
    Eigen::MatrixXd reconstruct() const;
};

struct DesignOptions {
    /// Centre the targets and every design column (unpenalized intercept per
    /// response). Combine with a basis without the constant element.
    bool center = false;
    /// Per-covariate location subtracted before the basis is applied.
    std::optional<Eigen::VectorXd> shift;
};

/// Lag-one design of a panel with n rows: m = n - 1 sample pairs. Row t of
/// the design holds psi(X_t) and row t of the targets holds X_{t+1}.
/// Immutable after build.
class DesignCache {
public:
    static DesignCache build(const TimeSeriesPanel& panel, const BasisFamily& basis,
                             const DesignOptions& options = {});

    std::size_t samples() const noexcept { return m_; }
    std::size_t dim() const noexcept { return p_; }
    std::size_t basis_size() const noexcept { return L_; }
    std::size_t features() const noexcept { return p_ * L_; }
    const BasisFamily& basis() const noexcept { return basis_; }
    bool centered() const noexcept { return centered_; }
    const Eigen::VectorXd& shift() const noexcept { return shift_; }

    /// m x pL, covariate k occupies columns [kL, (k+1)L).
    const Eigen::MatrixXd& design() const noexcept { return design_; }
    auto block(std::size_t k) const { return design_.middleCols(k * L_, L_); }
    /// m x p responses.
    const Eigen::MatrixXd& targets() const noexcept { return targets_; }
    /// (1/m) Design^T Design, pL x pL.
    const Eigen::MatrixXd& cross_gram() const noexcept { return cross_gram_; }
    auto gram(std::size_t k) const { return cross_gram_.block(k * L_, k * L_, L_, L_); }
    const GramFactor& factor(std::size_t k) const { return factors_[k]; }
    /// (1/m) Design^T Targets, pL x p.
    const Eigen::MatrixXd& moments() const noexcept { return moments_; }
    /// (1/m) ||Y_j||^2.
    double response_energy(std::size_t j) const { return energy_(static_cast<Eigen::Index>(j)); }

    /// Means removed when centred (zeros otherwise).
    const Eigen::VectorXd& column_means() const noexcept { return column_means_; }
    const Eigen::VectorXd& target_means() const noexcept { return target_means_; }

    /// Uncentred feature vector psi(x - shift) of one state, length pL.
    void feature_row(std::span<const double> x, std::span<double> out) const;

    /// Covariates whose Gram block falls under the ridge floor.
    std::vector<std::size_t> degenerate_grams(double ridge_floor) const;

private:
    std::size_t m_ = 0, p_ = 0, L_ = 0;
    BasisFamily basis_;
    bool centered_ = false;
    Eigen::VectorXd shift_;
    Eigen::MatrixXd design_, targets_, cross_gram_, moments_;
    Eigen::VectorXd energy_, column_means_, target_means_;
    std::vector<GramFactor> factors_;
};

struct Projection {
    Eigen::VectorXd coefficients;
    double remainder_sup = 0.0;
    double remainder_l2 = 0.0;
};

/// Lebesgue projection of f on the first `terms` elements of a Fourier family
/// over [-c0, c0], with sup and L2 norms of the truncation remainder.
Projection project_function(const ComponentFunction& f, const BasisFamily& basis, std::size_t terms);

}  // namespace savar
