#pragma once

// Functional group lasso for the additive VAR:
//
//   (1/m) sum_t ||X_t - Psi(X_{t-1})^T b||^2 + lambda sum_{j,k} ||Sigma_k^{1/2} b_{j,k}||_2
//
// solved by block coordinate descent with exact group updates, plus the
// optimality certificate and evaluation of the fitted components.

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

#include "savar/basis.hpp"
#include "savar/process.hpp"

namespace savar {

/// Coefficients b in R^{p x p x L}; block (j, k) is b_{j,k} in R^L. Flat
/// order is j outer, k middle, l inner, i.e. a column-major (pL x p) matrix
/// whose column j is the response-j coefficient vector.
class CoefficientTensor {
public:
    CoefficientTensor() = default;
    CoefficientTensor(std::size_t p, std::size_t L)
        : p_(p), L_(L), data_(p * p * L, 0.0) {}

    std::size_t dim() const noexcept { return p_; }
    std::size_t basis_size() const noexcept { return L_; }

    std::span<double> block(std::size_t j, std::size_t k) {
        return {data_.data() + (j * p_ + k) * L_, L_};
    }
    std::span<const double> block(std::size_t j, std::size_t k) const {
        return {data_.data() + (j * p_ + k) * L_, L_};
    }
    std::span<double> response(std::size_t j) { return {data_.data() + j * p_ * L_, p_ * L_}; }
    std::span<const double> response(std::size_t j) const {
        return {data_.data() + j * p_ * L_, p_ * L_};
    }
    std::span<const double> flat() const noexcept { return data_; }
    std::span<double> flat() noexcept { return data_; }

    Eigen::Map<const Eigen::MatrixXd> as_matrix() const {
        return {data_.data(), static_cast<Eigen::Index>(p_ * L_), static_cast<Eigen::Index>(p_)};
    }
    Eigen::Map<Eigen::MatrixXd> as_matrix() {
        return {data_.data(), static_cast<Eigen::Index>(p_ * L_), static_cast<Eigen::Index>(p_)};
    }

    bool block_is_zero(std::size_t j, std::size_t k) const;

private:
    std::size_t p_ = 0, L_ = 0;
    std::vector<double> data_;
};

struct FitConfig {
    double lambda = 0.0;
    int max_sweeps = 1000;
    double tol_objective = 1e-8;  // relative decrease per sweep
    double tol_kkt = 1e-6;
    double ridge_floor = 1e-8;
    bool active_set = true;

    void validate() const;
};

struct FitResult {
    double lambda = 0.0;
    CoefficientTensor coefficients;
    /// Total objective after each sweep (responses that finished early hold
    /// their final value).
    std::vector<double> objective_trace;
    int sweeps_used = 0;
    bool converged = false;
    double kkt_residual = 0.0;
    std::vector<EntryKey> support;
    Eigen::MatrixXi adjacency;
    /// sqrt((1/m) sum_t (psi_k^T b_{j,k})^2).
    Eigen::MatrixXd group_norms;
    std::vector<std::size_t> degenerate_grams;

    // Enough of the design to evaluate the fitted model on new inputs.
    BasisFamily basis;
    Eigen::VectorXd shift;
    Eigen::VectorXd intercept;
    std::vector<std::string> labels;

    std::size_t dim() const noexcept { return coefficients.dim(); }
};

/// Loss plus penalty, evaluated from the design matrix directly.
double objective(const CoefficientTensor& b, const DesignCache& cache, double lambda);

/// Smallest lambda with the all-zero solution optimal:
/// max_{j,k} 2 ||Sigma_k^{-1/2} (1/m) Psi_k^T Y_j||_2.
double lambda_max(const DesignCache& cache, double ridge_floor = 1e-8);

/// argmin_beta (1/m)||r - Psi_k beta||^2 + lambda ||Sigma_k^{1/2} beta||_2 in
/// closed form, where r is the partial residual of response j without block k.
/// With ridge_floor = 0 a singular Gram block throws "degenerate Gram".
Eigen::VectorXd block_update(std::size_t j, std::size_t k, std::span<const double> partial_residual,
                             const DesignCache& cache, double lambda, double ridge_floor = 1e-8);

/// Block coordinate descent; responses are independent and solved in parallel.
FitResult fit(const DesignCache& cache, const FitConfig& config,
              const CoefficientTensor* warm_start = nullptr);

/// Fits along a lambda sequence (any order, usually descending) with warm
/// starts; config.lambda is ignored.
std::vector<FitResult> fit_path(const DesignCache& cache, std::span<const double> lambdas,
                                const FitConfig& config);

/// Entry (j, k): largest lambda of the sequence at which block (j, k) is
/// nonzero, 0 if never. Same warm-started path as fit_path, but a response
/// stops once every block has entered, since later lambdas cannot raise any
/// of its entries.
Eigen::MatrixXd activation_lambdas(const DesignCache& cache, std::span<const double> lambdas,
                                   const FitConfig& config);

/// Largest violation of the optimality system, in units of
/// ||Sigma_k^{-1/2} (1/m) Psi_k^T residual||: for a zero block
/// max(0, ||Sigma_k^{-1/2} grad_k|| - lambda/2), for an active block
/// ||Sigma_k^{-1/2} grad_k - (lambda/2) u_k|| with u_k the unit vector along
/// Sigma_k^{1/2} b_{j,k}. Zero means optimal.
double kkt_check(const CoefficientTensor& b, const DesignCache& cache, double lambda,
                 double ridge_floor = 1e-8);

/// hat h_jk on a grid (psi_k^T b_{j,k}, clamped outside the support).
std::vector<double> estimate_function(const FitResult& result, std::size_t j, std::size_t k,
                                      std::span<const double> grid);

/// Conditional-mean forecast of X_{t+1} given X_t = x.
Eigen::VectorXd predict_one_step(const FitResult& result, std::span<const double> x);

/// `count` log-spaced values from hi down to hi * ratio.
std::vector<double> log_lambda_grid(double hi, std::size_t count, double ratio);

}  // namespace savar
