#pragma once

// Network-recovery metrics over the regularization path, the simulation
// study driver, rolling-origin cross-validation and the linear VAR baseline.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "savar/basis.hpp"
#include "savar/estimator.hpp"
#include "savar/process.hpp"

namespace savar {

/// Entry (j, k) scores the edge k -> j. Self-edges are included.
struct EdgeScores {
    Eigen::MatrixXd scores;
    Eigen::MatrixXi truth;

    void validate() const;
};

/// score(j, k) = largest lambda on the (descending) grid at which block
/// (j, k) is active, 0 if it never is. Fits share warm starts down the path.
EdgeScores score_path(const DesignCache& cache, std::span<const double> lambda_grid,
                      const FitConfig& config = {});

/// Area under the ROC curve: trapezoids over all distinct score thresholds,
/// tied scores form one step. Throws "undefined metric" without both classes.
double auroc(const EdgeScores& s);
/// Area under the precision-recall curve, step interpolation (average
/// precision over distinct thresholds).
double aupr(const EdgeScores& s);

struct ExperimentPlan {
    PatternSpec pattern;
    std::size_t n = 500;
    std::size_t reps = 200;
    std::size_t L = 6;
    /// Descending multipliers of each panel's lambda_max. Empty: 50 log-spaced
    /// values from 1 down to 1e-3.
    std::vector<double> lambda_grid;
    double noise_scale = 0.2;
    std::size_t burn_in = 500;
    /// Unpenalized intercept (centred design, basis without constant).
    bool intercept = true;
    std::uint64_t seed = 1;
    /// Path fits only need to place each block's entry point; these
    /// tolerances leave the scores unchanged at a fraction of the cost.
    FitConfig fit{.tol_objective = 1e-6, .tol_kkt = 1e-5};

    void validate() const;
    std::vector<double> relative_grid() const;
};

struct ReplicationScore {
    double auroc = 0.0;
    double aupr = 0.0;
};

/// Hooks so a driver can checkpoint replications and resume.
struct ReplicationHooks {
    std::function<std::optional<ReplicationScore>(std::size_t rep)> load;
    std::function<void(std::size_t rep, const ReplicationScore&)> store;
};

struct Table1Cell {
    double mean_auroc = 0.0, mean_aupr = 0.0;
    /// Standard errors of the means; NaN when reps == 1.
    double se_auroc = 0.0, se_aupr = 0.0;
    std::vector<ReplicationScore> replications;
};

/// One replication of the simulation study (pattern, benchmark components,
/// simulate, path scores, metrics).
ReplicationScore run_replication(const ExperimentPlan& plan, std::size_t rep);
Table1Cell replicate_table1(const ExperimentPlan& plan, const ReplicationHooks& hooks = {});

struct CvOptions {
    std::size_t folds = 5;
    /// lambda_grid holds multipliers of the full-panel lambda_max for each L.
    bool relative_grid = true;
    bool intercept = true;
    /// Basis half-width; 0 means 3 x pooled standard deviation of the panel.
    double c0 = 0.0;
    /// Tune the linear baseline instead; L_grid is then ignored.
    bool linear = false;
    FitConfig fit;
};

struct CvRow {
    std::size_t L = 0;
    double lambda = 0.0;
    double mean_error = 0.0;
    double std_error = 0.0;
    std::vector<double> fold_errors;
};

struct CvResult {
    double lambda_star = 0.0;
    std::size_t L_star = 0;
    std::vector<CvRow> table;
};

/// Rolling-origin (expanding window) cross-validation of one-step-ahead
/// squared error over (lambda, L). Ties go to the larger lambda.
CvResult ts_cross_validate(const TimeSeriesPanel& panel, std::span<const double> lambda_grid,
                           std::span<const std::size_t> L_grid, const CvOptions& options = {});

/// Design settings shared by the nonlinear fit and cross-validation.
DesignCache build_fourier_design(const TimeSeriesPanel& panel, std::size_t L, bool intercept,
                                 double c0 = 0.0);

/// Lasso linear VAR: the same solver with the identity feature psi(x) = x.
FitResult fit_linear_var_baseline(const TimeSeriesPanel& panel, double lambda, bool intercept = true,
                                  const FitConfig& config = {});
DesignCache build_linear_design(const TimeSeriesPanel& panel, bool intercept);

/// Mean over rows t >= 1 of ||X_t - forecast(X_{t-1})||^2 / p.
double one_step_mse(const FitResult& fit, const TimeSeriesPanel& panel);

}  // namespace savar
