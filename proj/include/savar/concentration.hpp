#pragma once

// Monte-Carlo tail probabilities of centred sums of a Lipschitz functional
// along a simulated path, and Bernstein-type envelopes fitted to them.

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "savar/process.hpp"
#include "savar/rng.hpp"

namespace savar {

/// g : R^p -> R with |g(x) - g(y)| <= sum_i G_i |x_i - y_i|.
struct LipschitzFunctional {
    std::function<double(std::span<const double>)> g;
    Eigen::VectorXd weights;  // G, nonnegative
    std::optional<double> sup_bound;  // M with |g| <= M, if bounded
    std::string name;

    double tau() const { return weights.sum(); }
    double operator()(std::span<const double> x) const { return g(x); }
    void validate() const;

    /// Largest |g(x) - g(y)| / (G^T |x - y|) over random pairs; <= 1 when the
    /// declared weights are valid.
    double worst_ratio(Rng& rng, std::size_t pairs = 10000, double spread = 3.0) const;

    /// clip(scale * x_i, -M, M).
    static LipschitzFunctional clipped_coordinate(std::size_t p, std::size_t index, double M,
                                                  double scale = 1.0);
    /// sum_i w_i clip(x_i, -M, M).
    static LipschitzFunctional clipped_sum(Eigen::VectorXd w, double M);
    /// x_i, unbounded.
    static LipschitzFunctional coordinate(std::size_t p, std::size_t index);
};

struct TailExperiment {
    AdditiveVarSpec spec;
    LipschitzFunctional functional;
    std::size_t n = 100;
    std::vector<double> z_grid;
    std::size_t reps = 10000;
    std::uint64_t seed = 1;
    /// Steps discarded before each path; unset picks the number that shrinks
    /// the initial condition by 1e-12 under the stability margin (<= 500).
    std::optional<std::size_t> burn_in;
    /// Length of the long path estimating E g(X).
    std::size_t pilot_cap = 20'000'000;

    void validate() const;
};

struct TailPoint {
    double z = 0.0;
    double probability = 0.0;
    double wilson_lo = 0.0, wilson_hi = 0.0;
    std::size_t count = 0;
};

struct TailEstimate {
    std::size_t n = 0, reps = 0;
    double centre = 0.0;         // pilot estimate of E g(X)
    double functional_var = 0.0; // pilot variance of g(X)
    std::vector<TailPoint> points;
};

/// P(|sum_{t=1}^n g(X_t) - n E g| >= z) for each z, with 95% Wilson bounds.
TailEstimate mc_tail(const TailExperiment& e);

/// 95% Wilson score interval; collapses to the point when `exact` is set.
std::pair<double, double> wilson_interval(std::size_t hits, std::size_t total, bool exact = false);

enum class EnvelopeForm {
    bounded,         // 2 exp(-z^2 / (c1 tau^2 n + c2 tau M z))
    subexponential,  // 2 exp(-z^2 / (c1 tau^2 n + c2 tau z))
};

/// Envelope values (capped at 1 is left to the caller).
std::vector<double> bernstein_envelope(double tau, double M, std::size_t n, std::span<const double> z,
                                       double c1, double c2, EnvelopeForm form = EnvelopeForm::bounded);
/// 2 exp(-c1 z^2 / (tau^2 n)).
std::vector<double> hoeffding_envelope(double tau, std::size_t n, std::span<const double> z, double c1);

/// Exponent of the i.i.d. Bernstein bound 2 exp(-z^2 / (2 n var + 2 b z / 3))
/// for summands with variance var and |g - E g| <= b.
double classical_bernstein_exponent(double var, double b, std::size_t n, double z);

/// Largest ratio, either way round, between the fitted envelope exponent and
/// the classical one over the positive grid points of the tails.
double exponent_gap(std::span<const TailEstimate> tails, double tau, double M, double c1, double c2,
                    double var, double b);

struct ExplicitConstants {
    double c1 = 0.0, c2 = 0.0;
};

/// Closed-form constants from the margin rho in (0, 1) and the noise second
/// moment mu2: c1 = 32 e^2 mu2^2 / (rho^2 log rho)^2, c2 = 8 e / (-rho^2 log rho).
ExplicitConstants explicit_constants(double rho, double mu2);

struct EnvelopeGrid {
    std::vector<double> c1, c2;
    /// c1: 241 log-spaced values on [1e-3, 1e5]; c2: 0 plus the same values.
    static EnvelopeGrid standard();
};

struct EnvelopeFit {
    double c1 = 0.0, c2 = 0.0;
    std::size_t points = 0;  // tail points checked (z > 0)
};

/// Tightest (c1, c2) on the grid whose envelope lies above every Wilson upper
/// bound; tightness is the summed exponent sum z^2 / (c1 tau^2 n + c2 ...).
/// With tau = 0 or no z > 0 every pair dominates and the grid minimum is
/// returned. Throws ErrorKind::model when no grid pair dominates.
EnvelopeFit fit_envelope(std::span<const TailEstimate> tails, double tau, double M,
                         const EnvelopeGrid& grid = EnvelopeGrid::standard(),
                         EnvelopeForm form = EnvelopeForm::bounded);

struct HoeffdingReport {
    double c1 = 0.0;   // largest dominating constant
    double r_squared = 0.0;  // log tail against z^2, moderate-deviation points
    std::size_t regression_points = 0;
};

/// Hoeffding-type fit for functionals bounded by 1: the largest dominating
/// constant (from c1_grid when given, else in closed form; +inf when nothing
/// constrains it). Throws ErrorKind::model when no constant dominates.
HoeffdingReport hoeffding_check(std::span<const TailEstimate> tails, double tau, double M,
                                std::span<const double> c1_grid = {});

struct CollapseReport {
    double max_standardized_gap = 0.0;
    std::size_t comparisons = 0;
};

/// Tails on grids z = u sqrt(n) sharing the same u values across n: the
/// largest |log p_a - log p_b| divided by its delta-method standard error,
/// over u and pairs of n, using points with at least min_hits exceedances.
CollapseReport tail_collapse(std::span<const TailEstimate> tails, std::size_t min_hits = 10);

}  // namespace savar
