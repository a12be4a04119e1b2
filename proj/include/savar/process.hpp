#pragma once

// Sparse additive nonlinear VAR(1) processes
//
//   X_t^{(j)} = sum_k h_jk(X_{t-1}^{(k)}) + eps_t^{(j)},
//
// their Lipschitz matrices, network patterns and simulation.
// Indices are zero-based throughout the library.

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "savar/component.hpp"
#include "savar/rng.hpp"

namespace savar {

enum class NoiseKind { gaussian, laplace, student_t };

struct NoiseModel {
    NoiseKind kind = NoiseKind::gaussian;
    double scale = 0.2;
    double df = 5.0;  // student_t only

    void validate() const;
    /// Scaled draw: scale * (standard variate). Laplace uses unit variance;
    /// student_t is the raw t(df) variate.
    double draw(Rng& rng) const;
    /// E|eps|^2 of a single coordinate.
    double second_moment() const;
    std::string name() const;
    static NoiseKind parse_kind(const std::string& s);
};

using EntryKey = std::pair<std::size_t, std::size_t>;  // (target j, source k)

/// Generative model: which component sits at each (j, k), and the noise law.
class AdditiveVarSpec {
public:
    AdditiveVarSpec() = default;
    explicit AdditiveVarSpec(std::size_t p, NoiseModel noise = {}, std::uint64_t seed = 0);

    std::size_t dim() const noexcept { return p_; }
    const NoiseModel& noise() const noexcept { return noise_; }
    std::uint64_t seed() const noexcept { return seed_; }
    void set_noise(NoiseModel noise);
    void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }

    /// Zero components are dropped; a non-zero one replaces any previous entry.
    void set(std::size_t j, std::size_t k, ComponentFunction fn);
    const std::map<EntryKey, ComponentFunction>& entries() const noexcept { return entries_; }

    /// Largest number of nonzero components in one row.
    std::size_t s0() const;
    /// Total number of nonzero components.
    std::size_t s() const noexcept { return entries_.size(); }
    /// Binary support matrix, 1 where (j, k) is an entry.
    Eigen::MatrixXi support() const;

    /// h(x) written into out.
    void transition(std::span<const double> x, std::span<double> out) const;

    void validate() const;

private:
    std::size_t p_ = 0;
    NoiseModel noise_;
    std::uint64_t seed_ = 0;
    std::map<EntryKey, ComponentFunction> entries_;
    // Row-compressed copy used by transition().
    std::vector<std::size_t> row_start_;
    std::vector<std::size_t> col_;
    std::vector<ComponentFunction> fns_;

    void rebuild_rows();
};

/// Entrywise Lipschitz constants of the transition components.
struct LipschitzMatrix {
    Eigen::MatrixXd H;
};

LipschitzMatrix lipschitz_matrix(const AdditiveVarSpec& spec);

/// min over 1 <= m <= m_max of ||H^m||_inf^{1/m}.
double stability_margin(const LipschitzMatrix& H, int m_max = 8);

/// Rows are time, columns are variables.
struct TimeSeriesPanel {
    Eigen::MatrixXd data;
    std::vector<std::string> labels;

    std::size_t rows() const noexcept { return static_cast<std::size_t>(data.rows()); }
    std::size_t cols() const noexcept { return static_cast<std::size_t>(data.cols()); }
    /// n >= 2, finite entries, label count matches.
    void validate() const;
    /// Column labels, defaulting to x1..xp.
    std::vector<std::string> column_names() const;
    /// Rows [begin, end).
    TimeSeriesPanel slice(std::size_t begin, std::size_t end) const;
};

struct SimulationOptions {
    std::size_t burn_in = 500;
    int margin_power = 8;  // m_max for the stability check
};

/// Iterates X_t = h(X_{t-1}) + eps_t from X_0 = 0, discards burn_in rows and
/// returns the next n. Throws ErrorKind::model for a nonstationary spec or a
/// non-finite state.
TimeSeriesPanel simulate(const AdditiveVarSpec& spec, std::size_t n, std::uint64_t seed,
                         const SimulationOptions& options = {});

/// Monte-Carlo mean of ||X_t - X'_t||_inf for t = 1..horizon, where both
/// copies share innovations and X'_0 = X_0 + gap (X_0 drawn after burn-in).
std::vector<double> coupling_decay(const AdditiveVarSpec& spec, std::size_t horizon,
                                   std::size_t reps, std::uint64_t seed, double gap = 1.0,
                                   const SimulationOptions& options = {});

enum class PatternKind { random, band, cluster };

struct PatternSpec {
    PatternKind kind = PatternKind::random;
    std::size_t p = 20;
    std::size_t per_row_nonzeros = 5;
    std::uint64_t seed = 0;

    static constexpr std::size_t cluster_block = 10;
    static PatternKind parse_kind(const std::string& s);
    static std::string name(PatternKind kind);
};

/// Binary adjacency with exactly per_row_nonzeros ones per row.
Eigen::MatrixXi generate_pattern(const PatternSpec& pattern);

/// Places the five benchmark components on an adjacency: in each row the
/// nonzero columns, in increasing order, receive f1, f2, ..., f5 (cycling
/// when a row holds more than five).
AdditiveVarSpec benchmark_spec(const Eigen::MatrixXi& adjacency, NoiseModel noise = {},
                               std::uint64_t seed = 0);

}  // namespace savar
