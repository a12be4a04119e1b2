#include "savar/process.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

#include "savar/error.hpp"
#include "savar/log.hpp"

namespace savar {

// ---------------------------------------------------------------- noise

void NoiseModel::validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) fail_validation("noise scale must be > 0");
    if (kind == NoiseKind::student_t && !(df > 2.0))
        fail_validation("student_t noise needs df > 2 (finite variance)");
}

double NoiseModel::draw(Rng& rng) const {
    switch (kind) {
        case NoiseKind::gaussian: {
            std::normal_distribution<double> d(0.0, 1.0);
            return scale * d(rng);
        }
        case NoiseKind::laplace: {
            std::exponential_distribution<double> e(1.0);
            const double a = e(rng);
            const double b = e(rng);
            return scale * (a - b) / std::numbers::sqrt2;
        }
        case NoiseKind::student_t: {
            std::student_t_distribution<double> t(df);
            return scale * t(rng);
        }
    }
    return 0.0;
}

double NoiseModel::second_moment() const {
    if (kind == NoiseKind::student_t) return scale * scale * df / (df - 2.0);
    return scale * scale;
}

std::string NoiseModel::name() const {
    switch (kind) {
        case NoiseKind::gaussian: return "gaussian";
        case NoiseKind::laplace: return "laplace";
        case NoiseKind::student_t: return "student_t";
    }
    return "gaussian";
}

NoiseKind NoiseModel::parse_kind(const std::string& s) {
    if (s == "gaussian") return NoiseKind::gaussian;
    if (s == "laplace") return NoiseKind::laplace;
    if (s == "student_t") return NoiseKind::student_t;
    fail_validation("unknown noise kind '" + s + "'");
}

// ----------------------------------------------------------------- spec

AdditiveVarSpec::AdditiveVarSpec(std::size_t p, NoiseModel noise, std::uint64_t seed)
    : p_(p), noise_(noise), seed_(seed) {
    if (p == 0) fail_validation("dimension p must be positive");
    noise_.validate();
    rebuild_rows();
}

void AdditiveVarSpec::set_noise(NoiseModel noise) {
    noise.validate();
    noise_ = noise;
}

void AdditiveVarSpec::set(std::size_t j, std::size_t k, ComponentFunction fn) {
    if (j >= p_ || k >= p_) {
        std::ostringstream os;
        os << "entry (" << j << ", " << k << ") outside dimension " << p_;
        fail_validation(os.str());
    }
    if (fn.is_zero())
        entries_.erase({j, k});
    else
        entries_[{j, k}] = std::move(fn);
    rebuild_rows();
}

void AdditiveVarSpec::rebuild_rows() {
    row_start_.assign(p_ + 1, 0);
    col_.clear();
    fns_.clear();
    for (const auto& [key, fn] : entries_) ++row_start_[key.first + 1];
    std::partial_sum(row_start_.begin(), row_start_.end(), row_start_.begin());
    col_.reserve(entries_.size());
    fns_.reserve(entries_.size());
    for (const auto& [key, fn] : entries_) {  // map order is row-major
        col_.push_back(key.second);
        fns_.push_back(fn);
    }
}

std::size_t AdditiveVarSpec::s0() const {
    std::size_t best = 0;
    for (std::size_t j = 0; j < p_; ++j) best = std::max(best, row_start_[j + 1] - row_start_[j]);
    return best;
}

Eigen::MatrixXi AdditiveVarSpec::support() const {
    Eigen::MatrixXi a = Eigen::MatrixXi::Zero(p_, p_);
    for (const auto& [key, fn] : entries_) a(key.first, key.second) = 1;
    return a;
}

void AdditiveVarSpec::transition(std::span<const double> x, std::span<double> out) const {
    for (std::size_t j = 0; j < p_; ++j) {
        double acc = 0.0;
        for (std::size_t e = row_start_[j]; e < row_start_[j + 1]; ++e) acc += fns_[e](x[col_[e]]);
        out[j] = acc;
    }
}

void AdditiveVarSpec::validate() const {
    if (p_ == 0) fail_validation("dimension p must be positive");
    noise_.validate();
    for (const auto& [key, fn] : entries_)
        if (key.first >= p_ || key.second >= p_) fail_validation("entry index out of range");
}

// ------------------------------------------------------------ lipschitz

LipschitzMatrix lipschitz_matrix(const AdditiveVarSpec& spec) {
    spec.validate();
    LipschitzMatrix out{Eigen::MatrixXd::Zero(spec.dim(), spec.dim())};
    for (const auto& [key, fn] : spec.entries()) out.H(key.first, key.second) = fn.lipschitz_constant();
    return out;
}

double stability_margin(const LipschitzMatrix& lip, int m_max) {
    if (m_max < 1) fail_validation("m_max must be >= 1");
    const Eigen::MatrixXd& H = lip.H;
    if ((H.array() < 0.0).any()) fail_validation("Lipschitz matrix must be nonnegative");
    Eigen::MatrixXd power = H;
    double best = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= m_max; ++m) {
        if (m > 1) power = power * H;
        const double norm = power.rowwise().sum().maxCoeff();
        best = std::min(best, std::pow(norm, 1.0 / m));
        if (best == 0.0) break;
    }
    return best;
}

// ---------------------------------------------------------------- panel

void TimeSeriesPanel::validate() const {
    if (data.rows() < 2) fail_validation("panel needs at least 2 rows");
    if (data.cols() < 1) fail_validation("panel needs at least 1 column");
    if (!data.allFinite()) {
        for (Eigen::Index i = 0; i < data.rows(); ++i)
            for (Eigen::Index j = 0; j < data.cols(); ++j)
                if (!std::isfinite(data(i, j))) {
                    std::ostringstream os;
                    os << "non-finite panel entry at row " << i + 1 << ", column " << j + 1;
                    fail_validation(os.str());
                }
    }
    if (!labels.empty() && labels.size() != cols())
        fail_validation("label count does not match column count");
}

std::vector<std::string> TimeSeriesPanel::column_names() const {
    if (!labels.empty()) return labels;
    std::vector<std::string> names;
    names.reserve(cols());
    for (std::size_t j = 0; j < cols(); ++j) names.push_back("x" + std::to_string(j + 1));
    return names;
}

TimeSeriesPanel TimeSeriesPanel::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > rows()) fail_validation("panel slice out of range");
    return {data.middleRows(begin, end - begin), labels};
}

// ----------------------------------------------------------- simulation

namespace {

void check_stationary(const AdditiveVarSpec& spec, const SimulationOptions& options,
                      double* margin_out) {
    const double margin = stability_margin(lipschitz_matrix(spec), options.margin_power);
    if (!(margin < 1.0)) {
        std::ostringstream os;
        os << "nonstationary specification (stability margin " << margin << " >= 1)";
        fail_model(os.str());
    }
    if (margin > 0.0 && std::pow(margin, static_cast<double>(options.burn_in)) > 1e-8) {
        std::ostringstream os;
        os << "burn_in " << options.burn_in << " leaves initial-state influence above 1e-8 (margin "
           << margin << ")";
        warn(os.str());
    }
    if (margin_out) *margin_out = margin;
}

}  // namespace

TimeSeriesPanel simulate(const AdditiveVarSpec& spec, std::size_t n, std::uint64_t seed,
                         const SimulationOptions& options) {
    spec.validate();
    if (n == 0) fail_validation("n must be positive");
    check_stationary(spec, options, nullptr);

    const std::size_t p = spec.dim();
    Rng rng = make_rng(seed);
    std::vector<double> x(p, 0.0), next(p);
    TimeSeriesPanel panel{Eigen::MatrixXd(n, p), {}};
    const std::size_t total = options.burn_in + n;
    for (std::size_t t = 0; t < total; ++t) {
        spec.transition(x, next);
        for (std::size_t j = 0; j < p; ++j) {
            next[j] += spec.noise().draw(rng);
            if (!std::isfinite(next[j])) {
                std::ostringstream os;
                os << "non-finite state at time index " << t << " (variable " << j << ")";
                fail_model(os.str());
            }
        }
        x.swap(next);
        if (t >= options.burn_in) {
            const auto row = static_cast<Eigen::Index>(t - options.burn_in);
            for (std::size_t j = 0; j < p; ++j) panel.data(row, static_cast<Eigen::Index>(j)) = x[j];
        }
    }
    return panel;
}

std::vector<double> coupling_decay(const AdditiveVarSpec& spec, std::size_t horizon,
                                   std::size_t reps, std::uint64_t seed, double gap,
                                   const SimulationOptions& options) {
    spec.validate();
    if (horizon == 0 || reps == 0) fail_validation("horizon and reps must be positive");
    check_stationary(spec, options, nullptr);

    const std::size_t p = spec.dim();
    std::vector<double> per_rep(reps * horizon, 0.0);

#pragma omp parallel for schedule(dynamic, 8)
    for (std::size_t r = 0; r < reps; ++r) {
        Rng rng = make_rng(seed, r);
        std::vector<double> x(p, 0.0), y(p), hx(p), hy(p), eps(p);
        for (std::size_t t = 0; t < options.burn_in; ++t) {
            spec.transition(x, hx);
            for (std::size_t j = 0; j < p; ++j) x[j] = hx[j] + spec.noise().draw(rng);
        }
        for (std::size_t j = 0; j < p; ++j) y[j] = x[j] + gap;
        for (std::size_t t = 0; t < horizon; ++t) {
            for (std::size_t j = 0; j < p; ++j) eps[j] = spec.noise().draw(rng);
            spec.transition(x, hx);
            spec.transition(y, hy);
            double dist = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                x[j] = hx[j] + eps[j];
                y[j] = hy[j] + eps[j];
                dist = std::max(dist, std::abs(x[j] - y[j]));
            }
            per_rep[r * horizon + t] = dist;
        }
    }

    std::vector<double> decay(horizon, 0.0);
    for (std::size_t r = 0; r < reps; ++r)
        for (std::size_t t = 0; t < horizon; ++t) decay[t] += per_rep[r * horizon + t];
    for (double& d : decay) d /= static_cast<double>(reps);
    return decay;
}

// -------------------------------------------------------------- pattern

PatternKind PatternSpec::parse_kind(const std::string& s) {
    if (s == "random") return PatternKind::random;
    if (s == "band") return PatternKind::band;
    if (s == "cluster") return PatternKind::cluster;
    fail_validation("unknown pattern '" + s + "' (expected random, band or cluster)");
}

std::string PatternSpec::name(PatternKind kind) {
    switch (kind) {
        case PatternKind::random: return "random";
        case PatternKind::band: return "band";
        case PatternKind::cluster: return "cluster";
    }
    return "random";
}

namespace {

// r distinct indices from [begin, begin + width), uniformly.
void choose_columns(Rng& rng, std::size_t begin, std::size_t width, std::size_t r,
                    Eigen::MatrixXi& a, Eigen::Index row) {
    std::vector<std::size_t> cols(width);
    std::iota(cols.begin(), cols.end(), begin);
    for (std::size_t i = 0; i < r; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, width - 1);
        std::swap(cols[i], cols[pick(rng)]);
        a(row, static_cast<Eigen::Index>(cols[i])) = 1;
    }
}

}  // namespace

Eigen::MatrixXi generate_pattern(const PatternSpec& pattern) {
    const std::size_t p = pattern.p;
    const std::size_t r = pattern.per_row_nonzeros;
    if (p == 0 || r == 0) fail_validation("pattern needs p > 0 and per_row_nonzeros > 0");
    if (r > p) fail_validation("per_row_nonzeros exceeds p");
    Eigen::MatrixXi a = Eigen::MatrixXi::Zero(p, p);
    Rng rng = make_rng(pattern.seed, 0x7061747465726eULL);

    switch (pattern.kind) {
        case PatternKind::random:
            for (std::size_t j = 0; j < p; ++j) choose_columns(rng, 0, p, r, a, j);
            break;
        case PatternKind::band:
            // Band centred on the diagonal, shifted inward at the edges so every
            // row keeps r entries.
            for (std::size_t j = 0; j < p; ++j) {
                const auto lo = static_cast<std::ptrdiff_t>(j) - static_cast<std::ptrdiff_t>((r - 1) / 2);
                const auto start = std::clamp<std::ptrdiff_t>(lo, 0, static_cast<std::ptrdiff_t>(p - r));
                for (std::size_t c = 0; c < r; ++c) a(j, start + static_cast<std::ptrdiff_t>(c)) = 1;
            }
            break;
        case PatternKind::cluster: {
            const std::size_t b = PatternSpec::cluster_block;
            if (p % b != 0) {
                std::ostringstream os;
                os << "cluster pattern needs p divisible by " << b << " (got " << p << ")";
                fail_validation(os.str());
            }
            if (r > b) fail_validation("per_row_nonzeros exceeds the cluster block size");
            for (std::size_t j = 0; j < p; ++j) choose_columns(rng, (j / b) * b, b, r, a, j);
            break;
        }
    }
    return a;
}

AdditiveVarSpec benchmark_spec(const Eigen::MatrixXi& adjacency, NoiseModel noise,
                               std::uint64_t seed) {
    if (adjacency.rows() != adjacency.cols()) fail_validation("adjacency must be square");
    AdditiveVarSpec spec(static_cast<std::size_t>(adjacency.rows()), noise, seed);
    for (Eigen::Index j = 0; j < adjacency.rows(); ++j) {
        int slot = 0;
        for (Eigen::Index k = 0; k < adjacency.cols(); ++k) {
            if (adjacency(j, k) == 0) continue;
            spec.set(j, k, ComponentFunction::benchmark(slot % 5 + 1));
            ++slot;
        }
    }
    return spec;
}

}  // namespace savar
