#include "savar/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "savar/error.hpp"
#include "savar/rng.hpp"

namespace savar {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t v) { return static_cast<Index>(v); }

struct Labeled {
    double score;
    bool positive;
};

// Scores sorted descending; returns class totals.
std::vector<Labeled> ranked(const EdgeScores& s, std::size_t& pos, std::size_t& neg) {
    s.validate();
    std::vector<Labeled> v;
    v.reserve(static_cast<std::size_t>(s.scores.size()));
    pos = neg = 0;
    for (Index j = 0; j < s.scores.rows(); ++j)
        for (Index k = 0; k < s.scores.cols(); ++k) {
            const bool y = s.truth(j, k) != 0;
            v.push_back({s.scores(j, k), y});
            (y ? pos : neg) += 1;
        }
    if (pos == 0 || neg == 0) fail_validation("undefined metric: truth has a single class");
    std::sort(v.begin(), v.end(), [](const Labeled& a, const Labeled& b) { return a.score > b.score; });
    return v;
}

double mean_of(const std::vector<double>& x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double se_of(const std::vector<double>& x) {
    if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double mu = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - mu) * (v - mu);
    const double n = static_cast<double>(x.size());
    return std::sqrt(ss / (n - 1.0) / n);
}

}  // namespace

void EdgeScores::validate() const {
    if (scores.rows() != truth.rows() || scores.cols() != truth.cols())
        fail_validation("scores and truth differ in shape");
    if (scores.size() == 0) fail_validation("empty score matrix");
    if (!scores.allFinite()) fail_validation("scores must be finite");
    if ((truth.array() != 0 && truth.array() != 1).any()) fail_validation("truth must be binary");
}

EdgeScores score_path(const DesignCache& cache, std::span<const double> lambda_grid,
                      const FitConfig& config) {
    if (lambda_grid.empty()) fail_validation("empty lambda grid");
    const std::size_t p = cache.dim();
    EdgeScores out;
    out.scores = MatrixXd::Zero(idx(p), idx(p));
    out.scores = activation_lambdas(cache, lambda_grid, config);
    out.truth = Eigen::MatrixXi::Zero(idx(p), idx(p));
    return out;
}

double auroc(const EdgeScores& s) {
    std::size_t P = 0, N = 0;
    const auto v = ranked(s, P, N);
    double area = 0.0;
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < v.size();) {
        const std::size_t tp0 = tp, fp0 = fp;
        std::size_t e = i;
        for (; e < v.size() && v[e].score == v[i].score; ++e) (v[e].positive ? tp : fp) += 1;
        area += static_cast<double>(fp - fp0) * 0.5 * static_cast<double>(tp + tp0);
        i = e;
    }
    return area / (static_cast<double>(P) * static_cast<double>(N));
}

double aupr(const EdgeScores& s) {
    std::size_t P = 0, N = 0;
    const auto v = ranked(s, P, N);
    double ap = 0.0;
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < v.size();) {
        const std::size_t tp0 = tp;
        std::size_t e = i;
        for (; e < v.size() && v[e].score == v[i].score; ++e) (v[e].positive ? tp : fp) += 1;
        if (tp > tp0)
            ap += static_cast<double>(tp - tp0) / static_cast<double>(P) *
                  static_cast<double>(tp) / static_cast<double>(tp + fp);
        i = e;
    }
    return ap;
}

void ExperimentPlan::validate() const {
    if (pattern.p < 2) fail_validation("p must be at least 2");
    if (pattern.per_row_nonzeros == 0 || pattern.per_row_nonzeros > pattern.p)
        fail_validation("nonzeros per row must be in [1, p]");
    if (n < 3) fail_validation("n must be at least 3");
    if (reps == 0) fail_validation("reps must be positive");
    if (L == 0) fail_validation("L must be positive");
    if (!(noise_scale > 0.0)) fail_validation("noise scale must be positive");
    for (std::size_t i = 0; i < lambda_grid.size(); ++i) {
        if (!(lambda_grid[i] > 0.0) || !std::isfinite(lambda_grid[i]))
            fail_validation("lambda grid values must be positive");
        if (i && lambda_grid[i] >= lambda_grid[i - 1])
            fail_validation("lambda grid must be strictly descending");
    }
    fit.validate();
}

std::vector<double> ExperimentPlan::relative_grid() const {
    return lambda_grid.empty() ? log_lambda_grid(1.0, 50, 1e-3) : lambda_grid;
}

DesignCache build_fourier_design(const TimeSeriesPanel& panel, std::size_t L, bool intercept,
                                 double c0) {
    BasisFamily basis;
    basis.size = L;
    basis.c0 = c0 > 0.0 ? c0 : default_support_half_width(panel);
    basis.include_constant = !intercept;
    DesignOptions opts;
    opts.center = intercept;
    opts.shift = panel.data.colwise().mean().transpose();
    return DesignCache::build(panel, basis, opts);
}

DesignCache build_linear_design(const TimeSeriesPanel& panel, bool intercept) {
    DesignOptions opts;
    opts.center = intercept;
    return DesignCache::build(panel, BasisFamily::identity_feature(), opts);
}

ReplicationScore run_replication(const ExperimentPlan& plan, std::size_t rep) {
    PatternSpec pattern = plan.pattern;
    pattern.seed = derive_seed(plan.seed, 2 * rep);
    const Eigen::MatrixXi A = generate_pattern(pattern);
    NoiseModel noise;
    noise.scale = plan.noise_scale;
    const AdditiveVarSpec spec = benchmark_spec(A, noise);
    SimulationOptions sim;
    sim.burn_in = plan.burn_in;
    const TimeSeriesPanel panel = simulate(spec, plan.n, derive_seed(plan.seed, 2 * rep + 1), sim);

    const DesignCache cache = build_fourier_design(panel, plan.L, plan.intercept);
    const double top = lambda_max(cache, plan.fit.ridge_floor);
    std::vector<double> grid = plan.relative_grid();
    for (double& g : grid) g *= top;
    EdgeScores s = score_path(cache, grid, plan.fit);
    s.truth = A;
    return {auroc(s), aupr(s)};
}

Table1Cell replicate_table1(const ExperimentPlan& plan, const ReplicationHooks& hooks) {
    plan.validate();
    Table1Cell cell;
    cell.replications.resize(plan.reps);
    for (std::size_t r = 0; r < plan.reps; ++r) {
        std::optional<ReplicationScore> done;
        if (hooks.load) done = hooks.load(r);
        if (!done) {
            done = run_replication(plan, r);
            if (hooks.store) hooks.store(r, *done);
        }
        cell.replications[r] = *done;
    }
    std::vector<double> a, b;
    for (const auto& r : cell.replications) {
        a.push_back(r.auroc);
        b.push_back(r.aupr);
    }
    cell.mean_auroc = mean_of(a);
    cell.mean_aupr = mean_of(b);
    cell.se_auroc = se_of(a);
    cell.se_aupr = se_of(b);
    return cell;
}

double one_step_mse(const FitResult& fit, const TimeSeriesPanel& panel) {
    const std::size_t n = panel.rows(), p = panel.cols();
    if (p != fit.dim()) fail_validation("panel width does not match the fit");
    if (n < 2) fail_validation("need at least two rows to score forecasts");
    double total = 0.0;
    std::vector<double> x(p);
    for (std::size_t t = 1; t < n; ++t) {
        for (std::size_t i = 0; i < p; ++i) x[i] = panel.data(idx(t - 1), idx(i));
        const VectorXd pred = predict_one_step(fit, x);
        total += (panel.data.row(idx(t)).transpose() - pred).squaredNorm();
    }
    return total / static_cast<double>((n - 1) * p);
}

CvResult ts_cross_validate(const TimeSeriesPanel& panel, std::span<const double> lambda_grid,
                           std::span<const std::size_t> L_grid, const CvOptions& options) {
    panel.validate();
    if (lambda_grid.empty()) fail_validation("empty tuning grid");
    if (options.folds < 3) fail_validation("rolling-origin validation needs at least 3 folds");
    for (double l : lambda_grid)
        if (!(l > 0.0) || !std::isfinite(l)) fail_validation("lambda grid values must be positive");
    for (std::size_t L : L_grid)
        if (L == 0) fail_validation("L must be positive");
    if (L_grid.empty() && !options.linear) fail_validation("empty tuning grid");
    options.fit.validate();

    const std::size_t n = panel.rows(), K = options.folds;
    const std::size_t block = n / (K + 1);
    if (block < 1 || n - K * block < 3)
        fail_validation("insufficient data: " + std::to_string(n) + " rows for " + std::to_string(K) +
                        " folds");
    const double c0 = options.c0 > 0.0 ? options.c0 : default_support_half_width(panel);
    const Eigen::VectorXd shift = panel.data.colwise().mean().transpose();
    const auto design = [&](const TimeSeriesPanel& part, std::size_t L) {
        if (options.linear) return build_linear_design(part, options.intercept);
        BasisFamily basis;
        basis.size = L;
        basis.c0 = c0;
        basis.include_constant = !options.intercept;
        DesignOptions opts;
        opts.center = options.intercept;
        opts.shift = shift;
        return DesignCache::build(part, basis, opts);
    };
    const std::vector<std::size_t> Ls =
        options.linear ? std::vector<std::size_t>{1} : std::vector<std::size_t>(L_grid.begin(), L_grid.end());

    CvResult out;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t L : Ls) {
        std::vector<double> lambdas(lambda_grid.begin(), lambda_grid.end());
        if (options.relative_grid) {
            const double top = lambda_max(design(panel, L), options.fit.ridge_floor);
            for (double& l : lambdas) l *= top;
        }
        std::vector<std::vector<double>> errors(lambdas.size());
        for (std::size_t f = 1; f <= K; ++f) {
            const std::size_t end = n - (K - f + 1) * block;
            // Validation pairs (X_{t-1}, X_t) for t in [end, end + block).
            const TimeSeriesPanel valid = panel.slice(end - 1, end + block);
            const auto path = fit_path(design(panel.slice(0, end), L), lambdas, options.fit);
            for (std::size_t i = 0; i < lambdas.size(); ++i)
                errors[i].push_back(one_step_mse(path[i], valid));
        }
        for (std::size_t i = 0; i < lambdas.size(); ++i) {
            CvRow row{L, lambdas[i], mean_of(errors[i]), se_of(errors[i]), errors[i]};
            const bool better = row.mean_error < best ||
                                (row.mean_error == best && row.lambda > out.lambda_star);
            if (better) {
                best = row.mean_error;
                out.lambda_star = row.lambda;
                out.L_star = L;
            }
            out.table.push_back(std::move(row));
        }
    }
    return out;
}

FitResult fit_linear_var_baseline(const TimeSeriesPanel& panel, double lambda, bool intercept,
                                  const FitConfig& config) {
    panel.validate();
    const DesignCache cache = build_linear_design(panel, intercept);
    FitConfig cfg = config;
    cfg.lambda = lambda;
    FitResult r = fit(cache, cfg);
    r.labels = panel.column_names();
    return r;
}

}  // namespace savar
