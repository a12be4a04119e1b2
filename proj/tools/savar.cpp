// savar: command-line front end.
//
//   savar simulate     simulate a panel from a network pattern or a spec file
//   savar fit          fit the additive model (or the linear baseline) to a CSV panel
//   savar cv           rolling-origin cross-validation table
//   savar predict      one-step forecasts from a saved fit
//   savar eval-table1  AUROC/AUPR study over patterns, dimensions and sample sizes
//   savar tails        Monte-Carlo tail probabilities and fitted envelopes
//
// Exit codes: 0 success, 2 invalid input, 3 model/precondition failure, 4 internal.

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "savar/concentration.hpp"
#include "savar/error.hpp"
#include "savar/evaluation.hpp"
#include "savar/io.hpp"
#include "savar/log.hpp"

namespace fs = std::filesystem;
using namespace savar;

namespace {

struct Global {
    int workers = 0;
    std::uint64_t seed = 1;
};

struct SimulateArgs {
    std::string pattern = "random";
    std::size_t p = 20;
    std::size_t nonzeros = 5;
    std::size_t n = 500;
    std::size_t burn_in = 500;
    std::string noise = "gaussian";
    double noise_scale = 0.2;
    double df = 5.0;
    std::string spec;
    std::string out;
    std::string spec_out;
};

struct FitArgs {
    std::string input;
    std::optional<double> lambda;
    bool cv = false;
    std::size_t L = 6;
    std::vector<std::size_t> L_grid{4, 6, 8};
    std::size_t lambda_count = 50;
    double lambda_ratio = 1e-3;
    std::size_t folds = 5;
    double c0 = 0.0;
    bool no_intercept = false;
    std::string baseline = "none";
    int max_sweeps = 1000;
    double tol_objective = 1e-8;
    double tol_kkt = 1e-6;
    std::string json_out;
    std::string dot_out;
    std::string gram_out;
    std::string table_out;  // cv only
};

struct PredictArgs {
    std::string fit;
    std::string input;
    std::string out;
};

struct Table1Args {
    std::vector<std::string> patterns{"random", "band", "cluster"};
    std::vector<std::size_t> p_list{20, 50, 100};
    std::vector<std::size_t> n_list{50, 100, 200, 500};
    std::size_t reps = 200;
    std::size_t L = 6;
    std::size_t lambda_count = 50;
    double lambda_ratio = 1e-3;
    bool no_intercept = false;
    std::string out_dir = "table1";
    std::string checkpoint_dir;
    bool no_resume = false;
};

struct TailsArgs {
    std::vector<double> rho{0.0, 0.3, 0.6, 0.9};
    std::vector<std::size_t> n_list{50, 200, 800};
    std::size_t reps = 100000;
    double u_max = 3.0;
    std::size_t u_count = 31;
    double clip = 1.0;
    double noise_scale = 1.0;
    std::string csv_out = "tails.csv";
    std::string json_out = "tails.json";
};

void require_positive(std::size_t v, const std::string& what) {
    if (v == 0) fail_validation(what + " must be positive");
}

// Environment overrides must be plain non-negative integers.
void check_env_integer(const char* name) {
    const char* v = std::getenv(name);
    if (!v) return;
    const std::string_view text(v);
    std::uint64_t parsed = 0;
    const auto r = std::from_chars(text.data(), text.data() + text.size(), parsed);
    if (text.empty() || r.ec != std::errc() || r.ptr != text.data() + text.size())
        fail_validation(std::string(name) + ": '" + v + "' is not a non-negative integer");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) fail_validation("cannot write " + path);
    return out;
}

// ----------------------------------------------------------------- simulate

int run_simulate(const Global& g, const SimulateArgs& a) {
    AdditiveVarSpec spec;
    if (!a.spec.empty()) {
        spec = io::read_spec(fs::path(a.spec));
    } else {
        require_positive(a.p, "p");
        PatternSpec ps;
        ps.kind = PatternSpec::parse_kind(a.pattern);
        ps.p = a.p;
        ps.per_row_nonzeros = a.nonzeros;
        ps.seed = derive_seed(g.seed, 0);
        NoiseModel noise;
        noise.kind = NoiseModel::parse_kind(a.noise);
        noise.scale = a.noise_scale;
        noise.df = a.df;
        spec = benchmark_spec(generate_pattern(ps), noise, g.seed);
    }
    require_positive(a.n, "n");
    const double margin = stability_margin(lipschitz_matrix(spec));
    SimulationOptions opts;
    opts.burn_in = a.burn_in;
    const TimeSeriesPanel panel = simulate(spec, a.n, derive_seed(g.seed, 1), opts);
    io::write_csv(fs::path(a.out), panel);
    if (!a.spec_out.empty()) {
        auto out = open_out(a.spec_out);
        io::write_spec(out, spec);
    }
    std::cout << "stability_margin " << io::format_double(margin) << '\n'
              << "wrote " << panel.rows() << "x" << panel.cols() << " panel to " << a.out << '\n';
    return 0;
}

// ---------------------------------------------------------------------- fit

FitConfig fit_config(const FitArgs& a) {
    FitConfig cfg;
    cfg.max_sweeps = a.max_sweeps;
    cfg.tol_objective = a.tol_objective;
    cfg.tol_kkt = a.tol_kkt;
    cfg.validate();
    return cfg;
}

CvOptions cv_options(const FitArgs& a) {
    CvOptions o;
    o.folds = a.folds;
    o.intercept = !a.no_intercept;
    o.c0 = a.c0;
    o.linear = a.baseline == "linear";
    o.fit = fit_config(a);
    return o;
}

void check_baseline(const std::string& b) {
    if (b != "none" && b != "linear") fail_validation("unknown baseline '" + b + "' (none, linear)");
}

CvResult run_cv_search(const TimeSeriesPanel& panel, const FitArgs& a) {
    require_positive(a.lambda_count, "lambda count");
    if (!(a.lambda_ratio > 0.0 && a.lambda_ratio < 1.0)) fail_validation("lambda ratio must lie in (0, 1)");
    const auto grid = log_lambda_grid(1.0, a.lambda_count, a.lambda_ratio);
    return ts_cross_validate(panel, grid, a.L_grid, cv_options(a));
}

void write_gram(const std::string& path, const DesignCache& cache) {
    auto out = open_out(path);
    out << "covariate,row,col,value\n";
    for (std::size_t k = 0; k < cache.dim(); ++k) {
        const auto G = cache.gram(k);
        for (Eigen::Index r = 0; r < G.rows(); ++r)
            for (Eigen::Index c = 0; c < G.cols(); ++c)
                out << k << ',' << r << ',' << c << ',' << io::format_double(G(r, c)) << '\n';
    }
}

int run_fit(const FitArgs& a) {
    check_baseline(a.baseline);
    if (!a.cv && !a.lambda) fail_validation("fit needs --lambda or --cv");
    if (a.lambda && !(*a.lambda >= 0.0)) fail_validation("lambda must be >= 0");
    const TimeSeriesPanel panel = io::read_csv(fs::path(a.input));
    const bool linear = a.baseline == "linear";

    std::size_t L = a.L;
    double lambda = a.lambda.value_or(0.0);
    if (a.cv) {
        const CvResult cv = run_cv_search(panel, a);
        lambda = cv.lambda_star;
        L = cv.L_star;
        std::cout << "cv lambda " << io::format_double(lambda);
        if (!linear) std::cout << " L " << L;
        std::cout << '\n';
    }
    require_positive(L, "L");
    const DesignCache cache =
        linear ? build_linear_design(panel, !a.no_intercept) : build_fourier_design(panel, L, !a.no_intercept, a.c0);
    FitConfig cfg = fit_config(a);
    cfg.lambda = lambda;
    FitResult result = fit(cache, cfg);
    result.labels = panel.column_names();
    if (!result.converged) warn("solver stopped at max_sweeps before converging");

    if (!a.json_out.empty()) io::write_fit_json(fs::path(a.json_out), result);
    if (!a.dot_out.empty()) io::write_dot(fs::path(a.dot_out), result);
    if (!a.gram_out.empty()) write_gram(a.gram_out, cache);
    std::cout << "edges " << result.support.size() << " kkt " << io::format_double(result.kkt_residual)
              << " sweeps " << result.sweeps_used << '\n';
    return 0;
}

int run_cv(const FitArgs& a) {
    check_baseline(a.baseline);
    const TimeSeriesPanel panel = io::read_csv(fs::path(a.input));
    const CvResult cv = run_cv_search(panel, a);
    if (!a.table_out.empty()) {
        auto out = open_out(a.table_out);
        out << "L,lambda,mean_error,std_error\n";
        for (const auto& r : cv.table)
            out << r.L << ',' << io::format_double(r.lambda) << ',' << io::format_double(r.mean_error) << ','
                << (std::isnan(r.std_error) ? std::string("NA") : io::format_double(r.std_error)) << '\n';
    }
    std::cout << "lambda " << io::format_double(cv.lambda_star) << " L " << cv.L_star << '\n';
    return 0;
}

// ------------------------------------------------------------------ predict

int run_predict(const PredictArgs& a) {
    const FitResult fitted = io::read_fit_json(fs::path(a.fit));
    const TimeSeriesPanel panel = io::read_csv(fs::path(a.input));
    if (panel.cols() != fitted.dim()) fail_validation("panel width does not match the fit");
    TimeSeriesPanel out;
    out.labels = fitted.labels.size() == fitted.dim() ? fitted.labels : panel.column_names();
    out.data.resize(panel.data.rows(), panel.data.cols());
    std::vector<double> x(panel.cols());
    for (Eigen::Index t = 0; t < panel.data.rows(); ++t) {
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = panel.data(t, static_cast<Eigen::Index>(i));
        out.data.row(t) = predict_one_step(fitted, x).transpose();
    }
    if (a.out.empty()) io::write_csv(std::cout, out);
    else io::write_csv(fs::path(a.out), out);
    return 0;
}

// -------------------------------------------------------------- eval-table1

std::string checkpoint_tag(const ExperimentPlan& plan) {
    std::ostringstream s;
    s << PatternSpec::name(plan.pattern.kind) << ' ' << plan.pattern.p << ' ' << plan.n << ' ' << plan.L << ' '
      << plan.seed << ' ' << plan.lambda_grid.size() << ' ' << io::format_double(plan.lambda_grid.back()) << ' '
      << plan.intercept << ' ' << io::format_double(plan.noise_scale) << ' ' << plan.burn_in;
    return s.str();
}

ReplicationHooks checkpoint_hooks(const fs::path& dir, const std::string& tag, bool resume) {
    fs::create_directories(dir);
    ReplicationHooks h;
    h.load = [dir, tag, resume](std::size_t rep) -> std::optional<ReplicationScore> {
        if (!resume) return std::nullopt;
        std::ifstream in(dir / ("rep_" + std::to_string(rep) + ".txt"));
        if (!in) return std::nullopt;
        std::string header, values;
        if (!std::getline(in, header) || header != tag || !std::getline(in, values)) return std::nullopt;
        std::istringstream v(values);
        std::string a, b;
        if (!(v >> a >> b)) return std::nullopt;
        return ReplicationScore{io::parse_double(a, "checkpoint"), io::parse_double(b, "checkpoint")};
    };
    h.store = [dir, tag](std::size_t rep, const ReplicationScore& s) {
        const fs::path final_path = dir / ("rep_" + std::to_string(rep) + ".txt");
        fs::path tmp = final_path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp);
            out << tag << '\n' << io::format_double(s.auroc) << ' ' << io::format_double(s.aupr) << '\n';
            if (!out) fail_validation("cannot write checkpoint " + tmp.string());
        }
        fs::rename(tmp, final_path);
    };
    return h;
}

std::string se_text(double v) { return std::isnan(v) ? "NA" : io::format_double(v); }

int run_table1(const Global& g, const Table1Args& a) {
    require_positive(a.reps, "reps");
    require_positive(a.L, "L");
    require_positive(a.lambda_count, "lambda count");
    if (!(a.lambda_ratio > 0.0 && a.lambda_ratio < 1.0)) fail_validation("lambda ratio must lie in (0, 1)");
    std::vector<PatternKind> kinds;
    for (const auto& s : a.patterns) kinds.push_back(PatternSpec::parse_kind(s));
    for (std::size_t p : a.p_list)
        if (p < 5) fail_validation("p must be at least the 5 nonzeros per row");
    for (std::size_t n : a.n_list)
        if (n < 3) fail_validation("n must be at least 3");

    const fs::path out_dir(a.out_dir);
    fs::create_directories(out_dir);
    const fs::path ck_root = a.checkpoint_dir.empty() ? out_dir / "checkpoints" : fs::path(a.checkpoint_dir);

    std::ofstream reps_csv = open_out((out_dir / "experiments.csv").string());
    std::ofstream summary = open_out((out_dir / "summary.csv").string());
    reps_csv << "pattern,p,n,rep,auroc,aupr\n";
    summary << "pattern,p,n,reps,mean_auroc,se_auroc,mean_aupr,se_aupr\n";

    for (PatternKind kind : kinds)
        for (std::size_t p : a.p_list)
            for (std::size_t n : a.n_list) {
                ExperimentPlan plan;
                plan.pattern.kind = kind;
                plan.pattern.p = p;
                plan.n = n;
                plan.reps = a.reps;
                plan.L = a.L;
                plan.lambda_grid = log_lambda_grid(1.0, a.lambda_count, a.lambda_ratio);
                plan.intercept = !a.no_intercept;
                plan.seed = derive_seed(derive_seed(g.seed, static_cast<std::uint64_t>(kind)), p * 100003 + n);
                const std::string name = PatternSpec::name(kind);
                const fs::path dir = ck_root / (name + "_p" + std::to_string(p) + "_n" + std::to_string(n));
                const Table1Cell cell = replicate_table1(plan, checkpoint_hooks(dir, checkpoint_tag(plan), !a.no_resume));
                for (std::size_t r = 0; r < cell.replications.size(); ++r)
                    reps_csv << name << ',' << p << ',' << n << ',' << r << ','
                             << io::format_double(cell.replications[r].auroc) << ','
                             << io::format_double(cell.replications[r].aupr) << '\n';
                summary << name << ',' << p << ',' << n << ',' << a.reps << ',' << io::format_double(cell.mean_auroc)
                        << ',' << se_text(cell.se_auroc) << ',' << io::format_double(cell.mean_aupr) << ','
                        << se_text(cell.se_aupr) << '\n';
                std::cout << name << " p=" << p << " n=" << n << " auroc " << cell.mean_auroc << " aupr "
                          << cell.mean_aupr << std::endl;
            }
    return 0;
}

// -------------------------------------------------------------------- tails

int run_tails(const Global& g, const TailsArgs& a) {
    require_positive(a.reps, "reps");
    if (a.n_list.size() < 2) fail_validation("tails needs at least two sample sizes");
    if (a.u_count < 2 || !(a.u_max > 0.0)) fail_validation("u grid needs u_max > 0 and at least 2 points");
    if (!(a.clip > 0.0)) fail_validation("clip level must be positive");
    if (!(a.noise_scale > 0.0)) fail_validation("noise scale must be positive");

    std::vector<double> u;
    for (std::size_t i = 0; i < a.u_count; ++i)
        u.push_back(a.u_max * static_cast<double>(i) / static_cast<double>(a.u_count - 1));

    auto csv = open_out(a.csv_out);
    csv << "rho,n,u,z,count,probability,wilson_lo,wilson_hi,envelope\n";
    nlohmann::json report = nlohmann::json::array();

    for (std::size_t d = 0; d < a.rho.size(); ++d) {
        const double rho = a.rho[d];
        if (!(std::abs(rho) < 1.0)) fail_model("nonstationary specification (|rho| >= 1)");
        NoiseModel noise;
        noise.scale = a.noise_scale;
        AdditiveVarSpec spec(1, noise);
        if (rho != 0.0) spec.set(0, 0, ComponentFunction::linear(rho));
        const auto functional = LipschitzFunctional::clipped_coordinate(1, 0, a.clip);

        std::vector<TailEstimate> tails;
        for (std::size_t n : a.n_list) {
            TailExperiment e;
            e.spec = spec;
            e.functional = functional;
            e.n = n;
            e.reps = a.reps;
            e.seed = derive_seed(derive_seed(g.seed, d), n);
            for (double v : u) e.z_grid.push_back(v * std::sqrt(static_cast<double>(n)));
            tails.push_back(mc_tail(e));
        }
        const double tau = functional.tau(), M = a.clip;
        const EnvelopeFit env = fit_envelope(tails, tau, M);
        bool dominated = true;
        for (const auto& t : tails) {
            std::vector<double> z;
            for (const auto& q : t.points) z.push_back(q.z);
            const auto e = bernstein_envelope(tau, M, t.n, z, env.c1, env.c2);
            for (std::size_t i = 0; i < z.size(); ++i) {
                const auto& q = t.points[i];
                if (q.z > 0.0 && e[i] < q.wilson_hi) dominated = false;
                csv << io::format_double(rho) << ',' << t.n << ',' << io::format_double(u[i]) << ','
                    << io::format_double(q.z) << ',' << q.count << ',' << io::format_double(q.probability) << ','
                    << io::format_double(q.wilson_lo) << ',' << io::format_double(q.wilson_hi) << ','
                    << io::format_double(std::min(1.0, e[i])) << '\n';
            }
        }
        const CollapseReport collapse = tail_collapse(tails);
        nlohmann::json j;
        j["rho"] = rho;
        j["stability_margin"] = std::abs(rho);
        j["tau"] = tau;
        j["M"] = M;
        j["c1"] = env.c1;
        j["c2"] = env.c2;
        j["dominated"] = dominated;
        j["collapse_max_standardized_gap"] = collapse.max_standardized_gap;
        j["collapse_comparisons"] = collapse.comparisons;
        j["functional_variance"] = tails.back().functional_var;
        if (M <= 1.0) {
            const HoeffdingReport h = hoeffding_check(tails, tau, M);
            j["hoeffding_c1"] = h.c1;
            j["hoeffding_r_squared"] = std::isnan(h.r_squared) ? nlohmann::json(nullptr) : nlohmann::json(h.r_squared);
        }
        if (rho != 0.0) {
            const ExplicitConstants ec = explicit_constants(std::abs(rho), noise.second_moment());
            j["explicit_c1"] = ec.c1;
            j["explicit_c2"] = ec.c2;
        } else {
            j["iid_exponent_gap"] = exponent_gap(tails, tau, M, env.c1, env.c2, tails.back().functional_var, 2.0 * M);
        }
        report.push_back(j);
        std::cout << "rho " << rho << " c1 " << env.c1 << " c2 " << env.c2 << " dominated "
                  << (dominated ? "true" : "false") << " collapse " << collapse.max_standardized_gap << '\n';
    }
    auto out = open_out(a.json_out);
    out << report.dump(2) << '\n';
    return 0;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"Sparse additive nonlinear VAR: simulation, estimation and evaluation"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "key = value configuration file ([subcommand] sections)");
    app.allow_config_extras(false);

    Global g;
    app.add_option("--workers", g.workers, "Worker threads (0: runtime default)")
        ->envname("SAVAR_WORKERS")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--seed", g.seed, "Master RNG seed")->envname("SAVAR_SEED");

    SimulateArgs sim;
    auto* s = app.add_subcommand("simulate", "Simulate a panel and write it as CSV");
    s->add_option("--pattern", sim.pattern, "random | band | cluster");
    s->add_option("--p", sim.p, "Dimension");
    s->add_option("--nonzeros", sim.nonzeros, "Nonzero components per row");
    s->add_option("--n", sim.n, "Rows to keep");
    s->add_option("--burn-in", sim.burn_in, "Discarded initial steps");
    s->add_option("--noise", sim.noise, "gaussian | laplace | student_t");
    s->add_option("--noise-scale", sim.noise_scale, "Noise scale");
    s->add_option("--df", sim.df, "Student t degrees of freedom");
    s->add_option("--spec", sim.spec, "Spec file (overrides the pattern options)");
    s->add_option("--out", sim.out, "Output CSV")->required();
    s->add_option("--spec-out", sim.spec_out, "Also write the generating spec");

    FitArgs fa;
    auto add_fit_options = [&fa](CLI::App* c) {
        c->add_option("--input", fa.input, "Panel CSV")->required();
        c->add_option("--L", fa.L, "Basis functions per covariate");
        c->add_option("--L-grid", fa.L_grid, "Candidate L values for cross-validation")->delimiter(',');
        c->add_option("--lambda-count", fa.lambda_count, "Cross-validation grid size");
        c->add_option("--lambda-ratio", fa.lambda_ratio, "Smallest grid lambda over lambda_max");
        c->add_option("--folds", fa.folds, "Rolling-origin folds");
        c->add_option("--c0", fa.c0, "Basis half-width (0: 3 x pooled std)");
        c->add_flag("--no-intercept", fa.no_intercept, "Penalized constant element instead of an intercept");
        c->add_option("--baseline", fa.baseline, "none | linear");
        c->add_option("--max-sweeps", fa.max_sweeps, "Sweep limit");
        c->add_option("--tol-objective", fa.tol_objective, "Relative objective tolerance");
        c->add_option("--tol-kkt", fa.tol_kkt, "Optimality residual tolerance");
    };
    auto* f = app.add_subcommand("fit", "Fit a panel; writes JSON and DOT");
    add_fit_options(f);
    f->add_option("--lambda", fa.lambda, "Penalty level");
    f->add_flag("--cv", fa.cv, "Choose lambda and L by cross-validation");
    f->add_option("--json", fa.json_out, "Fit result JSON");
    f->add_option("--dot", fa.dot_out, "Network DOT");
    f->add_option("--export-gram", fa.gram_out, "Per-covariate Gram matrices as CSV");
    auto* cv = app.add_subcommand("cv", "Cross-validation table over (lambda, L)");
    add_fit_options(cv);
    cv->add_option("--out", fa.table_out, "Table CSV");

    PredictArgs pa;
    auto* pr = app.add_subcommand("predict", "One-step forecasts for every row of a panel");
    pr->add_option("--fit", pa.fit, "Fit JSON")->required();
    pr->add_option("--input", pa.input, "Panel CSV")->required();
    pr->add_option("--out", pa.out, "Forecast CSV (default stdout)");

    Table1Args ta;
    auto* t1 = app.add_subcommand("eval-table1", "AUROC/AUPR over patterns x p x n");
    t1->add_option("--patterns", ta.patterns, "Patterns")->delimiter(',');
    t1->add_option("--p-list", ta.p_list, "Dimensions")->delimiter(',');
    t1->add_option("--n-list", ta.n_list, "Sample sizes")->delimiter(',');
    t1->add_option("--reps", ta.reps, "Replications per cell");
    t1->add_option("--L", ta.L, "Basis functions per covariate");
    t1->add_option("--lambda-count", ta.lambda_count, "Path length");
    t1->add_option("--lambda-ratio", ta.lambda_ratio, "Smallest path lambda over lambda_max");
    t1->add_flag("--no-intercept", ta.no_intercept, "Penalized constant element instead of an intercept");
    t1->add_option("--out-dir", ta.out_dir, "Output directory");
    t1->add_option("--checkpoint-dir", ta.checkpoint_dir, "Checkpoint directory (default <out-dir>/checkpoints)");
    t1->add_flag("--no-resume", ta.no_resume, "Recompute replications that have checkpoints");

    TailsArgs tl;
    auto* tt = app.add_subcommand("tails", "Tail probabilities of clipped sums of AR(1) paths");
    tt->add_option("--rho", tl.rho, "Autoregression coefficients")->delimiter(',');
    tt->add_option("--n-list", tl.n_list, "Path lengths")->delimiter(',');
    tt->add_option("--reps", tl.reps, "Monte-Carlo paths per length");
    tt->add_option("--u-max", tl.u_max, "Largest z / sqrt(n)");
    tt->add_option("--u-count", tl.u_count, "Grid points in z / sqrt(n)");
    tt->add_option("--clip", tl.clip, "Clip level M of g(x) = clip(x, -M, M)");
    tt->add_option("--noise-scale", tl.noise_scale, "Gaussian noise scale");
    tt->add_option("--csv", tl.csv_out, "Tail CSV");
    tt->add_option("--json", tl.json_out, "Fitted constants JSON");

    check_env_integer("SAVAR_WORKERS");
    check_env_integer("SAVAR_SEED");
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    if (g.workers > 0) omp_set_num_threads(g.workers);

    if (s->parsed()) return run_simulate(g, sim);
    if (f->parsed()) return run_fit(fa);
    if (cv->parsed()) return run_cv(fa);
    if (pr->parsed()) return run_predict(pa);
    if (t1->parsed()) return run_table1(g, ta);
    if (tt->parsed()) return run_tails(g, tl);
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 4;
    }
}
