#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "oracles.hpp"
#include "savar/error.hpp"
#include "savar/evaluation.hpp"

using namespace savar;

namespace {

EdgeScores make_scores(std::vector<double> s, std::vector<int> t) {
    const auto k = static_cast<Eigen::Index>(s.size());
    EdgeScores e;
    e.scores = Eigen::Map<Eigen::VectorXd>(s.data(), k);
    e.truth = Eigen::Map<Eigen::VectorXi>(t.data(), k);
    return e;
}

TimeSeriesPanel noise_panel(std::size_t n, std::size_t p, std::uint64_t seed) {
    return simulate(AdditiveVarSpec(p), n, seed);
}

AdditiveVarSpec diagonal_ar(std::size_t p, double coef) {
    AdditiveVarSpec spec(p);
    for (std::size_t j = 0; j < p; ++j) spec.set(j, j, ComponentFunction::linear(coef));
    return spec;
}

}  // namespace

TEST_CASE("ranking metrics") {
    SUBCASE("perfect") {
        const auto e = make_scores({0.9, 0.8, 0.1, 0.0}, {1, 1, 0, 0});
        CHECK(auroc(e) == 1.0);
        CHECK(aupr(e) == 1.0);
    }
    SUBCASE("scores equal to truth") {
        const auto e = make_scores({1, 0, 1, 0, 0}, {1, 0, 1, 0, 0});
        CHECK(auroc(e) == 1.0);
        CHECK(aupr(e) == 1.0);
    }
    SUBCASE("constant") {
        const auto e = make_scores({0.3, 0.3, 0.3, 0.3, 0.3}, {1, 0, 0, 1, 0});
        CHECK(auroc(e) == 0.5);
        CHECK(aupr(e) == doctest::Approx(0.4));
    }
    SUBCASE("four-edge toy") {
        // positives ranked first and third
        const auto e = make_scores({4, 3, 2, 1}, {1, 0, 1, 0});
        CHECK(auroc(e) == 0.75);
        CHECK(aupr(e) == doctest::Approx((1.0 + 2.0 / 3.0) / 2.0));
    }
    SUBCASE("undefined") {
        try {
            auroc(make_scores({1, 2}, {1, 1}));
            FAIL("expected an error");
        } catch (const Error& err) {
            CHECK(std::string(err.what()).find("undefined metric") != std::string::npos);
        }
        CHECK_THROWS_AS(aupr(make_scores({1, 2}, {0, 0})), Error);
    }
    SUBCASE("validation") {
        CHECK_THROWS_AS(make_scores({1, NAN}, {1, 0}).validate(), Error);
        CHECK_THROWS_AS(make_scores({1, 2}, {2, 0}).validate(), Error);
    }
}

TEST_CASE("AUROC equals the Mann-Whitney statistic") {
    Rng rng = make_rng(2024);
    std::uniform_int_distribution<int> size(2, 60), level(0, 7), coin(0, 1);
    for (int inst = 0; inst < 200; ++inst) {
        const int k = size(rng);
        std::vector<double> s(k);
        std::vector<int> t(k);
        for (int i = 0; i < k; ++i) {
            s[i] = level(rng) * 0.125;  // coarse levels force ties
            t[i] = coin(rng);
        }
        t[0] = 1;
        t[1] = 0;
        const auto e = make_scores(s, t);
        CHECK(auroc(e) == oracle::mann_whitney(s, t));
        const double ap = aupr(e);
        CHECK(ap >= 0.0);
        CHECK(ap <= 1.0);
    }
}

TEST_CASE("average precision by enumeration") {
    Rng rng = make_rng(7);
    std::uniform_real_distribution<double> u;
    std::uniform_int_distribution<int> coin(0, 1);
    for (int inst = 0; inst < 50; ++inst) {
        std::vector<double> s(25);
        std::vector<int> t(25);
        for (int i = 0; i < 25; ++i) {
            s[i] = u(rng);
            t[i] = coin(rng);
        }
        t[0] = 1;
        t[1] = 0;
        std::vector<int> order(25);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return s[a] > s[b]; });
        double tp = 0, ap = 0, pos = std::count(t.begin(), t.end(), 1);
        for (int r = 0; r < 25; ++r)
            if (t[order[r]]) {
                tp += 1;
                ap += tp / (r + 1);
            }
        CHECK(aupr(make_scores(s, t)) == doctest::Approx(ap / pos).epsilon(1e-12));
    }
}

TEST_CASE("path scores") {
    SUBCASE("grid above lambda_max") {
        const auto panel = noise_panel(200, 4, 1);
        const auto cache = build_fourier_design(panel, 4, true);
        const std::vector<double> grid{1.01 * lambda_max(cache)};
        const auto e = score_path(cache, grid);
        CHECK(e.scores.isZero(0.0));
        CHECK(e.truth.size() == 16);
    }
    SUBCASE("pure noise is quiet at the top of the path") {
        const auto panel = noise_panel(300, 10, 2);
        const auto cache = build_fourier_design(panel, 6, true);
        // grid sized for a signal panel of the same shape
        PatternSpec pat;
        pat.p = 10;
        const auto signal = simulate(benchmark_spec(generate_pattern(pat)), 300, 3);
        const auto grid = log_lambda_grid(lambda_max(build_fourier_design(signal, 6, true)), 50, 1e-3);
        const auto e = score_path(cache, grid);
        // inactive over the top tenth of the grid
        CHECK((e.scores.array() < grid[4]).count() >= 90);
    }
    SUBCASE("planted strong edge gets the top score") {
        AdditiveVarSpec spec(3);
        spec.set(2, 0, ComponentFunction::linear(0.5));
        const auto panel = simulate(spec, 2000, 3);
        const auto cache = build_fourier_design(panel, 6, true);
        const auto grid = log_lambda_grid(lambda_max(cache), 50, 1e-3);
        const auto e = score_path(cache, grid);
        CHECK(e.scores(2, 0) == e.scores.maxCoeff());
    }
}

TEST_CASE("simulation-study driver") {
    ExperimentPlan plan;
    plan.pattern.p = 10;
    plan.n = 100;
    plan.reps = 3;
    plan.seed = 5;

    SUBCASE("grid") {
        const auto g = plan.relative_grid();
        REQUIRE(g.size() == 50);
        CHECK(g.front() == 1.0);
        CHECK(g.back() == doctest::Approx(1e-3));
        plan.lambda_grid = {1.0, 0.5, 0.5};
        CHECK_THROWS_AS(plan.validate(), Error);
    }
    SUBCASE("deterministic replications") {
        const auto a = run_replication(plan, 1), b = run_replication(plan, 1);
        CHECK(a.auroc == b.auroc);
        CHECK(a.aupr == b.aupr);
        CHECK(a.auroc > 0.5);
    }
    SUBCASE("single replication has no standard error") {
        plan.reps = 1;
        const auto cell = replicate_table1(plan);
        CHECK(std::isnan(cell.se_auroc));
        CHECK(std::isnan(cell.se_aupr));
        CHECK(cell.mean_auroc == cell.replications[0].auroc);
    }
    SUBCASE("hooks") {
        std::map<std::size_t, ReplicationScore> store;
        ReplicationHooks hooks;
        hooks.load = [&](std::size_t r) -> std::optional<ReplicationScore> {
            const auto it = store.find(r);
            if (it == store.end()) return std::nullopt;
            return it->second;
        };
        hooks.store = [&](std::size_t r, const ReplicationScore& s) { store[r] = s; };
        const auto first = replicate_table1(plan, hooks);
        CHECK(store.size() == 3);
        store[1] = {0.25, 0.125};
        const auto resumed = replicate_table1(plan, hooks);
        CHECK(resumed.replications[1].auroc == 0.25);
        CHECK(resumed.replications[0].auroc == first.replications[0].auroc);
        double mean = 0.0;
        for (const auto& r : first.replications) mean += r.auroc / 3.0;
        CHECK(first.mean_auroc == doctest::Approx(mean));
        double var = 0.0;
        for (const auto& r : first.replications) var += std::pow(r.auroc - mean, 2) / 2.0;
        CHECK(first.se_auroc == doctest::Approx(std::sqrt(var / 3.0)));
    }
}

TEST_CASE("rolling-origin cross-validation") {
    const std::vector<double> grid{1.0, 0.5, 0.25, 0.1, 0.05, 0.02, 0.01};
    const std::vector<std::size_t> Ls{4, 6};

    SUBCASE("pure noise selects a near-empty model") {
        const auto panel = noise_panel(300, 5, 9);
        const auto cv = ts_cross_validate(panel, grid, Ls);
        const auto cache = build_fourier_design(panel, cv.L_star, true);
        FitConfig cfg;
        cfg.lambda = cv.lambda_star;
        CHECK(fit(cache, cfg).support.size() <= 0.05 * 25);
        CHECK(cv.table.size() == grid.size() * Ls.size());
    }
    SUBCASE("errors") {
        const auto panel = noise_panel(100, 3, 1);
        CvOptions one;
        one.folds = 1;
        CHECK_THROWS_AS(ts_cross_validate(panel, grid, Ls, one), Error);
        CHECK_THROWS_AS(ts_cross_validate(noise_panel(5, 3, 1), grid, Ls), Error);
        CHECK_THROWS_AS(ts_cross_validate(panel, std::vector<double>{}, Ls), Error);
    }
    SUBCASE("deterministic") {
        const auto panel = simulate(diagonal_ar(4, 0.5), 200, 4);
        const auto a = ts_cross_validate(panel, grid, Ls);
        const auto b = ts_cross_validate(panel, grid, Ls);
        CHECK(a.lambda_star == b.lambda_star);
        CHECK(a.L_star == b.L_star);
    }
    SUBCASE("fold errors are one-step errors of the training prefix") {
        const auto panel = simulate(diagonal_ar(3, 0.5), 120, 6);
        CvOptions opts;
        opts.linear = true;
        opts.relative_grid = false;
        const std::vector<double> one{0.01};
        const auto cv = ts_cross_validate(panel, one, {}, opts);
        REQUIRE(cv.table.size() == 1);
        REQUIRE(cv.table[0].fold_errors.size() == 5);
        // block = 120 / 6 = 20, first fold trains on 20 rows
        const auto train = panel.slice(0, 20);
        const auto res = fit_linear_var_baseline(train, 0.01, true, opts.fit);
        CHECK(cv.table[0].fold_errors[0] == doctest::Approx(one_step_mse(res, panel.slice(19, 40))).epsilon(1e-9));
    }
    SUBCASE("planted linear system") {
        PatternSpec pat;
        pat.p = 6;
        pat.per_row_nonzeros = 2;
        pat.seed = 8;
        const auto adj = generate_pattern(pat);
        AdditiveVarSpec spec(6);
        for (Eigen::Index j = 0; j < 6; ++j)
            for (Eigen::Index k = 0; k < 6; ++k)
                if (adj(j, k)) spec.set(j, k, ComponentFunction::linear(0.3));
        const auto panel = simulate(spec, 400, 10);
        const auto held_out = simulate(spec, 20000, 11);
        CvOptions opts;
        opts.linear = true;
        const std::vector<double> rel{1.0, 0.5, 0.3, 0.2, 0.1, 0.05, 0.03, 0.02, 0.01, 0.005, 0.001};
        const auto cv = ts_cross_validate(panel, rel, {}, opts);
        double oracle_err = 1e300, chosen_err = 0.0;
        const double top = lambda_max(build_linear_design(panel, true));
        for (double r : rel) {
            const double err = one_step_mse(fit_linear_var_baseline(panel, r * top), held_out);
            oracle_err = std::min(oracle_err, err);
            if (r * top == cv.lambda_star) chosen_err = err;
        }
        REQUIRE(chosen_err > 0.0);
        CHECK(chosen_err <= 1.1 * oracle_err);
    }
}

TEST_CASE("linear VAR baseline") {
    SUBCASE("huge penalty") {
        const auto panel = simulate(diagonal_ar(3, 0.5), 200, 1);
        const auto res = fit_linear_var_baseline(panel, 1e6);
        CHECK(res.support.empty());
        CHECK(res.coefficients.as_matrix().isZero(0.0));
    }
    SUBCASE("diagonal AR recovered") {
        const auto panel = simulate(diagonal_ar(5, 0.5), 2000, 2);
        const auto res = fit_linear_var_baseline(panel, 1e-4);
        for (std::size_t j = 0; j < 5; ++j) {
            CHECK(std::abs(res.coefficients.block(j, j)[0] - 0.5) < 0.05);
            for (std::size_t k = 0; k < 5; ++k)
                if (k != j) CHECK(std::abs(res.coefficients.block(j, k)[0]) < 0.1);
        }
    }
    SUBCASE("short wide panel") {
        PatternSpec pat;
        pat.p = 8;
        pat.per_row_nonzeros = 2;
        const auto panel = simulate(benchmark_spec(generate_pattern(pat)), 50, 3);
        const auto res = fit_linear_var_baseline(panel, 0.05);
        CHECK(res.adjacency.rows() == 8);
        CHECK(res.adjacency.cols() == 8);
        CHECK(res.labels.size() == 8);
    }
}

TEST_CASE("one-step error") {
    const auto panel = simulate(diagonal_ar(2, 0.5), 50, 4);
    const auto res = fit_linear_var_baseline(panel, 0.01);
    double mse = 0.0;
    for (Eigen::Index t = 1; t < 50; ++t) {
        const Eigen::VectorXd x = panel.data.row(t - 1).transpose();
        mse += (predict_one_step(res, std::span<const double>(x.data(), 2)) - panel.data.row(t).transpose())
                   .squaredNorm() / 2.0;
    }
    CHECK(one_step_mse(res, panel) == doctest::Approx(mse / 49.0).epsilon(1e-12));
}
