#include "savar/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "savar/error.hpp"

namespace savar {

namespace {

constexpr double wilson_z = 1.959963984540054;

double clip(double v, double M) { return std::clamp(v, -M, M); }

std::size_t auto_burn_in(const AdditiveVarSpec& spec) {
    const double margin = stability_margin(lipschitz_matrix(spec));
    if (!(margin > 0.0)) return 1;
    const double steps = std::ceil(std::log(1e-12) / std::log(margin));
    return static_cast<std::size_t>(std::clamp(steps, 1.0, 500.0));
}

// Advances x one step of the chain; scratch holds h(x).
void step(const AdditiveVarSpec& spec, std::vector<double>& x, std::vector<double>& scratch, Rng& rng) {
    spec.transition(x, scratch);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = scratch[i] + spec.noise().draw(rng);
}

struct TailPointRef {
    double z, hi;
    double n;
};

std::vector<TailPointRef> positive_points(std::span<const TailEstimate> tails) {
    std::vector<TailPointRef> pts;
    for (const auto& t : tails)
        for (const auto& q : t.points)
            if (q.z > 0.0) pts.push_back({q.z, q.wilson_hi, static_cast<double>(t.n)});
    return pts;
}

}  // namespace

void LipschitzFunctional::validate() const {
    if (!g) fail_validation("functional is empty");
    if (weights.size() == 0) fail_validation("functional has no weights");
    if ((weights.array() < 0.0).any() || !weights.allFinite())
        fail_validation("functional weights must be finite and nonnegative");
    if (sup_bound && !(*sup_bound >= 0.0)) fail_validation("sup bound must be nonnegative");
}

double LipschitzFunctional::worst_ratio(Rng& rng, std::size_t pairs, double spread) const {
    validate();
    const std::size_t p = static_cast<std::size_t>(weights.size());
    std::uniform_real_distribution<double> u(-spread, spread);
    std::vector<double> x(p), y(p);
    double worst = 0.0;
    for (std::size_t r = 0; r < pairs; ++r) {
        double denom = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            x[i] = u(rng);
            y[i] = u(rng);
            denom += weights(static_cast<Eigen::Index>(i)) * std::abs(x[i] - y[i]);
        }
        const double num = std::abs(g(x) - g(y));
        if (denom > 0.0) worst = std::max(worst, num / denom);
        else if (num > 0.0) return std::numeric_limits<double>::infinity();
    }
    return worst;
}

LipschitzFunctional LipschitzFunctional::clipped_coordinate(std::size_t p, std::size_t index, double M,
                                                            double scale) {
    if (index >= p) fail_validation("coordinate index out of range");
    if (!(M > 0.0)) fail_validation("clip level must be positive");
    LipschitzFunctional f;
    f.g = [index, M, scale](std::span<const double> x) { return clip(scale * x[index], M); };
    f.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    f.weights(static_cast<Eigen::Index>(index)) = std::abs(scale);
    f.sup_bound = M;
    f.name = "clip(x" + std::to_string(index + 1) + ")";
    return f;
}

LipschitzFunctional LipschitzFunctional::clipped_sum(Eigen::VectorXd w, double M) {
    if (!(M > 0.0)) fail_validation("clip level must be positive");
    LipschitzFunctional f;
    f.weights = w.cwiseAbs();
    f.sup_bound = M * f.weights.sum();
    f.g = [w = std::move(w), M](std::span<const double> x) {
        double s = 0.0;
        for (Eigen::Index i = 0; i < w.size(); ++i) s += w(i) * clip(x[static_cast<std::size_t>(i)], M);
        return s;
    };
    f.name = "clipped_sum";
    return f;
}

LipschitzFunctional LipschitzFunctional::coordinate(std::size_t p, std::size_t index) {
    if (index >= p) fail_validation("coordinate index out of range");
    LipschitzFunctional f;
    f.g = [index](std::span<const double> x) { return x[index]; };
    f.weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    f.weights(static_cast<Eigen::Index>(index)) = 1.0;
    f.name = "x" + std::to_string(index + 1);
    return f;
}

void TailExperiment::validate() const {
    spec.validate();
    functional.validate();
    if (static_cast<std::size_t>(functional.weights.size()) != spec.dim())
        fail_validation("functional dimension does not match the process");
    if (n == 0) fail_validation("n must be positive");
    if (reps == 0) fail_validation("reps must be positive");
    if (pilot_cap == 0) fail_validation("pilot length must be positive");
    for (double z : z_grid)
        if (!(z >= 0.0) || !std::isfinite(z)) fail_validation("z values must be finite and >= 0");
    if (stability_margin(lipschitz_matrix(spec)) >= 1.0)
        fail_model("nonstationary specification (stability margin >= 1)");
}

std::pair<double, double> wilson_interval(std::size_t hits, std::size_t total, bool exact) {
    if (total == 0) fail_validation("empty sample");
    const double N = static_cast<double>(total);
    const double ph = static_cast<double>(hits) / N;
    if (exact) return {ph, ph};
    const double z2 = wilson_z * wilson_z;
    const double denom = 1.0 + z2 / N;
    const double centre = (ph + z2 / (2.0 * N)) / denom;
    const double half = wilson_z * std::sqrt(ph * (1.0 - ph) / N + z2 / (4.0 * N * N)) / denom;
    const double lo = hits == 0 ? 0.0 : std::max(0.0, centre - half);
    const double hi = hits == total ? 1.0 : std::min(1.0, centre + half);
    return {lo, hi};
}

TailEstimate mc_tail(const TailExperiment& e) {
    e.validate();
    const std::size_t p = e.spec.dim();
    const std::size_t burn = e.burn_in.value_or(auto_burn_in(e.spec));

    TailEstimate out;
    out.n = e.n;
    out.reps = e.reps;

    // Pilot path for the stationary mean and variance of g.
    {
        Rng rng = make_rng(e.seed, 0);
        std::vector<double> x(p, 0.0), h(p);
        for (std::size_t t = 0; t < burn; ++t) step(e.spec, x, h, rng);
        const double len = std::min(10.0 * static_cast<double>(e.n) * static_cast<double>(e.reps),
                                    static_cast<double>(e.pilot_cap));
        const auto steps = static_cast<std::size_t>(len);
        double mean = 0.0, m2 = 0.0;
        for (std::size_t t = 1; t <= steps; ++t) {
            step(e.spec, x, h, rng);
            const double v = e.functional(x);
            const double d = v - mean;
            mean += d / static_cast<double>(t);
            m2 += d * (v - mean);
        }
        out.centre = mean;
        out.functional_var = steps > 1 ? m2 / static_cast<double>(steps - 1) : 0.0;
    }

    std::vector<double> dev(e.reps);
    const auto reps = static_cast<std::ptrdiff_t>(e.reps);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t r = 0; r < reps; ++r) {
        Rng rng = make_rng(e.seed, static_cast<std::uint64_t>(r) + 1);
        std::vector<double> x(p, 0.0), h(p);
        for (std::size_t t = 0; t < burn; ++t) step(e.spec, x, h, rng);
        double s = 0.0;
        for (std::size_t t = 0; t < e.n; ++t) {
            step(e.spec, x, h, rng);
            s += e.functional(x);
        }
        dev[static_cast<std::size_t>(r)] = std::abs(s - static_cast<double>(e.n) * out.centre);
    }

    const auto [lo, hi] = std::minmax_element(dev.begin(), dev.end());
    const bool exact = *lo == *hi;
    std::sort(dev.begin(), dev.end());
    for (double z : e.z_grid) {
        const auto first = std::lower_bound(dev.begin(), dev.end(), z);
        const auto hits = static_cast<std::size_t>(dev.end() - first);
        TailPoint q;
        q.z = z;
        q.count = hits;
        q.probability = static_cast<double>(hits) / static_cast<double>(e.reps);
        std::tie(q.wilson_lo, q.wilson_hi) = wilson_interval(hits, e.reps, exact);
        out.points.push_back(q);
    }
    return out;
}

std::vector<double> bernstein_envelope(double tau, double M, std::size_t n, std::span<const double> z,
                                       double c1, double c2, EnvelopeForm form) {
    if (!(tau >= 0.0) || !(c1 >= 0.0) || !(c2 >= 0.0)) fail_validation("envelope constants must be >= 0");
    const double scale = form == EnvelopeForm::bounded ? M : 1.0;
    std::vector<double> out;
    out.reserve(z.size());
    for (double v : z) {
        const double d = c1 * tau * tau * static_cast<double>(n) + c2 * tau * scale * v;
        out.push_back(d > 0.0 ? 2.0 * std::exp(-v * v / d) : (v > 0.0 ? 0.0 : 2.0));
    }
    return out;
}

std::vector<double> hoeffding_envelope(double tau, std::size_t n, std::span<const double> z, double c1) {
    if (!(tau > 0.0) || n == 0) fail_validation("Hoeffding envelope needs tau > 0 and n > 0");
    std::vector<double> out;
    out.reserve(z.size());
    for (double v : z) out.push_back(2.0 * std::exp(-c1 * v * v / (tau * tau * static_cast<double>(n))));
    return out;
}

double classical_bernstein_exponent(double var, double b, std::size_t n, double z) {
    if (!(var >= 0.0) || !(b >= 0.0)) fail_validation("variance and bound must be >= 0");
    const double d = 2.0 * static_cast<double>(n) * var + 2.0 * b * z / 3.0;
    return d > 0.0 ? z * z / d : std::numeric_limits<double>::infinity();
}

double exponent_gap(std::span<const TailEstimate> tails, double tau, double M, double c1, double c2,
                    double var, double b) {
    double worst = 1.0;
    for (const auto& t : tails)
        for (const auto& q : t.points) {
            if (q.z <= 0.0) continue;
            const double fitted = q.z * q.z / (c1 * tau * tau * static_cast<double>(t.n) + c2 * tau * M * q.z);
            const double classical = classical_bernstein_exponent(var, b, t.n, q.z);
            worst = std::max({worst, fitted / classical, classical / fitted});
        }
    return worst;
}

ExplicitConstants explicit_constants(double rho, double mu2) {
    if (!(rho > 0.0 && rho < 1.0)) fail_validation("rho must lie in (0, 1)");
    if (!(mu2 > 0.0)) fail_validation("noise second moment must be positive");
    const double a = -rho * rho * std::log(rho);
    const double e = std::numbers::e;
    return {32.0 * e * e * mu2 * mu2 / (a * a), 8.0 * e / a};
}

EnvelopeGrid EnvelopeGrid::standard() {
    EnvelopeGrid g;
    for (int i = 0; i <= 240; ++i) g.c1.push_back(std::pow(10.0, -3.0 + 8.0 * i / 240.0));
    g.c2.push_back(0.0);
    g.c2.insert(g.c2.end(), g.c1.begin(), g.c1.end());
    return g;
}

EnvelopeFit fit_envelope(std::span<const TailEstimate> tails, double tau, double M,
                         const EnvelopeGrid& grid, EnvelopeForm form) {
    if (tails.empty()) fail_validation("no tail estimates to fit");
    if (!(tau >= 0.0)) fail_validation("tau must be >= 0");
    if (form == EnvelopeForm::bounded && !(M >= 0.0)) fail_validation("bounded form needs M >= 0");
    if (grid.c1.empty() || grid.c2.empty()) fail_validation("empty constant grid");
    const auto pts = positive_points(tails);
    EnvelopeFit best;
    best.points = pts.size();
    if (tau == 0.0 || pts.empty()) {  // every pair dominates
        best.c1 = *std::min_element(grid.c1.begin(), grid.c1.end());
        best.c2 = *std::min_element(grid.c2.begin(), grid.c2.end());
        return best;
    }

    const double scale = form == EnvelopeForm::bounded ? M : 1.0;
    // Envelope >= hi  <=>  z^2 / D <= log(2 / hi).
    std::vector<double> budget(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) budget[i] = std::log(2.0 / pts[i].hi);

    double best_score = -1.0;
    for (double c1 : grid.c1)
        for (double c2 : grid.c2) {
            double score = 0.0;
            bool ok = true;
            for (std::size_t i = 0; i < pts.size() && ok; ++i) {
                const auto& q = pts[i];
                const double d = c1 * tau * tau * q.n + c2 * tau * scale * q.z;
                if (!(d > 0.0)) {
                    ok = false;
                    break;
                }
                const double expo = q.z * q.z / d;
                ok = expo <= budget[i];
                score += expo;
            }
            if (ok && score > best_score) {
                best_score = score;
                best.c1 = c1;
                best.c2 = c2;
            }
        }
    if (best_score < 0.0) fail_model("no envelope on the constant grid dominates the tail estimates");
    return best;
}

HoeffdingReport hoeffding_check(std::span<const TailEstimate> tails, double tau, double M,
                                std::span<const double> c1_grid) {
    if (!(M <= 1.0)) fail_validation("Hoeffding check requires a functional bounded by 1");
    if (!(tau >= 0.0)) fail_validation("tau must be >= 0");
    if (tails.empty()) fail_validation("no tail estimates to fit");
    const auto pts = positive_points(tails);
    double cap = std::numeric_limits<double>::infinity();
    if (tau > 0.0)
        for (const auto& q : pts) cap = std::min(cap, std::log(2.0 / q.hi) * tau * tau * q.n / (q.z * q.z));

    HoeffdingReport rep;
    if (c1_grid.empty()) {
        rep.c1 = cap;
    } else {
        double c = -1.0;
        for (double v : c1_grid)
            if (v <= cap && v > c) c = v;
        if (c < 0.0) fail_model("no Hoeffding constant on the grid dominates the tail estimates");
        rep.c1 = c;
    }

    // Log tail against z^2 / n over moderate deviations.
    std::vector<double> xs, ys;
    for (const auto& t : tails)
        for (const auto& q : t.points) {
            const double floor = 10.0 / static_cast<double>(t.reps);
            if (q.z > 0.0 && q.probability >= floor && q.probability <= 0.5) {
                xs.push_back(q.z * q.z / static_cast<double>(t.n));
                ys.push_back(std::log(q.probability));
            }
        }
    rep.regression_points = xs.size();
    if (xs.size() < 3) {
        rep.r_squared = std::numeric_limits<double>::quiet_NaN();
        return rep;
    }
    const double k = static_cast<double>(xs.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= k;
    my /= k;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    rep.r_squared = (sxx > 0 && syy > 0) ? sxy * sxy / (sxx * syy) : 1.0;
    return rep;
}

CollapseReport tail_collapse(std::span<const TailEstimate> tails, std::size_t min_hits) {
    if (tails.size() < 2) fail_validation("collapse needs at least two sample sizes");
    const std::size_t npts = tails[0].points.size();
    for (const auto& t : tails) {
        if (t.points.size() != npts) fail_validation("tail grids differ in length");
        for (std::size_t i = 0; i < npts; ++i) {
            const double u0 = tails[0].points[i].z / std::sqrt(static_cast<double>(tails[0].n));
            const double u = t.points[i].z / std::sqrt(static_cast<double>(t.n));
            if (std::abs(u - u0) > 1e-9 * std::max(1.0, std::abs(u0)))
                fail_validation("tail grids are not on a common z / sqrt(n) scale");
        }
    }
    CollapseReport rep;
    for (std::size_t i = 0; i < npts; ++i)
        for (std::size_t a = 0; a < tails.size(); ++a)
            for (std::size_t b = a + 1; b < tails.size(); ++b) {
                const auto& qa = tails[a].points[i];
                const auto& qb = tails[b].points[i];
                if (qa.count < min_hits || qb.count < min_hits) continue;
                if (qa.probability >= 1.0 || qb.probability >= 1.0) continue;
                const double va = (1.0 - qa.probability) / (qa.probability * static_cast<double>(tails[a].reps));
                const double vb = (1.0 - qb.probability) / (qb.probability * static_cast<double>(tails[b].reps));
                const double gap = std::abs(std::log(qa.probability) - std::log(qb.probability));
                rep.max_standardized_gap = std::max(rep.max_standardized_gap, gap / std::sqrt(va + vb));
                ++rep.comparisons;
            }
    return rep;
}

}  // namespace savar
