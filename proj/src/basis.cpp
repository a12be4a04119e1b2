#include "savar/basis.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "savar/error.hpp"
#include "savar/kernels.hpp"
#include "savar/log.hpp"

namespace savar {

// ----------------------------------------------------------------- basis

void BasisFamily::validate() const {
    if (size == 0) fail_validation("basis size L must be positive");
    if (kind == BasisKind::fourier && !(c0 > 0.0 && std::isfinite(c0)))
        fail_validation("basis support half-width c0 must be finite and > 0");
    if (kind == BasisKind::identity && size != 1) fail_validation("identity basis has size 1");
}

double BasisFamily::bound() const {
    if (kind == BasisKind::identity) return std::numeric_limits<double>::infinity();
    if (include_constant && size == 1) return 1.0 / std::sqrt(2.0 * c0);
    return 1.0 / std::sqrt(c0);
}

namespace {

// Position of element `index` in the full trigonometric sequence.
std::size_t full_index(const BasisFamily& b, std::size_t index) {
    return b.include_constant ? index : index + 1;
}

}  // namespace

double BasisFamily::eval(std::size_t index, double x) const {
    if (index >= size) {
        std::ostringstream os;
        os << "basis index " << index << " out of range (size " << size << ")";
        fail_validation(os.str());
    }
    if (kind == BasisKind::identity) return x;
    const double u = std::clamp(x, -c0, c0);
    const std::size_t q = full_index(*this, index);
    if (q == 0) return 1.0 / std::sqrt(2.0 * c0);
    const double m = static_cast<double>((q + 1) / 2);
    const double arg = m * std::numbers::pi * u / c0;
    return (q % 2 == 1 ? std::cos(arg) : std::sin(arg)) / std::sqrt(c0);
}

void BasisFamily::eval_all(double x, std::span<double> out) const {
    for (std::size_t l = 0; l < size; ++l) out[l] = eval(l, x);
}

void BasisFamily::eval_columns(std::span<const double> x, double* out, std::size_t ld) const {
    const std::size_t n = x.size();
    if (kind == BasisKind::identity) {
        std::copy(x.begin(), x.end(), out);
        return;
    }
    const std::size_t last = full_index(*this, size - 1);
    const std::size_t harmonics = (last + 1) / 2;
    std::vector<double> c1(n), s1(n), cos_m(n * harmonics), sin_m(n * harmonics);
    for (std::size_t t = 0; t < n; ++t) {
        const double theta = std::numbers::pi * std::clamp(x[t], -c0, c0) / c0;
        c1[t] = std::cos(theta);
        s1[t] = std::sin(theta);
    }
    kernels::harmonics(c1, s1, harmonics, cos_m.data(), sin_m.data(), n);

    const double scale = 1.0 / std::sqrt(c0);
    for (std::size_t l = 0; l < size; ++l) {
        double* col = out + l * ld;
        const std::size_t q = full_index(*this, l);
        if (q == 0) {
            std::fill(col, col + n, 1.0 / std::sqrt(2.0 * c0));
            continue;
        }
        const std::size_t m = (q + 1) / 2;
        const double* src = (q % 2 == 1 ? cos_m.data() : sin_m.data()) + (m - 1) * n;
        for (std::size_t t = 0; t < n; ++t) col[t] = scale * src[t];
    }
}

BasisFamily BasisFamily::identity_feature() {
    BasisFamily b;
    b.kind = BasisKind::identity;
    b.size = 1;
    b.c0 = 1.0;
    b.include_constant = false;
    return b;
}

double default_support_half_width(const TimeSeriesPanel& panel) {
    panel.validate();
    const Eigen::MatrixXd centred = panel.data.rowwise() - panel.data.colwise().mean();
    const double pooled_var =
        centred.squaredNorm() / static_cast<double>(panel.data.rows() * panel.data.cols());
    const double sd = std::sqrt(pooled_var);
    return sd > 0.0 ? 3.0 * sd : 1.0;
}

// ------------------------------------------------------------------ gram

Eigen::VectorXd GramFactor::floored(double ridge_floor) const {
    Eigen::VectorXd ev = eigenvalues;
    if (ridge_floor > 0.0 && min_eigenvalue() < ridge_floor) ev.array() += ridge_floor;
    return ev;
}

Eigen::MatrixXd GramFactor::inv_sqrt(double ridge_floor) const {
    Eigen::VectorXd ev = floored(ridge_floor);
    const double tiny = 1e-14 * std::max(1.0, ev.size() ? ev.maxCoeff() : 1.0);
    if (ev.size() && ev.minCoeff() <= tiny) fail_model("degenerate Gram");
    return eigenvectors * ev.cwiseSqrt().cwiseInverse().asDiagonal() * eigenvectors.transpose();
}

Eigen::MatrixXd GramFactor::sqrt(double ridge_floor) const {
    const Eigen::VectorXd ev = floored(ridge_floor).cwiseMax(0.0);
    return eigenvectors * ev.cwiseSqrt().asDiagonal() * eigenvectors.transpose();
}

Eigen::MatrixXd GramFactor::reconstruct() const {
    return eigenvectors * eigenvalues.asDiagonal() * eigenvectors.transpose();
}

// ---------------------------------------------------------------- design

DesignCache DesignCache::build(const TimeSeriesPanel& panel, const BasisFamily& basis,
                               const DesignOptions& options) {
    panel.validate();
    basis.validate();
    DesignCache c;
    const std::size_t n = panel.rows();
    c.m_ = n - 1;
    c.p_ = panel.cols();
    c.L_ = basis.size;
    c.basis_ = basis;
    c.centered_ = options.center;
    const std::size_t m = c.m_, p = c.p_, L = c.L_;

    c.shift_ = options.shift.value_or(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p)));
    if (static_cast<std::size_t>(c.shift_.size()) != p) fail_validation("shift length must equal p");
    if (!c.shift_.allFinite()) fail_validation("shift must be finite");
    if (n < L + 2) {
        std::ostringstream os;
        os << "only " << m << " lag pairs for " << L << " basis elements; Gram blocks may be singular";
        warn(os.str());
    }

    c.design_.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(p * L));
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < p; ++k) {
        std::vector<double> x(m);
        for (std::size_t t = 0; t < m; ++t)
            x[t] = panel.data(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(k)) -
                   c.shift_(static_cast<Eigen::Index>(k));
        basis.eval_columns(x, c.design_.data() + k * L * m, m);
    }
    c.targets_ = panel.data.bottomRows(static_cast<Eigen::Index>(m));

    c.column_means_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p * L));
    c.target_means_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    if (options.center) {
        c.column_means_ = c.design_.colwise().mean().transpose();
        c.target_means_ = c.targets_.colwise().mean().transpose();
        for (Eigen::Index q = 0; q < c.design_.cols(); ++q) {
            auto col = c.design_.col(q);
            if (col.maxCoeff() == col.minCoeff())
                col.setZero();
            else
                col.array() -= c.column_means_(q);
        }
        c.targets_.rowwise() -= c.target_means_.transpose();
    }

    const double inv_m = 1.0 / static_cast<double>(m);
    c.cross_gram_.resize(static_cast<Eigen::Index>(p * L), static_cast<Eigen::Index>(p * L));
    kernels::gram(c.design_.data(), m, p * L, m, inv_m, c.cross_gram_.data());
    c.moments_.resize(static_cast<Eigen::Index>(p * L), static_cast<Eigen::Index>(p));
    kernels::cross(c.design_.data(), m, p * L, m, c.targets_.data(), p, m, inv_m, c.moments_.data());
    c.energy_ = c.targets_.colwise().squaredNorm().transpose() * inv_m;

    c.factors_.resize(p);
#pragma omp parallel for schedule(static)
    for (std::size_t k = 0; k < p; ++k) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Eigen::MatrixXd(c.gram(k)));
        c.factors_[k] = {es.eigenvalues(), es.eigenvectors()};
    }
    return c;
}

void DesignCache::feature_row(std::span<const double> x, std::span<double> out) const {
    for (std::size_t k = 0; k < p_; ++k)
        basis_.eval_all(x[k] - shift_(static_cast<Eigen::Index>(k)), out.subspan(k * L_, L_));
}

std::vector<std::size_t> DesignCache::degenerate_grams(double ridge_floor) const {
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < p_; ++k)
        if (factors_[k].degenerate(ridge_floor)) out.push_back(k);
    return out;
}

// ------------------------------------------------------------ projection

Projection project_function(const ComponentFunction& f, const BasisFamily& basis, std::size_t terms) {
    basis.validate();
    if (basis.kind != BasisKind::fourier) fail_validation("projection needs a Fourier basis");
    if (terms == 0) fail_validation("projection needs at least one term");
    BasisFamily family = basis;
    family.size = terms;
    const double c0 = basis.c0;
    using boost::math::quadrature::gauss_kronrod;
    constexpr unsigned max_depth = 6;
    // Panels of about one period of the highest harmonic on each side of 0,
    // where the benchmark components may have a kink.
    const std::size_t panels = terms / 2 + 2;

    auto integrate = [&](auto&& g, double abs_floor = 0.0) {
        double total = 0.0, err_sum = 0.0, l1_sum = 0.0;
        for (int side : {-1, 1})
            for (std::size_t i = 0; i < panels; ++i) {
                double a = side * c0 * static_cast<double>(i) / static_cast<double>(panels);
                double b = side * c0 * static_cast<double>(i + 1) / static_cast<double>(panels);
                if (a > b) std::swap(a, b);
                double err = 0.0, l1 = 0.0;
                total += gauss_kronrod<double, 61>::integrate(g, a, b, max_depth, 1e-10, &err, &l1);
                err_sum += err;
                l1_sum += l1;
            }
        if (!(err_sum <= 1e-8 * l1_sum + abs_floor + 1e-300)) fail_model("quadrature did not converge");
        return total;
    };

    Projection out;
    out.coefficients.resize(static_cast<Eigen::Index>(terms));
    for (std::size_t l = 0; l < terms; ++l)
        out.coefficients(static_cast<Eigen::Index>(l)) =
            integrate([&](double x) { return f(x) * family.eval(l, x); });

    std::vector<double> psi(terms);
    auto remainder = [&](double x) {
        family.eval_all(x, psi);
        double s = 0.0;
        for (std::size_t l = 0; l < terms; ++l) s += out.coefficients(static_cast<Eigen::Index>(l)) * psi[l];
        return f(x) - s;
    };
    constexpr int grid = 20001;
    double sup = 0.0;
    for (int i = 0; i < grid; ++i) {
        const double x = -c0 + 2.0 * c0 * i / (grid - 1);
        sup = std::max(sup, std::abs(remainder(x)));
    }
    out.remainder_sup = sup;
    // Near-exact projections leave a remainder at rounding level; judge its
    // quadrature error against the energy of f.
    const double energy = integrate([&](double x) { return f(x) * f(x); });
    out.remainder_l2 = std::sqrt(std::max(0.0, integrate(
                                                   [&](double x) {
                                                       const double r = remainder(x);
                                                       return r * r;
                                                   },
                                                   1e-20 * energy)));
    return out;
}

}  // namespace savar
