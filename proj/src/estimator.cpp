#include "savar/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "savar/error.hpp"
#include "savar/kernels.hpp"

namespace savar {

bool CoefficientTensor::block_is_zero(std::size_t j, std::size_t k) const {
    const auto blk = block(j, k);
    return std::all_of(blk.begin(), blk.end(), [](double v) { return v == 0.0; });
}

void FitConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) fail_validation("lambda must be finite and >= 0");
    if (max_sweeps < 1) fail_validation("max_sweeps must be positive");
    if (!(tol_objective > 0.0) || !(tol_kkt > 0.0)) fail_validation("tolerances must be positive");
    if (!(ridge_floor >= 0.0)) fail_validation("ridge_floor must be >= 0");
}

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t v) { return static_cast<Index>(v); }

// Per-covariate Sigma_k^{-1/2} and Sigma_k^{1/2} after the ridge floor.
struct BlockFactors {
    std::vector<MatrixXd> inv_sqrt, sqrt;

    BlockFactors(const DesignCache& cache, double ridge_floor) {
        const std::size_t p = cache.dim();
        inv_sqrt.resize(p);
        sqrt.resize(p);
        for (std::size_t k = 0; k < p; ++k) {
            inv_sqrt[k] = cache.factor(k).inv_sqrt(ridge_floor);
            sqrt[k] = cache.factor(k).sqrt(ridge_floor);
        }
    }
};

// Coordinate descent on one response. Two equivalent bookkeeping modes:
// covariance form keeps grad = C_j - G b = (1/m) Psi^T (Y_j - Psi b), at
// pL^2 flops per block step; residual form keeps r = Y_j - Psi b and forms
// block gradients on demand, at about 2mL. The cheaper one is picked.
class ResponseSolver {
public:
    ResponseSolver(const DesignCache& cache, const BlockFactors& factors, std::size_t j)
        : cache_(cache), f_(factors), j_(j), p_(cache.dim()), L_(cache.basis_size()),
          m_(cache.samples()), residual_mode_(2 * m_ < p_ * L_), b_(VectorXd::Zero(idx(p_ * L_))),
          c_(idx(L_)), d_(idx(L_)), next_(idx(L_)), active_(p_, 0) {
        refresh();
    }

    void warm_start(std::span<const double> b) {
        b_ = Eigen::Map<const VectorXd>(b.data(), idx(b.size()));
        for (std::size_t k = 0; k < p_; ++k) active_[k] = !b_.segment(idx(k * L_), idx(L_)).isZero(0.0);
        refresh();
    }

    const VectorXd& coefficients() const { return b_; }
    bool active(std::size_t k) const { return active_[k] != 0; }

    struct Outcome {
        std::vector<double> trace;
        int sweeps = 0;
        bool converged = false;
        double kkt = 0.0;
    };

    Outcome solve(double lambda, const FitConfig& cfg) {
        Outcome out;
        double prev = objective(lambda);
        int full_done = 0;
        bool need_full = true;
        while (out.sweeps < cfg.max_sweeps) {
            const bool full = need_full || !cfg.active_set || full_done < 2;
            if (full) {
                refresh();
                ++full_done;
                for (std::size_t k = 0; k < p_; ++k) update(k, lambda);
            } else {
                for (std::size_t k = 0; k < p_; ++k)
                    if (active_[k]) update(k, lambda);
            }
            ++out.sweeps;
            const double obj = objective(lambda);
            out.trace.push_back(obj);
            const double drop = prev - obj;
            const double rel = drop <= 0.0 ? 0.0 : drop / std::max(std::abs(obj), 1e-300);
            prev = obj;
            if (rel < cfg.tol_objective) {
                if (full) {
                    if (kkt(lambda) <= cfg.tol_kkt) {
                        out.converged = true;
                        break;
                    }
                    need_full = false;
                } else {
                    need_full = true;
                }
            } else {
                need_full = false;
            }
        }
        out.kkt = kkt(lambda);
        if (out.trace.empty()) out.trace.push_back(prev);
        return out;
    }

    double kkt(double lambda) {
        refresh();
        double worst = 0.0;
        VectorXd gamma(idx(L_));
        for (std::size_t k = 0; k < p_; ++k) {
            block_gradient(k, c_);
            d_.noalias() = f_.inv_sqrt[k] * c_;
            if (!active_[k]) {
                worst = std::max(worst, d_.norm() - 0.5 * lambda);
            } else {
                gamma.noalias() = f_.sqrt[k] * b_.segment(idx(k * L_), idx(L_));
                const double gn = gamma.norm();
                if (gn > 0.0) d_ -= (0.5 * lambda / gn) * gamma;
                worst = std::max(worst, d_.norm());
            }
        }
        return std::max(worst, 0.0);
    }

private:
    // Recomputes the maintained quantity from b to shed rounding drift.
    void refresh() {
        if (residual_mode_) {
            resid_ = cache_.targets().col(idx(j_));
            for (std::size_t k = 0; k < p_; ++k)
                if (active_[k]) resid_.noalias() -= cache_.block(k) * b_.segment(idx(k * L_), idx(L_));
        } else {
            grad_ = cache_.moments().col(idx(j_));
            for (std::size_t k = 0; k < p_; ++k)
                if (active_[k])
                    grad_.noalias() -= cache_.cross_gram().middleCols(idx(k * L_), idx(L_)) *
                                       b_.segment(idx(k * L_), idx(L_));
        }
    }

    // (1/m) Psi_k^T (Y_j - Psi b).
    void block_gradient(std::size_t k, VectorXd& out) const {
        if (!residual_mode_) {
            out = grad_.segment(idx(k * L_), idx(L_));
            return;
        }
        const double inv_m = 1.0 / static_cast<double>(m_);
        const std::span<const double> r(resid_.data(), m_);
        for (std::size_t l = 0; l < L_; ++l)
            out(idx(l)) = inv_m * kernels::dot(column(k * L_ + l), r);
    }

    std::span<const double> column(std::size_t c) const {
        return {cache_.design().col(idx(c)).data(), m_};
    }

    void update(std::size_t k, double lambda) {
        const Index off = idx(k * L_), L = idx(L_);
        auto bk = b_.segment(off, L);
        block_gradient(k, c_);
        if (active_[k]) c_.noalias() += cache_.gram(k) * bk;
        d_.noalias() = f_.inv_sqrt[k] * c_;
        const double nd = d_.norm();
        if (2.0 * nd <= lambda) {
            if (!active_[k]) return;
            next_.setZero();
        } else {
            next_.noalias() = f_.inv_sqrt[k] * d_;
            next_ *= 1.0 - lambda / (2.0 * nd);
        }
        c_ = next_ - bk;  // reused as the step
        for (Index l = 0; l < L; ++l) {
            if (c_(l) == 0.0) continue;
            if (residual_mode_) {
                kernels::axpy(-c_(l), column(static_cast<std::size_t>(off + l)),
                              std::span<double>(resid_.data(), m_));
            } else {
                const std::size_t rows = p_ * L_;
                kernels::axpy(-c_(l), std::span<const double>(cache_.cross_gram().col(off + l).data(), rows),
                              std::span<double>(grad_.data(), rows));
            }
        }
        bk = next_;
        active_[k] = !next_.isZero(0.0);
    }

    double objective(double lambda) const {
        double loss;
        if (residual_mode_) {
            loss = resid_.squaredNorm() / static_cast<double>(m_);
        } else {
            // yy - 2 C^T b + b^T G b = yy - C^T b - grad^T b
            const auto& C = cache_.moments().col(idx(j_));
            loss = cache_.response_energy(j_) - C.dot(b_) - grad_.dot(b_);
        }
        double pen = 0.0;
        for (std::size_t k = 0; k < p_; ++k) {
            if (!active_[k]) continue;
            const auto bk = b_.segment(idx(k * L_), idx(L_));
            pen += std::sqrt(std::max(0.0, bk.dot(cache_.gram(k) * bk)));
        }
        return loss + lambda * pen;
    }

    const DesignCache& cache_;
    const BlockFactors& f_;
    std::size_t j_, p_, L_, m_;
    bool residual_mode_;
    VectorXd b_, grad_, resid_;
    VectorXd c_, d_, next_;
    std::vector<char> active_;
};

FitResult assemble(const DesignCache& cache, const FitConfig& cfg, double lambda,
                   CoefficientTensor&& b, const std::vector<ResponseSolver::Outcome>& outcomes) {
    const std::size_t p = cache.dim(), L = cache.basis_size();
    FitResult r;
    r.lambda = lambda;
    r.coefficients = std::move(b);
    r.adjacency = Eigen::MatrixXi::Zero(idx(p), idx(p));
    r.group_norms = MatrixXd::Zero(idx(p), idx(p));
    r.converged = true;
    std::size_t longest = 0;
    for (const auto& o : outcomes) {
        r.sweeps_used = std::max(r.sweeps_used, o.sweeps);
        r.converged = r.converged && o.converged;
        r.kkt_residual = std::max(r.kkt_residual, o.kkt);
        longest = std::max(longest, o.trace.size());
    }
    r.objective_trace.assign(longest, 0.0);
    for (const auto& o : outcomes)
        for (std::size_t s = 0; s < longest; ++s)
            r.objective_trace[s] += o.trace[std::min(s, o.trace.size() - 1)];

    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < p; ++k) {
            if (r.coefficients.block_is_zero(j, k)) continue;
            r.support.emplace_back(j, k);
            r.adjacency(idx(j), idx(k)) = 1;
            const auto blk = r.coefficients.block(j, k);
            const Eigen::Map<const VectorXd> bk(blk.data(), idx(L));
            r.group_norms(idx(j), idx(k)) = std::sqrt(std::max(0.0, bk.dot(cache.gram(k) * bk)));
        }
    r.degenerate_grams = cache.degenerate_grams(cfg.ridge_floor);
    r.basis = cache.basis();
    r.shift = cache.shift();
    r.intercept = VectorXd::Zero(idx(p));
    if (cache.centered()) {
        const auto B = r.coefficients.as_matrix();
        r.intercept = cache.target_means() - B.transpose() * cache.column_means();
    }
    return r;
}

}  // namespace

double objective(const CoefficientTensor& b, const DesignCache& cache, double lambda) {
    const std::size_t p = cache.dim(), L = cache.basis_size();
    if (b.dim() != p || b.basis_size() != L) fail_validation("coefficient shape does not match design");
    const double inv_m = 1.0 / static_cast<double>(cache.samples());
    const MatrixXd resid = cache.targets() - cache.design() * b.as_matrix();
    double pen = 0.0;
    for (std::size_t j = 0; j < p; ++j)
        for (std::size_t k = 0; k < p; ++k) {
            const auto blk = b.block(j, k);
            const Eigen::Map<const VectorXd> bk(blk.data(), idx(L));
            pen += std::sqrt((cache.block(k) * bk).squaredNorm() * inv_m);
        }
    return resid.squaredNorm() * inv_m + lambda * pen;
}

double lambda_max(const DesignCache& cache, double ridge_floor) {
    const std::size_t p = cache.dim(), L = cache.basis_size();
    double best = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
        const MatrixXd S = cache.factor(k).inv_sqrt(ridge_floor);
        const MatrixXd D = S * cache.moments().middleRows(idx(k * L), idx(L));
        for (std::size_t j = 0; j < p; ++j) best = std::max(best, 2.0 * D.col(idx(j)).norm());
    }
    return best;
}

Eigen::VectorXd block_update(std::size_t j, std::size_t k, std::span<const double> partial_residual,
                             const DesignCache& cache, double lambda, double ridge_floor) {
    if (j >= cache.dim() || k >= cache.dim()) fail_validation("block index out of range");
    if (partial_residual.size() != cache.samples()) fail_validation("residual length must equal m");
    const Eigen::Map<const VectorXd> r(partial_residual.data(), idx(partial_residual.size()));
    const VectorXd c = cache.block(k).transpose() * r / static_cast<double>(cache.samples());
    const MatrixXd S = cache.factor(k).inv_sqrt(ridge_floor);
    const VectorXd d = S * c;
    const double nd = d.norm();
    if (2.0 * nd <= lambda) return VectorXd::Zero(idx(cache.basis_size()));
    return S * d * (1.0 - lambda / (2.0 * nd));
}

FitResult fit(const DesignCache& cache, const FitConfig& config, const CoefficientTensor* warm_start) {
    config.validate();
    const std::size_t p = cache.dim(), L = cache.basis_size();
    if (warm_start && (warm_start->dim() != p || warm_start->basis_size() != L))
        fail_validation("warm start shape does not match design");
    const BlockFactors factors(cache, config.ridge_floor);
    CoefficientTensor b(p, L);
    std::vector<ResponseSolver::Outcome> outcomes(p);

#pragma omp parallel for schedule(dynamic)
    for (std::size_t j = 0; j < p; ++j) {
        ResponseSolver solver(cache, factors, j);
        if (warm_start) solver.warm_start(warm_start->response(j));
        outcomes[j] = solver.solve(config.lambda, config);
        const VectorXd& bj = solver.coefficients();
        std::copy(bj.data(), bj.data() + bj.size(), b.response(j).begin());
    }
    return assemble(cache, config, config.lambda, std::move(b), outcomes);
}

std::vector<FitResult> fit_path(const DesignCache& cache, std::span<const double> lambdas,
                                const FitConfig& config) {
    config.validate();
    const std::size_t p = cache.dim(), L = cache.basis_size(), nl = lambdas.size();
    for (double l : lambdas)
        if (!(l >= 0.0) || !std::isfinite(l)) fail_validation("lambda values must be finite and >= 0");
    const BlockFactors factors(cache, config.ridge_floor);
    std::vector<CoefficientTensor> coefs(nl, CoefficientTensor(p, L));
    std::vector<std::vector<ResponseSolver::Outcome>> outcomes(nl, std::vector<ResponseSolver::Outcome>(p));

#pragma omp parallel for schedule(dynamic)
    for (std::size_t j = 0; j < p; ++j) {
        ResponseSolver solver(cache, factors, j);
        for (std::size_t i = 0; i < nl; ++i) {
            outcomes[i][j] = solver.solve(lambdas[i], config);
            const VectorXd& bj = solver.coefficients();
            std::copy(bj.data(), bj.data() + bj.size(), coefs[i].response(j).begin());
        }
    }
    std::vector<FitResult> out;
    out.reserve(nl);
    for (std::size_t i = 0; i < nl; ++i)
        out.push_back(assemble(cache, config, lambdas[i], std::move(coefs[i]), outcomes[i]));
    return out;
}

Eigen::MatrixXd activation_lambdas(const DesignCache& cache, std::span<const double> lambdas,
                                   const FitConfig& config) {
    config.validate();
    const std::size_t p = cache.dim();
    for (double l : lambdas)
        if (!(l >= 0.0) || !std::isfinite(l)) fail_validation("lambda values must be finite and >= 0");
    const BlockFactors factors(cache, config.ridge_floor);
    MatrixXd out = MatrixXd::Zero(idx(p), idx(p));

#pragma omp parallel for schedule(dynamic)
    for (std::size_t j = 0; j < p; ++j) {
        ResponseSolver solver(cache, factors, j);
        std::size_t entered = 0;
        for (std::size_t i = 0; i < lambdas.size() && entered < p; ++i) {
            solver.solve(lambdas[i], config);
            entered = 0;
            for (std::size_t k = 0; k < p; ++k) {
                double& s = out(idx(j), idx(k));
                if (solver.active(k)) s = std::max(s, lambdas[i]);
                entered += s > 0.0;
            }
        }
    }
    return out;
}

double kkt_check(const CoefficientTensor& b, const DesignCache& cache, double lambda,
                 double ridge_floor) {
    const std::size_t p = cache.dim(), L = cache.basis_size();
    if (b.dim() != p || b.basis_size() != L) fail_validation("coefficient shape does not match design");
    const double inv_m = 1.0 / static_cast<double>(cache.samples());
    const MatrixXd resid = cache.targets() - cache.design() * b.as_matrix();
    const MatrixXd grad = cache.design().transpose() * resid * inv_m;  // pL x p
    double worst = 0.0;
    for (std::size_t k = 0; k < p; ++k) {
        const MatrixXd S = cache.factor(k).inv_sqrt(ridge_floor);
        const MatrixXd R = cache.factor(k).sqrt(ridge_floor);
        for (std::size_t j = 0; j < p; ++j) {
            VectorXd d = S * grad.col(idx(j)).segment(idx(k * L), idx(L));
            const auto blk = b.block(j, k);
            const Eigen::Map<const VectorXd> bk(blk.data(), idx(L));
            if (bk.isZero(0.0)) {
                worst = std::max(worst, d.norm() - 0.5 * lambda);
            } else {
                const VectorXd gamma = R * bk;
                d -= (0.5 * lambda / gamma.norm()) * gamma;
                worst = std::max(worst, d.norm());
            }
        }
    }
    return std::max(worst, 0.0);
}

std::vector<double> estimate_function(const FitResult& result, std::size_t j, std::size_t k,
                                      std::span<const double> grid) {
    const std::size_t p = result.dim();
    if (j >= p || k >= p) fail_validation("component index out of range");
    const auto blk = result.coefficients.block(j, k);
    const double shift = result.shift.size() ? result.shift(idx(k)) : 0.0;
    std::vector<double> out(grid.size(), 0.0);
    std::vector<double> psi(result.basis.size);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        result.basis.eval_all(grid[i] - shift, psi);
        double s = 0.0;
        for (std::size_t l = 0; l < psi.size(); ++l) s += psi[l] * blk[l];
        out[i] = s;
    }
    return out;
}

Eigen::VectorXd predict_one_step(const FitResult& result, std::span<const double> x) {
    const std::size_t p = result.dim(), L = result.basis.size;
    if (x.size() != p) fail_validation("state length must equal p");
    VectorXd out = result.intercept.size() ? result.intercept : VectorXd::Zero(idx(p));
    std::vector<double> psi(L);
    for (std::size_t k = 0; k < p; ++k) {
        bool any = false;
        for (std::size_t j = 0; j < p && !any; ++j) any = !result.coefficients.block_is_zero(j, k);
        if (!any) continue;
        const double shift = result.shift.size() ? result.shift(idx(k)) : 0.0;
        result.basis.eval_all(x[k] - shift, psi);
        for (std::size_t j = 0; j < p; ++j) {
            const auto blk = result.coefficients.block(j, k);
            double s = 0.0;
            for (std::size_t l = 0; l < L; ++l) s += psi[l] * blk[l];
            out(idx(j)) += s;
        }
    }
    return out;
}

std::vector<double> log_lambda_grid(double hi, std::size_t count, double ratio) {
    if (!(hi > 0.0) || count == 0 || !(ratio > 0.0 && ratio <= 1.0))
        fail_validation("lambda grid needs hi > 0, count > 0 and ratio in (0, 1]");
    std::vector<double> grid(count);
    if (count == 1) {
        grid[0] = hi;
        return grid;
    }
    const double step = std::log(ratio) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) grid[i] = hi * std::exp(step * static_cast<double>(i));
    return grid;
}

}  // namespace savar
