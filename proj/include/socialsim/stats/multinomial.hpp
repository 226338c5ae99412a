#ifndef SOCIALSIM_STATS_MULTINOMIAL_HPP
#define SOCIALSIM_STATS_MULTINOMIAL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "model.hpp"

namespace socialsim::stats {

// Baseline-category logit with category 0 as reference. `theta` stacks one
// coefficient block of x.cols() per non-reference category in `active`
// (category codes 1..K-1); categories not in `active` have probability 0.
class MultinomialLikelihood {
public:
    MultinomialLikelihood(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, std::vector<int> active)
        : x_(x), y_(y), active_(std::move(active)) {}

    std::size_t equations() const { return active_.size(); }
    Eigen::Index params() const { return x_.cols() * static_cast<Eigen::Index>(active_.size()); }

    // Row-wise probabilities: column 0 reference, column j+1 for active_[j].
    Eigen::MatrixXd probabilities(const Eigen::VectorXd& theta) const {
        const auto n = x_.rows(), p = x_.cols();
        const auto J = static_cast<Eigen::Index>(active_.size());
        Eigen::MatrixXd eta(n, J + 1);
        eta.col(0).setZero();
        for (Eigen::Index j = 0; j < J; ++j) eta.col(j + 1) = x_ * theta.segment(j * p, p);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double m = eta.row(i).maxCoeff();
            eta.row(i) = (eta.row(i).array() - m).exp();
            eta.row(i) /= eta.row(i).sum();
        }
        return eta;
    }

    double loglik(const Eigen::VectorXd& theta) const {
        const auto n = x_.rows(), p = x_.cols();
        const auto J = static_cast<Eigen::Index>(active_.size());
        Eigen::MatrixXd eta(n, J + 1);
        eta.col(0).setZero();
        for (Eigen::Index j = 0; j < J; ++j) eta.col(j + 1) = x_ * theta.segment(j * p, p);
        double ll = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const double m = eta.row(i).maxCoeff();
            const double lse = m + std::log((eta.row(i).array() - m).exp().sum());
            const auto col = column_of(y_[i]);
            if (col < 0) return -std::numeric_limits<double>::infinity();
            ll += eta(i, col) - lse;
        }
        return ll;
    }

    Eigen::VectorXd gradient(const Eigen::VectorXd& theta) const {
        const auto p = x_.cols();
        const auto J = static_cast<Eigen::Index>(active_.size());
        const Eigen::MatrixXd prob = probabilities(theta);
        Eigen::VectorXd g(params());
        for (Eigen::Index j = 0; j < J; ++j) {
            Eigen::VectorXd r(x_.rows());
            for (Eigen::Index i = 0; i < x_.rows(); ++i)
                r[i] = (y_[i] == active_[static_cast<std::size_t>(j)] ? 1.0 : 0.0) - prob(i, j + 1);
            g.segment(j * p, p) = x_.transpose() * r;
        }
        return g;
    }

    // Negative Hessian; block (j, k) = Xᵀ diag(P_j(δ_jk − P_k)) X.
    Eigen::MatrixXd information(const Eigen::VectorXd& theta) const {
        const auto p = x_.cols();
        const auto J = static_cast<Eigen::Index>(active_.size());
        const Eigen::MatrixXd prob = probabilities(theta);
        Eigen::MatrixXd h(params(), params());
        for (Eigen::Index j = 0; j < J; ++j) {
            for (Eigen::Index k = j; k < J; ++k) {
                Eigen::VectorXd w(x_.rows());
                for (Eigen::Index i = 0; i < x_.rows(); ++i)
                    w[i] = prob(i, j + 1) * ((j == k ? 1.0 : 0.0) - prob(i, k + 1));
                const Eigen::MatrixXd block = x_.transpose() * (x_.array().colwise() * w.array()).matrix();
                h.block(j * p, k * p, p, p) = block;
                if (k != j) h.block(k * p, j * p, p, p) = block.transpose();
            }
        }
        return h;
    }

private:
    Eigen::Index column_of(int code) const {
        if (code == 0) return 0;
        for (std::size_t j = 0; j < active_.size(); ++j)
            if (active_[j] == code) return static_cast<Eigen::Index>(j) + 1;
        return -1;
    }

    const Eigen::MatrixXd& x_;
    const Eigen::VectorXi& y_;
    std::vector<int> active_;
};

struct MultinomialFit {
    Eigen::VectorXd theta;
    Eigen::MatrixXd covariance;
    double loglik = 0.0;
    Convergence convergence;
};

inline MultinomialFit newton_multinomial(const MultinomialLikelihood& lik, Eigen::Index p, const FitOptions& opt = {}) {
    MultinomialFit fit;
    const auto k = lik.params();
    fit.theta = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd pen_diag = Eigen::VectorXd::Constant(k, opt.l2_penalty);
    for (Eigen::Index j = 0; j < k; j += p) pen_diag[j] = 0.0;  // intercepts unpenalized
    auto objective = [&](const Eigen::VectorXd& th) {
        double pen = 0.0;
        if (opt.l2_penalty > 0.0) pen = 0.5 * (pen_diag.array() * th.array().square()).sum();
        return lik.loglik(th) - pen;
    };

    auto& conv = fit.convergence;
    double ll = objective(fit.theta);
    for (int it = 1; it <= opt.max_iterations; ++it) {
        conv.iterations = it;
        Eigen::MatrixXd h = lik.information(fit.theta);
        h.diagonal() += pen_diag;
        const Eigen::VectorXd g = lik.gradient(fit.theta) - pen_diag.cwiseProduct(fit.theta);
        bool ridged = false;
        const Eigen::VectorXd delta = detail::solve_information(h, g, opt.ridge, ridged);
        if (ridged && !conv.ridge_applied) {
            conv.ridge_applied = true;
            conv.diagnostics.push_back("singular information matrix; ridge " + std::to_string(opt.ridge) +
                                       " added (rank deficiency)");
        }
        double step = 1.0, ll_new = ll;
        Eigen::VectorXd cand = fit.theta;
        for (int half = 0; half < 30; ++half) {
            cand = fit.theta + step * delta;
            ll_new = objective(cand);
            if (std::isfinite(ll_new) && ll_new >= ll - 1e-12) break;
            step *= 0.5;
        }
        fit.theta = cand;
        const double change = std::abs(ll_new - ll);
        ll = ll_new;
        if (change < opt.tolerance) {
            conv.converged = true;
            break;
        }
    }
    fit.loglik = lik.loglik(fit.theta);

    Eigen::MatrixXd h = lik.information(fit.theta);
    h.diagonal() += pen_diag;
    bool ridged = false;
    fit.covariance = detail::solve_information(h, Eigen::MatrixXd::Identity(k, k), opt.ridge, ridged);
    if (ridged && !conv.ridge_applied) {
        conv.ridge_applied = true;
        conv.diagnostics.push_back("singular information at the estimate; ridge added for standard errors");
    }
    if (!conv.converged) conv.diagnostics.push_back("no convergence within " + std::to_string(opt.max_iterations) + " iterations");
    for (Eigen::Index j = 0; j < k; ++j) {
        if (std::abs(fit.theta[j]) > opt.separation_bound) {
            conv.separation = true;
            conv.converged = false;
            conv.diagnostics.push_back("coefficient " + std::to_string(j) + " exceeds |B| > " +
                                       std::to_string(opt.separation_bound) + " (possible separation)");
        }
    }
    // A log-likelihood of ~0 means every outcome is predicted with certainty.
    if (fit.loglik > -1e-3 && !conv.separation) {
        conv.separation = true;
        conv.converged = false;
        conv.diagnostics.push_back("fitted probabilities numerically 0 or 1 (complete separation)");
    }
    return fit;
}

inline constexpr std::array<const char*, 3> kAllocationOutcomes{"like", "repost", "quote"};

// Allocation model: y coded 0 like (reference), 1 repost, 2 quote. An outcome
// with no observations makes its equation inestimable; it is dropped from the
// joint fit and reported with NaN coefficients.
inline FittedModel fit_multinomial_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                            const std::vector<std::string>& names, const FitOptions& opt = {}) {
    const auto p = x.cols();
    FittedModel m;
    m.stage = Stage::Allocation;
    m.names = names;
    m.equations = {"repost", "quote"};
    m.n_obs = static_cast<std::size_t>(x.rows());

    std::array<Eigen::Index, 3> counts{0, 0, 0};
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] < 0 || y[i] > 2) throw std::invalid_argument("allocation outcome codes must be 0, 1 or 2");
        ++counts[static_cast<std::size_t>(y[i])];
    }
    std::vector<int> active;
    m.equation_estimable = {counts[1] > 0, counts[2] > 0};
    for (int c = 1; c <= 2; ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0) active.push_back(c);
        else m.convergence.diagnostics.push_back(std::string("no '") + kAllocationOutcomes[static_cast<std::size_t>(c)] +
                                                 "' outcomes; equation inestimable");
    }
    if (counts[0] == 0) m.convergence.diagnostics.push_back("no reference ('like') outcomes; estimates unreliable");

    m.beta = Eigen::VectorXd::Constant(2 * p, std::numeric_limits<double>::quiet_NaN());
    m.covariance = Eigen::MatrixXd::Constant(2 * p, 2 * p, std::numeric_limits<double>::quiet_NaN());

    double ll_full = 0.0, ll_null = 0.0;
    if (!active.empty()) {
        MultinomialLikelihood lik(x, y, active);
        auto full = newton_multinomial(lik, p, opt);
        const Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(x.rows(), 1);
        MultinomialLikelihood null_lik(ones, y, active);
        auto null = newton_multinomial(null_lik, 1, opt);
        ll_full = full.loglik;
        ll_null = null.loglik;
        for (std::size_t a = 0; a < active.size(); ++a) {
            const auto dst = (active[a] - 1) * p;
            const auto src = static_cast<Eigen::Index>(a) * p;
            m.beta.segment(dst, p) = full.theta.segment(src, p);
            for (std::size_t b = 0; b < active.size(); ++b)
                m.covariance.block(dst, (active[b] - 1) * p, p, p) =
                    full.covariance.block(src, static_cast<Eigen::Index>(b) * p, p, p);
        }
        m.convergence.converged = full.convergence.converged;
        m.convergence.iterations = full.convergence.iterations;
        m.convergence.ridge_applied = full.convergence.ridge_applied;
        m.convergence.separation = full.convergence.separation;
        for (auto& d : full.convergence.diagnostics) m.convergence.diagnostics.push_back(std::move(d));
    }
    const auto k = static_cast<std::size_t>(p) * active.size();
    m.metrics = fit_metrics(ll_full, ll_null, k, active.size());

    for (std::size_t e = 0; e < 2; ++e)
        for (Eigen::Index j = 0; j < p; ++j) {
            const auto idx = static_cast<Eigen::Index>(e) * p + j;
            const double b = m.beta[idx];
            const double var = m.covariance(idx, idx);
            m.coefficients.push_back(make_coefficient(m.equations[e], names.at(static_cast<std::size_t>(j)), b,
                                                      std::isnan(var) ? var : std::sqrt(std::max(0.0, var))));
        }
    return m;
}

inline FittedModel fit_multinomial_logistic(const DesignMatrix& dm, const FitOptions& opt = {}) {
    return fit_multinomial_logistic(dm.x, dm.y, dm.names, opt);
}

}  // namespace socialsim::stats

#endif  // SOCIALSIM_STATS_MULTINOMIAL_HPP
