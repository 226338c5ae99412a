#ifndef SOCIALSIM_STATS_LOGISTIC_HPP
#define SOCIALSIM_STATS_LOGISTIC_HPP

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "model.hpp"

namespace socialsim::stats {

// Σ y·η − log(1 + e^η)
inline double binary_loglik(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = x * beta;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += (y[i] ? eta[i] : 0.0) - detail::softplus(eta[i]);
    return ll;
}

// Xᵀ(y − μ)
inline Eigen::VectorXd binary_gradient(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd r(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) r[i] = static_cast<double>(y[i]) - detail::logistic(eta[i]);
    return x.transpose() * r;
}

// Xᵀ W X with W = μ(1 − μ)
inline Eigen::MatrixXd binary_information(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd sw(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double mu = detail::logistic(eta[i]);
        sw[i] = std::sqrt(mu * (1.0 - mu));
    }
    const Eigen::MatrixXd xw = x.array().colwise() * sw.array();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(x.cols(), x.cols());
    h.selfadjointView<Eigen::Lower>().rankUpdate(xw.transpose());
    return h.selfadjointView<Eigen::Lower>();
}

struct BinaryFit {
    Eigen::VectorXd beta;
    Eigen::MatrixXd covariance;
    double loglik = 0.0;
    Convergence convergence;
};

namespace detail {

inline double penalty(const Eigen::VectorXd& beta, double l2) {
    return l2 > 0.0 ? 0.5 * l2 * beta.tail(beta.size() - 1).squaredNorm() : 0.0;
}

}  // namespace detail

// Newton-Raphson on the logit log-likelihood, which for the canonical link is
// exactly IRLS. Step halving keeps each iteration ascending.
inline BinaryFit irls_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXi& y, const FitOptions& opt = {}) {
    const auto n = x.rows(), p = x.cols();
    BinaryFit fit;
    fit.beta = Eigen::VectorXd::Zero(p);
    // Start the intercept (column 0) at the logit of the base rate.
    if (p > 0 && n > 0) {
        const double ybar = static_cast<double>(y.sum()) / static_cast<double>(n);
        if (ybar > 0.0 && ybar < 1.0) fit.beta[0] = std::log(ybar / (1.0 - ybar));
    }
    Eigen::VectorXd pen_diag = Eigen::VectorXd::Constant(p, opt.l2_penalty);
    if (p > 0) pen_diag[0] = 0.0;

    double ll = binary_loglik(x, y, fit.beta) - detail::penalty(fit.beta, opt.l2_penalty);
    auto& conv = fit.convergence;
    for (int it = 1; it <= opt.max_iterations; ++it) {
        conv.iterations = it;
        Eigen::MatrixXd h = binary_information(x, fit.beta);
        h.diagonal() += pen_diag;
        const Eigen::VectorXd g = binary_gradient(x, y, fit.beta) - pen_diag.cwiseProduct(fit.beta);
        bool ridged = false;
        const Eigen::VectorXd delta = detail::solve_information(h, g, opt.ridge, ridged);
        if (ridged && !conv.ridge_applied) {
            conv.ridge_applied = true;
            conv.diagnostics.push_back("singular weighted normal equations; ridge " + std::to_string(opt.ridge) +
                                       " added (rank deficiency)");
        }
        double step = 1.0, ll_new = ll;
        Eigen::VectorXd cand = fit.beta;
        for (int half = 0; half < 30; ++half) {
            cand = fit.beta + step * delta;
            ll_new = binary_loglik(x, y, cand) - detail::penalty(cand, opt.l2_penalty);
            if (std::isfinite(ll_new) && ll_new >= ll - 1e-12) break;
            step *= 0.5;
        }
        fit.beta = cand;
        const double change = std::abs(ll_new - ll);
        ll = ll_new;
        if (change < opt.tolerance) {
            conv.converged = true;
            break;
        }
    }
    fit.loglik = binary_loglik(x, y, fit.beta);

    Eigen::MatrixXd h = binary_information(x, fit.beta);
    h.diagonal() += pen_diag;
    bool ridged = false;
    fit.covariance = detail::solve_information(h, Eigen::MatrixXd::Identity(p, p), opt.ridge, ridged);
    if (ridged && !conv.ridge_applied) {
        conv.ridge_applied = true;
        conv.diagnostics.push_back("singular information at the estimate; ridge added for standard errors");
    }

    if (!conv.converged) conv.diagnostics.push_back("no convergence within " + std::to_string(opt.max_iterations) + " iterations");
    for (Eigen::Index j = 0; j < p; ++j) {
        if (std::abs(fit.beta[j]) > opt.separation_bound) {
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

// Full threshold fit with the intercept-only null model and fit metrics.
inline FittedModel fit_binary_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXi& y,
                                       const std::vector<std::string>& names, const FitOptions& opt = {}) {
    FittedModel m;
    m.stage = Stage::Threshold;
    m.names = names;
    m.equations = {""};
    m.n_obs = static_cast<std::size_t>(x.rows());

    auto full = irls_logistic(x, y, opt);
    auto null = irls_logistic(Eigen::MatrixXd::Ones(x.rows(), 1), y, opt);
    m.equation_estimable = {y.sum() > 0 && y.sum() < y.size()};
    if (!m.equation_estimable[0]) m.convergence.diagnostics.push_back("outcome has a single class; model inestimable");

    m.beta = full.beta;
    m.covariance = full.covariance;
    m.convergence.converged = full.convergence.converged;
    m.convergence.iterations = full.convergence.iterations;
    m.convergence.ridge_applied = full.convergence.ridge_applied;
    m.convergence.separation = full.convergence.separation;
    for (auto& d : full.convergence.diagnostics) m.convergence.diagnostics.push_back(std::move(d));
    m.metrics = fit_metrics(full.loglik, null.loglik, static_cast<std::size_t>(x.cols()), 1);
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        m.coefficients.push_back(make_coefficient("", names.at(static_cast<std::size_t>(j)), full.beta[j],
                                                  std::sqrt(std::max(0.0, full.covariance(j, j)))));
    return m;
}

inline FittedModel fit_binary_logistic(const DesignMatrix& dm, const FitOptions& opt = {}) {
    return fit_binary_logistic(dm.x, dm.y, dm.names, opt);
}

}  // namespace socialsim::stats

#endif  // SOCIALSIM_STATS_LOGISTIC_HPP
