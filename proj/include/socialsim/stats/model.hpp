#ifndef SOCIALSIM_STATS_MODEL_HPP
#define SOCIALSIM_STATS_MODEL_HPP

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "design.hpp"

namespace socialsim::stats {

struct FitOptions {
    double tolerance = 1e-8;  // on |ΔLL|
    int max_iterations = 100;
    double ridge = 1e-6;              // added when the normal equations are singular
    double l2_penalty = 0.0;          // optional penalty on non-intercept terms, off by default
    double separation_bound = 15.0;   // |B| beyond this flags (quasi-)separation
};

struct Convergence {
    bool converged = false;
    int iterations = 0;
    bool ridge_applied = false;
    bool separation = false;
    std::vector<std::string> diagnostics;
};

struct FitMetrics {
    double ll_full = 0.0;
    double ll_null = 0.0;
    std::size_t k = 0;
    std::size_t k_null = 0;
    double lr_chi2 = 0.0;
    std::size_t df = 0;
    double mcfadden = 0.0;
    double aic = 0.0;
};

// χ² = 2(LL_full − LL_null), df = k − k_null, McFadden = 1 − LL_full/LL_null,
// AIC = 2k − 2 LL_full.
inline FitMetrics fit_metrics(double ll_full, double ll_null, std::size_t k, std::size_t k_null) {
    FitMetrics m;
    m.ll_full = ll_full;
    m.ll_null = ll_null;
    m.k = k;
    m.k_null = k_null;
    m.lr_chi2 = 2.0 * (ll_full - ll_null);
    m.df = k >= k_null ? k - k_null : 0;
    m.mcfadden = ll_null != 0.0 ? 1.0 - ll_full / ll_null : 0.0;
    m.aic = 2.0 * static_cast<double>(k) - 2.0 * ll_full;
    return m;
}

// Two-tailed normal-reference p for a Wald z.
inline double wald_p(double estimate, double se) {
    if (!(se > 0.0) || !std::isfinite(se)) return std::numeric_limits<double>::quiet_NaN();
    return std::erfc(std::abs(estimate / se) / std::sqrt(2.0));
}

struct Coefficient {
    std::string equation;  // empty for the threshold model; "repost"/"quote" for allocation
    std::string term;
    double estimate = 0.0;
    double se = 0.0;
    double odds_ratio = 1.0;
    double p = 0.0;

    std::string label() const { return equation.empty() ? term : equation + "|" + term; }
};

inline Coefficient make_coefficient(std::string equation, std::string term, double b, double se) {
    return {std::move(equation), std::move(term), b, se, std::exp(b), wald_p(b, se)};
}

struct FittedModel {
    Stage stage = Stage::Threshold;
    std::vector<std::string> names;  // design columns
    std::vector<std::string> equations;  // {""} or {"repost", "quote"}
    std::vector<bool> equation_estimable;
    Eigen::VectorXd beta;        // stacked by equation
    Eigen::MatrixXd covariance;  // inverse observed information
    std::vector<Coefficient> coefficients;
    FitMetrics metrics;
    Convergence convergence;
    std::size_t n_obs = 0;
};

struct OddsRatioRow {
    std::string label;
    double estimate;
    double odds_ratio;
    double p;
};

inline std::vector<OddsRatioRow> odds_ratios(const FittedModel& m) {
    std::vector<OddsRatioRow> out;
    for (const auto& c : m.coefficients) out.push_back({c.label(), c.estimate, std::exp(c.estimate), c.p});
    return out;
}

namespace detail {

// log(1 + e^x) without overflow.
inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline double logistic(double eta) {
    if (eta >= 0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

// Cholesky of a symmetric information matrix, or nullopt when H is not
// positive definite or is numerically singular.
inline std::optional<Eigen::LLT<Eigen::MatrixXd>> cholesky(const Eigen::MatrixXd& h) {
    Eigen::LLT<Eigen::MatrixXd> llt(h);
    if (llt.info() != Eigen::Success) return std::nullopt;
    const Eigen::VectorXd d = llt.matrixL().toDenseMatrix().diagonal();
    if (d.minCoeff() <= 1e-7 * std::max(1.0, d.maxCoeff())) return std::nullopt;
    return llt;
}

// Solves H X = B, adding ridge·I when H is singular.
inline Eigen::MatrixXd solve_information(const Eigen::MatrixXd& h, const Eigen::MatrixXd& b, double ridge,
                                         bool& ridged) {
    if (auto llt = cholesky(h)) return llt->solve(b);
    ridged = true;
    const Eigen::MatrixXd hr = h + ridge * Eigen::MatrixXd::Identity(h.rows(), h.cols());
    return hr.ldlt().solve(b);
}

}  // namespace detail

}  // namespace socialsim::stats

#endif  // SOCIALSIM_STATS_MODEL_HPP
