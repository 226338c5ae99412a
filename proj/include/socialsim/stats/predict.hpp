#ifndef SOCIALSIM_STATS_PREDICT_HPP
#define SOCIALSIM_STATS_PREDICT_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "design.hpp"
#include "model.hpp"

namespace socialsim::stats {

struct Scenario {
    double composite = 0.0;
    LoadLevel load = LoadLevel::Lowest;
    NormRegime norm = NormRegime::NoNorm;
};

struct Band {
    double estimate = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct Prediction {
    Scenario scenario;
    // Threshold: one band (engage). Allocation: like, repost, quote.
    std::vector<Band> outcomes;
    bool flagged = false;
    std::string note;
};

inline constexpr double kZ95 = 1.959963984540054;

// Linear predictor with the model's column layout (24 or 7 columns).
inline Eigen::RowVectorXd scenario_row(const FittedModel& m, const Scenario& s) {
    return design_row(s.composite, s.load, s.norm, m.names.size() == kFullColumns);
}

inline Prediction predict_threshold(const FittedModel& m, const Scenario& s) {
    const auto x = scenario_row(m, s);
    const double eta = x.dot(m.beta);
    const double se = std::sqrt(std::max(0.0, (x * m.covariance * x.transpose())(0, 0)));
    Prediction out{s, {}, false, {}};
    out.outcomes.push_back({detail::logistic(eta), detail::logistic(eta - kZ95 * se), detail::logistic(eta + kZ95 * se)});
    if (!m.equation_estimable.empty() && !m.equation_estimable[0]) {
        out.flagged = true;
        out.note = "model inestimable";
    }
    return out;
}

// Softmax over {like, repost, quote}; bands by the delta method:
// ∂p_a/∂β_e = p_a (1[a = e] − p_e) x.
inline Prediction predict_allocation(const FittedModel& m, const Scenario& s) {
    const auto x = scenario_row(m, s);
    const auto p = x.size();
    Prediction out{s, {}, false, {}};
    std::array<double, 3> eta{0.0, 0.0, 0.0};
    for (int e = 0; e < 2; ++e) {
        if (m.equation_estimable[static_cast<std::size_t>(e)]) {
            eta[static_cast<std::size_t>(e) + 1] = x.dot(m.beta.segment(e * p, p));
        } else {
            eta[static_cast<std::size_t>(e) + 1] = -std::numeric_limits<double>::infinity();
            out.flagged = true;
            out.note += std::string(out.note.empty() ? "" : "; ") + "equation '" + m.equations[static_cast<std::size_t>(e)] +
                        "' inestimable";
        }
    }
    const double mx = *std::max_element(eta.begin(), eta.end());
    std::array<double, 3> prob{};
    double sum = 0.0;
    for (int a = 0; a < 3; ++a) sum += (prob[static_cast<std::size_t>(a)] = std::exp(eta[static_cast<std::size_t>(a)] - mx));
    for (auto& v : prob) v /= sum;

    for (int a = 0; a < 3; ++a) {
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(2 * p);
        for (int e = 0; e < 2; ++e) {
            if (!m.equation_estimable[static_cast<std::size_t>(e)]) continue;
            const double d = prob[static_cast<std::size_t>(a)] * ((a == e + 1 ? 1.0 : 0.0) - prob[static_cast<std::size_t>(e) + 1]);
            grad.segment(e * p, p) = d * x.transpose();
        }
        double var = 0.0;
        for (Eigen::Index i = 0; i < grad.size(); ++i) {
            if (grad[i] == 0.0) continue;
            for (Eigen::Index j = 0; j < grad.size(); ++j)
                if (grad[j] != 0.0) var += grad[i] * m.covariance(i, j) * grad[j];
        }
        const double se = std::sqrt(std::max(0.0, var));
        const double est = prob[static_cast<std::size_t>(a)];
        out.outcomes.push_back({est, std::clamp(est - kZ95 * se, 0.0, 1.0), std::clamp(est + kZ95 * se, 0.0, 1.0)});
    }
    return out;
}

inline std::vector<Prediction> predicted_probabilities(const FittedModel& m, const std::vector<Scenario>& grid) {
    std::vector<Prediction> out;
    out.reserve(grid.size());
    for (const auto& s : grid) out.push_back(m.stage == Stage::Threshold ? predict_threshold(m, s) : predict_allocation(m, s));
    return out;
}

// composite values × 4 loads × 3 norms, load-major.
inline std::vector<Scenario> factorial_grid(const std::vector<double>& composites) {
    std::vector<Scenario> out;
    for (auto l : kAllLoads)
        for (auto n : kAllNorms)
            for (double c : composites) out.push_back({c, l, n});
    return out;
}

}  // namespace socialsim::stats

#endif  // SOCIALSIM_STATS_PREDICT_HPP
