#ifndef SOCIALSIM_STATS_PUBLISHED_HPP
#define SOCIALSIM_STATS_PUBLISHED_HPP

#include <cmath>
#include <string>
#include <vector>

#include "model.hpp"

namespace socialsim::stats {

// A published coefficient row. `p_below_001` marks rows reported as p < .001.
struct PublishedRow {
    std::string table;
    std::string equation;
    std::string term;
    double b;
    double se;
    double odds_ratio;
    bool p_below_001;
};

// Engage-vs-read model, full interactions; term names follow column_names().
inline std::vector<PublishedRow> published_threshold_table() {
    const std::string t = "threshold";
    return {
        {t, "", "(Intercept)", -2.787, 0.041, 0.062, true},
        {t, "", "pop", 4.624, 0.115, 101.871, true},
        {t, "", "Low", -0.438, 0.056, 0.645, true},
        {t, "", "Medium", -0.758, 0.051, 0.469, true},
        {t, "", "High", -1.297, 0.049, 0.273, true},
        {t, "", "Like", 0.291, 0.057, 1.338, true},
        {t, "", "Repost", -0.465, 0.064, 0.628, true},
        {t, "", "pop:Low", -0.066, 0.146, 0.936, false},
        {t, "", "pop:Medium", -1.156, 0.123, 0.315, true},
        {t, "", "pop:High", -0.808, 0.122, 0.446, true},
        {t, "", "pop:Like", -0.159, 0.143, 0.853, false},
        {t, "", "pop:Repost", 0.525, 0.178, 1.691, false},
        {t, "", "Low:Like", -0.011, 0.077, 0.989, false},
        {t, "", "Medium:Like", -0.013, 0.070, 0.987, false},
        {t, "", "High:Like", 0.472, 0.066, 1.603, true},
        {t, "", "Low:Repost", -0.182, 0.090, 0.834, false},
        {t, "", "Medium:Repost", -0.425, 0.084, 0.654, true},
        {t, "", "High:Repost", -0.298, 0.080, 0.742, true},
        {t, "", "pop:Low:Like", -0.279, 0.180, 0.757, false},
        {t, "", "pop:Medium:Like", -0.126, 0.154, 0.882, false},
        {t, "", "pop:High:Like", -0.711, 0.151, 0.491, true},
        {t, "", "pop:Low:Repost", 2.639, 0.286, 13.995, true},
        {t, "", "pop:Medium:Repost", 3.326, 0.243, 27.815, true},
        {t, "", "pop:High:Repost", 3.649, 0.226, 38.427, true},
    };
}

// Allocation model (reference outcome like).
inline std::vector<PublishedRow> published_allocation_table() {
    const std::string t = "allocation";
    return {
        {t, "quote", "(Intercept)", -0.180, 0.081, 0.835, false},
        {t, "quote", "pop", -0.935, 0.098, 0.392, true},
        {t, "quote", "Low", -0.418, 0.112, 0.658, true},
        {t, "quote", "Medium", -1.522, 0.122, 0.218, true},
        {t, "quote", "High", -1.683, 0.116, 0.186, true},
        {t, "quote", "Like", -1.687, 0.141, 0.185, true},
        {t, "quote", "Repost", -0.542, 0.177, 0.582, false},
        {t, "quote", "pop:Low", 0.467, 0.124, 1.596, true},
        {t, "quote", "pop:Medium", 0.731, 0.128, 2.076, true},
        {t, "quote", "pop:High", 0.982, 0.120, 2.671, true},
        {t, "quote", "pop:Like", 0.204, 0.154, 1.226, false},
        {t, "quote", "pop:Repost", 0.477, 0.192, 1.611, false},
        {t, "quote", "Low:Like", -0.308, 0.174, 0.735, false},
        {t, "quote", "Medium:Like", -0.237, 0.161, 0.789, false},
        {t, "quote", "High:Like", 0.217, 0.144, 1.242, false},
        {t, "quote", "Low:Repost", 0.570, 0.214, 1.768, false},
        {t, "quote", "Medium:Repost", 1.179, 0.206, 3.252, true},
        {t, "quote", "High:Repost", 1.368, 0.191, 3.929, true},
        {t, "quote", "pop:Low:Like", 0.512, 0.218, 1.668, false},
        {t, "quote", "pop:Medium:Like", 0.582, 0.188, 1.790, false},
        {t, "quote", "pop:High:Like", 0.191, 0.184, 1.211, false},
        {t, "quote", "pop:Low:Repost", -0.858, 0.299, 0.424, false},
        {t, "quote", "pop:Medium:Repost", -1.246, 0.270, 0.288, true},
        {t, "quote", "pop:High:Repost", -1.515, 0.246, 0.220, true},
        {t, "repost", "(Intercept)", -4.108, 0.380, 0.016, true},
        {t, "repost", "pop", 0.141, 0.338, 1.152, false},
        {t, "repost", "Low", -0.084, 0.498, 0.919, false},
        {t, "repost", "Medium", 0.262, 0.537, 1.300, false},
        {t, "repost", "High", -0.595, 0.528, 0.552, false},
        {t, "repost", "Like", -1.773, 0.697, 0.170, false},
        {t, "repost", "Repost", 4.490, 0.395, 89.100, true},
        {t, "repost", "pop:Low", 0.515, 0.566, 1.674, false},
        {t, "repost", "pop:Medium", -1.714, 0.576, 0.180, false},
        {t, "repost", "pop:High", -2.765, 0.585, 0.063, true},
        {t, "repost", "pop:Like", -0.135, 0.821, 0.874, false},
        {t, "repost", "pop:Repost", -1.827, 0.483, 0.161, true},
        {t, "repost", "Low:Like", 1.232, 0.787, 3.428, false},
        {t, "repost", "Medium:Like", 0.837, 0.772, 2.309, false},
        {t, "repost", "High:Like", 0.521, 0.751, 1.684, false},
        {t, "repost", "Low:Repost", 0.828, 0.532, 2.290, false},
        {t, "repost", "Medium:Repost", 0.598, 0.530, 1.818, false},
        {t, "repost", "High:Repost", 1.451, 0.522, 4.267, false},
        {t, "repost", "pop:Low:Like", -0.677, 0.990, 0.508, false},
        {t, "repost", "pop:Medium:Like", 1.358, 0.975, 3.890, false},
        {t, "repost", "pop:High:Like", 2.007, 0.952, 7.440, false},
        {t, "repost", "pop:Low:Repost", 0.697, 0.571, 2.008, false},
        {t, "repost", "pop:Medium:Repost", 3.167, 0.580, 23.728, true},
        {t, "repost", "pop:High:Repost", 4.334, 0.574, 76.282, true},
    };
}

// Reported fit statistics of the threshold model.
struct PublishedFit {
    double lr_chi2 = 141852.53;
    std::size_t df = 23;
    double mcfadden = 0.496;
    double aic = 144132.0;
};

struct ConsistencyRow {
    PublishedRow row;
    double exp_b = 0.0;
    double relative_error = 0.0;
    bool or_ok = false;
    double wald_p = 0.0;
    bool p_band_ok = true;  // only checked for rows published as p < .001
};

struct ConsistencyReport {
    std::vector<ConsistencyRow> rows;
    std::vector<std::string> failures;  // labels of failing rows with the reason

    bool ok() const { return failures.empty(); }
};

// exp(B) against the published odds ratio (relative tolerance), and the Wald
// p from B/SE against rows published as p < .001.
inline ConsistencyReport table_consistency_check(const std::vector<PublishedRow>& rows, double or_tolerance = 0.01) {
    ConsistencyReport rep;
    for (const auto& r : rows) {
        ConsistencyRow c;
        c.row = r;
        c.exp_b = std::exp(r.b);
        c.relative_error = std::abs(c.exp_b - r.odds_ratio) / std::abs(r.odds_ratio);
        c.or_ok = c.relative_error <= or_tolerance;
        c.wald_p = wald_p(r.b, r.se);
        if (r.p_below_001) c.p_band_ok = c.wald_p < 0.001;
        const std::string label = r.table + ":" + (r.equation.empty() ? "" : r.equation + "|") + r.term;
        if (!c.or_ok)
            rep.failures.push_back(label + ": exp(B) = " + std::to_string(c.exp_b) + " vs published OR " +
                                   std::to_string(r.odds_ratio) + " (relative error " +
                                   std::to_string(c.relative_error) + ")");
        if (!c.p_band_ok)
            rep.failures.push_back(label + ": Wald p = " + std::to_string(c.wald_p) + " but published p < .001");
        rep.rows.push_back(std::move(c));
    }
    return rep;
}

}  // namespace socialsim::stats

#endif  // SOCIALSIM_STATS_PUBLISHED_HPP
