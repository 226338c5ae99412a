// One cell at full scale with the parametric policy, then the threshold fit.

#include <cstdio>
#include <iostream>

#include "socialsim/engine.hpp"
#include "socialsim/stats/design.hpp"
#include "socialsim/stats/logistic.hpp"

int main() {
    using namespace socialsim;
    const auto population = generate_population(558, 7);
    const auto corpus = generate_seed_corpus(7);

    RunConfig cfg;
    cfg.seed = 7;
    cfg.condition = {LoadCondition{LoadLevel::High}, NormRegime::RepostDominant};
    const auto res = run(cfg, default_parametric_spec(), population, corpus);
    const auto rows = res.log.exposures();
    std::cout << res.activations.size() << " activations, " << rows.size() << " exposure rows, "
              << res.final_counters.size() << " posts\n";

    // Within one cell the load and norm dummies are constant; keep only the
    // intercept and popularity columns.
    const auto dm = stats::build_design_matrix(rows, {stats::Stage::Threshold, false});
    const Eigen::MatrixXd x = dm.x.leftCols(2);
    const auto m = stats::fit_binary_logistic(x, dm.y, {dm.names[0], dm.names[1]});
    for (const auto& c : m.coefficients)
        std::printf("%-12s B=%8.3f  OR=%8.3f\n", c.term.c_str(), c.estimate, c.odds_ratio);
    std::printf("McFadden R2 %.3f, AIC %.1f\n", m.metrics.mcfadden, m.metrics.aic);
}
