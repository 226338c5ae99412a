#ifndef SOCIALSIM_STATS_DESIGN_HPP
#define SOCIALSIM_STATS_DESIGN_HPP

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "../core.hpp"

namespace socialsim::stats {

enum class Stage { Threshold, Allocation };

// Column layout (full model, 24 columns):
//   0 intercept, 1 pop,
//   2-4 load dummies (low, medium, high; reference lowest),
//   5-6 norm dummies (like, repost; reference none),
//   7-9 pop x load, 10-11 pop x norm,
//   12-14 load x like, 15-17 load x repost,
//   18-20 pop x load x like, 21-23 pop x load x repost.
// Without interactions only columns 0-6 are emitted.
struct DesignSpec {
    Stage stage = Stage::Threshold;
    bool interactions = true;

    std::size_t columns() const { return interactions ? 24 : 7; }
};

inline constexpr std::size_t kFullColumns = 24;
inline constexpr std::size_t kMainEffectColumns = 7;

inline std::vector<std::string> column_names(const DesignSpec& spec) {
    static const std::array<const char*, 3> loads{"Low", "Medium", "High"};
    static const std::array<const char*, 2> norms{"Like", "Repost"};
    std::vector<std::string> out{"(Intercept)", "pop"};
    for (auto l : loads) out.push_back(l);
    for (auto n : norms) out.push_back(n);
    if (!spec.interactions) return out;
    for (auto l : loads) out.push_back(std::string("pop:") + l);
    for (auto n : norms) out.push_back(std::string("pop:") + n);
    for (auto n : norms)
        for (auto l : loads) out.push_back(std::string(l) + ":" + n);
    for (auto n : norms)
        for (auto l : loads) out.push_back(std::string("pop:") + l + ":" + n);
    return out;
}

// Writes one design row into `row` (size spec.columns()).
inline void fill_design_row(std::span<double> row, double composite, LoadLevel load, NormRegime norm,
                            bool interactions = true) {
    const std::array<double, 3> ld{load == LoadLevel::Low ? 1.0 : 0.0, load == LoadLevel::Medium ? 1.0 : 0.0,
                                   load == LoadLevel::High ? 1.0 : 0.0};
    const std::array<double, 2> nd{norm == NormRegime::LikeDominant ? 1.0 : 0.0,
                                   norm == NormRegime::RepostDominant ? 1.0 : 0.0};
    std::size_t c = 0;
    row[c++] = 1.0;
    row[c++] = composite;
    for (double l : ld) row[c++] = l;
    for (double n : nd) row[c++] = n;
    if (!interactions) return;
    for (double l : ld) row[c++] = composite * l;
    for (double n : nd) row[c++] = composite * n;
    for (double n : nd)
        for (double l : ld) row[c++] = l * n;
    for (double n : nd)
        for (double l : ld) row[c++] = composite * l * n;
}

inline Eigen::RowVectorXd design_row(double composite, LoadLevel load, NormRegime norm, bool interactions = true) {
    Eigen::RowVectorXd r(interactions ? kFullColumns : kMainEffectColumns);
    fill_design_row(std::span<double>(r.data(), static_cast<std::size_t>(r.size())), composite, load, norm,
                    interactions);
    return r;
}

struct DesignMatrix {
    Eigen::MatrixXd x;
    std::vector<std::string> names;
    // Threshold: 0 read / 1 engaged. Allocation: 0 like, 1 repost, 2 quote.
    Eigen::VectorXi y;
};

inline int allocation_code(ActionKind a) {
    switch (a) {
        case ActionKind::Like: return 0;
        case ActionKind::Repost: return 1;
        case ActionKind::Quote: return 2;
        case ActionKind::Read: break;
    }
    return -1;
}

// Rows follow record order. The allocation stage keeps engaged rows only.
// The popularity column comes from each row's own exposure snapshot.
template <class Range>
DesignMatrix build_design_matrix(const Range& records, const DesignSpec& spec) {
    std::vector<const ExposureRecord*> rows;
    for (const ExposureRecord& r : records)
        if (spec.stage == Stage::Threshold || is_engagement(r.action)) rows.push_back(&r);

    DesignMatrix dm;
    dm.names = column_names(spec);
    // Row-major scratch, then one copy into the column-major matrix.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x(
        static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(spec.columns()));
    dm.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = *rows[i];
        const double pop = popularity_composite(r.likes_at_exposure, r.reshares_at_exposure);
        fill_design_row(std::span<double>(x.row(static_cast<Eigen::Index>(i)).data(), spec.columns()), pop,
                        r.condition.load.level, r.condition.norm, spec.interactions);
        dm.y[static_cast<Eigen::Index>(i)] =
            spec.stage == Stage::Threshold ? (is_engagement(r.action) ? 1 : 0) : allocation_code(r.action);
    }
    dm.x = x;
    return dm;
}

}  // namespace socialsim::stats

#endif  // SOCIALSIM_STATS_DESIGN_HPP
