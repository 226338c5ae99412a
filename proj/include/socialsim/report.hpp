#ifndef SOCIALSIM_REPORT_HPP
#define SOCIALSIM_REPORT_HPP

#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "core.hpp"
#include "harness.hpp"
#include "stats/model.hpp"
#include "stats/multinomial.hpp"
#include "stats/predict.hpp"

namespace socialsim::report {

// %.*g with NA for non-finite values; locale-independent enough for CSV.
inline std::string num(double v, int precision = 6) {
    if (std::isnan(v)) return "NA";
    if (std::isinf(v)) return v > 0 ? "Inf" : "-Inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    return buf;
}

// ---------------------------------------------------------------------------
// Coefficient tables

inline std::string coefficients_csv(const stats::FittedModel& m) {
    std::string out = "term,B,SE,OR,p,converged\n";
    const std::string conv = m.convergence.converged ? "true" : "false";
    for (const auto& c : m.coefficients)
        out += c.label() + "," + num(c.estimate, 8) + "," + num(c.se, 8) + "," + num(c.odds_ratio, 8) + "," +
               num(c.p, 6) + "," + conv + "\n";
    return out;
}

inline std::string coefficients_markdown(const stats::FittedModel& m) {
    std::string out = "| Term | B | SE | OR | p |\n|---|---:|---:|---:|---:|\n";
    for (const auto& c : m.coefficients) {
        const std::string p = std::isnan(c.p) ? "NA" : (c.p < 0.001 ? "< .001" : num(c.p, 3));
        out += "| " + c.label() + " | " + num(c.estimate, 4) + " | " + num(c.se, 4) + " | " + num(c.odds_ratio, 4) +
               " | " + p + " |\n";
    }
    return out;
}

inline nlohmann::ordered_json metrics_json(const stats::FittedModel& m) {
    nlohmann::ordered_json j;
    j["n_obs"] = m.n_obs;
    j["ll_full"] = m.metrics.ll_full;
    j["ll_null"] = m.metrics.ll_null;
    j["k"] = m.metrics.k;
    j["k_null"] = m.metrics.k_null;
    j["lr_chi2"] = m.metrics.lr_chi2;
    j["df"] = m.metrics.df;
    j["mcfadden"] = m.metrics.mcfadden;
    j["aic"] = m.metrics.aic;
    j["converged"] = m.convergence.converged;
    j["iterations"] = m.convergence.iterations;
    j["ridge_applied"] = m.convergence.ridge_applied;
    j["separation"] = m.convergence.separation;
    j["diagnostics"] = m.convergence.diagnostics;
    return j;
}

// ---------------------------------------------------------------------------
// Model persistence (what `report` needs to predict)

namespace detail {

inline nlohmann::ordered_json numbers(const double* p, Eigen::Index n) {
    auto a = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::isfinite(p[i])) a.push_back(p[i]);
        else a.push_back(nullptr);
    }
    return a;
}

inline double number(const nlohmann::json& j) {
    return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace detail

inline nlohmann::ordered_json model_to_json(const stats::FittedModel& m) {
    nlohmann::ordered_json j;
    j["stage"] = m.stage == stats::Stage::Threshold ? "threshold" : "allocation";
    j["names"] = m.names;
    j["equations"] = m.equations;
    j["equation_estimable"] = m.equation_estimable;
    j["beta"] = detail::numbers(m.beta.data(), m.beta.size());
    auto cov = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < m.covariance.rows(); ++r) {
        const Eigen::VectorXd row = m.covariance.row(r);
        cov.push_back(detail::numbers(row.data(), row.size()));
    }
    j["covariance"] = std::move(cov);
    j["metrics"] = metrics_json(m);
    return j;
}

inline stats::FittedModel model_from_json(const nlohmann::json& j) {
    stats::FittedModel m;
    const auto stage = j.at("stage").get<std::string>();
    if (stage != "threshold" && stage != "allocation") throw ParseError("unknown model stage '" + stage + "'");
    m.stage = stage == "threshold" ? stats::Stage::Threshold : stats::Stage::Allocation;
    m.names = j.at("names").get<std::vector<std::string>>();
    m.equations = j.at("equations").get<std::vector<std::string>>();
    m.equation_estimable = j.at("equation_estimable").get<std::vector<bool>>();
    const auto& beta = j.at("beta");
    m.beta.resize(static_cast<Eigen::Index>(beta.size()));
    for (std::size_t i = 0; i < beta.size(); ++i) m.beta[static_cast<Eigen::Index>(i)] = detail::number(beta[i]);
    const auto& cov = j.at("covariance");
    m.covariance.resize(static_cast<Eigen::Index>(cov.size()), static_cast<Eigen::Index>(cov.size()));
    for (std::size_t r = 0; r < cov.size(); ++r) {
        if (cov[r].size() != cov.size()) throw ParseError("covariance matrix is not square");
        for (std::size_t c = 0; c < cov.size(); ++c)
            m.covariance(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = detail::number(cov[r][c]);
    }
    if (m.beta.size() != static_cast<Eigen::Index>(m.names.size() * m.equations.size()) ||
        m.covariance.rows() != m.beta.size() || m.equation_estimable.size() != m.equations.size())
        throw ParseError("model dimensions are inconsistent");
    const auto& met = j.at("metrics");
    m.n_obs = met.at("n_obs").get<std::size_t>();
    m.metrics = stats::fit_metrics(met.at("ll_full").get<double>(), met.at("ll_null").get<double>(),
                                   met.at("k").get<std::size_t>(), met.at("k_null").get<std::size_t>());
    m.convergence.converged = met.at("converged").get<bool>();
    m.convergence.iterations = met.at("iterations").get<int>();
    m.convergence.ridge_applied = met.at("ridge_applied").get<bool>();
    m.convergence.separation = met.at("separation").get<bool>();
    m.convergence.diagnostics = met.at("diagnostics").get<std::vector<std::string>>();
    const auto p = static_cast<Eigen::Index>(m.names.size());
    for (std::size_t e = 0; e < m.equations.size(); ++e)
        for (Eigen::Index t = 0; t < p; ++t) {
            const auto i = static_cast<Eigen::Index>(e) * p + t;
            const double var = m.covariance(i, i);
            m.coefficients.push_back(stats::make_coefficient(m.equations[e], m.names[static_cast<std::size_t>(t)],
                                                             m.beta[i], std::isnan(var) ? var : std::sqrt(std::max(0.0, var))));
        }
    return m;
}

// ---------------------------------------------------------------------------
// Descriptive tables

inline std::string shares_csv(const std::map<CellCondition, ShareRow>& shares,
                              const std::map<CellCondition, LoadAuditRow>& audit) {
    std::string out = "load,norm,rows,read,like,repost,quote,activations,target,alg_mean,alg_min,alg_max,empty\n";
    for (auto l : kAllLoads)
        for (auto n : kAllNorms) {
            const CellCondition c{l, n};
            const auto s = shares.find(c);
            const auto a = audit.find(c);
            if (s == shares.end() && a == audit.end()) continue;
            const ShareRow sr = s != shares.end() ? s->second : ShareRow{};
            const LoadAuditRow ar = a != audit.end() ? a->second : LoadAuditRow{};
            out += std::string(to_string(l)) + "," + std::string(to_string(n)) + "," + std::to_string(sr.rows);
            for (double v : sr.shares) out += "," + num(v, 10);
            out += "," + std::to_string(ar.activations) + "," + std::to_string(LoadCondition{l}.algorithmic_count()) +
                   "," + num(ar.mean, 8) + "," + std::to_string(ar.min) + "," + std::to_string(ar.max) + "," +
                   (ar.empty ? "true" : "false") + "\n";
        }
    return out;
}

struct ShareTableRow {
    LoadLevel load;
    NormRegime norm;
    std::size_t rows = 0;
    std::array<double, 4> shares{};
    double alg_mean = 0.0;
    std::size_t alg_min = 0, alg_max = 0;
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, const std::string& where) {
    if (s == "NA") return std::numeric_limits<double>::quiet_NaN();
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError(where + ": not a number: '" + s + "'");
    }
}

inline std::vector<ShareTableRow> parse_shares_csv(const std::string& text, const std::string& source) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    if (split_csv_line(line).size() != 13) throw ParseError(source + ": unexpected header");
    std::vector<ShareTableRow> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        const auto where = source + ":" + std::to_string(lineno);
        if (f.size() != 13) throw ParseError(where + ": expected 13 fields");
        const auto l = parse_load(f[0]);
        const auto n = parse_norm(f[1]);
        if (!l || !n) throw ParseError(where + ": unknown condition");
        ShareTableRow r{*l, *n};
        r.rows = static_cast<std::size_t>(parse_double(f[2], where));
        for (std::size_t a = 0; a < 4; ++a) r.shares[a] = parse_double(f[3 + a], where);
        r.alg_mean = parse_double(f[9], where);
        r.alg_min = static_cast<std::size_t>(parse_double(f[10], where));
        r.alg_max = static_cast<std::size_t>(parse_double(f[11], where));
        out.push_back(r);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenario grid input: CSV with header composite,load,norm

inline std::vector<stats::Scenario> parse_scenario_grid(const std::string& text, const std::string& source = "<grid>") {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError(source + ": empty scenario grid");
    const auto header = split_csv_line(line);
    if (header != std::vector<std::string>{"composite", "load", "norm"})
        throw ParseError(source + ":1: header must be composite,load,norm");
    std::vector<stats::Scenario> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto f = split_csv_line(line);
        const auto where = source + ":" + std::to_string(lineno);
        if (f.size() != 3) throw ParseError(where + ": expected 3 fields");
        const double c = parse_double(f[0], where);
        if (!(c >= 0.0) || !std::isfinite(c)) throw ParseError(where + ": composite must be finite and non-negative");
        const auto l = parse_load(f[1]);
        const auto n = parse_norm(f[2]);
        if (!l) throw ParseError(where + ": unknown load '" + f[1] + "'");
        if (!n) throw ParseError(where + ": unknown norm '" + f[2] + "'");
        out.push_back({c, *l, *n});
    }
    if (out.empty()) throw ParseError(source + ": scenario grid has no rows");
    return out;
}

inline std::string predictions_csv(const std::vector<stats::Prediction>& preds, stats::Stage stage) {
    std::string out = "composite,load,norm";
    if (stage == stats::Stage::Threshold) out += ",engage,engage_lower,engage_upper";
    else
        for (const char* a : stats::kAllocationOutcomes) out += std::string(",") + a + "," + a + "_lower," + a + "_upper";
    out += ",flagged\n";
    for (const auto& p : preds) {
        out += num(p.scenario.composite, 8) + "," + std::string(to_string(p.scenario.load)) + "," +
               std::string(to_string(p.scenario.norm));
        for (const auto& b : p.outcomes) out += "," + num(b.estimate, 8) + "," + num(b.lower, 8) + "," + num(b.upper, 8);
        out += std::string(",") + (p.flagged ? "true" : "false") + "\n";
    }
    return out;
}

// ---------------------------------------------------------------------------
// SVG figures

inline constexpr std::array<const char*, 4> kActionColors{"#c8c8c8", "#4c78a8", "#f58518", "#54a24b"};
inline constexpr std::array<const char*, 4> kLoadColors{"#1b9e77", "#d95f02", "#7570b3", "#e7298a"};
inline constexpr std::array<const char*, 3> kNormDash{"", "6,3", "2,2"};

inline std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline constexpr double kBarHeight = 300.0;

// One stacked bar per cell; segment heights are share x kBarHeight, so every
// bar with data reaches the full height.
inline std::string shares_svg(const std::vector<ShareTableRow>& rows) {
    const double left = 60, top = 40, bar_w = 40, gap = 16;
    const double width = left + static_cast<double>(rows.size()) * (bar_w + gap) + 140;
    const double height = top + kBarHeight + 90;
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height) << "\">\n";
    o << "<text x=\"" << num(left) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">"
      << "Action shares by condition</text>\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const double x = left + static_cast<double>(i) * (bar_w + gap);
        double y = top + kBarHeight;
        o << "<g class=\"bar\" data-load=\"" << to_string(r.load) << "\" data-norm=\"" << to_string(r.norm) << "\">\n";
        for (std::size_t a = 0; a < 4; ++a) {
            const double h = r.shares[a] * kBarHeight;
            y -= h;
            o << "<rect class=\"segment\" data-action=\"" << to_string(kAllActions[a]) << "\" x=\"" << num(x)
              << "\" y=\"" << num(y, 10) << "\" width=\"" << num(bar_w) << "\" height=\"" << num(h, 10)
              << "\" fill=\"" << kActionColors[a] << "\"/>\n";
        }
        o << "<text x=\"" << num(x + bar_w / 2) << "\" y=\"" << num(top + kBarHeight + 14)
          << "\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"middle\">" << to_string(r.load) << "</text>\n";
        o << "<text x=\"" << num(x + bar_w / 2) << "\" y=\"" << num(top + kBarHeight + 26)
          << "\" font-family=\"sans-serif\" font-size=\"9\" text-anchor=\"middle\">" << to_string(r.norm) << "</text>\n";
        o << "</g>\n";
    }
    const double lx = left + static_cast<double>(rows.size()) * (bar_w + gap) + 10;
    for (std::size_t a = 0; a < 4; ++a) {
        const double ly = top + 20.0 * static_cast<double>(a);
        o << "<rect x=\"" << num(lx) << "\" y=\"" << num(ly) << "\" width=\"12\" height=\"12\" fill=\"" << kActionColors[a]
          << "\"/><text x=\"" << num(lx + 18) << "\" y=\"" << num(ly + 10)
          << "\" font-family=\"sans-serif\" font-size=\"11\">" << to_string(kAllActions[a]) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

// One polyline per (load, norm): predicted probability of `outcome` across
// the composite grid.
inline std::string curves_svg(const stats::FittedModel& m, std::size_t outcome, const std::string& title,
                              const std::vector<double>& composites) {
    const double left = 60, top = 40, w = 480, h = 300;
    const double xmax = composites.empty() ? 1.0 : std::max(composites.back(), 1e-9);
    std::ostringstream o;
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(left + w + 200) << "\" height=\"" << num(top + h + 60)
      << "\">\n";
    o << "<text x=\"" << num(left) << "\" y=\"24\" font-family=\"sans-serif\" font-size=\"14\">" << svg_escape(title)
      << "</text>\n";
    o << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = tick / 4.0;
        o << "<text x=\"" << num(left - 6) << "\" y=\"" << num(top + h - v * h + 4)
          << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">" << num(v, 2) << "</text>\n";
    }
    o << "<text x=\"" << num(left + w / 2) << "\" y=\"" << num(top + h + 30)
      << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">log(1 + likes + reshares)</text>\n";
    std::size_t legend = 0;
    for (auto l : kAllLoads)
        for (auto n : kAllNorms) {
            o << "<polyline class=\"curve\" data-load=\"" << to_string(l) << "\" data-norm=\"" << to_string(n)
              << "\" fill=\"none\" stroke=\"" << kLoadColors[index_of(l)] << "\" stroke-width=\"1.5\"";
            if (*kNormDash[index_of(n)]) o << " stroke-dasharray=\"" << kNormDash[index_of(n)] << "\"";
            o << " points=\"";
            for (std::size_t i = 0; i < composites.size(); ++i) {
                const stats::Scenario s{composites[i], l, n};
                const auto pred =
                    m.stage == stats::Stage::Threshold ? stats::predict_threshold(m, s) : stats::predict_allocation(m, s);
                double p = pred.outcomes.at(outcome).estimate;
                if (!std::isfinite(p)) p = 0.0;
                o << (i ? " " : "") << num(left + composites[i] / xmax * w, 8) << "," << num(top + h - p * h, 8);
            }
            o << "\"/>\n";
            const double ly = top + 14.0 * static_cast<double>(legend++);
            o << "<text x=\"" << num(left + w + 12) << "\" y=\"" << num(ly + 10) << "\" font-family=\"sans-serif\" "
              << "font-size=\"10\" fill=\"" << kLoadColors[index_of(l)] << "\">" << to_string(l) << " / "
              << to_string(n) << "</text>\n";
        }
    o << "</svg>\n";
    return o.str();
}

inline std::vector<double> composite_grid(double max, std::size_t points = 41) {
    std::vector<double> out;
    for (std::size_t i = 0; i < points; ++i) out.push_back(max * static_cast<double>(i) / static_cast<double>(points - 1));
    return out;
}

// ---------------------------------------------------------------------------
// Markdown

inline std::string metrics_markdown(const stats::FittedModel& m) {
    const auto& f = m.metrics;
    std::string out;
    out += "- observations: " + std::to_string(m.n_obs) + "\n";
    out += "- LR chi2(" + std::to_string(f.df) + ") = " + num(f.lr_chi2, 8) + "\n";
    out += "- McFadden R2 = " + num(f.mcfadden, 4) + "\n";
    out += "- AIC = " + num(f.aic, 10) + "\n";
    out += std::string("- converged: ") + (m.convergence.converged ? "yes" : "no") + " (" +
           std::to_string(m.convergence.iterations) + " iterations)\n";
    for (const auto& d : m.convergence.diagnostics) out += "- note: " + d + "\n";
    return out;
}

inline std::string shares_markdown(const std::vector<ShareTableRow>& rows) {
    std::string out = "| Load | Norm | Rows | Read | Like | Repost | Quote | Alg. mean | Alg. min | Alg. max |\n"
                      "|---|---|---:|---:|---:|---:|---:|---:|---:|---:|\n";
    for (const auto& r : rows) {
        out += "| " + std::string(to_string(r.load)) + " | " + std::string(to_string(r.norm)) + " | " +
               std::to_string(r.rows);
        for (double s : r.shares) out += " | " + num(s, 4);
        out += " | " + num(r.alg_mean, 4) + " | " + std::to_string(r.alg_min) + " | " + std::to_string(r.alg_max) + " |\n";
    }
    return out;
}

}  // namespace socialsim::report

#endif  // SOCIALSIM_REPORT_HPP
