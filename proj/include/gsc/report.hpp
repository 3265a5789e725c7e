#pragma once

// JSON and TSV renderings of results. Kept apart from the numeric headers so
// the core does not depend on nlohmann/json.

#include "gsc/segmentation.hpp"
#include "gsc/subsampling.hpp"
#include "gsc/summary.hpp"
#include "gsc/testing.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace gsc {

using Json = nlohmann::ordered_json;

inline constexpr double kReportQuantiles[] = {0.01, 0.025, 0.05, 0.25, 0.5, 0.75, 0.95, 0.975, 0.99};

/// Non-finite values become null.
inline Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

inline Json to_json(const ReplicateDistribution& d) {
    Json j;
    j["statistic"] = d.statistic;
    j["requested"] = d.requested;
    j["count"] = d.values.size();
    j["degenerate_count"] = d.degenerate_count;
    j["seed"] = d.seed;
    j["nominal_length"] = d.nominal_length;
    j["subsample_length"] = d.subsample_length;
    if (d.values.empty()) return j;
    j["mean"] = number(mean(d.values));
    j["sd"] = number(sd_sample(d.values));
    j["iqr"] = number(iqr(d.values));
    std::vector<double> s = d.values;
    std::sort(s.begin(), s.end());
    Json q = Json::array();
    for (double p : kReportQuantiles) q.push_back({{"p", p}, {"value", number(quantile_sorted(s, p))}});
    j["quantiles"] = q;
    return j;
}

inline Json to_json(const NormalityResult& r) {
    return {{"test", "lilliefors"},
            {"statistic", number(r.statistic)},
            {"p_value", number(r.p_value)},
            {"sample_size", r.sample_size},
            {"reference_draws", r.reference_draws}};
}

inline Json to_json(const ConfidenceInterval& ci) {
    return {{"method", ci.method == IntervalMethod::Gaussian ? "gaussian" : "percentile"},
            {"level", ci.level},
            {"lower", number(ci.lower)},
            {"upper", number(ci.upper)}};
}

inline Json to_json(const Segmentation& s) {
    Json regions = Json::array();
    for (const auto& r : s.regions()) regions.push_back({r.start, r.end});
    return {{"source", to_string(s.source())}, {"cuts", s.cuts()}, {"regions", regions}};
}

inline Json to_json(const TestResult& r) {
    Json j;
    j["statistic"] = r.statistic;
    j["method"] = r.method;
    j["observed"] = number(r.observed);
    j["center"] = number(r.center);
    j["critical_value"] = number(r.critical_value);
    j["standard_error"] = number(r.standard_error);
    j["z_score"] = number(r.z_score);
    j["p_value"] = number(r.p_value);
    j["alpha"] = r.alpha;
    j["two_sided"] = r.two_sided;
    j["scale"] = number(r.scale);
    j["replicates"] = to_json(r.replicates);
    j["normality"] = r.normality ? to_json(*r.normality) : Json(nullptr);
    if (r.outer) {
        j["outer_length"] = r.outer_length;
        j["outer_replicates"] = to_json(*r.outer);
    }
    return j;
}

inline Json to_json(const BlockSizeSelection& sel) {
    Json rows = Json::array();
    for (const auto& c : sel.candidates) {
        Json row;
        row["v"] = c.v;
        row["L"] = c.L;
        row["feasible"] = c.feasible;
        row["iqr"] = c.feasible ? number(c.iqr) : Json(nullptr);
        row["distance"] = c.distance ? number(*c.distance) : Json(nullptr);
        rows.push_back(row);
    }
    return {{"chosen_L", sel.chosen}, {"chosen_v", sel.chosen_v}, {"candidates", rows}};
}

/// Histogram of `values` on `bins` equal-width bins, as TSV lines
/// "lower<TAB>upper<TAB>count".
inline void write_histogram(std::ostream& out, const std::vector<double>& values, int bins = 40) {
    out << "lower\tupper\tcount\n";
    if (values.empty() || bins < 1) return;
    const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
    const double lo = *lo_it;
    const double hi = *hi_it > lo ? *hi_it : lo + 1.0;
    const double w = (hi - lo) / bins;
    std::vector<std::size_t> counts(static_cast<std::size_t>(bins), 0);
    for (double v : values) {
        auto b = static_cast<std::size_t>((v - lo) / w);
        counts[std::min(b, counts.size() - 1)]++;
    }
    const auto old = out.precision(10);
    for (int b = 0; b < bins; ++b) {
        out << lo + b * w << '\t' << lo + (b + 1) * w << '\t' << counts[static_cast<std::size_t>(b)] << '\n';
    }
    out.precision(old);
}

}  // namespace gsc
