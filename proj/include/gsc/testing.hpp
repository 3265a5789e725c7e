#pragma once

// Tests of independence between two feature tracks.
//
// The null distribution comes from cross-pairing: in every stratum two start
// points K1 != K2 are drawn, and A read from one block is paired with B read
// from the other, in both orientations. The spread of the resulting replicate
// statistic, scaled by sqrt(2L / n), estimates the null spread of the
// full-length statistic.

#include "gsc/errors.hpp"
#include "gsc/random.hpp"
#include "gsc/segmentation.hpp"
#include "gsc/stats.hpp"
#include "gsc/subsampling.hpp"
#include "gsc/summary.hpp"
#include "gsc/tracks.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <unordered_set>
#include <string>
#include <vector>

namespace gsc {

enum class Formulation { Conditional, Marginal };

inline const char* to_string(Formulation f) { return f == Formulation::Conditional ? "conditional" : "marginal"; }

inline Formulation parse_formulation(const std::string& s) {
    if (s == "conditional") return Formulation::Conditional;
    if (s == "marginal") return Formulation::Marginal;
    throw ParameterError("unknown formulation '" + s + "' (expected conditional or marginal)");
}

/// Outer/inner block ratio used when no multiplier is given: L_b / L_r = 0.15.
inline constexpr double kDefaultOuterMultiplier = 1.0 / 0.15;

struct TestParams {
    Pos L = 0;
    std::size_t B = 1000;
    std::uint64_t seed = 0;
    std::optional<Segmentation> segmentation;  // defaults to the natural one
    Formulation formulation = Formulation::Conditional;
    double outer_multiplier = kDefaultOuterMultiplier;
    std::size_t outer_replicates = 0;  // B1 for the double bootstrap; 0 means B
    bool two_sided = false;
    bool strict_disjoint = false;
    unsigned threads = 0;
};

struct TestResult {
    std::string statistic;
    std::string method;
    double observed = 0.0;
    double center = 0.0;
    double critical_value = 0.0;
    double standard_error = 0.0;  // sqrt(2L/n) * sd(T*)
    double z_score = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    double scale = 0.0;  // sqrt(2L/n)
    bool two_sided = false;
    ReplicateDistribution replicates;  // T*
    std::optional<NormalityResult> normality;
    std::optional<ReplicateDistribution> outer;  // stage-1 R*_b of the double bootstrap
    Pos outer_length = 0;
};

/// sum_i lambda_i Ibar_i Jbar_i / Ibar, lambda_i = n_i / n.
inline double conditional_center(const TrackPair& p, const Segmentation& seg) {
    if (seg.size() != p.size()) throw ParameterError("segmentation length does not match tracks");
    const auto n = static_cast<double>(p.size());
    const double ibar = static_cast<double>(p.a().coverage()) / n;
    if (ibar <= 0.0) throw DegenerateDenominator("conditional center: track A is empty");
    double num = 0.0;
    for (const auto& r : seg.regions()) {
        const auto ni = static_cast<double>(r.length());
        const double ii = static_cast<double>(p.a().indicator_sum(r.start, r.end)) / ni;
        const double jj = static_cast<double>(p.b().indicator_sum(r.start, r.end)) / ni;
        num += (ni / n) * ii * jj;
    }
    return num / ibar;
}

/// Block plan for cross-pairing: every stratum must hold two disjoint blocks.
inline BlockPlan make_cross_plan(const Segmentation& seg, Pos L) {
    BlockPlan plan = make_block_plan(seg, L);
    for (std::size_t i = 0; i < plan.strata.size(); ++i) {
        const auto& s = plan.strata[i];
        if (2 * s.block > s.region.length()) {
            throw ParameterError("segment " + std::to_string(i) + " [" + std::to_string(s.region.start) + "," +
                                 std::to_string(s.region.end) + ") is too short for two blocks of length " +
                                 std::to_string(s.block));
        }
    }
    return plan;
}

struct CrossDraw {
    Pos k1 = 0;
    Pos k2 = 0;
};

/// Two distinct starts per stratum. Overlapping blocks are allowed unless
/// `strict_disjoint` is set.
inline std::vector<CrossDraw> draw_cross_pairs(const BlockPlan& plan, Engine& rng, bool strict_disjoint) {
    std::vector<CrossDraw> d;
    d.reserve(plan.strata.size());
    for (const auto& s : plan.strata) {
        const Pos lo = s.region.start;
        const Pos hi = s.region.end - s.block;
        const Pos k1 = uniform_int<Pos>(rng, lo, hi);
        Pos k2 = k1;
        while (k2 == k1 || (strict_disjoint && std::abs(k2 - k1) < s.block)) k2 = uniform_int<Pos>(rng, lo, hi);
        d.push_back({k1, k2});
    }
    return d;
}

struct CrossCounts {
    OverlapCounts forward;   // A from block 1, B from block 2
    OverlapCounts backward;  // A from block 2, B from block 1
    std::vector<OverlapCounts> forward_by_stratum;
    std::vector<OverlapCounts> backward_by_stratum;
};

inline CrossCounts cross_counts(const TrackPair& p, const BlockPlan& plan, const std::vector<CrossDraw>& draws,
                                bool with_instances = true) {
    CrossCounts c;
    for (std::size_t i = 0; i < plan.strata.size(); ++i) {
        const Pos len = plan.strata[i].block;
        const auto f = window_counts(p, {draws[i].k1, draws[i].k2, len}, with_instances);
        const auto b = window_counts(p, {draws[i].k2, draws[i].k1, len}, with_instances);
        c.forward += f;
        c.backward += b;
        c.forward_by_stratum.push_back(f);
        c.backward_by_stratum.push_back(b);
    }
    return c;
}

/// Cross-paired replicate T* = F* - J~* for the base-pair overlap fraction.
///
/// F* averages the two orientations, each a ratio of joint to A coverage
/// accumulated over strata. J~* = sum lambda_i I*_i J*_i / sum lambda_i I*_i
/// with I*_i the sum of the two blocks' A means and J*_i the average of
/// their B means. With one stratum this is the unsegmented replicate.
inline double cross_replicate_bp(const TrackPair& p, const BlockPlan& plan, const std::vector<CrossDraw>& draws) {
    const CrossCounts c = cross_counts(p, plan, draws);
    if (c.forward.a_cov == 0 || c.backward.a_cov == 0) {
        throw DegenerateDenominator("cross-paired replicate: a block without A coverage");
    }
    const double f = 0.5 * (static_cast<double>(c.forward.joint) / static_cast<double>(c.forward.a_cov) +
                            static_cast<double>(c.backward.joint) / static_cast<double>(c.backward.a_cov));
    const auto n = static_cast<double>(plan.n);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < plan.strata.size(); ++i) {
        const auto len = static_cast<double>(plan.strata[i].block);
        const double lambda = static_cast<double>(plan.strata[i].region.length()) / n;
        // forward reads A at k1 and B at k2, backward A at k2 and B at k1
        const double ibar = static_cast<double>(c.forward_by_stratum[i].a_cov + c.backward_by_stratum[i].a_cov) / len;
        const double jbar =
            0.5 * static_cast<double>(c.forward_by_stratum[i].b_cov + c.backward_by_stratum[i].b_cov) / len;
        num += lambda * ibar * jbar;
        den += lambda * ibar;
    }
    return f - num / den;
}

/// Cross-paired region overlap averaged over the two orientations.
inline double cross_replicate_region(const TrackPair& p, const BlockPlan& plan, const std::vector<CrossDraw>& draws) {
    const CrossCounts c = cross_counts(p, plan, draws);
    if (c.forward.instances == 0 || c.backward.instances == 0) {
        throw DegenerateDenominator("cross-paired replicate: a block without A instances");
    }
    return 0.5 * (static_cast<double>(c.forward.hit_instances) / static_cast<double>(c.forward.instances) +
                  static_cast<double>(c.backward.hit_instances) / static_cast<double>(c.backward.instances));
}

/// One null replicate T*_{nL} drawn from `rng`.
inline double null_replicate_bp(const TrackPair& p, const BlockPlan& plan, Engine& rng, bool strict_disjoint = false) {
    return cross_replicate_bp(p, plan, draw_cross_pairs(plan, rng, strict_disjoint));
}

namespace detail {

inline Segmentation test_segmentation(const TrackPair& p, const TestParams& params) {
    if (params.formulation == Formulation::Marginal) return Segmentation::trivial(p.size());
    Segmentation seg = params.segmentation ? *params.segmentation : Segmentation::natural(p.space());
    if (seg.size() != p.size()) throw ParameterError("segmentation length does not match tracks");
    return seg;
}

/// Fills critical value, z-score and p-value from centered replicates T*.
inline void finish_test(TestResult& r, double alpha, bool two_sided) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("alpha must lie in (0, 1)");
    const auto& t = r.replicates.values;
    if (t.size() < 2) throw ParameterError("test needs at least 2 non-degenerate replicates");
    r.alpha = alpha;
    r.two_sided = two_sided;
    const double sd = sd_sample(t);
    r.standard_error = r.scale * sd;
    const double dev = r.observed - r.center;
    if (r.standard_error > 0.0) {
        r.z_score = dev / r.standard_error;
    } else {
        r.z_score = dev == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), dev);
    }
    std::vector<double> sorted = t;
    if (two_sided) {
        for (auto& v : sorted) v = std::abs(v);
    }
    std::sort(sorted.begin(), sorted.end());
    const std::size_t B = sorted.size();
    auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(B) * (1.0 - alpha) - 1e-9));
    k = std::clamp<std::size_t>(k, 1, B);
    r.critical_value = r.center + r.scale * sorted[k - 1];
    const double d = r.scale > 0.0 ? dev / r.scale : dev;
    std::size_t exceed = 0;
    for (double v : t) {
        if (two_sided ? std::abs(v) >= std::abs(d) : v >= d) ++exceed;
    }
    r.p_value = (1.0 + static_cast<double>(exceed)) / (static_cast<double>(B) + 1.0);
    if (t.size() >= 20 && sd > 0.0) r.normality = lilliefors_test(t);
}

}  // namespace detail

/// Base-pair overlap test. Conditional: center J~_n with stratified
/// cross-pairs; marginal: center mean(J) with unstratified cross-pairs.
inline TestResult test_bp_overlap(const TrackPair& p, const TestParams& params, double alpha) {
    const Segmentation seg = detail::test_segmentation(p, params);
    const BlockPlan plan = make_cross_plan(seg, params.L);
    TestResult r;
    r.statistic = "bp_overlap";
    r.method = to_string(params.formulation);
    r.observed = evaluate(StatisticKind::bp_overlap(), p).value;
    r.center = params.formulation == Formulation::Conditional
                   ? conditional_center(p, seg)
                   : static_cast<double>(p.b().coverage()) / static_cast<double>(p.size());
    r.replicates = run_replicates(params.B, params.seed, params.threads, [&](Engine& rng) {
        return null_replicate_bp(p, plan, rng, params.strict_disjoint);
    });
    r.replicates.subsample_length = plan.total_length();
    r.replicates.nominal_length = params.L;
    r.replicates.statistic = "bp_overlap";
    r.scale = std::sqrt(2.0 * static_cast<double>(plan.total_length()) / static_cast<double>(p.size()));
    detail::finish_test(r, alpha, params.two_sided);
    return r;
}

/// Region-overlap test with double-bootstrap centering.
///
/// Stage 1 draws B1 cross-pairs of outer blocks of length m L over the
/// natural segmentation only; each R*_b adds the two orientations and the
/// center is sum R*_b / (2 B1). Stage 2 draws cross-pairs of length L over
/// the test segmentation; their spread around their own mean gives T*.
inline TestResult double_bootstrap_region_overlap(const TrackPair& p, const TestParams& params, double alpha) {
    if (!(params.outer_multiplier >= 1.0)) throw ParameterError("outer multiplier must be at least 1");
    const Pos n = p.size();
    const auto outer_len = static_cast<Pos>(std::llround(params.outer_multiplier * static_cast<double>(params.L)));
    const BlockPlan outer = make_cross_plan(Segmentation::natural(p.space()), outer_len);
    const Segmentation seg = detail::test_segmentation(p, params);
    const BlockPlan inner = make_cross_plan(seg, params.L);

    TestResult r;
    r.statistic = "region_overlap";
    r.method = "double_bootstrap";
    r.observed = evaluate(StatisticKind::region_overlap(), p).value;
    r.outer_length = outer.total_length();

    const std::size_t B1 = params.outer_replicates ? params.outer_replicates : params.B;
    ReplicateDistribution stage1 = run_replicates(B1, child_seed(params.seed, 1), params.threads, [&](Engine& rng) {
        return 2.0 * cross_replicate_region(p, outer, draw_cross_pairs(outer, rng, params.strict_disjoint));
    });
    stage1.subsample_length = outer.total_length();
    stage1.nominal_length = outer_len;
    stage1.statistic = "region_overlap_outer";
    if (stage1.values.empty()) throw ParameterError("double bootstrap: every outer replicate was degenerate");
    double sum = 0.0;
    for (double v : stage1.values) sum += v;
    r.center = sum / (2.0 * static_cast<double>(stage1.values.size()));
    r.outer = std::move(stage1);

    r.replicates = run_replicates(params.B, child_seed(params.seed, 2), params.threads, [&](Engine& rng) {
        return cross_replicate_region(p, inner, draw_cross_pairs(inner, rng, params.strict_disjoint));
    });
    const double m = mean(r.replicates.values);
    for (auto& v : r.replicates.values) v -= m;
    r.replicates.subsample_length = inner.total_length();
    r.replicates.nominal_length = params.L;
    r.replicates.statistic = "region_overlap";
    r.scale = std::sqrt(2.0 * static_cast<double>(inner.total_length()) / static_cast<double>(n));
    detail::finish_test(r, alpha, params.two_sided);
    return r;
}

/// Places B's instances uniformly at random within their own sequence,
/// with no two overlapping or touching: the instance order is shuffled and
/// the gaps are a uniform draw among all admissible gap vectors.
inline FeatureTrack shuffle_instances(const FeatureTrack& b, Engine& rng) {
    const CoordinateSpace& space = b.space();
    std::vector<std::vector<Pos>> lengths(space.size());
    for (const auto& iv : b.runs()) lengths[space.sequence_at(iv.start)].push_back(iv.length());
    std::vector<Interval> out;
    out.reserve(b.run_count());
    for (std::size_t s = 0; s < space.size(); ++s) {
        auto& lens = lengths[s];
        if (lens.empty()) continue;
        const auto k = static_cast<Pos>(lens.size());
        Pos total = 0;
        for (Pos len : lens) total += len;
        const Pos slack = space.length(s) - total - (k - 1);
        if (slack < 0) throw ParameterError("shuffle: instances do not fit in sequence '" + space.name(s) + "'");
        std::shuffle(lens.begin(), lens.end(), rng);
        // k distinct values from {0, ..., slack + k - 1} (Floyd), sorted; the
        // i-th minus i is the free space left of instance i
        const Pos m = slack + k;
        std::unordered_set<Pos> chosen;
        chosen.reserve(static_cast<std::size_t>(k) * 2);
        for (Pos j = m - k; j < m; ++j) {
            const Pos t = uniform_int<Pos>(rng, 0, j);
            if (!chosen.insert(t).second) chosen.insert(j);
        }
        std::vector<Pos> u(chosen.begin(), chosen.end());
        std::sort(u.begin(), u.end());
        Pos used = 0;
        for (Pos i = 0; i < k; ++i) {
            const Pos start = space.offset(s) + (u[i] - i) + used + i;
            out.push_back({start, start + lens[i]});
            used += lens[i];
        }
    }
    return FeatureTrack(b.space_ptr(), std::move(out));
}

/// Feature randomization comparator: A fixed, B's instance starts redrawn
/// uniformly, statistic recomputed per replicate.
inline ReplicateDistribution shuffle_baseline(const TrackPair& p, const StatisticKind& kind, std::size_t B,
                                              std::uint64_t seed, unsigned threads = 0) {
    const CoordinateSpace& space = p.space();
    for (std::size_t s = 0; s < space.size(); ++s) {
        const Pos total = p.b().indicator_sum(space.offset(s), space.offset(s) + space.length(s));
        if (total > 0 && total >= space.length(s)) {
            throw ParameterError("shuffle: instances of B cover all of sequence '" + space.name(s) + "'");
        }
    }
    auto d = run_replicates(B, seed, threads, [&](Engine& rng) {
        return evaluate(kind, TrackPair(p.a(), shuffle_instances(p.b(), rng))).value;
    });
    d.subsample_length = p.size();
    d.nominal_length = p.size();
    d.statistic = kind.name();
    return d;
}

}  // namespace gsc
