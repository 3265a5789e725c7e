#pragma once

// Stationary and stratified block subsampling.
//
// A stratified subsample takes one block from every region of a
// segmentation, the block in region i having length ceil(n_i L / n), and
// evaluates the statistic on the concatenation of the blocks. With the
// trivial segmentation {0, n} this is the stationary block subsample and the
// two engines consume the random stream identically.
//
// Replicate b always draws from child_engine(seed, b), so a distribution is
// a pure function of (data, parameters, seed) for any thread count.

#include "gsc/errors.hpp"
#include "gsc/random.hpp"
#include "gsc/segmentation.hpp"
#include "gsc/stats.hpp"
#include "gsc/summary.hpp"
#include "gsc/tracks.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace gsc {

inline constexpr int kDefaultRedraws = 10;

struct ReplicateDistribution {
    std::vector<double> values;      // non-degenerate replicates in replicate order
    Pos subsample_length = 0;        // realized total block length
    Pos nominal_length = 0;          // requested L
    std::size_t requested = 0;       // B
    std::size_t degenerate_count = 0;
    std::uint64_t seed = 0;
    std::string statistic;
};

/// One block per region of a segmentation.
struct BlockPlan {
    struct Stratum {
        Interval region;
        Pos block = 0;
    };
    Pos n = 0;
    Pos nominal_length = 0;
    std::vector<Stratum> strata;

    [[nodiscard]] Pos total_length() const {
        Pos t = 0;
        for (const auto& s : strata) t += s.block;
        return t;
    }
};

/// Block lengths lambda_i = ceil((t_i - t_{i-1}) L / n).
inline BlockPlan make_block_plan(const Segmentation& seg, Pos L) {
    const Pos n = seg.size();
    if (L < 1 || L >= n) {
        throw ParameterError("subsample length L=" + std::to_string(L) + " must satisfy 0 < L < n=" + std::to_string(n));
    }
    BlockPlan plan{n, L, {}};
    for (std::size_t i = 0; i < seg.region_count(); ++i) {
        const Interval r = seg.region(i);
        const auto num = static_cast<__int128>(r.length()) * L;
        const auto block = static_cast<Pos>((num + n - 1) / n);
        if (block > r.length()) {
            throw ParameterError("block length " + std::to_string(block) + " exceeds segment " + std::to_string(i) +
                                 " [" + std::to_string(r.start) + "," + std::to_string(r.end) + ")");
        }
        plan.strata.push_back({r, block});
    }
    return plan;
}

/// Block start N uniform on {0, ..., n - L}.
inline Pos draw_stationary(Pos n, Pos L, Engine& rng) {
    if (L < 1 || L >= n) throw ParameterError("draw_stationary: need 0 < L < n");
    return uniform_int<Pos>(rng, 0, n - L);
}

/// One block per stratum, start uniform on {t_{i-1}, ..., t_i - lambda_i}.
inline std::vector<AlignedWindow> draw_stratified(const BlockPlan& plan, Engine& rng) {
    std::vector<AlignedWindow> w;
    w.reserve(plan.strata.size());
    for (const auto& s : plan.strata) {
        const Pos start = uniform_int<Pos>(rng, s.region.start, s.region.end - s.block);
        w.push_back({start, start, s.block});
    }
    return w;
}

/// Runs `B` replicates of `fn(Engine&) -> double` with per-index child
/// streams. A replicate whose statistic has a zero denominator is redrawn
/// from the same stream up to `redraws` times, then counted as degenerate.
template <typename Fn>
ReplicateDistribution run_replicates(std::size_t B, std::uint64_t seed, unsigned threads, Fn&& fn,
                                     int redraws = kDefaultRedraws) {
    std::vector<std::optional<double>> slots(B);
    parallel_for(B, threads, [&](std::size_t b) {
        Engine rng = child_engine(seed, b);
        for (int attempt = 0; attempt <= redraws; ++attempt) {
            try {
                slots[b] = fn(rng);
                return;
            } catch (const DegenerateDenominator&) {
            }
        }
    });
    ReplicateDistribution d;
    d.requested = B;
    d.seed = seed;
    d.values.reserve(B);
    for (const auto& s : slots) {
        if (s) {
            d.values.push_back(*s);
        } else {
            ++d.degenerate_count;
        }
    }
    return d;
}

struct SubsampleParams {
    Pos L = 0;
    std::size_t B = 1000;
    std::uint64_t seed = 0;
    Segmentation segmentation;
    unsigned threads = 0;
};

/// Replicate distribution of the statistic on stratified subsamples.
inline ReplicateDistribution subsample_distribution(const TrackPair& p, const StatisticKind& kind,
                                                    const SubsampleParams& params) {
    if (params.segmentation.size() != p.size()) throw ParameterError("segmentation length does not match tracks");
    const BlockPlan plan = make_block_plan(params.segmentation, params.L);
    const bool inst = kind.needs_instances();
    auto d = run_replicates(params.B, params.seed, params.threads, [&](Engine& rng) {
        const auto windows = draw_stratified(plan, rng);
        return statistic_from_counts(kind, accumulate_counts(p, windows, inst)).value;
    });
    d.subsample_length = plan.total_length();
    d.nominal_length = params.L;
    d.statistic = kind.name();
    return d;
}

/// L / B * sum (T*_b - mean)^2 with L the realized subsample length.
inline double subsample_variance(const ReplicateDistribution& d) {
    if (d.values.size() < 2) throw ParameterError("subsample variance needs at least 2 non-degenerate replicates");
    return static_cast<double>(d.subsample_length) * variance_pop(d.values);
}

/// Standard error of the full-length statistic implied by the replicates.
inline double subsample_standard_error(const ReplicateDistribution& d, Pos n) {
    return std::sqrt(subsample_variance(d) / static_cast<double>(n));
}

enum class IntervalMethod { Gaussian, Percentile };

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
    double level = 0.95;
    IntervalMethod method = IntervalMethod::Gaussian;
};

inline void check_level(double level) {
    if (!(level > 0.0 && level < 1.0)) throw ParameterError("confidence level must lie in (0, 1)");
}

/// obs +- z_{1-alpha/2} sigma_hat / sqrt(n).
inline ConfidenceInterval ci_gaussian(const StatValue& obs, const ReplicateDistribution& d, Pos n, double level) {
    check_level(level);
    const double z = normal_quantile(1.0 - (1.0 - level) / 2.0);
    const double half = z * std::sqrt(subsample_variance(d)) / std::sqrt(static_cast<double>(n));
    return {obs.value - half, obs.value + half, level, IntervalMethod::Gaussian};
}

/// Order statistics [T*_(B+1-k), T*_(k)] with k = ceil(B (1 - alpha/2)),
/// 1-based, so the two tails hold the same number of replicates.
inline ConfidenceInterval ci_percentile(const ReplicateDistribution& d, double level) {
    check_level(level);
    const double alpha = 1.0 - level;
    const std::size_t B = d.values.size();
    if (static_cast<double>(B) < 2.0 / alpha - 1e-9) {
        throw ParameterError("percentile interval needs at least 2/alpha replicates");
    }
    std::vector<double> s = d.values;
    std::sort(s.begin(), s.end());
    auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(B) * (1.0 - alpha / 2.0) - 1e-9));
    k = std::clamp<std::size_t>(k, 1, B);
    const std::size_t lo = B + 1 - k;
    return {s[std::min(lo, k) - 1], s[std::max(lo, k) - 1], level, IntervalMethod::Percentile};
}

inline NormalityResult normality_diagnostic(const ReplicateDistribution& d) { return lilliefors_test(d.values); }

struct BlockSizeCandidate {
    int v = 0;
    Pos L = 0;
    bool feasible = false;
    double iqr = 0.0;       // IQR of sqrt(L_v) (T* - T_n)
    std::optional<double> distance;  // d*(v), needs v-1 feasible
    ReplicateDistribution replicates;
};

struct BlockSizeSelection {
    Pos chosen = 0;
    int chosen_v = 0;
    std::vector<BlockSizeCandidate> candidates;
};

/// Candidate lengths L_v = floor(rho^v n), v = 1..V. For each, the replicate
/// distribution of sqrt(L_v)(T*(L_v) - T_n); d*(v) is the absolute change in
/// its interquartile range from v-1 to v. Picks argmin d*, ties toward the
/// larger L.
inline BlockSizeSelection select_block_size(const TrackPair& p, const Segmentation& seg, const StatisticKind& kind,
                                            double rho, int steps, std::size_t B, std::uint64_t seed,
                                            unsigned threads = 0) {
    if (!(rho > 0.0 && rho < 1.0)) throw ParameterError("rho must lie in (0, 1)");
    if (steps < 2) throw ParameterError("block-size grid needs at least 2 steps");
    const Pos n = p.size();
    const double observed = evaluate(kind, p).value;
    BlockSizeSelection out;
    for (int v = 1; v <= steps; ++v) {
        BlockSizeCandidate c;
        c.v = v;
        c.L = static_cast<Pos>(std::floor(std::pow(rho, v) * static_cast<double>(n)));
        try {
            SubsampleParams sp{c.L, B, child_seed(seed, static_cast<std::uint64_t>(v)), seg, threads};
            c.replicates = subsample_distribution(p, kind, sp);
            if (c.replicates.values.size() >= 4) {
                std::vector<double> scaled;
                scaled.reserve(c.replicates.values.size());
                const double root = std::sqrt(static_cast<double>(c.replicates.subsample_length));
                for (double t : c.replicates.values) scaled.push_back(root * (t - observed));
                c.iqr = iqr(scaled);
                c.feasible = true;
            }
        } catch (const ParameterError&) {
            c.feasible = false;
        }
        if (v > 1 && c.feasible && out.candidates.back().feasible) {
            c.distance = std::abs(c.iqr - out.candidates.back().iqr);
        }
        out.candidates.push_back(std::move(c));
    }
    const BlockSizeCandidate* best = nullptr;
    for (const auto& c : out.candidates) {
        if (c.distance && (!best || *c.distance < *best->distance)) best = &c;
    }
    if (!best) throw ParameterError("block-size selection: fewer than 2 feasible consecutive candidates");
    out.chosen = best->L;
    out.chosen_v = best->v;
    return out;
}

/// One value per line, full precision.
inline void write_replicates(std::ostream& out, const ReplicateDistribution& d) {
    const auto old = out.precision(17);
    for (double v : d.values) out << v << '\n';
    out.precision(old);
}

}  // namespace gsc
