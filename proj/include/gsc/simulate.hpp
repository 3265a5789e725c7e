#pragma once

// Generators for the validation studies: a clumping Markov chain with two
// derived features, and a piecewise Neyman-Scott cluster process.

#include "gsc/errors.hpp"
#include "gsc/random.hpp"
#include "gsc/segmentation.hpp"
#include "gsc/tracks.hpp"

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace gsc {

struct MarkovParams {
    Pos n = 10000;
    double p0 = 0.9;
    Pos w = 20;
};

/// x_1 ~ Bernoulli(p0 / 2), then
/// P(x_k = 1) = p0 / 2 + (1 - p0) * (mean of the previous w values),
/// where the mean runs over the available history while k <= w.
inline std::vector<std::uint8_t> simulate_markov(const MarkovParams& params, Engine& rng) {
    if (params.n < 1) throw ParameterError("markov: n must be positive");
    if (!(params.p0 > 0.0 && params.p0 <= 1.0)) throw ParameterError("markov: p0 must lie in (0, 1]");
    if (params.w < 1) throw ParameterError("markov: window w must be at least 1");
    std::vector<std::uint8_t> x(static_cast<std::size_t>(params.n));
    Pos window_sum = 0;
    for (Pos k = 0; k < params.n; ++k) {
        double prob = params.p0 / 2.0;
        const Pos have = std::min(k, params.w);
        if (have > 0) prob += (1.0 - params.p0) * static_cast<double>(window_sum) / static_cast<double>(have);
        x[k] = uniform01(rng) < prob ? 1 : 0;
        window_sum += x[k];
        if (k >= params.w) window_sum -= x[k - params.w];
    }
    return x;
}

enum class DerivedFeatureRule {
    PatternMatch,  // 1,1,1,0,0 starts at k
    RunDensity,    // more than six 1s in x[k..k+9]
};

/// Marks every qualifying position with a one-base feature; adjacent marks
/// merge into runs.
inline FeatureTrack derive_features(std::span<const std::uint8_t> x, DerivedFeatureRule rule, const SpacePtr& space) {
    const auto n = static_cast<Pos>(x.size());
    if (space->total_length() != n) throw ParameterError("derive_features: sequence length does not match space");
    std::vector<std::uint8_t> mark(x.size(), 0);
    if (rule == DerivedFeatureRule::PatternMatch) {
        static constexpr std::uint8_t pattern[] = {1, 1, 1, 0, 0};
        for (Pos k = 0; k + 5 <= n; ++k) {
            bool hit = true;
            for (Pos j = 0; j < 5 && hit; ++j) hit = x[k + j] == pattern[j];
            mark[k] = hit ? 1 : 0;
        }
    } else {
        constexpr Pos window = 10;
        constexpr Pos threshold = 6;
        Pos sum = 0;
        for (Pos k = 0; k < std::min(window, n); ++k) sum += x[k];
        for (Pos k = 0; k + window <= n; ++k) {
            if (k > 0) sum += x[k + window - 1] - x[k - 1];
            mark[k] = sum > threshold ? 1 : 0;
        }
    }
    return FeatureTrack::from_dense(space, mark);
}

/// Side of the cluster center on which a feature starts.
enum class OffsetSign { Symmetric, Downstream };

struct NeymanScottRegion {
    Pos length = 10000;  // T
    double rate = 0.01;  // cluster centers per base (lambda)
    double cluster_size = 10.0;   // alpha, mean features per cluster
    double offset_mean = 10.0;    // mu
    double length_mean = 5.0;     // beta
    OffsetSign offset_sign = OffsetSign::Symmetric;
};

/// Poisson: the number of centers in a region is Poisson(lambda T).
/// Fixed: it is round(lambda T), i.e. the process conditioned on its count.
enum class ClusterCount { Poisson, Fixed };

struct NeymanScottParams {
    std::vector<NeymanScottRegion> regions;
    ClusterCount cluster_count = ClusterCount::Poisson;

    [[nodiscard]] Pos total_length() const {
        Pos t = 0;
        for (const auto& r : regions) t += r.length;
        return t;
    }
};

inline void validate(const NeymanScottParams& p) {
    if (p.regions.empty()) throw ParameterError("neyman-scott: no regions");
    for (std::size_t i = 0; i < p.regions.size(); ++i) {
        const auto& r = p.regions[i];
        const std::string where = "neyman-scott region " + std::to_string(i) + ": ";
        if (r.length < 1) throw ParameterError(where + "length must be positive");
        if (r.rate < 0.0) throw ParameterError(where + "rate must be non-negative");
        if (!(r.cluster_size > 0.0)) throw ParameterError(where + "cluster size must be positive");
        if (!(r.offset_mean >= 1.0)) throw ParameterError(where + "offset mean must be at least 1");
        if (!(r.length_mean >= 1.0)) throw ParameterError(where + "length mean must be at least 1");
    }
}

/// Geometric on {1, 2, ...} with the given mean (success probability 1/mean).
inline Pos geometric_with_mean(double mean_value, Engine& rng) {
    if (mean_value <= 1.0) return 1;
    std::geometric_distribution<Pos> g(1.0 / mean_value);
    return g(rng) + 1;
}

/// Union of all features of a piecewise Neyman-Scott process. Per region:
/// Poisson(lambda T) centers uniform in the region, Poisson(alpha) features
/// per center, each starting a geometric offset (mean mu, random sign) from
/// the center with geometric length (mean beta). Features are clipped to
/// the whole sequence, so they may spill across a region boundary.
inline FeatureTrack simulate_neyman_scott(const NeymanScottParams& params, const SpacePtr& space, Engine& rng) {
    validate(params);
    const Pos n = params.total_length();
    if (space->total_length() != n) throw ParameterError("neyman-scott: space length does not match regions");
    std::vector<Interval> features;
    Pos region_start = 0;
    for (const auto& r : params.regions) {
        std::poisson_distribution<long long> centers(r.rate * static_cast<double>(r.length));
        std::poisson_distribution<long long> members(r.cluster_size);
        long long nc = 0;
        if (r.rate > 0.0) {
            nc = params.cluster_count == ClusterCount::Poisson ? centers(rng)
                                                               : std::llround(r.rate * static_cast<double>(r.length));
        }
        for (long long c = 0; c < nc; ++c) {
            const Pos center = uniform_int<Pos>(rng, region_start, region_start + r.length - 1);
            const long long k = members(rng);
            for (long long f = 0; f < k; ++f) {
                const Pos offset = geometric_with_mean(r.offset_mean, rng);
                const bool left = r.offset_sign == OffsetSign::Symmetric && uniform_int<int>(rng, 0, 1) == 0;
                const Pos len = geometric_with_mean(r.length_mean, rng);
                const Pos start = left ? center - offset : center + offset;
                const Pos s = std::max<Pos>(start, 0);
                const Pos e = std::min<Pos>(start + len, n);
                if (s < e) features.push_back({s, e});
            }
        }
        region_start += r.length;
    }
    return FeatureTrack(space, std::move(features));
}

/// Change-points at the region boundaries.
inline Segmentation true_segmentation(const NeymanScottParams& params) {
    std::vector<Pos> cuts(1, 0);
    for (const auto& r : params.regions) cuts.push_back(cuts.back() + r.length);
    const Pos n = cuts.back();
    return Segmentation(n, std::move(cuts), SegmentationSource::Truth);
}

struct SimulatedPair {
    TrackPair pair;
    Segmentation truth;
};

/// Two independent tracks from one region structure: A is drawn first, B
/// second, both from `rng`.
inline SimulatedPair simulate_piecewise_pair(const NeymanScottParams& params, Engine& rng,
                                             const std::string& sequence_name = "sim") {
    validate(params);
    auto space = std::make_shared<const CoordinateSpace>(CoordinateSpace::single(sequence_name, params.total_length()));
    FeatureTrack a = simulate_neyman_scott(params, space, rng);
    FeatureTrack b = simulate_neyman_scott(params, space, rng);
    return {TrackPair(std::move(a), std::move(b)), true_segmentation(params)};
}

/// The two-region model of simulation study IIa.
inline NeymanScottParams two_region_model() {
    return {{{10000, 0.01, 10.0, 10.0, 5.0}, {10000, 0.02, 10.0, 10.0, 5.0}}, ClusterCount::Poisson};
}

/// Single 5 Mb region with alpha = 10, mu = 100, beta = 75 for the region
/// overlap study. The nominal rate 0.05 per base would cover almost the
/// whole region; 0.00062 centers per base with downstream offsets and a
/// fixed center count gives ~17-19% coverage, ~4700 instances per track,
/// mean R_n ~0.293 and sd ~0.0074.
inline NeymanScottParams region_overlap_model() {
    return {{{5000000, 0.00062, 10.0, 100.0, 75.0, OffsetSign::Downstream}}, ClusterCount::Fixed};
}

}  // namespace gsc
