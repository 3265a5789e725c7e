#pragma once

// Scaled simulation studies shared by `gsc reproduce` and the acceptance
// suite. Every study is a pure function of its config (including the seed):
// unit i of a phase draws from child_engine(child_seed(seed, phase), i), and
// units run in parallel with results stored by index.

#include "gsc/errors.hpp"
#include "gsc/random.hpp"
#include "gsc/segmentation.hpp"
#include "gsc/simulate.hpp"
#include "gsc/stats.hpp"
#include "gsc/subsampling.hpp"
#include "gsc/summary.hpp"
#include "gsc/testing.hpp"
#include "gsc/tracks.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

namespace gsc {

inline constexpr std::uint64_t kStudySeed = 20100601;

// ---------------------------------------------------------------------------
// Markov clumping study: spread of S = sum I J / sum I under four schemes.

struct MarkovStudyConfig {
    MarkovParams model{10000, 0.1, 20};
    std::size_t truth_sequences = 10000;
    std::size_t replicates = 1000;
    Pos block_length = 40;
    std::uint64_t seed = kStudySeed;
    unsigned threads = 0;
};

struct MarkovStudyResult {
    double observed = 0.0;
    double truth_sd = 0.0;
    double bootstrap_sd = 0.0;  // base-by-base resampling of the symbols
    double shuffle_sd = 0.0;    // feature II sites placed uniformly
    double block_sd = 0.0;      // n / L blocks of length L strung together
    std::vector<double> truth;
    std::vector<double> bootstrap;
    std::vector<double> shuffle;
    std::vector<double> block;
};

inline TrackPair markov_feature_pair(const std::vector<std::uint8_t>& x) {
    auto space = std::make_shared<const CoordinateSpace>(CoordinateSpace::single("sim", static_cast<Pos>(x.size())));
    return {derive_features(x, DerivedFeatureRule::PatternMatch, space),
            derive_features(x, DerivedFeatureRule::RunDensity, space)};
}

inline MarkovStudyResult run_markov_study(const MarkovStudyConfig& cfg) {
    MarkovStudyResult out;
    const Pos n = cfg.model.n;
    const auto kind = StatisticKind::bp_overlap();

    std::vector<std::optional<double>> truth(cfg.truth_sequences);
    parallel_for(truth.size(), cfg.threads, [&](std::size_t i) {
        Engine rng = child_engine(child_seed(cfg.seed, 1), i);
        try {
            truth[i] = evaluate(kind, markov_feature_pair(simulate_markov(cfg.model, rng))).value;
        } catch (const DegenerateDenominator&) {
        }
    });
    for (const auto& v : truth) {
        if (v) out.truth.push_back(*v);
    }
    out.truth_sd = sd_sample(out.truth);

    Engine data_rng = child_engine(child_seed(cfg.seed, 2), 0);
    const auto x = simulate_markov(cfg.model, data_rng);
    const TrackPair p = markov_feature_pair(x);
    out.observed = evaluate(kind, p).value;

    // ordinary bootstrap: resample the symbols x base by base, then derive
    // both features from the resampled sequence
    out.bootstrap = run_replicates(cfg.replicates, child_seed(cfg.seed, 3), cfg.threads, [&](Engine& rng) {
                        std::vector<std::uint8_t> y(x.size());
                        for (auto& v : y) v = x[static_cast<std::size_t>(uniform_int<Pos>(rng, 0, n - 1))];
                        return evaluate(kind, markov_feature_pair(y)).value;
                    }).values;
    // feature randomization: every type II site is a one-base feature, so
    // its sites are placed uniformly without replacement and I stays fixed
    const auto dense_a = p.a().to_dense();
    const Pos sites_b = p.b().coverage();
    out.shuffle = run_replicates(cfg.replicates, child_seed(cfg.seed, 4), cfg.threads, [&](Engine& rng) {
                      std::vector<Pos> pos(static_cast<std::size_t>(n));
                      std::iota(pos.begin(), pos.end(), Pos{0});
                      Pos ij = 0;
                      for (Pos k = 0; k < sites_b; ++k) {
                          std::swap(pos[k], pos[uniform_int<Pos>(rng, k, n - 1)]);
                          ij += dense_a[pos[k]];
                      }
                      return static_cast<double>(ij) / static_cast<double>(p.a().coverage());
                  }).values;

    const Pos blocks = n / cfg.block_length;
    if (blocks < 1) throw ParameterError("markov study: block length exceeds n");
    out.block = run_replicates(cfg.replicates, child_seed(cfg.seed, 5), cfg.threads, [&](Engine& rng) {
                    std::vector<AlignedWindow> w;
                    w.reserve(static_cast<std::size_t>(blocks));
                    for (Pos b = 0; b < blocks; ++b) {
                        const Pos s = draw_stationary(n, cfg.block_length, rng);
                        w.push_back({s, s, cfg.block_length});
                    }
                    return statistic_from_counts(kind, accumulate_counts(p, w)).value;
                }).values;
    out.bootstrap_sd = sd_sample(out.bootstrap);
    out.shuffle_sd = sd_sample(out.shuffle);
    out.block_sd = sd_sample(out.block);
    return out;
}

// ---------------------------------------------------------------------------
// Two-region standard-error study (four strategies against Monte Carlo truth).

struct Table2Config {
    NeymanScottParams model = two_region_model();
    StatisticKind statistic = StatisticKind::mean_overlap();
    std::size_t truth_pairs = 2000;
    std::size_t estimate_pairs = 200;
    std::size_t replicates = 500;
    std::size_t shuffle_replicates = 200;
    Pos L = 1000;
    SegmentationParams segmentation{1200, 0.0, std::nullopt, SegmentSignal::Both};
    Pos cut_tolerance = 500;
    std::uint64_t seed = kStudySeed;
    unsigned threads = 0;
};

struct Table2Result {
    double truth = 0.0;                   // sd of the statistic across pairs
    double shuffle = 0.0;                 // mean over pairs of each estimate
    double unsegmented = 0.0;
    double true_segmentation = 0.0;
    double estimated_segmentation = 0.0;
    double cut_recovery = 0.0;            // share of pairs with a cut near each true change-point
    double mean_cuts = 0.0;
    std::size_t estimate_pairs = 0;
    std::vector<double> truth_values;
    std::vector<double> nearest_cut_distance;  // per estimate pair, worst over true change-points
};

/// Largest, over the interior true change-points, of the distance to the
/// nearest estimated cut.
inline Pos worst_cut_distance(const Segmentation& truth, const Segmentation& est) {
    Pos worst = 0;
    for (std::size_t i = 1; i + 1 < truth.cuts().size(); ++i) {
        Pos best = std::numeric_limits<Pos>::max();
        for (std::size_t j = 1; j + 1 < est.cuts().size(); ++j) {
            best = std::min(best, std::abs(est.cuts()[j] - truth.cuts()[i]));
        }
        worst = std::max(worst, best);
    }
    return worst;
}

inline Table2Result run_table2_study(const Table2Config& cfg) {
    Table2Result out;
    std::vector<std::optional<double>> truth(cfg.truth_pairs);
    parallel_for(truth.size(), cfg.threads, [&](std::size_t i) {
        Engine rng = child_engine(child_seed(cfg.seed, 1), i);
        const auto sp = simulate_piecewise_pair(cfg.model, rng);
        try {
            truth[i] = evaluate(cfg.statistic, sp.pair).value;
        } catch (const DegenerateDenominator&) {
        }
    });
    for (const auto& v : truth) {
        if (v) out.truth_values.push_back(*v);
    }
    out.truth = sd_sample(out.truth_values);

    struct Row {
        double shuffle = 0, unseg = 0, truth = 0, est = 0;
        Pos distance = 0;
        std::size_t cuts = 0;
    };
    std::vector<Row> rows(cfg.estimate_pairs);
    parallel_for(rows.size(), cfg.threads, [&](std::size_t i) {
        Engine rng = child_engine(child_seed(cfg.seed, 2), i);
        const auto sp = simulate_piecewise_pair(cfg.model, rng);
        const TrackPair& p = sp.pair;
        const Pos n = p.size();
        const std::uint64_t s = child_seed(child_seed(cfg.seed, 3), i);
        Row& r = rows[i];
        r.shuffle = sd_sample(shuffle_baseline(p, cfg.statistic, cfg.shuffle_replicates, child_seed(s, 0), 1).values);
        auto se = [&](const Segmentation& seg, std::uint64_t seed) {
            return subsample_standard_error(subsample_distribution(p, cfg.statistic, {cfg.L, cfg.replicates, seed, seg, 1}),
                                            n);
        };
        r.unseg = se(Segmentation::trivial(n), child_seed(s, 1));
        r.truth = se(sp.truth, child_seed(s, 2));
        const Segmentation est = segment_pair(p, cfg.segmentation).segmentation;
        r.cuts = est.region_count() - 1;
        r.distance = worst_cut_distance(sp.truth, est);
        r.est = se(est, child_seed(s, 3));
    });
    double cuts = 0;
    std::size_t recovered = 0;
    for (const auto& r : rows) {
        out.shuffle += r.shuffle;
        out.unsegmented += r.unseg;
        out.true_segmentation += r.truth;
        out.estimated_segmentation += r.est;
        cuts += static_cast<double>(r.cuts);
        if (r.distance <= cfg.cut_tolerance) ++recovered;
        out.nearest_cut_distance.push_back(static_cast<double>(r.distance));
    }
    const auto k = static_cast<double>(rows.size());
    out.estimate_pairs = rows.size();
    out.shuffle /= k;
    out.unsegmented /= k;
    out.true_segmentation /= k;
    out.estimated_segmentation /= k;
    out.mean_cuts = cuts / k;
    out.cut_recovery = static_cast<double>(recovered) / k;
    return out;
}

// ---------------------------------------------------------------------------
// Gaussianity of replicate distributions with and without segmentation.

struct NormalityStudyConfig {
    NeymanScottParams model = two_region_model();
    StatisticKind statistic = StatisticKind::mean_overlap();
    std::size_t pairs = 20;
    std::vector<Pos> grid{250, 500, 1000, 2000, 4000};
    std::size_t replicates = 1000;
    double alpha = 0.05;
    SegmentationParams segmentation{1200, 0.0, std::nullopt, SegmentSignal::Both};
    std::uint64_t seed = kStudySeed + 8;
    unsigned threads = 0;
};

struct NormalityStudyResult {
    std::vector<Pos> grid;
    std::vector<std::size_t> unsegmented_rejections;  // per grid point, out of `pairs`
    std::vector<std::size_t> segmented_rejections;
    std::size_t pairs = 0;

    [[nodiscard]] std::size_t total_unsegmented() const {
        std::size_t t = 0;
        for (auto v : unsegmented_rejections) t += v;
        return t;
    }
    [[nodiscard]] std::size_t total_segmented() const {
        std::size_t t = 0;
        for (auto v : segmented_rejections) t += v;
        return t;
    }
};

inline NormalityStudyResult run_normality_study(const NormalityStudyConfig& cfg) {
    NormalityStudyResult out;
    out.grid = cfg.grid;
    out.pairs = cfg.pairs;
    const std::size_t g = cfg.grid.size();
    std::vector<std::uint8_t> unseg(cfg.pairs * g, 0);
    std::vector<std::uint8_t> seg(cfg.pairs * g, 0);
    parallel_for(cfg.pairs, cfg.threads, [&](std::size_t i) {
        Engine rng = child_engine(child_seed(cfg.seed, 1), i);
        const auto sp = simulate_piecewise_pair(cfg.model, rng);
        const Pos n = sp.pair.size();
        const Segmentation est = segment_pair(sp.pair, cfg.segmentation).segmentation;
        for (std::size_t j = 0; j < g; ++j) {
            const std::uint64_t s = child_seed(child_seed(cfg.seed, 2 + j), i);
            auto rejects = [&](const Segmentation& segm, std::uint64_t seed) {
                const auto d = subsample_distribution(sp.pair, cfg.statistic, {cfg.grid[j], cfg.replicates, seed, segm, 1});
                return normality_diagnostic(d).p_value < cfg.alpha;
            };
            unseg[i * g + j] = rejects(Segmentation::trivial(n), child_seed(s, 0)) ? 1 : 0;
            seg[i * g + j] = rejects(est, child_seed(s, 1)) ? 1 : 0;
        }
    });
    out.unsegmented_rejections.assign(g, 0);
    out.segmented_rejections.assign(g, 0);
    for (std::size_t i = 0; i < cfg.pairs; ++i) {
        for (std::size_t j = 0; j < g; ++j) {
            out.unsegmented_rejections[j] += unseg[i * g + j];
            out.segmented_rejections[j] += seg[i * g + j];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Region-overlap study: population of R_n, double bootstrap on an average
// and on the most extreme pair, and the start-site shuffle comparator.

struct RegionOverlapConfig {
    NeymanScottParams model = region_overlap_model();
    std::size_t pairs = 5000;
    Pos L = 45000;  // L_b / n = 0.009
    double outer_multiplier = kDefaultOuterMultiplier;  // L_r = L_b / 0.15
    std::size_t replicates = 10000;
    std::size_t outer_replicates = 1000;
    std::size_t shuffle_replicates = 1000;
    std::uint64_t seed = kStudySeed + 2;
    unsigned threads = 0;
};

struct RegionOverlapResult {
    std::vector<double> population;
    double population_mean = 0.0;
    double population_sd = 0.0;
    std::size_t average_index = 0;
    std::size_t extreme_index = 0;
    TestResult average;
    TestResult extreme;
    double extreme_population_z = 0.0;
    double shuffle_mean = 0.0;  // on the extreme pair
    double shuffle_sd = 0.0;
};

inline SimulatedPair region_overlap_pair(const RegionOverlapConfig& cfg, std::size_t i) {
    Engine rng = child_engine(child_seed(cfg.seed, 1), i);
    return simulate_piecewise_pair(cfg.model, rng);
}

inline RegionOverlapResult run_region_overlap_study(const RegionOverlapConfig& cfg) {
    RegionOverlapResult out;
    out.population.assign(cfg.pairs, 0.0);
    parallel_for(cfg.pairs, cfg.threads, [&](std::size_t i) {
        out.population[i] = evaluate(StatisticKind::region_overlap(), region_overlap_pair(cfg, i).pair).value;
    });
    out.population_mean = mean(out.population);
    out.population_sd = sd_sample(out.population);
    for (std::size_t i = 0; i < cfg.pairs; ++i) {
        if (std::abs(out.population[i] - out.population_mean) <
            std::abs(out.population[out.average_index] - out.population_mean)) {
            out.average_index = i;
        }
        if (out.population[i] > out.population[out.extreme_index]) out.extreme_index = i;
    }
    out.extreme_population_z = (out.population[out.extreme_index] - out.population_mean) / out.population_sd;

    TestParams tp;
    tp.L = cfg.L;
    tp.B = cfg.replicates;
    tp.outer_replicates = cfg.outer_replicates;
    tp.outer_multiplier = cfg.outer_multiplier;
    tp.threads = cfg.threads;
    tp.seed = child_seed(cfg.seed, 2);
    const auto avg = region_overlap_pair(cfg, out.average_index);
    out.average = double_bootstrap_region_overlap(avg.pair, tp, 0.05);
    tp.seed = child_seed(cfg.seed, 3);
    const auto ext = region_overlap_pair(cfg, out.extreme_index);
    out.extreme = double_bootstrap_region_overlap(ext.pair, tp, 0.05);
    const auto sh =
        shuffle_baseline(ext.pair, StatisticKind::region_overlap(), cfg.shuffle_replicates, child_seed(cfg.seed, 4),
                         cfg.threads);
    out.shuffle_mean = mean(sh.values);
    out.shuffle_sd = sd_sample(sh.values);
    return out;
}

// ---------------------------------------------------------------------------
// Size of the base-pair overlap test under independence.

struct SizeStudyConfig {
    MarkovParams model{10000, 0.9, 20};
    std::size_t trials = 500;
    Pos L = 500;
    std::size_t replicates = 500;
    double alpha = 0.05;
    std::uint64_t seed = kStudySeed + 4;
    unsigned threads = 0;
};

struct SizeStudyResult {
    std::size_t trials = 0;
    std::size_t rejections = 0;
    std::vector<double> p_values;
    [[nodiscard]] double rate() const { return trials ? static_cast<double>(rejections) / static_cast<double>(trials) : 0.0; }
};

/// Feature I from one Markov sequence, feature II from an independent one.
inline SizeStudyResult run_size_study(const SizeStudyConfig& cfg) {
    SizeStudyResult out;
    out.trials = cfg.trials;
    out.p_values.assign(cfg.trials, 1.0);
    auto space = std::make_shared<const CoordinateSpace>(CoordinateSpace::single("sim", cfg.model.n));
    parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
        Engine rng = child_engine(child_seed(cfg.seed, 1), t);
        const auto x = simulate_markov(cfg.model, rng);
        const auto y = simulate_markov(cfg.model, rng);
        const TrackPair p(derive_features(x, DerivedFeatureRule::PatternMatch, space),
                          derive_features(y, DerivedFeatureRule::RunDensity, space));
        TestParams tp;
        tp.L = cfg.L;
        tp.B = cfg.replicates;
        tp.seed = child_seed(child_seed(cfg.seed, 2), t);
        tp.threads = 1;
        out.p_values[t] = test_bp_overlap(p, tp, cfg.alpha).p_value;
    });
    for (double pv : out.p_values) {
        if (pv <= cfg.alpha) ++out.rejections;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Published reference values and tolerance bands used by `gsc reproduce`.

struct StudyCheck {
    std::string name;
    double value = 0.0;
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();
    double reference = std::numeric_limits<double>::quiet_NaN();  // published value, if any

    [[nodiscard]] bool pass() const { return value >= lower && value <= upper; }
};

inline std::vector<StudyCheck> markov_checks(const MarkovStudyResult& r) {
    // the naive schemes must understate the spread by more than blocks do
    const double block = r.block_sd / r.truth_sd;
    return {
        {"block_sd / truth_sd", block, 0.7, 1.3},
        {"block_ratio - bootstrap_ratio", block - r.bootstrap_sd / r.truth_sd, 0.0,
         std::numeric_limits<double>::infinity()},
        {"block_ratio - shuffle_ratio", block - r.shuffle_sd / r.truth_sd, 0.0,
         std::numeric_limits<double>::infinity()},
    };
}

inline std::vector<StudyCheck> table2_checks(const Table2Result& r) {
    return {
        {"truth_sd", r.truth, 0.0, std::numeric_limits<double>::infinity(), 1.2e-2},
        {"shuffle / truth", r.shuffle / r.truth, 0.0, 0.5, 0.3},
        {"unsegmented / truth", r.unsegmented / r.truth, 1.15, std::numeric_limits<double>::infinity(), 1.4},
        {"true_segmentation / truth", r.true_segmentation / r.truth, 0.7, 1.2, 0.91},
        {"estimated_segmentation / truth", r.estimated_segmentation / r.truth, 0.7, 1.2, 0.83},
        {"cut_recovery", r.cut_recovery, 0.9, 1.0},
    };
}

inline std::vector<StudyCheck> region_overlap_checks(const RegionOverlapResult& r) {
    return {
        {"population_mean", r.population_mean, 0.283, 0.303, 0.293},
        {"population_sd", r.population_sd, 0.0062, 0.0082, 0.0072},
        {"average_pair_sigma_hat", r.average.standard_error, 0.0072 * 0.8, 0.0072 * 1.2, 0.0072},
        {"shuffle_mean - extreme_R", r.shuffle_mean - r.extreme.observed, 0.0,
         std::numeric_limits<double>::infinity(), 0.337 - 0.321},
    };
}

}  // namespace gsc
