#pragma once

// Brute-force references on expanded 0/1 vectors. Nothing here calls into
// the run-length code paths it is compared against.

#include "gsc/gsc.hpp"

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace oracle {

using gsc::Pos;
using Dense = std::vector<int>;

inline Dense expand(Pos n, const std::vector<gsc::Interval>& raw) {
    Dense x(static_cast<std::size_t>(n), 0);
    for (const auto& iv : raw) {
        for (Pos k = iv.start; k < iv.end; ++k) x[k] = 1;
    }
    return x;
}

inline Pos sum(const Dense& x, Pos lo, Pos hi) {
    Pos s = 0;
    for (Pos k = lo; k < hi; ++k) s += x[k];
    return s;
}

/// Falling edges I_{k-1}(1 - I_k) over [lo, hi) with zero padding on both sides.
inline Pos falling_edges(const Dense& x, Pos lo, Pos hi) {
    Pos w = 0;
    for (Pos k = lo; k <= hi; ++k) {
        const int prev = k > lo ? x[k - 1] : 0;
        const int cur = k < hi ? x[k] : 0;
        w += prev * (1 - cur);
    }
    return w;
}

struct Counts {
    Pos length = 0, a_cov = 0, b_cov = 0, joint = 0;
    Pos instances = 0, hits = 0;
};

/// A read on [a, a+len), B on [b, b+len), position l of one against l of the other.
inline Counts aligned(const Dense& I, const Dense& J, Pos a, Pos b, Pos len) {
    Counts c;
    c.length = len;
    bool in_run = false;
    bool hit = false;
    for (Pos l = 0; l < len; ++l) {
        c.a_cov += I[a + l];
        c.b_cov += J[b + l];
        c.joint += I[a + l] * J[b + l];
        if (I[a + l]) {
            if (!in_run) {
                in_run = true;
                hit = false;
                ++c.instances;
            }
            if (J[b + l]) hit = true;
        }
        if (in_run && (l + 1 == len || !I[a + l + 1])) {
            in_run = false;
            if (hit) ++c.hits;
        }
    }
    return c;
}

inline double mean_overlap(const Counts& c) { return double(c.joint) / double(c.length); }
inline double bp_overlap(const Counts& c) { return double(c.joint) / double(c.a_cov); }
inline double region_overlap(const Counts& c) { return double(c.hits) / double(c.instances); }

/// (j/N)(mean_left - mean)^2 + ((N-j)/N)(mean_right - mean)^2 on [lo, hi).
inline double glr(const Dense& x, Pos lo, Pos hi, Pos j) {
    const double N = double(hi - lo);
    const double m = double(sum(x, lo, hi)) / N;
    const double ml = double(sum(x, lo, lo + j)) / double(j);
    const double mr = double(sum(x, lo + j, hi)) / (N - double(j));
    return double(j) / N * (ml - m) * (ml - m) + (N - double(j)) / N * (mr - m) * (mr - m);
}

/// Sum over every full window of length w in [lo, hi) of the squared
/// deviation of its mean from the mean of [lo, hi).
inline double sliding(const Dense& x, Pos lo, Pos hi, Pos w) {
    const double m = double(sum(x, lo, hi)) / double(hi - lo);
    double acc = 0.0;
    for (Pos s = lo; s + w <= hi; ++s) {
        const double d = double(sum(x, s, s + w)) / double(w) - m;
        acc += d * d;
    }
    return acc;
}

/// Two-part block variance at cut j of [lo, hi) with region block length L.
inline double variance_profile(const Dense& x, Pos lo, Pos hi, Pos L, Pos j) {
    const Pos N = hi - lo;
    auto window = [&](Pos side) {
        Pos w = 1;
        while (w * N < side * L) ++w;  // smallest w with w >= side L / N
        return w;
    };
    const double NN = double(N) * double(N);
    return double(j) / NN * sliding(x, lo, lo + j, window(j)) +
           double(N - j) / NN * sliding(x, lo + j, hi, window(N - j));
}

/// Cross-pair replicate of the base-pair overlap statistic on one stratum.
inline double cross_bp_single(const Dense& I, const Dense& J, Pos k1, Pos k2, Pos len) {
    const Counts f = aligned(I, J, k1, k2, len);
    const Counts b = aligned(I, J, k2, k1, len);
    const double F = 0.5 * (double(f.joint) / double(f.a_cov) + double(b.joint) / double(b.a_cov));
    // with one stratum J~* reduces to the average B mean of the two blocks
    const double jbar = 0.5 * double(f.b_cov + b.b_cov) / double(len);
    return F - jbar;
}

inline bool close(double a, double b, double rel = 1e-12) {
    if (a == b) return true;
    return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), 1e-300});
}

struct Sweep {
    std::size_t checks = 0;
    std::size_t mismatches = 0;
    std::string first_failure;

    void expect(bool ok, const std::string& what) {
        ++checks;
        if (!ok) {
            ++mismatches;
            if (first_failure.empty()) first_failure = what;
        }
    }
};

/// Random raw intervals (overlapping, touching, unsorted) on [0, n).
inline std::vector<gsc::Interval> random_intervals(Pos n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> count(0, static_cast<int>(n / 6) + 1);
    std::uniform_int_distribution<Pos> start(0, n - 1);
    std::uniform_int_distribution<Pos> len(1, 12);
    std::vector<gsc::Interval> iv;
    const int k = count(rng);
    for (int i = 0; i < k; ++i) {
        const Pos s = start(rng);
        iv.push_back({s, std::min(n, s + len(rng))});
    }
    return iv;
}

/// Exhaustive comparison of the run-length computations with the dense
/// references on `cases` random track pairs with n <= 200.
inline Sweep run_sweep(std::uint64_t seed, int cases) {
    using namespace gsc;
    Sweep sw;
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<Pos> len_dist(2, 200);
    for (int c = 0; c < cases; ++c) {
        const Pos n = len_dist(rng);
        auto space = std::make_shared<const CoordinateSpace>(CoordinateSpace::single("s", n));
        const auto ra = random_intervals(n, rng);
        const auto rb = random_intervals(n, rng);
        const Dense I = expand(n, ra);
        const Dense J = expand(n, rb);
        const TrackPair p(FeatureTrack(space, ra), FeatureTrack(space, rb));
        std::ostringstream tag;
        tag << "case " << c << " n=" << n;

        // every window [lo, hi): sums, instances, statistics
        for (Pos lo = 0; lo < n; ++lo) {
            for (Pos hi = lo + 1; hi <= n; ++hi) {
                const Counts o = aligned(I, J, lo, lo, hi - lo);
                const auto got = window_counts(p, AlignedWindow::same(lo, hi));
                const std::string w = tag.str() + " window [" + std::to_string(lo) + "," + std::to_string(hi) + ")";
                sw.expect(p.a().indicator_sum(lo, hi) == sum(I, lo, hi), w + " indicator_sum");
                sw.expect(static_cast<Pos>(p.a().instances(lo, hi).size()) == falling_edges(I, lo, hi),
                          w + " instance count");
                sw.expect(got.joint == o.joint && got.a_cov == o.a_cov && got.b_cov == o.b_cov &&
                              static_cast<Pos>(got.instances) == o.instances &&
                              static_cast<Pos>(got.hit_instances) == o.hits,
                          w + " counts");
                sw.expect(close(mean_overlap(p, lo, hi).value, oracle::mean_overlap(o)), w + " mean_overlap");
                if (o.a_cov > 0) {
                    sw.expect(close(bp_overlap_fraction(p, lo, hi).value, oracle::bp_overlap(o)), w + " bp_overlap");
                    sw.expect(close(gsc::region_overlap(p, lo, hi).value, oracle::region_overlap(o)),
                              w + " region_overlap");
                }
            }
        }

        // shifted windows, as used by cross-pairing
        for (Pos len = 1; len <= n; len += std::max<Pos>(1, n / 7)) {
            for (Pos a = 0; a + len <= n; a += 3) {
                for (Pos b = 0; b + len <= n; b += 5) {
                    const Counts o = aligned(I, J, a, b, len);
                    const auto got = window_counts(p, {a, b, len});
                    sw.expect(got.joint == o.joint && got.a_cov == o.a_cov && got.b_cov == o.b_cov &&
                                  static_cast<Pos>(got.instances) == o.instances &&
                                  static_cast<Pos>(got.hit_instances) == o.hits,
                              tag.str() + " shifted window");
                }
            }
        }

        // M(j) and its argmax, V(t) on the whole range and a sub-range
        for (const auto& [lo, hi] : {std::pair<Pos, Pos>{0, n}, std::pair<Pos, Pos>{n / 4, n}}) {
            if (hi - lo < 2) continue;
            const GlrProfile m(p.a(), lo, hi);
            double best_v = -1.0;
            for (Pos j = 1; j < hi - lo; ++j) {
                const double ref = glr(I, lo, hi, j);
                sw.expect(close(m.at(j), ref), tag.str() + " M(" + std::to_string(j) + ")");
                best_v = std::max(best_v, ref);
            }
            const auto got = m.argmax(1, hi - lo - 1);
            sw.expect(close(got.value, best_v), tag.str() + " argmax value");
            if (best_v > 0) sw.expect(close(m.at(got.left), best_v), tag.str() + " argmax position");
            for (Pos L : {Pos{1}, Pos{3}, (hi - lo) / 3}) {
                if (L < 1) continue;
                const VarianceProfile v(p.a(), lo, hi, L);
                for (Pos j = 1; j < hi - lo; ++j) {
                    double ref;
                    try {
                        ref = variance_profile(I, lo, hi, L, j);
                        if (v.window_for(j) > j || v.window_for(hi - lo - j) > hi - lo - j) continue;
                    } catch (...) {
                        continue;
                    }
                    sw.expect(std::abs(v.at(j) - ref) <= 1e-12 * std::max(1.0, std::abs(ref)),
                              tag.str() + " V(" + std::to_string(j) + ") L=" + std::to_string(L));
                }
            }
        }

        // single-segment replicate moments: all stationary block starts and
        // all ordered cross-pairs (K1, K2)
        const Pos L = std::max<Pos>(1, n / 4);
        if (L < n) {
            const BlockPlan plan = make_block_plan(Segmentation::trivial(n), L);
            double s1 = 0, s2 = 0, r1 = 0, r2 = 0;
            std::size_t used = 0;
            for (Pos N = 0; N + L <= n; ++N) {
                const Counts o = aligned(I, J, N, N, L);
                const auto got = statistic_from_counts(StatisticKind::mean_overlap(),
                                                       accumulate_counts(p, std::vector<AlignedWindow>{{N, N, L}}));
                s1 += got.value;
                s2 += got.value * got.value;
                r1 += oracle::mean_overlap(o);
                r2 += oracle::mean_overlap(o) * oracle::mean_overlap(o);
                ++used;
            }
            sw.expect(close(s1, r1) && close(s2, r2), tag.str() + " stationary replicate moments");
            (void)used;

            if (2 * plan.strata[0].block <= n) {
                double c1 = 0, c2 = 0, o1 = 0, o2 = 0;
                const Pos blk = plan.strata[0].block;
                for (Pos k1 = 0; k1 + blk <= n; ++k1) {
                    for (Pos k2 = 0; k2 + blk <= n; ++k2) {
                        if (k1 == k2) continue;
                        const Counts f = aligned(I, J, k1, k2, blk);
                        const Counts b = aligned(I, J, k2, k1, blk);
                        if (f.a_cov == 0 || b.a_cov == 0) continue;
                        const double got = cross_replicate_bp(p, plan, {{k1, k2}});
                        const double ref = cross_bp_single(I, J, k1, k2, blk);
                        c1 += got;
                        c2 += got * got;
                        o1 += ref;
                        o2 += ref * ref;
                        sw.expect(std::abs(got - ref) <= 1e-12, tag.str() + " cross replicate");
                    }
                }
                sw.expect(std::abs(c1 - o1) <= 1e-9 && std::abs(c2 - o2) <= 1e-9, tag.str() + " cross moments");
            }
        }
    }
    return sw;
}

}  // namespace oracle
