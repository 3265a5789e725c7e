#pragma once

// Overlap statistics for a pair of feature tracks.
//
// Statistics are evaluated on AlignedWindow lists. An aligned window reads
// feature A from [a_start, a_start + length) and feature B from
// [b_start, b_start + length), position by position. The observed statistic
// uses a_start == b_start; the cross-paired null replicates read A and B from
// two different blocks. Every statistic is a ratio whose numerator and
// denominator add up across windows, so a list of windows behaves like the
// concatenation of its blocks.

#include "gsc/errors.hpp"
#include "gsc/tracks.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace gsc {

/// Per-position component used by the generic window mean.
enum class Component { A, B, Joint };

struct StatisticKind {
    enum class Tag { MeanOverlap, BpOverlapFraction, RegionOverlap, WindowMean };

    Tag tag = Tag::BpOverlapFraction;
    Component component = Component::Joint;  // WindowMean only

    static StatisticKind mean_overlap() { return {Tag::MeanOverlap, Component::Joint}; }
    static StatisticKind bp_overlap() { return {Tag::BpOverlapFraction, Component::Joint}; }
    static StatisticKind region_overlap() { return {Tag::RegionOverlap, Component::Joint}; }
    static StatisticKind window_mean(Component c) { return {Tag::WindowMean, c}; }

    [[nodiscard]] bool needs_instances() const {
        return tag == Tag::MeanOverlap || tag == Tag::BpOverlapFraction || tag == Tag::RegionOverlap ||
               component == Component::Joint;
    }

    [[nodiscard]] std::string name() const {
        switch (tag) {
            case Tag::MeanOverlap: return "mean_overlap";
            case Tag::BpOverlapFraction: return "bp_overlap";
            case Tag::RegionOverlap: return "region_overlap";
            case Tag::WindowMean:
                switch (component) {
                    case Component::A: return "coverage_a";
                    case Component::B: return "coverage_b";
                    case Component::Joint: return "coverage_joint";
                }
        }
        return "unknown";
    }

    static StatisticKind parse(std::string_view s) {
        if (s == "mean_overlap") return mean_overlap();
        if (s == "bp_overlap") return bp_overlap();
        if (s == "region_overlap") return region_overlap();
        if (s == "coverage_a") return window_mean(Component::A);
        if (s == "coverage_b") return window_mean(Component::B);
        if (s == "coverage_joint") return window_mean(Component::Joint);
        throw ParameterError("unknown statistic '" + std::string(s) + "'");
    }

    friend bool operator==(const StatisticKind&, const StatisticKind&) = default;
};

struct StatValue {
    double value = 0.0;
    double numerator = 0.0;
    double denominator = 0.0;
};

struct AlignedWindow {
    Pos a_start = 0;
    Pos b_start = 0;
    Pos length = 0;

    static AlignedWindow same(Pos lo, Pos hi) { return {lo, lo, hi - lo}; }
};

/// Raw additive counts behind every statistic.
struct OverlapCounts {
    Pos length = 0;
    Pos a_cov = 0;
    Pos b_cov = 0;
    Pos joint = 0;                 // sum_l I_{a+l} J_{b+l}
    std::size_t instances = 0;     // A runs clipped to the window
    std::size_t hit_instances = 0; // of those, touching B

    OverlapCounts& operator+=(const OverlapCounts& o) {
        length += o.length;
        a_cov += o.a_cov;
        b_cov += o.b_cov;
        joint += o.joint;
        instances += o.instances;
        hit_instances += o.hit_instances;
        return *this;
    }
};

/// Counts on one aligned window. With with_instances = false only the
/// coverage counts are filled (cheaper for coverage-only statistics).
inline OverlapCounts window_counts(const TrackPair& p, const AlignedWindow& w, bool with_instances = true) {
    const Pos n = p.size();
    if (w.length < 0 || w.a_start < 0 || w.b_start < 0 || w.a_start + w.length > n || w.b_start + w.length > n) {
        throw std::out_of_range("aligned window outside the coordinate range");
    }
    OverlapCounts c;
    c.length = w.length;
    c.a_cov = p.a().indicator_sum(w.a_start, w.a_start + w.length);
    c.b_cov = p.b().indicator_sum(w.b_start, w.b_start + w.length);
    if (!with_instances) return c;
    const Pos shift = w.b_start - w.a_start;
    const FeatureTrack& b = p.b();
    p.a().for_each_instance(w.a_start, w.a_start + w.length, [&](const Interval& iv) {
        const Pos hits = b.covered_before(iv.end + shift) - b.covered_before(iv.start + shift);
        c.joint += hits;
        ++c.instances;
        if (hits > 0) ++c.hit_instances;
    });
    return c;
}

inline OverlapCounts accumulate_counts(const TrackPair& p, std::span<const AlignedWindow> windows,
                                       bool with_instances = true) {
    OverlapCounts total;
    for (const auto& w : windows) total += window_counts(p, w, with_instances);
    return total;
}

/// Ratio for `kind` from accumulated counts; throws on a zero denominator.
inline StatValue statistic_from_counts(const StatisticKind& kind, const OverlapCounts& c) {
    StatValue v;
    switch (kind.tag) {
        case StatisticKind::Tag::MeanOverlap:
            v.numerator = static_cast<double>(c.joint);
            v.denominator = static_cast<double>(c.length);
            break;
        case StatisticKind::Tag::BpOverlapFraction:
            v.numerator = static_cast<double>(c.joint);
            v.denominator = static_cast<double>(c.a_cov);
            break;
        case StatisticKind::Tag::RegionOverlap:
            v.numerator = static_cast<double>(c.hit_instances);
            v.denominator = static_cast<double>(c.instances);
            break;
        case StatisticKind::Tag::WindowMean:
            v.denominator = static_cast<double>(c.length);
            switch (kind.component) {
                case Component::A: v.numerator = static_cast<double>(c.a_cov); break;
                case Component::B: v.numerator = static_cast<double>(c.b_cov); break;
                case Component::Joint: v.numerator = static_cast<double>(c.joint); break;
            }
            break;
    }
    if (v.denominator <= 0.0) throw DegenerateDenominator(kind.name() + ": zero denominator");
    v.value = v.numerator / v.denominator;
    return v;
}

inline void check_nonempty_window(Pos lo, Pos hi) {
    if (hi <= lo) throw ParameterError("empty window");
}

/// Mean base-pair overlap: sum I_k J_k / window length.
inline StatValue mean_overlap(const TrackPair& p, Pos lo, Pos hi) {
    check_nonempty_window(lo, hi);
    return statistic_from_counts(StatisticKind::mean_overlap(), window_counts(p, AlignedWindow::same(lo, hi)));
}

/// Fraction of A's bases also covered by B.
inline StatValue bp_overlap_fraction(const TrackPair& p, Pos lo, Pos hi) {
    check_nonempty_window(lo, hi);
    return statistic_from_counts(StatisticKind::bp_overlap(), window_counts(p, AlignedWindow::same(lo, hi)));
}

/// Fraction of A instances sharing at least one base with B. Instances that
/// cross the window edge are clipped and counted inside the window.
inline StatValue region_overlap(const TrackPair& p, Pos lo, Pos hi) {
    check_nonempty_window(lo, hi);
    return statistic_from_counts(StatisticKind::region_overlap(), window_counts(p, AlignedWindow::same(lo, hi)));
}

/// Statistic over the concatenation of disjoint windows.
inline StatValue window_mean(const StatisticKind& kind, const TrackPair& p, std::span<const Interval> windows) {
    if (windows.empty()) throw ParameterError("window_mean: empty window list");
    std::vector<Interval> sorted(windows.begin(), windows.end());
    std::sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) { return a.start < b.start; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].start < sorted[i - 1].end) throw ParameterError("window_mean: windows overlap");
    }
    OverlapCounts total;
    for (const auto& w : sorted) total += window_counts(p, AlignedWindow::same(w.start, w.end), kind.needs_instances());
    return statistic_from_counts(kind, total);
}

inline StatValue evaluate(const StatisticKind& kind, const TrackPair& p) {
    const Interval whole{0, p.size()};
    return window_mean(kind, p, std::span<const Interval>(&whole, 1));
}

/// Moments of the numerator X and denominator D of a ratio X / D.
struct RatioMoments {
    double mean_x = 0.0;
    double mean_d = 0.0;
    double var_x = 0.0;
    double var_d = 0.0;
    double cov_xd = 0.0;
};

/// First-order (delta method) variance of X / D:
/// var_x / mu_d^2 + mu_x^2 var_d / mu_d^4 - 2 mu_x cov / mu_d^3.
inline double delta_variance_bp(const RatioMoments& m) {
    if (m.mean_d == 0.0) throw DegenerateDenominator("delta_variance_bp: zero mean denominator");
    const double d2 = m.mean_d * m.mean_d;
    return m.var_x / d2 + m.mean_x * m.mean_x * m.var_d / (d2 * d2) - 2.0 * m.mean_x * m.cov_xd / (d2 * m.mean_d);
}

}  // namespace gsc
