#pragma once

// Dyadic change-point segmentation of 0/1 coverage series.
//
// A region [lo, hi) is split at the maximizer of the generalized likelihood
// ratio profile
//
//   M(l) = (l/N) (mean[lo, lo+l) - mean)^2 + ((N-l)/N) (mean[lo+l, hi) - mean)^2
//        = D(l)^2 / (l (N - l)),   D(l) = S(l) - l * S(N) / N,
//
// where S(l) is the covered-base count of the first l positions. On a
// run-length track S is piecewise linear, so the argmax over integer l is
// attained at a run boundary, a range end, or next to the single interior
// critical point of the piece. The search is O(#runs in the region).

#include "gsc/errors.hpp"
#include "gsc/summary.hpp"
#include "gsc/tracks.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace gsc {

enum class SegmentationSource { Manual, Dyadic, Truth };

inline const char* to_string(SegmentationSource s) {
    switch (s) {
        case SegmentationSource::Manual: return "manual";
        case SegmentationSource::Dyadic: return "dyadic";
        case SegmentationSource::Truth: return "true";
    }
    return "manual";
}

/// Ordered change-points 0 = t_0 < t_1 < ... < t_m = n.
class Segmentation {
public:
    Segmentation() = default;

    Segmentation(Pos n, std::vector<Pos> cuts, SegmentationSource source = SegmentationSource::Manual)
        : n_(n), cuts_(std::move(cuts)), source_(source) {
        if (n_ < 1) throw ParameterError("segmentation length must be positive");
        if (cuts_.size() < 2 || cuts_.front() != 0 || cuts_.back() != n_) {
            throw ParameterError("segmentation must start at 0 and end at n");
        }
        for (std::size_t i = 1; i < cuts_.size(); ++i) {
            if (cuts_[i] <= cuts_[i - 1]) throw ParameterError("segmentation cuts must be strictly increasing");
        }
    }

    static Segmentation trivial(Pos n) { return Segmentation(n, {0, n}); }

    /// Segmentation whose cuts are the sequence boundaries of `space`.
    static Segmentation natural(const CoordinateSpace& space) {
        return Segmentation(space.total_length(), space.boundaries());
    }

    [[nodiscard]] Pos size() const { return n_; }
    [[nodiscard]] const std::vector<Pos>& cuts() const { return cuts_; }
    [[nodiscard]] std::size_t region_count() const { return cuts_.size() - 1; }
    [[nodiscard]] Interval region(std::size_t i) const { return {cuts_.at(i), cuts_.at(i + 1)}; }
    [[nodiscard]] SegmentationSource source() const { return source_; }
    void set_source(SegmentationSource s) { source_ = s; }

    [[nodiscard]] std::vector<Interval> regions() const {
        std::vector<Interval> r;
        r.reserve(region_count());
        for (std::size_t i = 0; i < region_count(); ++i) r.push_back(region(i));
        return r;
    }

    [[nodiscard]] Pos shortest_region() const {
        Pos m = n_;
        for (std::size_t i = 0; i < region_count(); ++i) m = std::min(m, region(i).length());
        return m;
    }

    friend bool operator==(const Segmentation& a, const Segmentation& b) {
        return a.n_ == b.n_ && a.cuts_ == b.cuts_;
    }

private:
    Pos n_ = 0;
    std::vector<Pos> cuts_;
    SegmentationSource source_ = SegmentationSource::Manual;
};

/// Which per-position series drives the segmentation.
enum class SegmentSignal { A, B, Joint, Union, Both };

inline SegmentSignal parse_signal(const std::string& s) {
    if (s == "a") return SegmentSignal::A;
    if (s == "b") return SegmentSignal::B;
    if (s == "joint") return SegmentSignal::Joint;
    if (s == "union") return SegmentSignal::Union;
    if (s == "both") return SegmentSignal::Both;
    throw ParameterError("unknown segmentation signal '" + s + "' (expected a, b, joint, union or both)");
}

struct SegmentationParams {
    Pos min_length = 1;                   // L_s
    double threshold = 0.0;               // b
    std::optional<Pos> block_length_hint; // ballpark L_b for the V normalization
    SegmentSignal signal = SegmentSignal::Both;
};

/// Stopping threshold from a family-wise error rate: the chi-square(1)
/// upper quantile at alpha / tests (Bonferroni).
inline double threshold_from_alpha(double alpha, std::size_t tests) {
    if (!(alpha > 0.0 && alpha < 1.0) || tests == 0) throw ParameterError("threshold_from_alpha: bad arguments");
    return chi2_1_upper_quantile(alpha / static_cast<double>(tests));
}

class GlrProfile {
public:
    GlrProfile(const FeatureTrack& x, Pos lo, Pos hi) : x_(&x), lo_(lo), hi_(hi) {
        if (hi - lo < 2) throw ParameterError("GLR profile needs at least two positions");
        total_ = x.indicator_sum(lo, hi);
        base_ = x.covered_before(lo);
    }

    [[nodiscard]] Pos length() const { return hi_ - lo_; }

    /// M at a cut leaving `left` positions in the left part, 0 < left < N.
    [[nodiscard]] double at(Pos left) const {
        const Pos n = length();
        if (left <= 0 || left >= n) throw std::out_of_range("GLR profile: cut outside the region");
        const Pos s = x_->covered_before(lo_ + left) - base_;
        return value(left, s);
    }

    struct Max {
        Pos left = 0;        // cut position relative to lo
        double value = 0.0;
    };

    /// Maximum of M over left in [min_left, max_left]; ties go to the smallest left.
    [[nodiscard]] Max argmax(Pos min_left, Pos max_left) const {
        const Pos n = length();
        min_left = std::max<Pos>(min_left, 1);
        max_left = std::min<Pos>(max_left, n - 1);
        if (min_left > max_left) throw ParameterError("GLR profile: empty search range");

        // Breakpoints of S inside the range, relative to lo.
        std::vector<Pos> pts{min_left, max_left};
        auto [f, l] = x_->run_range(lo_, hi_);
        auto runs = x_->runs();
        for (std::size_t i = f; i < l; ++i) {
            for (Pos p : {runs[i].start - lo_, runs[i].end - lo_}) {
                if (p > min_left && p < max_left) pts.push_back(p);
            }
        }
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

        std::vector<Pos> cand;
        cand.reserve(pts.size() * 3);
        const long double mu = static_cast<long double>(total_) / static_cast<long double>(n);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            cand.push_back(pts[i]);
            if (i + 1 == pts.size()) break;
            const Pos p0 = pts[i];
            const Pos p1 = pts[i + 1];
            if (p1 - p0 < 2) continue;
            // slope of S on (p0, p1): 1 inside a run, 0 in a gap
            const Pos s0 = x_->covered_before(lo_ + p0) - base_;
            const Pos s1 = x_->covered_before(lo_ + p1) - base_;
            const long double slope = static_cast<long double>(s1 - s0) / static_cast<long double>(p1 - p0);
            const long double c = slope - mu;
            const long double a = (static_cast<long double>(s0) - mu * p0) - c * p0;
            const long double den = c * n + 2 * a;
            if (den == 0) continue;
            const long double js = a * n / den;
            if (js > p0 && js < p1) {
                const auto fl = static_cast<Pos>(std::floor(js));
                if (fl > p0) cand.push_back(fl);
                if (fl + 1 < p1) cand.push_back(fl + 1);
            }
        }
        std::sort(cand.begin(), cand.end());
        cand.erase(std::unique(cand.begin(), cand.end()), cand.end());

        Max best{cand.front(), -1.0};
        for (Pos c : cand) {
            const double v = at(c);
            if (v > best.value) best = {c, v};
        }
        return best;
    }

private:
    [[nodiscard]] double value(Pos left, Pos s) const {
        const Pos n = length();
        // D * n = s * n - left * total, exact in 128-bit
        const __int128 e = static_cast<__int128>(s) * n - static_cast<__int128>(left) * total_;
        const long double el = static_cast<long double>(e);
        const long double nn = static_cast<long double>(n);
        return static_cast<double>(el * el / (nn * nn * static_cast<long double>(left) * static_cast<long double>(n - left)));
    }

    const FeatureTrack* x_;
    Pos lo_;
    Pos hi_;
    Pos total_ = 0;
    Pos base_ = 0;
};

inline GlrProfile glr_profile(const FeatureTrack& x, Pos lo, Pos hi) { return GlrProfile(x, lo, hi); }

namespace detail {

/// Sum over all full windows of length w in [lo, hi) of
/// (window mean - mean of [lo, hi))^2.
inline double sliding_squared_deviation(const FeatureTrack& x, Pos lo, Pos hi, Pos w) {
    const Pos len = hi - lo;
    const double seg_mean = static_cast<double>(x.indicator_sum(lo, hi)) / static_cast<double>(len);
    auto runs = x.runs();
    auto [first, last] = x.run_range(lo, hi);
    // cursor returning x_k for non-decreasing k
    struct Cursor {
        std::span<const Interval> runs;
        std::size_t i;
        std::size_t end;
        int at(Pos k) {
            while (i < end && runs[i].end <= k) ++i;
            return (i < end && runs[i].start <= k) ? 1 : 0;
        }
    };
    Cursor lead{runs, first, last};
    Cursor trail{runs, first, last};
    Pos wsum = x.indicator_sum(lo, lo + w);
    const double inv_w = 1.0 / static_cast<double>(w);
    double acc = 0.0;
    for (Pos s = lo;; ++s) {
        const double d = static_cast<double>(wsum) * inv_w - seg_mean;
        acc += d * d;
        if (s + w >= hi) break;
        wsum += lead.at(s + w) - trail.at(s);
    }
    return acc;
}

}  // namespace detail

/// Block-subsampling variance of the two-part segmentation {lo, lo+t, hi}.
/// Inside a region of length N with block length L, each side of length m
/// uses windows of length ceil(m L / N); every full window is enumerated.
class VarianceProfile {
public:
    VarianceProfile(const FeatureTrack& x, Pos lo, Pos hi, Pos block_length)
        : x_(&x), lo_(lo), hi_(hi), block_(block_length) {
        if (hi - lo < 2) throw ParameterError("variance profile needs at least two positions");
        if (block_length < 1) throw ParameterError("variance profile: block length must be positive");
    }

    [[nodiscard]] Pos window_for(Pos side) const {
        const Pos n = hi_ - lo_;
        return std::max<Pos>(1, (side * block_ + n - 1) / n);
    }

    [[nodiscard]] double at(Pos left) const {
        const Pos n = hi_ - lo_;
        if (left <= 0 || left >= n) throw std::out_of_range("variance profile: cut outside the region");
        const Pos right = n - left;
        const Pos w1 = window_for(left);
        const Pos w2 = window_for(right);
        if (w1 > left) throw ParameterError("variance profile: block longer than left sub-segment");
        if (w2 > right) throw ParameterError("variance profile: block longer than right sub-segment");
        const double nn = static_cast<double>(n) * static_cast<double>(n);
        return static_cast<double>(left) / nn * detail::sliding_squared_deviation(*x_, lo_, lo_ + left, w1) +
               static_cast<double>(right) / nn * detail::sliding_squared_deviation(*x_, lo_ + left, hi_, w2);
    }

private:
    const FeatureTrack* x_;
    Pos lo_;
    Pos hi_;
    Pos block_;
};

inline VarianceProfile subsample_variance_profile(const FeatureTrack& x, Pos lo, Pos hi, Pos block_length) {
    return VarianceProfile(x, lo, hi, block_length);
}

/// Greedy binary segmentation. `initial` supplies mandatory cuts (sequence
/// boundaries); they are kept and exempt from the minimum length.
///
/// Each region longer than 2 L_s proposes its GLR argmax restricted to cuts
/// leaving more than L_s on both sides. A proposal passes when
/// N B / sqrt(V lambda) > b with lambda = L N / n, V the variance profile at
/// the proposal with region block length lambda. Without a block-length hint
/// the statistic is N B. The passing proposal with the largest B is applied;
/// the loop ends when no region passes.
inline Segmentation dyadic_segment(const FeatureTrack& x, const SegmentationParams& params,
                                   std::optional<Segmentation> initial = std::nullopt) {
    const Pos n = x.size();
    if (params.min_length < 1 || params.min_length >= n) {
        throw ParameterError("minimum region length must satisfy 0 < L_s < n");
    }
    if (params.threshold < 0.0) throw ParameterError("threshold b must be non-negative");
    Segmentation start = initial ? *initial : Segmentation::trivial(n);
    if (start.size() != n) throw ParameterError("initial segmentation length mismatch");

    struct Region {
        Pos lo, hi;
        bool pass = false;
        Pos cut = 0;
        double b = 0.0;
    };
    auto propose = [&](Region& r) {
        const Pos len = r.hi - r.lo;
        r.pass = false;
        if (len - 2 * params.min_length < 2) return;  // no cut leaves > L_s on both sides
        GlrProfile m(x, r.lo, r.hi);
        auto best = m.argmax(params.min_length + 1, len - params.min_length - 1);
        r.cut = r.lo + best.left;
        r.b = best.value;
        double z = static_cast<double>(len) * best.value;
        if (params.block_length_hint) {
            const double lambda = static_cast<double>(*params.block_length_hint) * static_cast<double>(len) /
                                  static_cast<double>(n);
            const Pos region_block = std::max<Pos>(1, static_cast<Pos>(std::ceil(lambda)));
            double v;
            try {
                v = VarianceProfile(x, r.lo, r.hi, region_block).at(best.left);
            } catch (const ParameterError&) {
                v = std::numeric_limits<double>::infinity();
            }
            z = v > 0.0 ? z / std::sqrt(v * lambda) : (z > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        }
        r.pass = best.value > 0.0 && z > params.threshold;
    };

    std::vector<Region> regions;
    for (const auto& iv : start.regions()) {
        regions.push_back({iv.start, iv.end});
        propose(regions.back());
    }
    for (;;) {
        std::size_t pick = regions.size();
        for (std::size_t i = 0; i < regions.size(); ++i) {
            if (regions[i].pass && (pick == regions.size() || regions[i].b > regions[pick].b)) pick = i;
        }
        if (pick == regions.size()) break;
        Region left{regions[pick].lo, regions[pick].cut};
        Region right{regions[pick].cut, regions[pick].hi};
        propose(left);
        propose(right);
        regions[pick] = left;
        regions.insert(regions.begin() + static_cast<std::ptrdiff_t>(pick) + 1, right);
    }
    std::vector<Pos> cuts{0};
    for (const auto& r : regions) cuts.push_back(r.hi);
    return Segmentation(n, std::move(cuts), SegmentationSource::Dyadic);
}

struct MergedSegmentation {
    Segmentation segmentation;
    std::vector<Interval> flagged;  // regions shorter than the minimum length
    Pos flagged_length = 0;
};

/// Union of the change-points of two segmentations of the same length.
/// Short regions created by the union are flagged, not removed.
inline MergedSegmentation merge_segmentations(const Segmentation& s1, const Segmentation& s2, Pos min_length = 0) {
    if (s1.size() != s2.size()) throw ParameterError("cannot merge segmentations of different lengths");
    std::set<Pos> u(s1.cuts().begin(), s1.cuts().end());
    u.insert(s2.cuts().begin(), s2.cuts().end());
    const auto source = s1.source() == s2.source() ? s1.source() : SegmentationSource::Manual;
    MergedSegmentation out{Segmentation(s1.size(), std::vector<Pos>(u.begin(), u.end()), source), {}, 0};
    for (const auto& r : out.segmentation.regions()) {
        if (r.length() < min_length) {
            out.flagged.push_back(r);
            out.flagged_length += r.length();
        }
    }
    return out;
}

/// Segments a track pair. Sequence boundaries are always cuts. With
/// SegmentSignal::Both the A and B indicators are segmented separately and
/// their change-points united.
inline MergedSegmentation segment_pair(const TrackPair& p, const SegmentationParams& params) {
    const auto natural = Segmentation::natural(p.space());
    auto run = [&](const FeatureTrack& x) { return dyadic_segment(x, params, natural); };
    switch (params.signal) {
        case SegmentSignal::A: return merge_segmentations(run(p.a()), natural, params.min_length);
        case SegmentSignal::B: return merge_segmentations(run(p.b()), natural, params.min_length);
        case SegmentSignal::Joint:
            return merge_segmentations(run(intersection(p.a(), p.b())), natural, params.min_length);
        case SegmentSignal::Union:
            return merge_segmentations(run(track_union(p.a(), p.b())), natural, params.min_length);
        case SegmentSignal::Both: break;
    }
    auto merged = merge_segmentations(run(p.a()), run(p.b()), params.min_length);
    merged.segmentation.set_source(SegmentationSource::Dyadic);
    return merged;
}

/// Two-column text: one "start<TAB>end" line per region, linear coordinates.
inline void write_segmentation(std::ostream& out, const Segmentation& s) {
    out << "# source: " << to_string(s.source()) << "\n";
    for (const auto& r : s.regions()) out << r.start << '\t' << r.end << '\n';
}

inline Segmentation read_segmentation(std::istream& in, const std::string& source_name = "<stream>") {
    std::vector<Pos> cuts;
    SegmentationSource src = SegmentationSource::Manual;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (line[0] == '#') {
            if (line.find("dyadic") != std::string::npos) src = SegmentationSource::Dyadic;
            if (line.find("true") != std::string::npos) src = SegmentationSource::Truth;
            continue;
        }
        std::istringstream ss(line);
        Pos a = 0, b = 0;
        if (!(ss >> a >> b)) throw InputError(source_name + ":" + std::to_string(lineno) + ": expected 'start end'");
        if (cuts.empty()) {
            cuts.push_back(a);
        } else if (cuts.back() != a) {
            throw InputError(source_name + ":" + std::to_string(lineno) + ": regions are not contiguous");
        }
        cuts.push_back(b);
    }
    if (cuts.size() < 2) throw InputError(source_name + ": empty segmentation");
    const Pos n = cuts.back();
    try {
        return Segmentation(n, std::move(cuts), src);
    } catch (const ParameterError& e) {
        throw InputError(source_name + ": " + e.what());
    }
}

inline Segmentation load_segmentation(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open segmentation file: " + path);
    return read_segmentation(in, path);
}

}  // namespace gsc
