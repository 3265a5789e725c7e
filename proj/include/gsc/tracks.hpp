#pragma once

// Binary feature tracks stored as sorted, disjoint runs.
//
// All engines work on one linear coordinate [0, n) obtained by concatenating
// the sequences of a CoordinateSpace in declaration order. Runs never cross a
// sequence boundary; touching runs inside one sequence are merged. With the
// virtual padding I_0 = I_{n+1} = 0 the number of runs equals the number of
// falling edges, i.e. the feature instance count.

#include "gsc/errors.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iosfwd>
#include <memory>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

namespace gsc {

using Pos = std::int64_t;

/// Half-open interval [start, end).
struct Interval {
    Pos start = 0;
    Pos end = 0;

    [[nodiscard]] Pos length() const { return end - start; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

class CoordinateSpace {
public:
    CoordinateSpace() = default;

    static CoordinateSpace single(std::string name, Pos length) {
        CoordinateSpace s;
        s.add(std::move(name), length);
        return s;
    }

    void add(std::string name, Pos length) {
        if (length < 1) throw InputError("sequence '" + name + "' has non-positive length");
        if (index_.count(name)) throw InputError("duplicate sequence name '" + name + "'");
        index_.emplace(name, names_.size());
        offsets_.push_back(total_);
        names_.push_back(std::move(name));
        lengths_.push_back(length);
        total_ += length;
    }

    [[nodiscard]] std::size_t size() const { return names_.size(); }
    [[nodiscard]] Pos total_length() const { return total_; }
    [[nodiscard]] const std::string& name(std::size_t i) const { return names_.at(i); }
    [[nodiscard]] Pos length(std::size_t i) const { return lengths_.at(i); }
    [[nodiscard]] Pos offset(std::size_t i) const { return offsets_.at(i); }

    [[nodiscard]] std::optional<std::size_t> find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    /// Index of the sequence containing linear position x.
    [[nodiscard]] std::size_t sequence_at(Pos x) const {
        auto it = std::upper_bound(offsets_.begin(), offsets_.end(), x);
        return static_cast<std::size_t>(std::distance(offsets_.begin(), it)) - 1;
    }

    /// Linear positions of all sequence starts plus the total length:
    /// {0, off_1, ..., n}. These are the natural change-points.
    [[nodiscard]] std::vector<Pos> boundaries() const {
        std::vector<Pos> b = offsets_;
        b.push_back(total_);
        return b;
    }

    friend bool operator==(const CoordinateSpace& a, const CoordinateSpace& b) {
        return a.names_ == b.names_ && a.lengths_ == b.lengths_;
    }

private:
    std::vector<std::string> names_;
    std::vector<Pos> lengths_;
    std::vector<Pos> offsets_;
    std::unordered_map<std::string, std::size_t> index_;
    Pos total_ = 0;
};

using SpacePtr = std::shared_ptr<const CoordinateSpace>;

/// Reads a two-column "name length" file.
inline CoordinateSpace load_genome(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open genome file: " + path);
    CoordinateSpace space;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string name;
        Pos len = 0;
        if (!(ss >> name)) continue;
        if (!(ss >> len)) {
            throw InputError(path + ":" + std::to_string(lineno) + ": expected 'name length'");
        }
        space.add(name, len);
    }
    if (space.size() == 0) throw InputError("genome file has no sequences: " + path);
    return space;
}

class FeatureTrack {
public:
    FeatureTrack() : space_(std::make_shared<CoordinateSpace>()) { cum_.push_back(0); }

    /// Builds a normalized track from intervals in linear coordinates.
    /// Intervals may overlap, touch or arrive unsorted; they must lie in [0, n).
    FeatureTrack(SpacePtr space, std::vector<Interval> intervals) : space_(std::move(space)) {
        const Pos n = space_->total_length();
        for (const auto& iv : intervals) {
            if (iv.start < 0 || iv.end > n || iv.end <= iv.start) {
                throw InputError("interval [" + std::to_string(iv.start) + "," +
                                 std::to_string(iv.end) + ") outside [0," + std::to_string(n) +
                                 ") or empty");
            }
        }
        runs_ = normalize(std::move(intervals), space_->boundaries());
        build_index();
    }

    FeatureTrack(const CoordinateSpace& space, std::vector<Interval> intervals)
        : FeatureTrack(std::make_shared<const CoordinateSpace>(space), std::move(intervals)) {}

    [[nodiscard]] const CoordinateSpace& space() const { return *space_; }
    [[nodiscard]] const SpacePtr& space_ptr() const { return space_; }
    [[nodiscard]] Pos size() const { return space_->total_length(); }
    [[nodiscard]] std::span<const Interval> runs() const { return runs_; }
    [[nodiscard]] std::size_t run_count() const { return runs_.size(); }
    [[nodiscard]] Pos coverage() const { return cum_.back(); }

    /// Covered bases in [0, x).
    [[nodiscard]] Pos covered_before(Pos x) const {
        // number of runs starting before x
        auto it = std::partition_point(runs_.begin(), runs_.end(),
                                       [x](const Interval& r) { return r.start < x; });
        auto k = static_cast<std::size_t>(it - runs_.begin());
        if (k == 0) return 0;
        const Interval& last = runs_[k - 1];
        return cum_[k - 1] + (std::min(x, last.end) - last.start);
    }

    /// Number of covered bases in [lo, hi).
    [[nodiscard]] Pos indicator_sum(Pos lo, Pos hi) const {
        check_window(lo, hi);
        return covered_before(hi) - covered_before(lo);
    }

    /// Index range [first, last) of runs intersecting [lo, hi).
    [[nodiscard]] std::pair<std::size_t, std::size_t> run_range(Pos lo, Pos hi) const {
        auto first = std::partition_point(runs_.begin(), runs_.end(),
                                          [lo](const Interval& r) { return r.end <= lo; });
        auto last = std::partition_point(first, runs_.end(),
                                         [hi](const Interval& r) { return r.start < hi; });
        return {static_cast<std::size_t>(first - runs_.begin()),
                static_cast<std::size_t>(last - runs_.begin())};
    }

    /// Number of maximal runs intersecting [lo, hi) after clipping.
    [[nodiscard]] std::size_t instance_count(Pos lo, Pos hi) const {
        check_window(lo, hi);
        if (lo == hi) return 0;
        auto [f, l] = run_range(lo, hi);
        return l - f;
    }

    /// Maximal runs intersecting [lo, hi), clipped to the window.
    [[nodiscard]] std::vector<Interval> instances(Pos lo, Pos hi) const {
        check_window(lo, hi);
        std::vector<Interval> out;
        if (lo == hi) return out;
        auto [f, l] = run_range(lo, hi);
        out.reserve(l - f);
        for (std::size_t i = f; i < l; ++i) {
            out.push_back({std::max(runs_[i].start, lo), std::min(runs_[i].end, hi)});
        }
        return out;
    }

    /// Calls fn(Interval) for every clipped run in [lo, hi).
    template <typename Fn>
    void for_each_instance(Pos lo, Pos hi, Fn&& fn) const {
        if (lo >= hi) return;
        auto [f, l] = run_range(lo, hi);
        for (std::size_t i = f; i < l; ++i) {
            fn(Interval{std::max(runs_[i].start, lo), std::min(runs_[i].end, hi)});
        }
    }

    /// Dense 0/1 expansion; test and small-input use only.
    [[nodiscard]] std::vector<std::uint8_t> to_dense() const {
        std::vector<std::uint8_t> x(static_cast<std::size_t>(size()), 0);
        for (const auto& r : runs_) std::fill(x.begin() + r.start, x.begin() + r.end, 1);
        return x;
    }

    static FeatureTrack from_dense(SpacePtr space, std::span<const std::uint8_t> x) {
        std::vector<Interval> iv;
        Pos k = 0;
        const Pos n = static_cast<Pos>(x.size());
        while (k < n) {
            if (!x[k]) {
                ++k;
                continue;
            }
            Pos s = k;
            while (k < n && x[k]) ++k;
            iv.push_back({s, k});
        }
        return FeatureTrack(std::move(space), std::move(iv));
    }

    friend bool operator==(const FeatureTrack& a, const FeatureTrack& b) {
        return *a.space_ == *b.space_ && a.runs_ == b.runs_;
    }

    /// Sort, merge overlapping or touching intervals, then split at the given
    /// boundaries so no run spans two sequences.
    static std::vector<Interval> normalize(std::vector<Interval> iv, std::span<const Pos> boundaries) {
        std::sort(iv.begin(), iv.end(),
                  [](const Interval& a, const Interval& b) { return a.start < b.start; });
        std::vector<Interval> merged;
        merged.reserve(iv.size());
        for (const auto& r : iv) {
            if (!merged.empty() && r.start <= merged.back().end) {
                merged.back().end = std::max(merged.back().end, r.end);
            } else {
                merged.push_back(r);
            }
        }
        if (boundaries.size() <= 2) return merged;
        std::vector<Interval> out;
        out.reserve(merged.size());
        for (auto r : merged) {
            auto b = std::upper_bound(boundaries.begin(), boundaries.end(), r.start);
            while (b != boundaries.end() && *b < r.end) {
                out.push_back({r.start, *b});
                r.start = *b;
                ++b;
            }
            out.push_back(r);
        }
        return out;
    }

private:
    void build_index() {
        cum_.assign(runs_.size() + 1, 0);
        for (std::size_t i = 0; i < runs_.size(); ++i) cum_[i + 1] = cum_[i] + runs_[i].length();
    }

    void check_window(Pos lo, Pos hi) const {
        if (lo < 0 || hi < lo || hi > size()) {
            throw std::out_of_range("window [" + std::to_string(lo) + "," + std::to_string(hi) +
                                    ") outside [0," + std::to_string(size()) + ")");
        }
    }

    SpacePtr space_;
    std::vector<Interval> runs_;
    std::vector<Pos> cum_;
};

/// Positions covered by both tracks (the product I_k J_k).
inline FeatureTrack intersection(const FeatureTrack& a, const FeatureTrack& b) {
    std::vector<Interval> out;
    auto ra = a.runs();
    auto rb = b.runs();
    std::size_t i = 0, j = 0;
    while (i < ra.size() && j < rb.size()) {
        const Pos s = std::max(ra[i].start, rb[j].start);
        const Pos e = std::min(ra[i].end, rb[j].end);
        if (s < e) out.push_back({s, e});
        if (ra[i].end < rb[j].end) ++i; else ++j;
    }
    return FeatureTrack(a.space_ptr(), std::move(out));
}

/// Positions covered by either track.
inline FeatureTrack track_union(const FeatureTrack& a, const FeatureTrack& b) {
    std::vector<Interval> all(a.runs().begin(), a.runs().end());
    all.insert(all.end(), b.runs().begin(), b.runs().end());
    return FeatureTrack(a.space_ptr(), std::move(all));
}

/// Two tracks over one coordinate space: the joint process (I_k, J_k).
class TrackPair {
public:
    TrackPair(FeatureTrack a, FeatureTrack b) : a_(std::move(a)), b_(std::move(b)) {
        if (!(a_.space() == b_.space())) throw InputError("tracks are defined on different coordinate spaces");
    }

    [[nodiscard]] const FeatureTrack& a() const { return a_; }
    [[nodiscard]] const FeatureTrack& b() const { return b_; }
    [[nodiscard]] Pos size() const { return a_.size(); }
    [[nodiscard]] const CoordinateSpace& space() const { return a_.space(); }

private:
    FeatureTrack a_;
    FeatureTrack b_;
};

struct BedLoad {
    FeatureTrack track;
    std::size_t clipped = 0;  // intervals shortened or dropped at sequence ends
};

/// Parses BED-like text: whitespace separated, at least three columns
/// (name, start, end), 0-based half-open. Header lines starting with '#',
/// "track" or "browser" are skipped.
inline BedLoad parse_bed(std::istream& in, const SpacePtr& space, const std::string& source = "<stream>") {
    std::vector<Interval> iv;
    std::size_t clipped = 0;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#' || line.rfind("track", 0) == 0 || line.rfind("browser", 0) == 0) {
            continue;
        }
        std::istringstream ss(line);
        std::string name;
        Pos start = 0, end = 0;
        if (!(ss >> name)) continue;
        if (!(ss >> start >> end)) {
            throw InputError(source + ":" + std::to_string(lineno) + ": expected 'name start end'");
        }
        auto idx = space->find(name);
        if (!idx) throw InputError(source + ":" + std::to_string(lineno) + ": unknown sequence name '" + name + "'");
        if (end <= start) {
            throw InputError(source + ":" + std::to_string(lineno) + ": end " + std::to_string(end) +
                             " <= start " + std::to_string(start));
        }
        if (start < 0) throw InputError(source + ":" + std::to_string(lineno) + ": negative start");
        const Pos len = space->length(*idx);
        if (end > len) {
            ++clipped;
            end = len;
            if (start >= end) continue;
        }
        const Pos off = space->offset(*idx);
        iv.push_back({off + start, off + end});
    }
    return {FeatureTrack(space, std::move(iv)), clipped};
}

inline BedLoad load_bed(const std::string& path, const SpacePtr& space) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open BED file: " + path);
    return parse_bed(in, space, path);
}

/// Writes runs in per-sequence coordinates, one per line.
inline void write_bed(std::ostream& out, const FeatureTrack& t) {
    const auto& space = t.space();
    for (const auto& r : t.runs()) {
        std::size_t s = space.sequence_at(r.start);
        const Pos off = space.offset(s);
        out << space.name(s) << '\t' << (r.start - off) << '\t' << (r.end - off) << '\n';
    }
}

}  // namespace gsc
