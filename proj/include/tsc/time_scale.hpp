#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "tsc/errors.hpp"

namespace tsc {

/// Closed interval [lo, hi]. Degenerate (lo == hi) means an isolated point.
struct Segment {
    double lo;
    double hi;
    friend bool operator==(const Segment&, const Segment&) = default;
};

/// Classification of a point of a time scale. The maximum is right-dense by
/// the inf-of-empty-set convention (sigma(max) = max), and the minimum is
/// left-dense symmetrically.
struct PointClass {
    bool right_scattered;
    bool left_scattered;
    bool right_dense() const { return !right_scattered; }
    bool left_dense() const { return !left_scattered; }
    friend bool operator==(const PointClass&, const PointClass&) = default;
};

inline std::string to_string(const PointClass& c) {
    std::string s = c.right_scattered ? "right-scattered" : "right-dense";
    s += c.left_scattered ? ",left-scattered" : ",left-dense";
    return s;
}

/// A bounded time scale: a finite union of disjoint closed intervals, kept in
/// a unique canonical form (sorted, merged, hi_i < lo_{i+1} strictly).
///
/// Values are immutable after construction; all member functions are const
/// and safe to call concurrently. Membership and jump operators work on
/// exact segment endpoints -- there is no floating tolerance here.
class TimeScale {
public:
    /// Canonicalize a raw segment list: sort, merge overlapping and touching
    /// segments. Idempotent.
    static TimeScale canonicalize(std::vector<Segment> raw) {
        if (raw.empty()) throw EmptyInput("time scale needs at least one segment");
        for (Segment& s : raw) {
            if (!std::isfinite(s.lo) || !std::isfinite(s.hi))
                throw NonFinite("segment endpoints must be finite");
            if (s.lo > s.hi)
                throw InvalidSegment("segment lo exceeds hi");
            // +0.0 turns a signed zero positive and changes nothing else.
            s.lo += 0.0;
            s.hi += 0.0;
        }
        std::sort(raw.begin(), raw.end(), [](const Segment& a, const Segment& b) {
            return a.lo < b.lo || (a.lo == b.lo && a.hi < b.hi);
        });
        std::vector<Segment> merged;
        merged.push_back(raw.front());
        for (std::size_t i = 1; i < raw.size(); ++i) {
            Segment& cur = merged.back();
            if (raw[i].lo <= cur.hi) {
                cur.hi = std::max(cur.hi, raw[i].hi);
            } else {
                merged.push_back(raw[i]);
            }
        }
        return TimeScale(std::move(merged));
    }

    const std::vector<Segment>& segments() const { return segments_; }
    double min() const { return segments_.front().lo; }
    double max() const { return segments_.back().hi; }

    /// Exact membership test.
    bool contains(double t) const { return segment_index(t) >= 0; }

    bool is_single_point() const {
        return segments_.size() == 1 && segments_[0].lo == segments_[0].hi;
    }

    /// All segments degenerate (a purely discrete scale).
    bool is_discrete() const {
        return std::all_of(segments_.begin(), segments_.end(),
                           [](const Segment& s) { return s.lo == s.hi; });
    }

    std::vector<double> discrete_points() const {
        std::vector<double> pts;
        pts.reserve(segments_.size());
        for (const Segment& s : segments_) pts.push_back(s.lo);
        return pts;
    }

    /// Forward jump sigma(t) = inf{s in T : s > t}, with sigma(max) = max.
    double sigma(double t) const {
        const std::ptrdiff_t i = require_segment(t);
        const Segment& s = segments_[static_cast<std::size_t>(i)];
        if (t < s.hi) return t;
        // t == s.hi: jump to the next segment, or stay at max
        const std::size_t idx = static_cast<std::size_t>(i);
        return idx + 1 < segments_.size() ? segments_[idx + 1].lo : t;
    }

    /// Backward jump rho(t) = sup{s in T : s < t}, with rho(min) = min.
    double rho(double t) const {
        const std::ptrdiff_t i = require_segment(t);
        const Segment& s = segments_[static_cast<std::size_t>(i)];
        if (t > s.lo) return t;
        return i > 0 ? segments_[static_cast<std::size_t>(i - 1)].hi : t;
    }

    /// Forward graininess mu(t) = sigma(t) - t.
    double mu(double t) const { return sigma(t) - t; }

    /// Backward graininess nu(t) = t - rho(t).
    double nu(double t) const { return t - rho(t); }

    PointClass classify(double t) const {
        return PointClass{mu(t) > 0.0, nu(t) > 0.0};
    }

    /// T^kappa: T minus (rho(max), max]. Removes the maximum exactly when it
    /// is left-scattered (an isolated top point); otherwise the removed
    /// half-open interval is empty and T is returned unchanged.
    TimeScale kappa_upper() const {
        if (is_single_point())
            throw ResultEmpty("kappa truncation of a single-point scale");
        const Segment& last = segments_.back();
        if (last.lo < last.hi) return *this; // max left-dense
        std::vector<Segment> segs(segments_.begin(), segments_.end() - 1);
        return TimeScale(std::move(segs));
    }

    /// T_kappa: T minus [min, sigma(min)). Mirror of kappa_upper.
    TimeScale kappa_lower() const {
        if (is_single_point())
            throw ResultEmpty("kappa truncation of a single-point scale");
        const Segment& first = segments_.front();
        if (first.lo < first.hi) return *this; // min right-dense
        std::vector<Segment> segs(segments_.begin() + 1, segments_.end());
        return TimeScale(std::move(segs));
    }

    /// [a,b] intersected with T, as a time scale. a and b need not be in T.
    TimeScale restrict(double a, double b) const {
        if (a > b) throw OrderViolation("restrict: a > b");
        std::vector<Segment> segs;
        for (const Segment& s : segments_) {
            const double lo = std::max(s.lo, a);
            const double hi = std::min(s.hi, b);
            if (lo <= hi) segs.push_back({lo, hi});
        }
        if (segs.empty()) throw ResultEmpty("restriction is empty");
        return TimeScale(std::move(segs));
    }

    /// Evaluation grid: per segment its endpoints plus n_per_segment - 2
    /// equally spaced interior points (isolated points contribute
    /// themselves), deduplicated and sorted.
    std::vector<double> sample_points(int n_per_segment = kDefaultSampleDensity) const {
        if (n_per_segment < 1) throw InvalidArgument("n_per_segment must be >= 1");
        std::vector<double> pts;
        for (const Segment& s : segments_) {
            if (s.lo == s.hi) {
                pts.push_back(s.lo);
                continue;
            }
            pts.push_back(s.lo);
            const int interior = std::max(0, n_per_segment - 2);
            for (int i = 1; i <= interior; ++i) {
                pts.push_back(s.lo + (s.hi - s.lo) * static_cast<double>(i) /
                                         static_cast<double>(interior + 1));
            }
            pts.push_back(s.hi);
        }
        return pts;
    }

    /// Index of the segment containing t, or -1.
    std::ptrdiff_t segment_index(double t) const {
        auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                                   [](double v, const Segment& s) { return v < s.lo; });
        if (it == segments_.begin()) return -1;
        --it;
        return t <= it->hi ? it - segments_.begin() : -1;
    }

    friend bool operator==(const TimeScale&, const TimeScale&) = default;

    static constexpr int kDefaultSampleDensity = 9;

private:
    explicit TimeScale(std::vector<Segment> canonical) : segments_(std::move(canonical)) {}

    std::ptrdiff_t require_segment(double t) const {
        const std::ptrdiff_t i = segment_index(t);
        if (i < 0) throw PointNotInScale("point " + std::to_string(t) + " not in scale");
        return i;
    }

    std::vector<Segment> segments_;
};

/// Convenience factory used throughout the tests.
inline TimeScale make_scale(std::vector<Segment> segs) {
    return TimeScale::canonicalize(std::move(segs));
}

} // namespace tsc
