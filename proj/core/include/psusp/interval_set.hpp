#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace psusp {

/// Endpoint tolerance used for floating comparisons of set algebra results.
inline constexpr double kEndpointTol = 1e-12;
/// Intervals closer than this are merged; pieces shorter than this are dropped.
inline constexpr double kMergeGap = 1e-15;

/// Half-open interval [left, right).
struct Interval {
    double left = 0.0;
    double right = 0.0;

    double length() const noexcept { return right - left; }
    bool contains(double x) const noexcept { return left <= x && x < right; }
    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Finite union of disjoint half-open intervals, kept sorted and merged.
///
/// The same representation serves Lebesgue sets on the line and subsets of
/// the integer lattice (an integer k belongs to the set iff k lies in one of
/// the intervals), so `{0, 1}` is stored as `[0,2)`.
class IntervalSet {
public:
    IntervalSet() = default;

    /// Strict constructor: rejects empty/inverted intervals and overlaps.
    static IntervalSet from_disjoint(std::vector<Interval> intervals);
    /// Permissive constructor: overlapping pieces are unioned.
    static IntervalSet from_union(std::vector<Interval> intervals);
    static IntervalSet interval(double left, double right);
    static IntervalSet integers(std::initializer_list<std::int64_t> points);
    static IntervalSet integers(std::span<const std::int64_t> points);
    /// Parses `[0,1) [2,3.5)`; the empty string and `{}` give the empty set.
    static IntervalSet parse(std::string_view text);

    std::span<const Interval> intervals() const noexcept { return intervals_; }
    std::size_t size() const noexcept { return intervals_.size(); }
    bool empty() const noexcept { return intervals_.empty(); }

    double length() const noexcept;
    std::int64_t integer_count() const noexcept;
    bool contains(double x) const noexcept;
    std::optional<Interval> hull() const noexcept;

    IntervalSet unite(const IntervalSet& other) const;
    IntervalSet intersect(const IntervalSet& other) const;
    IntervalSet subtract(const IntervalSet& other) const;
    IntervalSet translated(double shift) const;

    std::string to_string() const;

    friend bool operator==(const IntervalSet&, const IntervalSet&) = default;

private:
    explicit IntervalSet(std::vector<Interval> normalized) : intervals_(std::move(normalized)) {}
    static std::vector<Interval> normalize(std::vector<Interval> intervals);

    std::vector<Interval> intervals_;
};

/// Endpoint-wise comparison after normalization, within `tol`.
bool approx_equal(const IntervalSet& a, const IntervalSet& b, double tol = kEndpointTol);

}  // namespace psusp
