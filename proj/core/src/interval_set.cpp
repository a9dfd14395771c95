#include "psusp/interval_set.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include <fmt/format.h>

#include "psusp/errors.hpp"

namespace psusp {

std::vector<Interval> IntervalSet::normalize(std::vector<Interval> intervals) {
    std::erase_if(intervals, [](const Interval& iv) { return !(iv.length() >= kMergeGap); });
    std::sort(intervals.begin(), intervals.end(),
              [](const Interval& a, const Interval& b) { return a.left < b.left; });
    std::vector<Interval> out;
    out.reserve(intervals.size());
    for (const auto& iv : intervals) {
        if (!out.empty() && iv.left <= out.back().right + kMergeGap) {
            out.back().right = std::max(out.back().right, iv.right);
        } else {
            out.push_back(iv);
        }
    }
    return out;
}

IntervalSet IntervalSet::from_disjoint(std::vector<Interval> intervals) {
    for (const auto& iv : intervals) {
        if (!std::isfinite(iv.left) || !std::isfinite(iv.right)) {
            throw Error(Errc::InvalidArgument, fmt::format("non-finite endpoint in [{},{})", iv.left, iv.right));
        }
        if (!(iv.right > iv.left)) {
            throw Error(Errc::InvalidArgument, fmt::format("interval [{},{}) has right <= left", iv.left, iv.right));
        }
    }
    auto sorted = intervals;
    std::sort(sorted.begin(), sorted.end(), [](const Interval& a, const Interval& b) { return a.left < b.left; });
    for (std::size_t i = 1; i < sorted.size(); ++i) {
        if (sorted[i].left < sorted[i - 1].right) {
            throw Error(Errc::InvalidArgument,
                        fmt::format("intervals [{},{}) and [{},{}) overlap", sorted[i - 1].left,
                                    sorted[i - 1].right, sorted[i].left, sorted[i].right));
        }
    }
    return IntervalSet(normalize(std::move(sorted)));
}

IntervalSet IntervalSet::from_union(std::vector<Interval> intervals) {
    return IntervalSet(normalize(std::move(intervals)));
}

IntervalSet IntervalSet::interval(double left, double right) {
    return from_disjoint({Interval{left, right}});
}

IntervalSet IntervalSet::integers(std::initializer_list<std::int64_t> points) {
    return integers(std::span<const std::int64_t>(points.begin(), points.size()));
}

IntervalSet IntervalSet::integers(std::span<const std::int64_t> points) {
    std::vector<Interval> ivs;
    ivs.reserve(points.size());
    for (auto p : points) {
        ivs.push_back({static_cast<double>(p), static_cast<double>(p) + 1.0});
    }
    return from_union(std::move(ivs));
}

namespace {

double parse_number(std::string_view s, std::string_view context) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    double value = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || s.empty()) {
        throw Error(Errc::ParseError, fmt::format("bad number '{}' in '{}'", s, context));
    }
    return value;
}

}  // namespace

IntervalSet IntervalSet::parse(std::string_view text) {
    std::vector<Interval> ivs;
    std::size_t pos = 0;
    auto skip_ws = [&] {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    };
    skip_ws();
    if (text.substr(pos) == "{}") return {};
    while (true) {
        skip_ws();
        if (pos >= text.size()) break;
        if (text[pos] != '[') {
            throw Error(Errc::ParseError, fmt::format("expected '[' at offset {} in '{}'", pos, text));
        }
        const auto close = text.find(')', pos);
        if (close == std::string_view::npos) {
            throw Error(Errc::ParseError, fmt::format("unterminated interval in '{}'", text));
        }
        const auto body = text.substr(pos + 1, close - pos - 1);
        const auto comma = body.find(',');
        if (comma == std::string_view::npos) {
            throw Error(Errc::ParseError, fmt::format("missing ',' in interval '[{})'", body));
        }
        const double l = parse_number(body.substr(0, comma), text);
        const double r = parse_number(body.substr(comma + 1), text);
        if (!(r > l)) {
            throw Error(Errc::ParseError, fmt::format("malformed interval [{}): right <= left", body));
        }
        ivs.push_back({l, r});
        pos = close + 1;
    }
    try {
        return from_disjoint(std::move(ivs));
    } catch (const Error& e) {
        throw Error(Errc::ParseError, e.what());
    }
}

double IntervalSet::length() const noexcept {
    double total = 0.0;
    for (const auto& iv : intervals_) total += iv.length();
    return total;
}

std::int64_t IntervalSet::integer_count() const noexcept {
    std::int64_t total = 0;
    for (const auto& iv : intervals_) {
        total += static_cast<std::int64_t>(std::ceil(iv.right) - std::ceil(iv.left));
    }
    return total;
}

bool IntervalSet::contains(double x) const noexcept {
    auto it = std::upper_bound(intervals_.begin(), intervals_.end(), x,
                               [](double v, const Interval& iv) { return v < iv.left; });
    if (it == intervals_.begin()) return false;
    return std::prev(it)->contains(x);
}

std::optional<Interval> IntervalSet::hull() const noexcept {
    if (intervals_.empty()) return std::nullopt;
    return Interval{intervals_.front().left, intervals_.back().right};
}

IntervalSet IntervalSet::unite(const IntervalSet& other) const {
    std::vector<Interval> all(intervals_);
    all.insert(all.end(), other.intervals_.begin(), other.intervals_.end());
    return IntervalSet(normalize(std::move(all)));
}

IntervalSet IntervalSet::intersect(const IntervalSet& other) const {
    std::vector<Interval> out;
    std::size_t i = 0, j = 0;
    const auto& a = intervals_;
    const auto& b = other.intervals_;
    while (i < a.size() && j < b.size()) {
        const double l = std::max(a[i].left, b[j].left);
        const double r = std::min(a[i].right, b[j].right);
        if (r > l) out.push_back({l, r});
        if (a[i].right < b[j].right) {
            ++i;
        } else {
            ++j;
        }
    }
    return IntervalSet(normalize(std::move(out)));
}

IntervalSet IntervalSet::subtract(const IntervalSet& other) const {
    std::vector<Interval> out;
    std::size_t j = 0;
    const auto& b = other.intervals_;
    for (const auto& iv : intervals_) {
        double cur = iv.left;
        while (j < b.size() && b[j].right <= cur) ++j;
        std::size_t k = j;
        while (k < b.size() && b[k].left < iv.right) {
            if (b[k].left > cur) out.push_back({cur, b[k].left});
            cur = std::max(cur, b[k].right);
            if (cur >= iv.right) break;
            ++k;
        }
        if (cur < iv.right) out.push_back({cur, iv.right});
    }
    return IntervalSet(normalize(std::move(out)));
}

IntervalSet IntervalSet::translated(double shift) const {
    std::vector<Interval> out(intervals_);
    for (auto& iv : out) {
        iv.left += shift;
        iv.right += shift;
    }
    return IntervalSet(normalize(std::move(out)));
}

std::string IntervalSet::to_string() const {
    std::string out;
    for (const auto& iv : intervals_) {
        if (!out.empty()) out += ' ';
        out += fmt::format("[{},{})", iv.left, iv.right);
    }
    return out.empty() ? std::string("{}") : out;
}

bool approx_equal(const IntervalSet& a, const IntervalSet& b, double tol) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a.intervals()[i].left - b.intervals()[i].left) > tol) return false;
        if (std::abs(a.intervals()[i].right - b.intervals()[i].right) > tol) return false;
    }
    return true;
}

}  // namespace psusp
