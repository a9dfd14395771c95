#include "psusp/base_system.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "psusp/errors.hpp"

namespace psusp {

namespace {

constexpr std::int64_t kBooleCap = 12;
constexpr std::int64_t kGeneralCap = 1'000'000;

// Inverse branches of y = x - 1/x. Written so neither branch cancels.
double boole_root_pos(double y) {
    const double s = std::sqrt(y * y + 4.0);
    return y >= 0.0 ? 0.5 * (y + s) : 2.0 / (s - y);
}

double boole_root_neg(double y) {
    const double s = std::sqrt(y * y + 4.0);
    return y <= 0.0 ? 0.5 * (y - s) : -2.0 / (s + y);
}

IntervalSet boole_preimage_once(const IntervalSet& set) {
    std::vector<Interval> out;
    out.reserve(2 * set.size());
    for (const auto& iv : set.intervals()) {
        out.push_back({boole_root_neg(iv.left), boole_root_neg(iv.right)});
        out.push_back({boole_root_pos(iv.left), boole_root_pos(iv.right)});
    }
    return IntervalSet::from_union(std::move(out));
}

// Moves each piece of `set` from level j to level j + shift.
IntervalSet tower_shift(const TowerState& tower, const IntervalSet& set, std::int64_t shift) {
    const double outside = set.subtract(tower.region).length();
    if (outside > kEndpointTol) {
        throw Error(Errc::DomainEscape,
                    fmt::format("set has measure {} outside the constructed tower", outside));
    }
    std::vector<Interval> out;
    for (const auto& iv : set.intervals()) {
        for (auto j : tower.levels_meeting(iv.left, iv.right)) {
            const auto& level = tower.levels[static_cast<std::size_t>(j)];
            const double l = std::max(iv.left, level.left);
            const double r = std::min(iv.right, level.right);
            if (!(r > l)) continue;
            const std::int64_t target = j + shift;
            if (target < 0 || target >= tower.height) {
                if (r - l <= kEndpointTol) continue;
                throw Error(Errc::DomainEscape,
                            fmt::format("orbit of level {} by {} leaves a tower of height {}", j, shift,
                                        tower.height));
            }
            const double offset = tower.levels[static_cast<std::size_t>(target)].left - level.left;
            out.push_back({l + offset, r + offset});
        }
    }
    return IntervalSet::from_union(std::move(out));
}

}  // namespace

void RankOneSpec::validate() const {
    if (!(base_width > 0.0) || !std::isfinite(base_width)) {
        throw Error(Errc::InvalidArgument, "rank-one base_width must be positive");
    }
    if (spacers.size() != cuts.size()) {
        throw Error(Errc::InvalidArgument,
                    fmt::format("rank-one spec has {} cut stages but {} spacer rows", cuts.size(), spacers.size()));
    }
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        if (cuts[k] < 2) {
            throw Error(Errc::InvalidArgument, fmt::format("rank-one stage {} has r = {} < 2", k, cuts[k]));
        }
        if (spacers[k].size() != static_cast<std::size_t>(cuts[k])) {
            throw Error(Errc::InvalidArgument,
                        fmt::format("rank-one stage {} needs {} spacer counts, got {}", k, cuts[k],
                                    spacers[k].size()));
        }
        for (int s : spacers[k]) {
            if (s < 0) throw Error(Errc::InvalidArgument, fmt::format("negative spacer count at stage {}", k));
        }
    }
}

std::vector<std::int64_t> RankOneSpec::heights() const {
    std::vector<std::int64_t> h{1};
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        const auto extra = std::accumulate(spacers[k].begin(), spacers[k].end(), std::int64_t{0});
        h.push_back(cuts[k] * h.back() + extra);
    }
    return h;
}

std::int64_t TowerState::level_of(double x) const noexcept {
    auto it = std::upper_bound(order_by_position.begin(), order_by_position.end(), x,
                               [this](double v, std::int64_t j) { return v < levels[static_cast<std::size_t>(j)].left; });
    if (it == order_by_position.begin()) return -1;
    const auto j = *std::prev(it);
    return levels[static_cast<std::size_t>(j)].contains(x) ? j : -1;
}

std::vector<std::int64_t> TowerState::levels_meeting(double left, double right) const {
    std::vector<std::int64_t> out;
    auto it = std::upper_bound(order_by_position.begin(), order_by_position.end(), left,
                               [this](double v, std::int64_t j) { return v < levels[static_cast<std::size_t>(j)].left; });
    if (it != order_by_position.begin()) --it;
    for (; it != order_by_position.end(); ++it) {
        const auto& lv = levels[static_cast<std::size_t>(*it)];
        if (lv.left >= right) break;
        if (lv.right > left) out.push_back(*it);
    }
    return out;
}

TowerState build_tower(const RankOneSpec& spec, std::int64_t max_levels) {
    spec.validate();
    const auto heights = spec.heights();
    if (heights.back() > max_levels) {
        throw Error(Errc::StageOverflow,
                    fmt::format("tower height {} exceeds the bound of {} levels", heights.back(), max_levels));
    }

    // Positions are kept as integer slots of the final level width so that
    // adjacent levels share endpoints exactly.
    std::int64_t total_units = 1;
    for (int r : spec.cuts) total_units *= r;
    std::int64_t units = total_units;
    std::int64_t next_free = units;
    std::vector<std::int64_t> slots{0};
    for (std::size_t k = 0; k < spec.cuts.size(); ++k) {
        const int r = spec.cuts[k];
        const std::int64_t sub = units / r;
        std::vector<std::int64_t> next;
        next.reserve(static_cast<std::size_t>(heights[k + 1]));
        for (int i = 0; i < r; ++i) {
            for (auto l : slots) next.push_back(l + i * sub);
            for (int s = 0; s < spec.spacers[k][static_cast<std::size_t>(i)]; ++s) {
                next.push_back(next_free);
                next_free += sub;
            }
        }
        slots = std::move(next);
        units = sub;
    }

    const double width = spec.base_width / static_cast<double>(total_units);
    TowerState tower;
    tower.height = static_cast<std::int64_t>(slots.size());
    tower.level_width = width;
    tower.levels.reserve(slots.size());
    for (auto l : slots) tower.levels.push_back({static_cast<double>(l) * width, static_cast<double>(l + 1) * width});
    tower.order_by_position.resize(slots.size());
    std::iota(tower.order_by_position.begin(), tower.order_by_position.end(), std::int64_t{0});
    std::sort(tower.order_by_position.begin(), tower.order_by_position.end(),
              [&](std::int64_t a, std::int64_t b) {
                  return tower.levels[static_cast<std::size_t>(a)].left < tower.levels[static_cast<std::size_t>(b)].left;
              });
    tower.region = IntervalSet::from_union(tower.levels);
    tower.defined_domain = IntervalSet::from_union(
        std::vector<Interval>(tower.levels.begin(), tower.levels.end() - 1));
    return tower;
}

BaseSystem BaseSystem::integer_translation(std::int64_t step) {
    if (step == 0) throw Error(Errc::InvalidArgument, "integer translation step must be nonzero");
    return BaseSystem(IntegerTranslation{step});
}

BaseSystem BaseSystem::boole() { return BaseSystem(BooleMap{}); }

BaseSystem BaseSystem::rank_one(RankOneSpec spec, std::int64_t max_levels) {
    auto tower = std::make_shared<const TowerState>(build_tower(spec, max_levels));
    return BaseSystem(RankOneTower{std::move(spec), std::move(tower)});
}

MeasureKind BaseSystem::measure_kind() const noexcept {
    return std::holds_alternative<IntegerTranslation>(variant_) ? MeasureKind::Counting : MeasureKind::Lebesgue;
}

bool BaseSystem::invertible() const noexcept { return !std::holds_alternative<BooleMap>(variant_); }

std::int64_t BaseSystem::preimage_cap() const noexcept {
    return std::holds_alternative<BooleMap>(variant_) ? kBooleCap : kGeneralCap;
}

std::string BaseSystem::id() const {
    if (const auto* t = std::get_if<IntegerTranslation>(&variant_)) return fmt::format("integer({})", t->step);
    if (std::holds_alternative<BooleMap>(variant_)) return "boole";
    const auto& r = std::get<RankOneTower>(variant_);
    return fmt::format("rankone(K={},h={})", r.spec.stages(), r.tower->height);
}

const TowerState* BaseSystem::tower() const noexcept {
    if (const auto* r = std::get_if<RankOneTower>(&variant_)) return r->tower.get();
    return nullptr;
}

double BaseSystem::measure(const IntervalSet& set) const {
    if (measure_kind() == MeasureKind::Counting) return static_cast<double>(set.integer_count());
    return set.length();
}

IntervalSet BaseSystem::preimage(const IntervalSet& set, std::int64_t n) const {
    if (n > preimage_cap() || -n > preimage_cap()) {
        throw Error(Errc::CapExceeded, fmt::format("|n| = {} exceeds the cap {} for {}", n, preimage_cap(), id()));
    }
    if (n == 0) return set;
    return std::visit(
        [&](const auto& sys) -> IntervalSet {
            using S = std::decay_t<decltype(sys)>;
            if constexpr (std::is_same_v<S, IntegerTranslation>) {
                return set.translated(-static_cast<double>(n * sys.step));
            } else if constexpr (std::is_same_v<S, BooleMap>) {
                if (n < 0) throw Error(Errc::NotInvertible, "the Boole map has no inverse; n must be >= 0");
                IntervalSet cur = set;
                for (std::int64_t i = 0; i < n; ++i) cur = boole_preimage_once(cur);
                return cur;
            } else {
                return tower_shift(*sys.tower, set, -n);
            }
        },
        variant_);
}

double BaseSystem::apply(double x, std::int64_t n) const {
    return std::visit(
        [&](const auto& sys) -> double {
            using S = std::decay_t<decltype(sys)>;
            if constexpr (std::is_same_v<S, IntegerTranslation>) {
                return x + static_cast<double>(n * sys.step);
            } else if constexpr (std::is_same_v<S, BooleMap>) {
                if (n < 0) throw Error(Errc::NotInvertible, "the Boole map has no inverse; n must be >= 0");
                for (std::int64_t i = 0; i < n; ++i) {
                    if (x == 0.0) throw Error(Errc::DomainEscape, "Boole map is undefined at 0");
                    x = x - 1.0 / x;
                }
                return x;
            } else {
                const auto& tower = *sys.tower;
                const auto j = tower.level_of(x);
                if (j < 0) throw Error(Errc::DomainEscape, fmt::format("point {} lies outside the tower", x));
                const auto target = j + n;
                if (target < 0 || target >= tower.height) {
                    throw Error(Errc::DomainEscape,
                                fmt::format("orbit of level {} by {} leaves a tower of height {}", j, n, tower.height));
                }
                return x - tower.levels[static_cast<std::size_t>(j)].left +
                       tower.levels[static_cast<std::size_t>(target)].left;
            }
        },
        variant_);
}

double measure(const BaseSystem& system, const IntervalSet& set) { return system.measure(set); }

IntervalSet preimage(const BaseSystem& system, const IntervalSet& set, std::int64_t n) {
    return system.preimage(set, n);
}

LaggedPair lagged_pair(const BaseSystem& system, const IntervalSet& a, const IntervalSet& b, std::int64_t n) {
    try {
        return {a, system.preimage(b, n)};
    } catch (const Error& e) {
        if (e.code() != Errc::DomainEscape || !system.invertible()) throw;
        return {system.preimage(a, -n), b};
    }
}

double intersection_measure(const BaseSystem& system, const IntervalSet& a, const IntervalSet& b, std::int64_t n) {
    const auto pair = lagged_pair(system, a, b, n);
    return system.measure(pair.first.intersect(pair.second));
}

std::vector<double> intersect_sequence(const BaseSystem& system, const IntervalSet& a, std::int64_t max_lag) {
    if (max_lag < 0) throw Error(Errc::InvalidArgument, "max_lag must be nonnegative");
    if (max_lag > system.preimage_cap()) {
        throw Error(Errc::CapExceeded, fmt::format("N = {} exceeds the cap {}", max_lag, system.preimage_cap()));
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(max_lag) + 1);
    out.push_back(system.measure(a));
    if (std::holds_alternative<BooleMap>(system.variant())) {
        // Iterate one step at a time instead of recomputing T^{-n} from scratch.
        IntervalSet cur = a;
        for (std::int64_t n = 1; n <= max_lag; ++n) {
            cur = boole_preimage_once(cur);
            out.push_back(system.measure(a.intersect(cur)));
        }
        return out;
    }
    for (std::int64_t n = 1; n <= max_lag; ++n) out.push_back(intersection_measure(system, a, a, n));
    return out;
}

double symmetric_diff_measure(const BaseSystem& system, const IntervalSet& a, std::int64_t n) {
    if (n == 0) return 0.0;
    const double overlap = intersection_measure(system, a, a, n);
    return std::max(0.0, 2.0 * (system.measure(a) - overlap));
}

bool wandering_check(const BaseSystem& system, const IntervalSet& w, std::int64_t max_lag) {
    if (max_lag < 0) throw Error(Errc::InvalidArgument, "max_lag must be nonnegative");
    if (w.empty()) return true;
    // Measure preservation reduces pairwise disjointness of T^{-i}W, T^{-j}W to
    // mu(W ∩ T^{-(j-i)} W) = 0 for every gap j - i that occurs.
    const std::int64_t max_gap = system.invertible() ? 2 * max_lag : max_lag;
    if (!std::holds_alternative<BooleMap>(system.variant())) {
        for (std::int64_t k = 1; k <= max_gap; ++k) {
            if (intersection_measure(system, w, w, k) > kEndpointTol) return false;
        }
        return true;
    }
    const auto seq = intersect_sequence(system, w, max_gap);
    return std::all_of(seq.begin() + 1, seq.end(), [](double v) { return v <= kEndpointTol; });
}

}  // namespace psusp
