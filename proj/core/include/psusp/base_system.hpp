#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "psusp/interval_set.hpp"

namespace psusp {

/// Cutting-and-stacking parameters for a finite-stage rank-one tower.
///
/// Stage k cuts the current column into `cuts[k]` subcolumns, puts
/// `spacers[k][i]` fresh levels on subcolumn i, and stacks left to right, so
/// h_{k+1} = cuts[k] * h_k + sum_i spacers[k][i] with h_0 = 1.
struct RankOneSpec {
    std::vector<int> cuts;
    std::vector<std::vector<int>> spacers;
    double base_width = 1.0;

    int stages() const noexcept { return static_cast<int>(cuts.size()); }
    /// Throws InvalidArgument when cuts < 2, spacer rows mismatch, or width <= 0.
    void validate() const;
    /// Heights h_0..h_K from the recursion alone (no geometry).
    std::vector<std::int64_t> heights() const;
};

/// Geometry of the stage-K column: level j is a single interval and T climbs
/// from level j to level j+1 by translation. The top level has no image.
struct TowerState {
    std::vector<Interval> levels;
    std::int64_t height = 0;
    double level_width = 0.0;
    IntervalSet region;          ///< union of all levels
    IntervalSet defined_domain;  ///< levels 0..height-2, where one step of T is known

    /// Index of the level containing x, or -1.
    std::int64_t level_of(double x) const noexcept;
    /// Indices of levels meeting [left, right), in increasing position order.
    std::vector<std::int64_t> levels_meeting(double left, double right) const;

    std::vector<std::int64_t> order_by_position;  ///< level indices sorted by left endpoint
};

inline constexpr std::int64_t kDefaultMaxLevels = 1'000'000;

/// Builds the stage-K tower. Spacers are laid out to the right of the base
/// interval [0, base_width) in order of creation.
TowerState build_tower(const RankOneSpec& spec, std::int64_t max_levels = kDefaultMaxLevels);

enum class MeasureKind { Counting, Lebesgue };

struct IntegerTranslation {
    std::int64_t step = 1;
};

/// x -> x - 1/x on the real line, preserving Lebesgue measure (2-to-1).
struct BooleMap {};

struct RankOneTower {
    RankOneSpec spec;
    std::shared_ptr<const TowerState> tower;
};

/// A sigma-finite measure-preserving system (X, mu, T) with exact preimages.
class BaseSystem {
public:
    using Variant = std::variant<IntegerTranslation, BooleMap, RankOneTower>;

    static BaseSystem integer_translation(std::int64_t step);
    static BaseSystem boole();
    static BaseSystem rank_one(RankOneSpec spec, std::int64_t max_levels = kDefaultMaxLevels);

    const Variant& variant() const noexcept { return variant_; }
    MeasureKind measure_kind() const noexcept;
    bool invertible() const noexcept;
    std::int64_t preimage_cap() const noexcept;
    /// Short identifier used in reports, e.g. `integer(1)`, `boole`, `rankone(K=4)`.
    std::string id() const;
    const TowerState* tower() const noexcept;

    double measure(const IntervalSet& set) const;
    /// Exact T^{-n}(set); negative n means the forward image T^{|n|}(set).
    IntervalSet preimage(const IntervalSet& set, std::int64_t n) const;
    /// T^n x for n >= 0 (and n < 0 on invertible systems).
    double apply(double x, std::int64_t n) const;
    bool is_counting() const noexcept { return measure_kind() == MeasureKind::Counting; }

private:
    explicit BaseSystem(Variant v) : variant_(std::move(v)) {}
    Variant variant_;
};

double measure(const BaseSystem& system, const IntervalSet& set);
IntervalSet preimage(const BaseSystem& system, const IntervalSet& set, std::int64_t n);

/// mu(A ∩ T^{-n} B). On invertible systems this falls back to mu(T^n A ∩ B)
/// when T^{-n} B leaves the constructed tower.
double intersection_measure(const BaseSystem& system, const IntervalSet& a, const IntervalSet& b,
                            std::int64_t n);

/// A pair of exact sets (A', B') with (N(A'), N(B')) distributed as (N(A), N(T^{-n} B)).
struct LaggedPair {
    IntervalSet first;
    IntervalSet second;
};
LaggedPair lagged_pair(const BaseSystem& system, const IntervalSet& a, const IntervalSet& b, std::int64_t n);

/// mu(A ∩ T^{-n} A) for n = 0..N.
std::vector<double> intersect_sequence(const BaseSystem& system, const IntervalSet& a, std::int64_t max_lag);

/// mu(A Δ T^{-n} A) = 2 (mu(A) - mu(A ∩ T^{-n} A)).
double symmetric_diff_measure(const BaseSystem& system, const IntervalSet& a, std::int64_t n);

/// True iff the sets T^{-n} W (n = -N..N, or 0..N for non-invertible maps)
/// are pairwise disjoint up to a null set.
bool wandering_check(const BaseSystem& system, const IntervalSet& w, std::int64_t max_lag);

}  // namespace psusp
