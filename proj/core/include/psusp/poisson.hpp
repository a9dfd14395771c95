#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "psusp/base_system.hpp"
#include "psusp/interval_set.hpp"
#include "psusp/parallel.hpp"
#include "psusp/random.hpp"
#include "psusp/statistics.hpp"

namespace psusp {

/// One sample of the Poisson measure restricted to `window`: a finite
/// multiset of points, stored sorted.
struct Configuration {
    std::vector<double> points;
    IntervalSet window;

    std::size_t size() const noexcept { return points.size(); }
    friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Number of points of a sorted multiset lying in `set` (no window check).
std::int64_t count_points(std::span<const double> sorted_points, const IntervalSet& set);

/// Poisson configuration with intensity `intensity * mu` on `window`.
/// Counting bases place Poisson(intensity) points on every lattice site.
Configuration sample_poisson(const BaseSystem& system, const IntervalSet& window, CounterEngine& rng,
                             double intensity = 1.0);
Configuration sample_poisson(const BaseSystem& system, const IntervalSet& window, const SeededSampler& sampler,
                             double intensity = 1.0);

/// Image of the configuration under the Poissonian map T_*^n: x -> T^n x.
Configuration pushforward(const Configuration& config, const BaseSystem& system, std::int64_t n);

/// N(A) for A inside the configuration's window; WindowViolation otherwise.
std::int64_t count(const Configuration& config, const IntervalSet& set);

/// Cov(N(A), N(T^{-n} B)) over independent trials with a jackknife standard
/// error. The exact value is mu(A ∩ T^{-n} B).
Estimate estimate_count_covariance(const BaseSystem& system, const IntervalSet& a, const IntervalSet& b,
                                   std::int64_t n, std::int64_t trials, const SeededSampler& sampler,
                                   Parallelism par = {});

/// Minimum trial count accepted by the covariance estimators.
inline constexpr std::int64_t kMinCovarianceTrials = 1000;

/// Counts N(S_j) for each set, one row per trial, sampled on the union of the
/// sets. Trial t uses `sampler.substream(t)`.
std::vector<std::vector<std::int64_t>> sample_count_matrix(const BaseSystem& system,
                                                           std::span<const IntervalSet> sets,
                                                           std::int64_t trials, const SeededSampler& sampler,
                                                           Parallelism par = {}, double intensity = 1.0);

struct MomentRow {
    std::int64_t n = 0;
    double estimate = 0.0;
    double std_error = 0.0;
    double exact = 0.0;
    double z = 0.0;
};

/// CSV with header `trial,point`.
void write_configurations_csv(std::ostream& os, std::span<const Configuration> configs);
/// CSV with header `n,estimate,std_error,exact_oracle,z_score`.
void write_moments_csv(std::ostream& os, std::span<const MomentRow> rows);

}  // namespace psusp
