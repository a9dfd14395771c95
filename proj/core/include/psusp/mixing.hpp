#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psusp/base_system.hpp"
#include "psusp/parallel.hpp"
#include "psusp/random.hpp"

namespace psusp {

enum class TestKind { ZeroType, Rigidity, ErgodicAverage, DissipativeIndependence };
enum class Verdict { Consistent, Inconsistent, Inconclusive };

std::string_view to_string(TestKind kind) noexcept;
std::string_view to_string(Verdict verdict) noexcept;

/// One lag of a report: the base-side exact value next to the suspension-side
/// estimate. `aux` is kind-specific and named by `MixingReport::aux_label`.
struct MixingRow {
    std::int64_t lag = 0;
    double exact = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
    double z = 0.0;
    double aux = 0.0;
};

struct MixingReport {
    std::string system_id;
    TestKind kind = TestKind::ZeroType;
    std::vector<MixingRow> rows;
    std::string aux_label;
    Verdict verdict = Verdict::Inconclusive;
    /// Zero-type runs: exact sequence at the last lag is below 5% of mu(A).
    bool decay_flag = false;
    std::vector<std::string> notes;

    double max_abs_z() const noexcept;
};

MixingReport zero_type_experiment(const BaseSystem& system, const IntervalSet& a, std::int64_t max_lag,
                                  std::int64_t trials, const SeededSampler& sampler, Parallelism par = {});

/// Flags candidate times n with mu(A Δ T^{-n} A) < epsilon * 2 mu(A) and
/// checks the suspension covariance against mu(A ∩ T^{-n} A) at every candidate.
MixingReport rigidity_experiment(const BaseSystem& system, const IntervalSet& a,
                                 std::span<const std::int64_t> candidate_times, double epsilon, std::int64_t trials,
                                 const SeededSampler& sampler, Parallelism par = {});

/// Birkhoff averages of 1{N(T_*^k . ∩ A) >= 1} over k < H, on a grid of
/// horizons up to `horizon`. Exact target: 1 - exp(-mu(A)). Consistent when
/// every |z| <= 4 and the cross-trial dispersion at H is significantly below
/// its value at H/8 or less.
MixingReport ergodic_average_experiment(const BaseSystem& system, const IntervalSet& a, std::int64_t horizon,
                                        std::int64_t trials, const SeededSampler& sampler, Parallelism par = {});

/// Counts on T^{-n} W for a wandering W: pairwise independence and Poisson(mu(W)) marginals.
MixingReport dissipative_independence_experiment(const BaseSystem& system, const IntervalSet& w,
                                                 std::span<const std::int64_t> lags, std::int64_t trials,
                                                 const SeededSampler& sampler, Parallelism par = {});

/// Smallest window containing every point whose orbit meets A within `horizon` steps.
IntervalSet reach_window(const BaseSystem& system, const IntervalSet& a, std::int64_t horizon);

/// CSV: `n,estimate,std_error,exact_oracle,z_score,<aux_label>`.
void write_report_csv(std::ostream& os, const MixingReport& report);
/// Plain-text verdict block with thresholds and notes.
void write_verdict(std::ostream& os, const MixingReport& report);

}  // namespace psusp
