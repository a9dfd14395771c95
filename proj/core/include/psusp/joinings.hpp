#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "psusp/base_system.hpp"
#include "psusp/kv_format.hpp"
#include "psusp/parallel.hpp"
#include "psusp/poisson.hpp"
#include "psusp/random.hpp"
#include "psusp/statistics.hpp"

namespace psusp {

/// Weighted sum of graph joinings: lag k carries mass c_k, pairing x with T^k x.
struct GraphSum {
    std::map<std::int64_t, double> weights;
};

/// One graph joining x -> T^lag x with the given mass.
struct SingleGraph {
    std::int64_t lag = 0;
    double mass = 1.0;
};

struct NullPart {};

using CoupledPart = std::variant<NullPart, GraphSum, SingleGraph>;

/// Lag -> mass view of any coupled part (empty for NullPart).
std::map<std::int64_t, double> coupled_weights(const CoupledPart& part);
double coupled_mass(const CoupledPart& part);

/// Poissonian self-joining data: independent X part a mu, coupled part
/// gamma (a combination of graph joinings of mu), independent Y part
/// a' nu with nu = nu_scale * mu.
struct JoiningSpec {
    std::string name;
    double a = 1.0;
    double a_prime = 1.0;
    double nu_scale = 1.0;
    CoupledPart gamma = NullPart{};

    /// MassInconsistency unless a + |gamma| = 1 and a' nu_scale + |gamma| = nu_scale.
    void validate(const BaseSystem& system) const;
};

JoiningSpec product_spec();
JoiningSpec diagonal_spec();
/// a mu plus sum_k c_k graph(T^k), with a + sum c_k = 1.
JoiningSpec graph_family_spec(std::string name, double a, std::map<std::int64_t, double> weights);
JoiningSpec single_graph_spec(std::int64_t lag);
/// The five specs used by the joining battery.
std::vector<JoiningSpec> builtin_joining_specs();

/// Rescales a joining of (c1 mu, c2 nu) into a Poissonian joining of (mu, nu).
/// `gamma` must have total mass c1; the larger scale absorbs the coupled part.
JoiningSpec lift_c1c2(const CoupledPart& gamma, double c1, double c2);

struct JoiningSample {
    Configuration x;
    Configuration y;
    /// Coupled pairs (x, T^k x) with both ends inside their windows.
    std::vector<std::pair<double, double>> pairs;
};

/// Superposition of the three independent Poisson parts. `intensity_scale`
/// multiplies every intensity (used by the superposition test).
JoiningSample sample_joining(const JoiningSpec& spec, const BaseSystem& system, const IntervalSet& window_x,
                             const IntervalSet& window_y, const SeededSampler& sampler, double intensity_scale = 1.0);

struct CrossCovariance {
    double estimate = 0.0;
    double std_error = 0.0;
    double exact = 0.0;
    double z = 0.0;
};

/// Cov(N_X(A), N_Y(B)) against sum_k c_k mu(A ∩ T^{-k} B).
CrossCovariance cross_covariance_test(const JoiningSpec& spec, const BaseSystem& system, const IntervalSet& a,
                                      const IntervalSet& b, std::int64_t trials, const SeededSampler& sampler,
                                      Parallelism par = {});

inline constexpr std::int64_t kMinMarginalTrials = 10'000;

struct MarginalReport {
    ChiSquareResult x;
    ChiSquareResult y;
    bool passes() const noexcept;
};

/// X counts on A against Poisson(mu(A)), Y counts against Poisson(nu(A)).
MarginalReport marginal_test(const JoiningSpec& spec, const BaseSystem& system, const IntervalSet& a,
                             std::int64_t trials, const SeededSampler& sampler, Parallelism par = {});

/// How n scaled samples are combined. CorruptedMax is a negative control.
enum class SuperpositionMode { Sum, CorruptedMax };

struct SuperpositionReport {
    ChiSquareResult test;
    bool passes() const noexcept;
};

/// Joint law of (N_X(A), N_Y(A)) from one sample versus the combination of
/// n independent samples at intensity 1/n.
SuperpositionReport id_superposition_test(const JoiningSpec& spec, const BaseSystem& system, const IntervalSet& a,
                                          int n, std::int64_t trials, const SeededSampler& sampler,
                                          Parallelism par = {}, SuperpositionMode mode = SuperpositionMode::Sum);

using Pairing = std::vector<std::pair<double, double>>;

/// Matches each x with the unique y within `tol` of T^k x. Returns nullopt
/// when some point has no partner; throws AmbiguousPairing when a match is
/// not unique.
std::optional<Pairing> reconstruct_from_marginals(const Configuration& x, const Configuration& y,
                                                  const BaseSystem& system, std::int64_t lag, double tol = 1e-9);

/// `joining.a`, `joining.a_prime`, `joining.nu_scale`, `joining.c.<k>` or
/// `joining.graph.lag` / `joining.graph.mass`.
JoiningSpec parse_joining(const KvDocument& doc);
void write_joining(KvDocument& doc, const JoiningSpec& spec);

struct JoiningCheckRow {
    std::string spec;
    std::string check;
    std::string set_a;
    std::string set_b;
    double estimate = 0.0;
    double std_error = 0.0;
    double exact = 0.0;
    double z = 0.0;
    double p_value = 1.0;
    bool pass = false;
};

struct JoiningBatteryReport {
    std::vector<JoiningCheckRow> rows;
    bool passes() const noexcept;
};

/// Marginal fits, cross-covariances on `pairs` and superposition tests
/// (n = 2..4, plus a corrupted-max control that must fail) for every spec.
JoiningBatteryReport joining_structure_battery(const BaseSystem& system, std::span<const JoiningSpec> specs,
                                               const IntervalSet& marginal_set,
                                               std::span<const std::pair<IntervalSet, IntervalSet>> pairs,
                                               std::int64_t trials, const SeededSampler& sampler,
                                               Parallelism par = {});

struct RoundTripReport {
    std::int64_t attempts = 0;
    std::int64_t exact_round_trips = 0;
    std::int64_t points = 0;
    /// Duplicating an X point raised AmbiguousPairing.
    bool duplicate_control_raised = false;
    std::string first_failure;
    bool passes() const noexcept { return exact_round_trips == attempts && duplicate_control_raised; }
};

/// Samples SingleGraph(T^k) joinings with windows (W, T^k W), k cycling
/// through `lags`, and reconstructs each pairing from the two marginals.
RoundTripReport reconstruction_round_trips(const BaseSystem& system, const IntervalSet& window_x,
                                           std::span<const std::int64_t> lags, std::int64_t attempts,
                                           const SeededSampler& sampler);

/// CSV: `spec,check,set_a,set_b,estimate,std_error,exact_oracle,z_score,p_value,pass`.
void write_joining_battery_csv(std::ostream& os, const JoiningBatteryReport& report);

}  // namespace psusp
