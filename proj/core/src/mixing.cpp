#include "psusp/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "psusp/csv.hpp"
#include "psusp/errors.hpp"
#include "psusp/poisson.hpp"
#include "psusp/statistics.hpp"

namespace psusp {

std::string_view to_string(TestKind kind) noexcept {
    switch (kind) {
        case TestKind::ZeroType: return "zero_type";
        case TestKind::Rigidity: return "rigidity";
        case TestKind::ErgodicAverage: return "ergodic_average";
        case TestKind::DissipativeIndependence: return "dissipative_independence";
    }
    return "unknown";
}

std::string_view to_string(Verdict verdict) noexcept {
    switch (verdict) {
        case Verdict::Consistent: return "consistent";
        case Verdict::Inconsistent: return "inconsistent";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "unknown";
}

double MixingReport::max_abs_z() const noexcept {
    double m = 0.0;
    for (const auto& r : rows) m = std::max(m, std::abs(r.z));
    return m;
}

namespace {

void require_trials(std::int64_t trials, std::int64_t minimum) {
    if (trials < minimum) {
        throw Error(Errc::InsufficientTrials, fmt::format("need at least {} trials, got {}", minimum, trials));
    }
}

// Covariances Cov(N(A), N(T^{-n} A)) for every lag from one sample per trial.
std::vector<Estimate> lagged_covariances(const BaseSystem& system, const IntervalSet& a,
                                         std::span<const std::int64_t> lags, std::int64_t trials,
                                         const SeededSampler& sampler, Parallelism par) {
    std::vector<IntervalSet> sets;
    sets.reserve(2 * lags.size());
    for (auto n : lags) {
        auto pair = lagged_pair(system, a, a, n);
        sets.push_back(std::move(pair.first));
        sets.push_back(std::move(pair.second));
    }
    const auto rows = sample_count_matrix(system, sets, trials, sampler, par);
    std::vector<Estimate> out;
    std::vector<double> x(rows.size()), y(rows.size());
    for (std::size_t j = 0; j < lags.size(); ++j) {
        for (std::size_t t = 0; t < rows.size(); ++t) {
            x[t] = static_cast<double>(rows[t][2 * j]);
            y[t] = static_cast<double>(rows[t][2 * j + 1]);
        }
        out.push_back(jackknife_covariance(x, y));
    }
    return out;
}

Verdict z_verdict(const std::vector<MixingRow>& rows) {
    for (const auto& r : rows) {
        if (!(std::abs(r.z) <= kInconsistentZ)) return Verdict::Inconsistent;
    }
    return Verdict::Consistent;
}

}  // namespace

MixingReport zero_type_experiment(const BaseSystem& system, const IntervalSet& a, std::int64_t max_lag,
                                  std::int64_t trials, const SeededSampler& sampler, Parallelism par) {
    require_trials(trials, kMinCovarianceTrials);
    const auto exact = intersect_sequence(system, a, max_lag);
    std::vector<std::int64_t> lags(exact.size());
    for (std::size_t n = 0; n < lags.size(); ++n) lags[n] = static_cast<std::int64_t>(n);
    const auto est = lagged_covariances(system, a, lags, trials, sampler, par);

    MixingReport report;
    report.system_id = system.id();
    report.kind = TestKind::ZeroType;
    report.aux_label = "exact_over_measure";
    const double mu_a = system.measure(a);
    for (std::size_t n = 0; n < lags.size(); ++n) {
        report.rows.push_back({lags[n], exact[n], est[n].estimate, est[n].std_error,
                               z_score(est[n].estimate, est[n].std_error, exact[n]),
                               mu_a > 0.0 ? exact[n] / mu_a : 0.0});
    }
    report.decay_flag = exact.back() < 0.05 * mu_a;
    report.verdict = z_verdict(report.rows);
    report.notes.push_back(fmt::format("decay flag (exact at lag {} below 5% of mu(A)): {}", max_lag,
                                       report.decay_flag ? "set" : "not set"));
    report.notes.push_back("mixing of higher orders is not tested (no quantitative target)");
    return report;
}

MixingReport rigidity_experiment(const BaseSystem& system, const IntervalSet& a,
                                 std::span<const std::int64_t> candidate_times, double epsilon, std::int64_t trials,
                                 const SeededSampler& sampler, Parallelism par) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw Error(Errc::InvalidArgument, "epsilon must lie in (0, 1)");
    require_trials(trials, kMinCovarianceTrials);
    const double mu_a = system.measure(a);

    MixingReport report;
    report.system_id = system.id();
    report.kind = TestKind::Rigidity;
    report.aux_label = "rigid_flag";
    std::vector<bool> flagged;
    std::vector<double> exact;
    for (auto n : candidate_times) {
        const double overlap = n == 0 ? mu_a : intersection_measure(system, a, a, n);
        const double symdiff = n == 0 ? 0.0 : std::max(0.0, 2.0 * (mu_a - overlap));
        exact.push_back(overlap);
        flagged.push_back(symdiff < epsilon * 2.0 * mu_a || (n == 0 && mu_a > 0.0));
    }
    const auto est = lagged_covariances(system, a, candidate_times, trials, sampler, par);
    bool any_nonzero_flag = false;
    for (std::size_t i = 0; i < candidate_times.size(); ++i) {
        report.rows.push_back({candidate_times[i], exact[i], est[i].estimate, est[i].std_error,
                               z_score(est[i].estimate, est[i].std_error, exact[i]), flagged[i] ? 1.0 : 0.0});
        if (flagged[i] && candidate_times[i] != 0) {
            any_nonzero_flag = true;
            report.notes.push_back(fmt::format("time {} flagged rigid: mu(A ∩ T^-n A) = {} > (1 - eps) mu(A) = {}",
                                               candidate_times[i], exact[i], (1.0 - epsilon) * mu_a));
        }
    }
    report.verdict = z_verdict(report.rows);
    if (report.verdict == Verdict::Consistent && !any_nonzero_flag) {
        report.verdict = Verdict::Inconclusive;
        report.notes.push_back("no nonzero candidate time is rigid at this epsilon");
    }
    report.notes.push_back("mild mixing and the K property have no finite-sample certificate and are not tested");
    return report;
}

IntervalSet reach_window(const BaseSystem& system, const IntervalSet& a, std::int64_t horizon) {
    if (horizon < 1) throw Error(Errc::InvalidArgument, "horizon must be at least 1");
    if (std::holds_alternative<BooleMap>(system.variant())) {
        // While |x| >= 1 one step lowers x^2 by at most 2, so points beyond
        // R = sqrt(a^2 + 2H) cannot enter A ⊆ [-a, a) within H steps.
        double reach = 1.0;
        if (const auto h = a.hull()) reach = std::max({reach, std::abs(h->left), std::abs(h->right)});
        const double r = std::sqrt(reach * reach + 2.0 * static_cast<double>(horizon));
        return a.unite(IntervalSet::interval(-r, r));
    }
    IntervalSet window;
    for (std::int64_t k = 0; k < horizon; ++k) window = window.unite(system.preimage(a, k));
    return window;
}

MixingReport ergodic_average_experiment(const BaseSystem& system, const IntervalSet& a, std::int64_t horizon,
                                        std::int64_t trials, const SeededSampler& sampler, Parallelism par) {
    require_trials(trials, 2);
    if (horizon < 1 || horizon > 1'000'000) throw Error(Errc::CapExceeded, "horizon must lie in [1, 10^6]");

    std::vector<std::int64_t> grid;
    for (std::int64_t h = 1; h <= horizon; h *= 2) grid.push_back(h);
    if (grid.back() != horizon) grid.push_back(horizon);

    const bool boole = std::holds_alternative<BooleMap>(system.variant());
    const IntervalSet window = reach_window(system, a, horizon);
    std::vector<IntervalSet> preimages;
    if (!boole) {
        for (std::int64_t k = 0; k < horizon; ++k) preimages.push_back(system.preimage(a, k));
    }

    // averages[t * grid.size() + g]
    std::vector<double> averages(static_cast<std::size_t>(trials) * grid.size());
    parallel_for(static_cast<std::size_t>(trials), par, [&](std::size_t t) {
        auto rng = sampler.substream(t).engine();
        const auto cfg = sample_poisson(system, window, rng);
        std::vector<char> hit(static_cast<std::size_t>(horizon), 0);
        if (boole) {
            for (double x : cfg.points) {
                for (std::int64_t k = 0; k < horizon; ++k) {
                    if (a.contains(x)) hit[static_cast<std::size_t>(k)] = 1;
                    if (x == 0.0) break;  // null set: T is undefined at 0
                    x = x - 1.0 / x;
                }
            }
        } else {
            for (std::int64_t k = 0; k < horizon; ++k) {
                hit[static_cast<std::size_t>(k)] = count_points(cfg.points, preimages[static_cast<std::size_t>(k)]) > 0;
            }
        }
        double running = 0.0;
        std::size_t g = 0;
        for (std::int64_t k = 0; k < horizon; ++k) {
            running += hit[static_cast<std::size_t>(k)];
            if (k + 1 == grid[g]) {
                averages[t * grid.size() + g] = running / static_cast<double>(k + 1);
                ++g;
            }
        }
    });

    const double target = 1.0 - std::exp(-system.measure(a));
    MixingReport report;
    report.system_id = system.id();
    report.kind = TestKind::ErgodicAverage;
    report.aux_label = "dispersion";
    std::vector<double> column(static_cast<std::size_t>(trials));
    for (std::size_t g = 0; g < grid.size(); ++g) {
        for (std::size_t t = 0; t < column.size(); ++t) column[t] = averages[t * grid.size() + g];
        const auto est = mean_estimate(column);
        report.rows.push_back({grid[g], target, est.estimate, est.std_error,
                               z_score(est.estimate, est.std_error, target), sample_stddev(column)});
    }
    report.verdict = z_verdict(report.rows);
    if (report.verdict == Verdict::Consistent) {
        const auto& last = report.rows.back();
        const auto reference = std::find_if(report.rows.rbegin(), report.rows.rend(),
                                            [&](const MixingRow& r) { return 8 * r.lag <= last.lag; });
        if (reference == report.rows.rend()) {
            report.verdict = Verdict::Inconclusive;
            report.notes.push_back("horizon below 8: dispersion shrinkage not assessed");
        } else {
            // The sample deviation of n trials has relative error about
            // 1/sqrt(2n), so a ratio of two has error about 1/sqrt(n).
            const double ratio = reference->aux > 0.0 ? last.aux / reference->aux : 0.0;
            const double bound = 1.0 - 3.0 / std::sqrt(static_cast<double>(trials));
            const double slope = std::log(ratio) / std::log(static_cast<double>(last.lag) / reference->lag);
            report.notes.push_back(fmt::format("dispersion ratio H={} / H={}: {} (shrinkage bound {})", last.lag,
                                               reference->lag, ratio, bound));
            report.notes.push_back(fmt::format("log-log dispersion slope: {}", slope));
            if (!(ratio < bound)) report.verdict = Verdict::Inconclusive;
        }
    }
    report.notes.push_back(fmt::format("stationary target 1 - exp(-mu(A)) = {}", target));
    return report;
}

MixingReport dissipative_independence_experiment(const BaseSystem& system, const IntervalSet& w,
                                                 std::span<const std::int64_t> lags, std::int64_t trials,
                                                 const SeededSampler& sampler, Parallelism par) {
    require_trials(trials, 2);
    std::int64_t max_lag = 0;
    for (auto n : lags) max_lag = std::max(max_lag, n < 0 ? -n : n);
    if (!wandering_check(system, w, max_lag)) {
        throw Error(Errc::NotWandering, fmt::format("{} is not wandering up to lag {}", w.to_string(), max_lag));
    }
    const double mu_w = system.measure(w);

    MixingReport report;
    report.system_id = system.id();
    report.kind = TestKind::DissipativeIndependence;
    report.aux_label = "gof_p_value";

    std::vector<IntervalSet> sets;
    for (auto n : lags) sets.push_back(system.preimage(w, n));
    const auto rows = sample_count_matrix(system, sets, trials, sampler, par);
    std::vector<std::vector<double>> columns(lags.size(), std::vector<double>(rows.size()));
    std::vector<std::int64_t> raw(rows.size());
    bool gof_ok = true;
    for (std::size_t j = 0; j < lags.size(); ++j) {
        for (std::size_t t = 0; t < rows.size(); ++t) {
            columns[j][t] = static_cast<double>(rows[t][j]);
            raw[t] = rows[t][j];
        }
        const auto est = mean_estimate(columns[j]);
        const auto gof = poisson_goodness_of_fit(raw, mu_w);
        gof_ok = gof_ok && gof.p_value > kGofPValue;
        report.rows.push_back({lags[j], mu_w, est.estimate, est.std_error, z_score(est.estimate, est.std_error, mu_w),
                               gof.p_value});
    }

    double max_pair_z = 0.0;
    const double scale = std::sqrt(std::max<double>(1.0, static_cast<double>(trials) - 3.0));
    for (std::size_t i = 0; i < lags.size(); ++i) {
        for (std::size_t j = i + 1; j < lags.size(); ++j) {
            const double r = std::clamp(correlation(columns[i], columns[j]), -0.999999, 0.999999);
            max_pair_z = std::max(max_pair_z, std::abs(std::atanh(r)) * scale);
        }
    }
    report.verdict = z_verdict(report.rows);
    if (!(max_pair_z < kInconsistentZ) || !gof_ok) report.verdict = Verdict::Inconsistent;
    report.notes.push_back(fmt::format("max pairwise correlation |z| (Fisher): {}", max_pair_z));
    report.notes.push_back(fmt::format("all Poisson({}) fits p > {}: {}", mu_w, kGofPValue, gof_ok ? "yes" : "no"));
    if (w.empty()) report.notes.push_back("empty wandering set: vacuous pass");
    return report;
}

void write_report_csv(std::ostream& os, const MixingReport& report) {
    os << "n,estimate,std_error,exact_oracle,z_score," << report.aux_label << '\n';
    for (const auto& r : report.rows) {
        os << r.lag << ',' << csv::real(r.estimate) << ',' << csv::real(r.std_error) << ',' << csv::real(r.exact) << ','
           << csv::real(r.z) << ',' << csv::real(r.aux) << '\n';
    }
}

void write_verdict(std::ostream& os, const MixingReport& report) {
    os << "system = " << report.system_id << '\n';
    os << "test = " << to_string(report.kind) << '\n';
    os << "verdict = " << to_string(report.verdict) << '\n';
    os << "max_abs_z = " << csv::real(report.max_abs_z()) << '\n';
    os << fmt::format("thresholds = inconsistent when |z| > {}; goodness of fit passes when p > {}\n", kInconsistentZ,
                      kGofPValue);
    for (const auto& n : report.notes) os << "note = " << n << '\n';
}

}  // namespace psusp
