#include "psusp/poisson.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include <fmt/format.h>

#include "psusp/csv.hpp"
#include "psusp/errors.hpp"

namespace psusp {

std::int64_t count_points(std::span<const double> sorted_points, const IntervalSet& set) {
    std::int64_t total = 0;
    for (const auto& iv : set.intervals()) {
        const auto lo = std::lower_bound(sorted_points.begin(), sorted_points.end(), iv.left);
        const auto hi = std::lower_bound(lo, sorted_points.end(), iv.right);
        total += hi - lo;
    }
    return total;
}

Configuration sample_poisson(const BaseSystem& system, const IntervalSet& window, CounterEngine& rng,
                             double intensity) {
    if (intensity < 0.0) throw Error(Errc::InvalidArgument, "intensity must be nonnegative");
    Configuration out;
    out.window = window;
    if (window.empty() || intensity == 0.0) return out;

    if (system.is_counting()) {
        std::poisson_distribution<std::int64_t> site(intensity);
        for (const auto& iv : window.intervals()) {
            const auto lo = static_cast<std::int64_t>(std::ceil(iv.left));
            const auto hi = static_cast<std::int64_t>(std::ceil(iv.right));
            for (auto k = lo; k < hi; ++k) {
                const auto m = site(rng);
                out.points.insert(out.points.end(), static_cast<std::size_t>(m), static_cast<double>(k));
            }
        }
        return out;  // already sorted
    }

    const double total = window.length();
    std::poisson_distribution<std::int64_t> number(intensity * total);
    const auto n = number(rng);
    if (n == 0) return out;
    // Inverse transform over cumulative interval lengths.
    const auto ivs = window.intervals();
    std::vector<double> cumulative(ivs.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < ivs.size(); ++i) {
        acc += ivs[i].length();
        cumulative[i] = acc;
    }
    out.points.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) {
        const double u = rng.uniform() * acc;
        auto idx = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin());
        idx = std::min(idx, ivs.size() - 1);
        const double start = idx == 0 ? 0.0 : cumulative[idx - 1];
        const double x = ivs[idx].left + (u - start);
        out.points.push_back(std::min(x, std::nextafter(ivs[idx].right, ivs[idx].left)));
    }
    std::sort(out.points.begin(), out.points.end());
    return out;
}

Configuration sample_poisson(const BaseSystem& system, const IntervalSet& window, const SeededSampler& sampler,
                             double intensity) {
    auto rng = sampler.engine();
    return sample_poisson(system, window, rng, intensity);
}

namespace {

IntervalSet forward_window(const BaseSystem& system, const IntervalSet& window, std::int64_t n) {
    if (system.invertible() || n <= 0) return system.preimage(window, -n);
    // Boole map: each branch is increasing, so intervals on one side of 0 map to intervals.
    IntervalSet cur = window;
    for (std::int64_t step = 0; step < n; ++step) {
        std::vector<Interval> next;
        for (const auto& iv : cur.intervals()) {
            if ((iv.left < 0.0 && iv.right > 0.0) || iv.left == 0.0 || iv.right == 0.0) {
                throw Error(Errc::DomainEscape, "forward image of a window touching 0 is unbounded");
            }
            next.push_back({iv.left - 1.0 / iv.left, iv.right - 1.0 / iv.right});
        }
        cur = IntervalSet::from_union(std::move(next));
    }
    return cur;
}

}  // namespace

Configuration pushforward(const Configuration& config, const BaseSystem& system, std::int64_t n) {
    if (n == 0) return config;
    Configuration out;
    out.points.reserve(config.points.size());
    for (double x : config.points) out.points.push_back(system.apply(x, n));
    std::sort(out.points.begin(), out.points.end());
    out.window = forward_window(system, config.window, n);
    return out;
}

std::int64_t count(const Configuration& config, const IntervalSet& set) {
    if (set.subtract(config.window).length() > kEndpointTol) {
        throw Error(Errc::WindowViolation,
                    fmt::format("set {} is not inside the window {}", set.to_string(), config.window.to_string()));
    }
    return count_points(config.points, set);
}

std::vector<std::vector<std::int64_t>> sample_count_matrix(const BaseSystem& system,
                                                           std::span<const IntervalSet> sets,
                                                           std::int64_t trials, const SeededSampler& sampler,
                                                           Parallelism par, double intensity) {
    if (trials < 0) throw Error(Errc::InvalidArgument, "trials must be nonnegative");
    IntervalSet window;
    for (const auto& s : sets) window = window.unite(s);
    std::vector<std::vector<std::int64_t>> rows(static_cast<std::size_t>(trials));
    parallel_for(rows.size(), par, [&](std::size_t t) {
        auto rng = sampler.substream(t).engine();
        const auto cfg = sample_poisson(system, window, rng, intensity);
        auto& row = rows[t];
        row.reserve(sets.size());
        for (const auto& s : sets) row.push_back(count_points(cfg.points, s));
    });
    return rows;
}

Estimate estimate_count_covariance(const BaseSystem& system, const IntervalSet& a, const IntervalSet& b,
                                   std::int64_t n, std::int64_t trials, const SeededSampler& sampler,
                                   Parallelism par) {
    if (trials < kMinCovarianceTrials) {
        throw Error(Errc::InsufficientTrials,
                    fmt::format("covariance estimation needs at least {} trials, got {}", kMinCovarianceTrials, trials));
    }
    const auto pair = lagged_pair(system, a, b, n);
    const IntervalSet sets[] = {pair.first, pair.second};
    const auto rows = sample_count_matrix(system, sets, trials, sampler, par);
    std::vector<double> x(rows.size()), y(rows.size());
    for (std::size_t t = 0; t < rows.size(); ++t) {
        x[t] = static_cast<double>(rows[t][0]);
        y[t] = static_cast<double>(rows[t][1]);
    }
    return jackknife_covariance(x, y);
}

void write_configurations_csv(std::ostream& os, std::span<const Configuration> configs) {
    os << "trial,point\n";
    for (std::size_t t = 0; t < configs.size(); ++t) {
        for (double p : configs[t].points) os << t << ',' << csv::real(p) << '\n';
    }
}

void write_moments_csv(std::ostream& os, std::span<const MomentRow> rows) {
    os << "n,estimate,std_error,exact_oracle,z_score\n";
    for (const auto& r : rows) {
        os << r.n << ',' << csv::real(r.estimate) << ',' << csv::real(r.std_error) << ',' << csv::real(r.exact) << ','
           << csv::real(r.z) << '\n';
    }
}

}  // namespace psusp
