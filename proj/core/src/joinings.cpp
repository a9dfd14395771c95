#include "psusp/joinings.hpp"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <ostream>

#include <fmt/format.h>

#include "psusp/csv.hpp"
#include "psusp/errors.hpp"

namespace psusp {

namespace {

constexpr double kMassTol = 1e-9;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::int64_t joint_label(std::int64_t nx, std::int64_t ny) { return nx * (std::int64_t{1} << 24) + ny; }

void check_trials(std::int64_t trials, std::int64_t minimum) {
    if (trials < minimum) {
        throw Error(Errc::InsufficientTrials, fmt::format("{} trials requested, at least {} required", trials, minimum));
    }
}

}  // namespace

std::map<std::int64_t, double> coupled_weights(const CoupledPart& part) {
    return std::visit(overloaded{
                          [](const NullPart&) { return std::map<std::int64_t, double>{}; },
                          [](const GraphSum& g) { return g.weights; },
                          [](const SingleGraph& g) { return std::map<std::int64_t, double>{{g.lag, g.mass}}; },
                      },
                      part);
}

double coupled_mass(const CoupledPart& part) {
    double m = 0.0;
    for (const auto& [lag, c] : coupled_weights(part)) m += c;
    return m;
}

void JoiningSpec::validate(const BaseSystem& system) const {
    auto bad = [&](const std::string& why) {
        throw Error(Errc::MassInconsistency, fmt::format("joining '{}': {}", name, why));
    };
    if (!(a >= 0.0 && a <= 1.0)) bad(fmt::format("a = {} outside [0, 1]", a));
    if (!(a_prime >= 0.0 && a_prime <= 1.0)) bad(fmt::format("a' = {} outside [0, 1]", a_prime));
    if (!(nu_scale > 0.0) || !std::isfinite(nu_scale)) bad(fmt::format("nu scale {} must be positive", nu_scale));
    double m = 0.0;
    for (const auto& [lag, c] : coupled_weights(gamma)) {
        if (!(c >= 0.0) || !std::isfinite(c)) bad(fmt::format("coupled mass {} at lag {} is negative", c, lag));
        if (lag < 0 && !system.invertible()) {
            throw Error(Errc::NotInvertible, fmt::format("lag {} needs an invertible base", lag));
        }
        if (std::abs(lag) > system.preimage_cap()) {
            throw Error(Errc::CapExceeded, fmt::format("lag {} exceeds the cap {}", lag, system.preimage_cap()));
        }
        m += c;
    }
    if (std::abs(a + m - 1.0) > kMassTol) bad(fmt::format("X marginal mass a + sum c = {} differs from 1", a + m));
    if (std::abs(a_prime * nu_scale + m - nu_scale) > kMassTol * std::max(1.0, nu_scale)) {
        bad(fmt::format("Y marginal mass a' s + sum c = {} differs from s = {}", a_prime * nu_scale + m, nu_scale));
    }
}

JoiningSpec product_spec() { return {"product", 1.0, 1.0, 1.0, NullPart{}}; }

JoiningSpec diagonal_spec() { return {"diagonal", 0.0, 0.0, 1.0, SingleGraph{0, 1.0}}; }

JoiningSpec graph_family_spec(std::string name, double a, std::map<std::int64_t, double> weights) {
    return {std::move(name), a, a, 1.0, GraphSum{std::move(weights)}};
}

JoiningSpec single_graph_spec(std::int64_t lag) {
    return {fmt::format("graph-lag{}", lag), 0.0, 0.0, 1.0, SingleGraph{lag, 1.0}};
}

std::vector<JoiningSpec> builtin_joining_specs() {
    return {
        product_spec(),
        diagonal_spec(),
        graph_family_spec("family-a0.5-c0", 0.5, {{0, 0.5}}),
        graph_family_spec("family-a0.4-c1c2", 0.4, {{1, 0.3}, {2, 0.3}}),
        single_graph_spec(1),
    };
}

JoiningSpec lift_c1c2(const CoupledPart& gamma, double c1, double c2) {
    if (!(c1 > 0.0) || !(c2 > 0.0) || !std::isfinite(c1) || !std::isfinite(c2)) {
        throw Error(Errc::BadScales, fmt::format("scales must be positive, got c1 = {}, c2 = {}", c1, c2));
    }
    const double m = coupled_mass(gamma);
    if (std::abs(m - c1) > kMassTol * std::max(1.0, c1)) {
        throw Error(Errc::BadScales, fmt::format("coupled mass {} does not match c1 = {}", m, c1));
    }
    const double big = std::max(c1, c2);
    GraphSum scaled;
    for (const auto& [lag, c] : coupled_weights(gamma)) scaled.weights[lag] = c / big;

    JoiningSpec spec;
    spec.name = fmt::format("lift({},{})", c1, c2);
    spec.gamma = std::move(scaled);
    // The coupled part has X-marginal (c1/big) mu and Y-marginal (c2/big) nu,
    // both equal to (c1/big) mu, hence nu = (c1/c2) mu.
    spec.nu_scale = c1 / c2;
    spec.a = 1.0 - c1 / big;
    spec.a_prime = 1.0 - c2 / big;
    return spec;
}

JoiningSample sample_joining(const JoiningSpec& spec, const BaseSystem& system, const IntervalSet& window_x,
                             const IntervalSet& window_y, const SeededSampler& sampler, double intensity_scale) {
    spec.validate(system);
    if (!(intensity_scale > 0.0)) throw Error(Errc::InvalidArgument, "intensity scale must be positive");
    auto rng = sampler.engine();
    JoiningSample out;
    out.x.window = window_x;
    out.y.window = window_y;

    if (spec.a > 0.0) {
        out.x.points = sample_poisson(system, window_x, rng, spec.a * intensity_scale).points;
    }
    for (const auto& [lag, c] : coupled_weights(spec.gamma)) {
        if (c <= 0.0) continue;
        const IntervalSet reaches_y = system.preimage(window_y, lag);
        const auto cfg = sample_poisson(system, window_x.unite(reaches_y), rng, c * intensity_scale);
        for (double p : cfg.points) {
            const bool in_x = window_x.contains(p);
            if (in_x) out.x.points.push_back(p);
            if (!reaches_y.contains(p)) continue;
            const double q = system.apply(p, lag);
            out.y.points.push_back(q);
            if (in_x) out.pairs.emplace_back(p, q);
        }
    }
    const double y_alone = spec.a_prime * spec.nu_scale;
    if (y_alone > 0.0) {
        const auto cfg = sample_poisson(system, window_y, rng, y_alone * intensity_scale);
        out.y.points.insert(out.y.points.end(), cfg.points.begin(), cfg.points.end());
    }
    std::sort(out.x.points.begin(), out.x.points.end());
    std::sort(out.y.points.begin(), out.y.points.end());
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
}

CrossCovariance cross_covariance_test(const JoiningSpec& spec, const BaseSystem& system, const IntervalSet& a,
                                      const IntervalSet& b, std::int64_t trials, const SeededSampler& sampler,
                                      Parallelism par) {
    check_trials(trials, kMinCovarianceTrials);
    spec.validate(system);
    std::vector<double> nx(static_cast<std::size_t>(trials));
    std::vector<double> ny(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), par, [&](std::size_t t) {
        const auto s = sample_joining(spec, system, a, b, sampler.substream(t));
        nx[t] = static_cast<double>(count(s.x, a));
        ny[t] = static_cast<double>(count(s.y, b));
    });
    CrossCovariance out;
    const auto est = jackknife_covariance(nx, ny);
    out.estimate = est.estimate;
    out.std_error = est.std_error;
    for (const auto& [lag, c] : coupled_weights(spec.gamma)) out.exact += c * intersection_measure(system, a, b, lag);
    out.z = z_score(out.estimate, out.std_error, out.exact);
    return out;
}

bool MarginalReport::passes() const noexcept { return x.p_value > kGofPValue && y.p_value > kGofPValue; }

MarginalReport marginal_test(const JoiningSpec& spec, const BaseSystem& system, const IntervalSet& a,
                             std::int64_t trials, const SeededSampler& sampler, Parallelism par) {
    check_trials(trials, kMinMarginalTrials);
    spec.validate(system);
    std::vector<std::int64_t> nx(static_cast<std::size_t>(trials));
    std::vector<std::int64_t> ny(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), par, [&](std::size_t t) {
        const auto s = sample_joining(spec, system, a, a, sampler.substream(t));
        nx[t] = count(s.x, a);
        ny[t] = count(s.y, a);
    });
    const double mu_a = system.measure(a);
    return {poisson_goodness_of_fit(nx, mu_a), poisson_goodness_of_fit(ny, spec.nu_scale * mu_a)};
}

bool SuperpositionReport::passes() const noexcept { return test.p_value > kGofPValue; }

SuperpositionReport id_superposition_test(const JoiningSpec& spec, const BaseSystem& system, const IntervalSet& a,
                                          int n, std::int64_t trials, const SeededSampler& sampler,
                                          Parallelism par, SuperpositionMode mode) {
    if (n < 2 || n > 8) throw Error(Errc::InvalidArgument, fmt::format("n = {} outside 2..8", n));
    check_trials(trials, kMinCovarianceTrials);
    spec.validate(system);
    const auto whole_stream = sampler.substream(0);
    const auto parts_stream = sampler.substream(1);
    std::vector<std::int64_t> whole(static_cast<std::size_t>(trials));
    std::vector<std::int64_t> parts(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), par, [&](std::size_t t) {
        const auto s = sample_joining(spec, system, a, a, whole_stream.substream(t));
        whole[t] = joint_label(count(s.x, a), count(s.y, a));
        std::int64_t sx = 0;
        std::int64_t sy = 0;
        const auto trial_stream = parts_stream.substream(t);
        for (int j = 0; j < n; ++j) {
            const auto p = sample_joining(spec, system, a, a, trial_stream.substream(static_cast<std::uint64_t>(j)),
                                          1.0 / n);
            const auto px = count(p.x, a);
            const auto py = count(p.y, a);
            if (mode == SuperpositionMode::Sum) {
                sx += px;
                sy += py;
            } else {
                sx = std::max(sx, px);
                sy = std::max(sy, py);
            }
        }
        parts[t] = joint_label(sx, sy);
    });
    return {homogeneity_test(whole, parts)};
}

std::optional<Pairing> reconstruct_from_marginals(const Configuration& x, const Configuration& y,
                                                  const BaseSystem& system, std::int64_t lag, double tol) {
    std::vector<double> xs = x.points;
    std::vector<double> ys = y.points;
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    for (std::size_t i = 1; i < xs.size(); ++i) {
        if (xs[i] - xs[i - 1] <= tol) {
            throw Error(Errc::AmbiguousPairing, fmt::format("X point {} occurs more than once", xs[i]));
        }
    }
    if (xs.size() != ys.size()) return std::nullopt;

    std::vector<bool> used(ys.size(), false);
    Pairing out;
    out.reserve(xs.size());
    for (double p : xs) {
        const double target = system.apply(p, lag);
        auto lo = std::lower_bound(ys.begin(), ys.end(), target - tol);
        auto hi = std::upper_bound(lo, ys.end(), target + tol);
        if (lo == hi) return std::nullopt;
        if (hi - lo > 1) {
            throw Error(Errc::AmbiguousPairing, fmt::format("{} Y points lie within {} of T^{} {}", hi - lo, tol, lag, p));
        }
        const auto idx = static_cast<std::size_t>(lo - ys.begin());
        if (used[idx]) throw Error(Errc::AmbiguousPairing, fmt::format("Y point {} matched twice", *lo));
        used[idx] = true;
        out.emplace_back(p, *lo);
    }
    return out;
}

JoiningSpec parse_joining(const KvDocument& doc) {
    JoiningSpec spec;
    spec.name = "custom";
    GraphSum sum;
    std::optional<SingleGraph> single;
    const KvEntry* graph_entry = nullptr;
    for (const KvEntry* e : doc.with_prefix("joining.")) {
        const std::string_view key = e->key;
        if (key == "joining.name") {
            spec.name = e->value;
        } else if (key == "joining.a") {
            spec.a = parse_real(*e);
        } else if (key == "joining.a_prime") {
            spec.a_prime = parse_real(*e);
        } else if (key == "joining.nu_scale") {
            spec.nu_scale = parse_real(*e);
        } else if (key == "joining.graph.lag") {
            if (!single) single = SingleGraph{};
            single->lag = parse_integer(*e);
            graph_entry = e;
        } else if (key == "joining.graph.mass") {
            if (!single) single = SingleGraph{};
            single->mass = parse_real(*e);
            graph_entry = e;
        } else if (key.starts_with("joining.c.")) {
            const auto suffix = key.substr(std::string_view("joining.c.").size());
            long long lag = 0;
            const auto [ptr, ec] = std::from_chars(suffix.data(), suffix.data() + suffix.size(), lag);
            if (ec != std::errc{} || ptr != suffix.data() + suffix.size()) throw_at(*e, "lag suffix must be an integer");
            sum.weights[lag] = parse_real(*e);
        } else {
            throw_at(*e, "unknown joining key");
        }
    }
    if (single && !sum.weights.empty()) throw_at(*graph_entry, "joining.graph.* cannot be combined with joining.c.*");
    if (single) {
        spec.gamma = *single;
    } else if (!sum.weights.empty()) {
        spec.gamma = std::move(sum);
    }
    return spec;
}

void write_joining(KvDocument& doc, const JoiningSpec& spec) {
    doc.set("joining.name", spec.name);
    doc.set("joining.a", fmt::format("{:.17g}", spec.a));
    doc.set("joining.a_prime", fmt::format("{:.17g}", spec.a_prime));
    doc.set("joining.nu_scale", fmt::format("{:.17g}", spec.nu_scale));
    std::visit(overloaded{
                   [](const NullPart&) {},
                   [&](const GraphSum& g) {
                       for (const auto& [lag, c] : g.weights) doc.set(fmt::format("joining.c.{}", lag), fmt::format("{:.17g}", c));
                   },
                   [&](const SingleGraph& g) {
                       doc.set("joining.graph.lag", fmt::format("{}", g.lag));
                       doc.set("joining.graph.mass", fmt::format("{:.17g}", g.mass));
                   },
               },
               spec.gamma);
}

bool JoiningBatteryReport::passes() const noexcept {
    return std::all_of(rows.begin(), rows.end(), [](const JoiningCheckRow& r) { return r.pass; });
}

JoiningBatteryReport joining_structure_battery(const BaseSystem& system, std::span<const JoiningSpec> specs,
                                               const IntervalSet& marginal_set,
                                               std::span<const std::pair<IntervalSet, IntervalSet>> pairs,
                                               std::int64_t trials, const SeededSampler& sampler,
                                               Parallelism par) {
    JoiningBatteryReport report;
    const auto m_set = marginal_set.to_string();
    for (std::size_t i = 0; i < specs.size(); ++i) {
        const auto& spec = specs[i];
        const auto stream = sampler.substream(i);

        const auto marg = marginal_test(spec, system, marginal_set, trials, stream.substream(0), par);
        report.rows.push_back({spec.name, "marginal-x", m_set, "", 0, 0, system.measure(marginal_set), 0,
                               marg.x.p_value, marg.x.p_value > kGofPValue});
        report.rows.push_back({spec.name, "marginal-y", m_set, "", 0, 0, spec.nu_scale * system.measure(marginal_set),
                               0, marg.y.p_value, marg.y.p_value > kGofPValue});

        for (std::size_t j = 0; j < pairs.size(); ++j) {
            const auto& [a, b] = pairs[j];
            const auto cc = cross_covariance_test(spec, system, a, b, trials, stream.substream(1).substream(j), par);
            report.rows.push_back({spec.name, "covariance", a.to_string(), b.to_string(), cc.estimate, cc.std_error,
                                   cc.exact, cc.z, 1.0, std::abs(cc.z) <= kInconsistentZ});
        }

        for (int n = 2; n <= 4; ++n) {
            const auto sp = id_superposition_test(spec, system, marginal_set, n, trials,
                                                  stream.substream(2).substream(static_cast<std::uint64_t>(n)), par);
            report.rows.push_back({spec.name, fmt::format("superposition-n{}", n), m_set, m_set, sp.test.statistic, 0,
                                   0, 0, sp.test.p_value, sp.passes()});
        }
        const auto control = id_superposition_test(spec, system, marginal_set, 2, trials, stream.substream(3), par,
                                                   SuperpositionMode::CorruptedMax);
        report.rows.push_back({spec.name, "corrupted-max-control", m_set, m_set, control.test.statistic, 0, 0, 0,
                               control.test.p_value, !control.passes()});
    }
    return report;
}

RoundTripReport reconstruction_round_trips(const BaseSystem& system, const IntervalSet& window_x,
                                           std::span<const std::int64_t> lags, std::int64_t attempts,
                                           const SeededSampler& sampler) {
    if (lags.empty()) throw Error(Errc::InvalidArgument, "need at least one lag");
    RoundTripReport report;
    report.attempts = attempts;
    std::optional<JoiningSample> nonempty;
    std::int64_t nonempty_lag = 0;
    for (std::int64_t t = 0; t < attempts; ++t) {
        const auto lag = lags[static_cast<std::size_t>(t) % lags.size()];
        const auto window_y = system.preimage(window_x, -lag);
        const auto s = sample_joining(single_graph_spec(lag), system, window_x, window_y,
                                      sampler.substream(static_cast<std::uint64_t>(t)));
        report.points += static_cast<std::int64_t>(s.x.size());
        std::optional<Pairing> rebuilt;
        try {
            rebuilt = reconstruct_from_marginals(s.x, s.y, system, lag);
        } catch (const Error& e) {
            if (report.first_failure.empty()) report.first_failure = fmt::format("attempt {}: {}", t, e.what());
            continue;
        }
        if (rebuilt && *rebuilt == s.pairs) {
            ++report.exact_round_trips;
        } else if (report.first_failure.empty()) {
            report.first_failure = fmt::format("attempt {}: pairing differs from the sampled one", t);
        }
        if (!nonempty && s.x.size() > 0) {
            nonempty = s;
            nonempty_lag = lag;
        }
    }
    if (nonempty) {
        auto dup = nonempty->x;
        dup.points.push_back(dup.points.front());
        std::sort(dup.points.begin(), dup.points.end());
        try {
            (void)reconstruct_from_marginals(dup, nonempty->y, system, nonempty_lag);
        } catch (const Error& e) {
            report.duplicate_control_raised = e.code() == Errc::AmbiguousPairing;
        }
    }
    return report;
}

void write_joining_battery_csv(std::ostream& os, const JoiningBatteryReport& report) {
    os << "spec,check,set_a,set_b,estimate,std_error,exact_oracle,z_score,p_value,pass\n";
    for (const auto& r : report.rows) {
        os << fmt::format("{},{},\"{}\",\"{}\",{},{},{},{},{},{}\n", r.spec, r.check, r.set_a, r.set_b,
                          csv::real(r.estimate), csv::real(r.std_error), csv::real(r.exact), csv::real(r.z),
                          csv::real(r.p_value), int{r.pass});
    }
}

}  // namespace psusp
