#include "runner.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "psusp/csv.hpp"
#include "psusp/errors.hpp"
#include "psusp/fock.hpp"
#include "psusp/joinings.hpp"
#include "psusp/mixing.hpp"
#include "psusp/poisson.hpp"
#include "psusp/spectral.hpp"

namespace psusp::cli {

namespace {

// Typed access to a config document that remembers which keys were read, so
// typos surface as errors instead of silently falling back to defaults.
class Config {
public:
    Config(const KvDocument& doc, const RunOptions& options) : doc_(doc), options_(options) {
        use("experiment");
    }

    const KvEntry* find(std::string_view key) {
        use(key);
        return doc_.find(key);
    }
    const KvEntry& require(std::string_view key) {
        use(key);
        return doc_.require(key);
    }

    double real(std::string_view key, double fallback) {
        const auto* e = find(key);
        return e ? parse_real(*e) : fallback;
    }
    std::int64_t integer(std::string_view key, std::int64_t fallback) {
        const auto* e = find(key);
        return e ? parse_integer(*e) : fallback;
    }
    std::int64_t positive(std::string_view key, std::int64_t fallback) {
        const auto* e = find(key);
        if (!e) return fallback;
        const auto v = parse_integer(*e);
        if (v < 1) throw_at(*e, "must be a positive integer");
        return v;
    }
    std::vector<std::int64_t> list(std::string_view key, std::vector<std::int64_t> fallback) {
        const auto* e = find(key);
        if (!e) return fallback;
        std::vector<std::int64_t> out;
        for (auto v : parse_integer_list(*e)) out.push_back(v);
        if (out.empty()) throw_at(*e, "list is empty");
        return out;
    }
    IntervalSet set(std::string_view key) { return parse_set(require(key)); }
    std::string text(std::string_view key, std::string fallback) {
        const auto* e = find(key);
        return e ? e->value : fallback;
    }

    BaseSystem system() {
        use("system");
        use("integer.step");
        use("rankone.cuts");
        use("rankone.base_width");
        allow_prefix("rankone.spacers.");
        return parse_system(doc_);
    }

    std::uint64_t seed() {
        const auto* e = find("seed");
        if (options_.seed) return *options_.seed;
        if (!e) return 1;
        const auto v = parse_integer(*e);
        if (v < 0) throw_at(*e, "seed must be nonnegative");
        return static_cast<std::uint64_t>(v);
    }
    std::int64_t trials(std::int64_t fallback) {
        const auto* e = find("trials");
        if (options_.trials) return *options_.trials;
        if (!e) return fallback;
        const auto v = parse_integer(*e);
        if (v < 1) throw_at(*e, "trials must be positive");
        return v;
    }

    void allow_prefix(std::string prefix) { prefixes_.push_back(std::move(prefix)); }

    /// Rejects keys that no reader asked for.
    void finish() const {
        for (const auto& e : doc_.entries()) {
            if (used_.count(e.key)) continue;
            const bool prefixed = std::any_of(prefixes_.begin(), prefixes_.end(),
                                              [&](const std::string& p) { return e.key.starts_with(p); });
            if (!prefixed) throw_at(e, "unknown key for this experiment");
        }
    }

private:
    void use(std::string_view key) { used_.emplace(key); }

    const KvDocument& doc_;
    const RunOptions& options_;
    std::set<std::string, std::less<>> used_;
    std::vector<std::string> prefixes_;
};

struct Outcome {
    Verdict verdict = Verdict::Inconclusive;
    std::string report_csv;
    std::string verdict_body;
    std::vector<std::pair<std::string, std::string>> extra_files;
    bool body_has_verdict = false;
};

Verdict z_verdict(std::span<const double> z) {
    for (double v : z) {
        if (!(std::abs(v) <= kInconsistentZ)) return Verdict::Inconsistent;
    }
    return Verdict::Consistent;
}

Verdict pass_verdict(bool ok) { return ok ? Verdict::Consistent : Verdict::Inconsistent; }

Parallelism par(const RunOptions& o) { return Parallelism{o.workers}; }

std::string thresholds() {
    return fmt::format("thresholds = inconsistent when |z| > {}; goodness of fit passes when p > {}\n", kInconsistentZ,
                       kGofPValue);
}

Outcome simulate(Config& cfg, const RunOptions& o) {
    const auto system = cfg.system();
    const auto a = cfg.set("set");
    const auto lags = cfg.list("lags", {0, 1, 2, 3, 4, 5, 6, 7, 8});
    const auto dump = cfg.integer("dump", 10);
    const auto seed = cfg.seed();
    const auto trials = cfg.trials(10'000);
    cfg.finish();

    const SeededSampler sampler{seed, 0};
    std::vector<MomentRow> rows;
    std::vector<double> z;
    for (std::size_t i = 0; i < lags.size(); ++i) {
        const auto n = lags[i];
        const auto est = estimate_count_covariance(system, a, a, n, trials, sampler.substream(i), par(o));
        const double exact = intersection_measure(system, a, a, n);
        rows.push_back({n, est.estimate, est.std_error, exact, z_score(est.estimate, est.std_error, exact)});
        z.push_back(rows.back().z);
    }
    std::vector<Configuration> configs;
    const SeededSampler dump_sampler{seed, 1};
    for (std::int64_t t = 0; t < dump; ++t) {
        configs.push_back(sample_poisson(system, a, dump_sampler.substream(static_cast<std::uint64_t>(t))));
    }

    Outcome out;
    std::ostringstream csv;
    write_moments_csv(csv, rows);
    out.report_csv = csv.str();
    std::ostringstream cfg_csv;
    write_configurations_csv(cfg_csv, configs);
    out.extra_files.emplace_back("configurations.csv", cfg_csv.str());
    out.verdict = z_verdict(z);
    double worst = 0.0;
    for (double v : z) worst = std::max(worst, std::abs(v));
    out.verdict_body = fmt::format("system = {}\nset = {}\nmax_abs_z = {}\n{}", system.id(), a.to_string(),
                                   csv::real(worst), thresholds());
    return out;
}

Outcome from_mixing(const MixingReport& report) {
    Outcome out;
    std::ostringstream csv;
    write_report_csv(csv, report);
    out.report_csv = csv.str();
    std::ostringstream v;
    write_verdict(v, report);
    out.verdict_body = v.str();
    out.verdict = report.verdict;
    out.body_has_verdict = true;
    return out;
}

Outcome zero_type(Config& cfg, const RunOptions& o) {
    const auto system = cfg.system();
    const auto a = cfg.set("set");
    const auto max_lag = cfg.integer("max_lag", 8);
    const auto seed = cfg.seed();
    const auto trials = cfg.trials(10'000);
    cfg.finish();
    return from_mixing(zero_type_experiment(system, a, max_lag, trials, {seed, 0}, par(o)));
}

Outcome rigidity(Config& cfg, const RunOptions& o) {
    const auto system = cfg.system();
    const auto a = cfg.set("set");
    const auto candidates = cfg.list("candidates", {0});
    const auto eps = cfg.real("epsilon", 0.2);
    const auto seed = cfg.seed();
    const auto trials = cfg.trials(10'000);
    cfg.finish();
    return from_mixing(rigidity_experiment(system, a, candidates, eps, trials, {seed, 0}, par(o)));
}

Outcome ergodic(Config& cfg, const RunOptions& o) {
    const auto system = cfg.system();
    const auto a = cfg.set("set");
    const auto horizon = cfg.integer("horizon", 512);
    const auto seed = cfg.seed();
    const auto trials = cfg.trials(200);
    cfg.finish();
    return from_mixing(ergodic_average_experiment(system, a, horizon, trials, {seed, 0}, par(o)));
}

Outcome dissipative(Config& cfg, const RunOptions& o) {
    const auto system = cfg.system();
    const auto w = cfg.set("set");
    const auto lags = cfg.list("lags", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10});
    const auto seed = cfg.seed();
    const auto trials = cfg.trials(10'000);
    cfg.finish();
    return from_mixing(dissipative_independence_experiment(system, w, lags, trials, {seed, 0}, par(o)));
}

// `uniform`, `spike <theta>` or `spikes <theta> <theta> ...` (equal masses).
CircleMeasure parse_measure(const KvEntry& e, std::size_t grid) {
    std::istringstream in(e.value);
    std::string kind;
    in >> kind;
    if (kind == "uniform") return CircleMeasure::uniform(grid);
    if (kind == "spike" || kind == "spikes") {
        std::vector<double> angles;
        for (std::string tok; in >> tok;) {
            KvEntry one{e.key, tok, e.line};
            angles.push_back(parse_real(one));
        }
        if (angles.empty()) throw_at(e, "spike needs at least one angle");
        if (kind == "spike" && angles.size() != 1) throw_at(e, "spike takes one angle; use spikes for several");
        std::vector<double> w(grid, 0.0);
        for (double t : angles) {
            const auto m = CircleMeasure::spike_at(grid, t, 1.0 / static_cast<double>(angles.size()));
            for (std::size_t j = 0; j < grid; ++j) w[j] += m.weight(j);
        }
        return CircleMeasure(std::move(w));
    }
    throw_at(e, fmt::format("unknown measure '{}' (expected uniform, spike or spikes)", kind));
}

std::string measure_csv(const CircleMeasure& m) {
    std::ostringstream os;
    write_circle_measure_csv(os, m);
    return os.str();
}

Outcome exp_type(Config& cfg, const RunOptions&) {
    const auto grid = static_cast<std::size_t>(cfg.positive("grid", kDefaultGridSize));
    const auto& me = cfg.require("measure");
    const auto order = static_cast<int>(cfg.positive("order", 17));
    const auto tail_tol = cfg.real("tail_tol", 1e-12);
    const auto exclude = cfg.text("exclude_zero_atom", "false");
    if (exclude != "true" && exclude != "false") throw_at(*cfg.find("exclude_zero_atom"), "expected true or false");
    (void)cfg.seed();
    cfg.finish();

    const auto sigma = parse_measure(me, grid).normalized();
    const auto result = exp_spectral_type(sigma, order, tail_tol, exclude == "true");
    double partial = 0.0;
    double term = 1.0;
    for (int k = 1; k <= result.order; ++k) {
        term /= k;
        partial += term;
    }
    const double base_mass = exclude == "true" ? sigma.without_zero_atom().total_mass() : 1.0;
    double expected_mass = 0.0;
    term = 1.0;
    for (int k = 1; k <= result.order; ++k) {
        term *= base_mass / k;
        expected_mass += term;
    }
    const double mass_error = std::abs(result.measure.total_mass() - expected_mass);
    bool ok = mass_error <= 1e-10 && result.tail_bound < tail_tol;

    Outcome out;
    out.report_csv = measure_csv(result.measure);
    std::string body = fmt::format("order = {}\ntail_bound = {}\nmass = {}\nexpected_mass = {}\nmass_error = {}\n",
                                   result.order, csv::real(result.tail_bound), csv::real(result.measure.total_mass()),
                                   csv::real(expected_mass), csv::real(mass_error));
    if (me.value == "uniform" && exclude == "false") {
        double worst = 0.0;
        const double want = (std::numbers::e - 1.0) / static_cast<double>(grid);
        for (std::size_t j = 0; j < grid; ++j) worst = std::max(worst, std::abs(result.measure.weight(j) - want));
        body += fmt::format("uniform_bin_error_vs_e_minus_1 = {}\n", csv::real(worst));
        ok = ok && worst <= 1e-10;
    }
    body += fmt::format("partial_exponential_sum = {}\n", csv::real(partial));
    out.verdict = pass_verdict(ok);
    out.verdict_body = body + "thresholds = mass within 1e-10; tail bound below tail_tol\n";
    return out;
}

Outcome singularity(Config& cfg, const RunOptions&) {
    const auto grid = static_cast<std::size_t>(cfg.positive("grid", kDefaultGridSize));
    const auto& me = cfg.require("measure");
    const auto order = static_cast<int>(cfg.positive("order", 17));
    const auto& expect = cfg.require("expect");
    if (expect.value != "singular" && expect.value != "overlapping") throw_at(expect, "expected singular or overlapping");
    (void)cfg.seed();
    cfg.finish();

    const auto sigma = parse_measure(me, grid).normalized();
    const auto check = convolution_singularity_check(sigma, order);
    const auto tail = convolution_series(sigma, 2, order).normalized();
    Outcome out;
    out.report_csv = measure_csv(tail);
    out.verdict = pass_verdict(check.singular_at_resolution == (expect.value == "singular"));
    out.verdict_body = fmt::format("overlap = {}\nleakage_bound = {}\nsingular_at_resolution = {}\nexpected = {}\n",
                                   csv::real(check.overlap), csv::real(check.leakage_bound),
                                   check.singular_at_resolution, expect.value);
    return out;
}

Outcome sequence(Config& cfg, const RunOptions&) {
    const auto system = cfg.system();
    const auto a = cfg.set("set");
    const auto max_lag = cfg.integer("max_lag", 8);
    const auto grid = static_cast<std::size_t>(cfg.positive("grid", kDefaultGridSize));
    (void)cfg.seed();
    cfg.finish();

    const auto seq = spectral_sequence(system, a, max_lag);
    const auto m = measure_from_sequence(seq, grid);
    Outcome out;
    out.report_csv = measure_csv(m);
    const double mass_error = std::abs(m.total_mass() - seq.front());
    out.verdict = pass_verdict(mass_error <= 1e-10);
    out.verdict_body = fmt::format("system = {}\nsequence = {}\ntoeplitz_min_eigenvalue = {}\nmass_error = {}\n",
                                   system.id(), fmt::join(seq, " "), csv::real(toeplitz_min_eigenvalue(seq)),
                                   csv::real(mass_error));
    return out;
}

Outcome fock_battery(Config& cfg, const RunOptions&) {
    const auto cases = static_cast<int>(cfg.positive("cases", 20));
    const auto max_d = static_cast<int>(cfg.positive("max_d", 4));
    const auto max_k = static_cast<int>(cfg.positive("max_k", 4));
    const auto seed = cfg.seed();
    cfg.finish();

    const auto report = fock_property_battery({seed, 0}, cases, max_d, max_k);
    Outcome out;
    std::ostringstream csv;
    write_fock_battery_csv(csv, report);
    out.report_csv = csv.str();
    out.verdict = pass_verdict(report.passes());
    out.verdict_body = fmt::format("cases = {}\ntolerance = {}\n", report.rows.size(), report.tolerance);
    return out;
}

Outcome ageev(Config& cfg, const RunOptions&) {
    const auto d = static_cast<int>(cfg.positive("random_phases", 3));
    const auto k = static_cast<int>(cfg.positive("chaos_cap", 4));
    const auto theta = cfg.real("engineered_theta", 1.0);
    const auto seed = cfg.seed();
    cfg.finish();

    auto rng = SeededSampler{seed, 0}.engine();
    std::vector<double> phases;
    for (int i = 0; i < d; ++i) phases.push_back(2.0 * std::numbers::pi * rng.uniform());
    const auto generic = ageev_check(phases, k);
    const std::vector<double> engineered{theta, 2.0 * theta};
    const auto collision = ageev_check(engineered, 2);

    Outcome out;
    std::ostringstream csv;
    csv << "case,K,phases,simple_per_level,cross_level_disjoint,expected_cross_level_disjoint,pass\n";
    std::vector<std::string> ph;
    for (double p : phases) ph.push_back(csv::real(p));
    const bool generic_ok = generic.simple_per_level && generic.cross_level_disjoint;
    csv << fmt::format("generic,{},{},{},{},1,{}\n", k, fmt::join(ph, " "), int{generic.simple_per_level},
                       int{generic.cross_level_disjoint}, int{generic_ok});
    const bool control_ok = !collision.cross_level_disjoint;
    csv << fmt::format("engineered,2,{} {},{},{},0,{}\n", csv::real(theta), csv::real(2.0 * theta),
                       int{collision.simple_per_level}, int{collision.cross_level_disjoint}, int{control_ok});
    out.report_csv = csv.str();
    out.verdict = pass_verdict(generic_ok && control_ok);
    out.verdict_body = fmt::format("engineered_collision = {}\n", collision.first_collision);
    return out;
}

std::vector<std::pair<IntervalSet, IntervalSet>> parse_pairs(Config& cfg, const BaseSystem& system) {
    std::vector<std::pair<IntervalSet, IntervalSet>> pairs;
    for (int i = 0;; ++i) {
        const auto* a = cfg.find(fmt::format("pair.{}.a", i));
        const auto* b = cfg.find(fmt::format("pair.{}.b", i));
        if (!a && !b) break;
        if (!a || !b) throw_at(a ? *a : *b, "pair needs both .a and .b");
        pairs.emplace_back(parse_set(*a), parse_set(*b));
    }
    if (!pairs.empty()) return pairs;
    if (system.is_counting()) {
        pairs.emplace_back(IntervalSet::integers({0}), IntervalSet::integers({0}));
        pairs.emplace_back(IntervalSet::integers({0}), IntervalSet::integers({1}));
        pairs.emplace_back(IntervalSet::integers({0, 1}), IntervalSet::integers({1, 2}));
        pairs.emplace_back(IntervalSet::integers({0}), IntervalSet::integers({2}));
        return pairs;
    }
    pairs.emplace_back(IntervalSet::interval(0, 1), IntervalSet::interval(0, 1));
    pairs.emplace_back(IntervalSet::interval(-1, 1), IntervalSet::interval(0, 2));
    pairs.emplace_back(IntervalSet::interval(0.5, 2), IntervalSet::interval(-1, 0.5));
    pairs.emplace_back(IntervalSet::interval(-2, -0.5), IntervalSet::interval(-1, 1));
    return pairs;
}

std::vector<JoiningSpec> parse_specs(Config& cfg, const KvDocument& doc) {
    cfg.allow_prefix("joining.");
    if (doc.with_prefix("joining.").empty()) return builtin_joining_specs();
    return {parse_joining(doc)};
}

std::string battery_body(const JoiningBatteryReport& report) {
    std::size_t failed = 0;
    for (const auto& r : report.rows) failed += r.pass ? 0 : 1;
    return fmt::format("checks = {}\nfailed = {}\n{}", report.rows.size(), failed, thresholds());
}

Outcome joining_structure(Config& cfg, const RunOptions& o, const KvDocument& doc) {
    const auto system = cfg.system();
    const auto a = cfg.set("set");
    const auto pairs = parse_pairs(cfg, system);
    const auto specs = parse_specs(cfg, doc);
    const auto seed = cfg.seed();
    const auto trials = cfg.trials(kMinMarginalTrials);
    cfg.finish();

    const auto report = joining_structure_battery(system, specs, a, pairs, trials, {seed, 0}, par(o));
    Outcome out;
    std::ostringstream csv;
    write_joining_battery_csv(csv, report);
    out.report_csv = csv.str();
    out.verdict = pass_verdict(report.passes());
    out.verdict_body = battery_body(report);
    return out;
}

Outcome joining_covariance(Config& cfg, const RunOptions& o, const KvDocument& doc) {
    const auto system = cfg.system();
    const auto pairs = parse_pairs(cfg, system);
    const auto specs = parse_specs(cfg, doc);
    const auto seed = cfg.seed();
    const auto trials = cfg.trials(10'000);
    cfg.finish();

    JoiningBatteryReport report;
    const SeededSampler sampler{seed, 0};
    for (std::size_t i = 0; i < specs.size(); ++i) {
        for (std::size_t j = 0; j < pairs.size(); ++j) {
            const auto& [a, b] = pairs[j];
            const auto cc = cross_covariance_test(specs[i], system, a, b, trials, sampler.substream(i).substream(j),
                                                  par(o));
            report.rows.push_back({specs[i].name, "covariance", a.to_string(), b.to_string(), cc.estimate,
                                   cc.std_error, cc.exact, cc.z, 1.0, std::abs(cc.z) <= kInconsistentZ});
        }
    }
    Outcome out;
    std::ostringstream csv;
    write_joining_battery_csv(csv, report);
    out.report_csv = csv.str();
    out.verdict = pass_verdict(report.passes());
    out.verdict_body = battery_body(report);
    return out;
}

Outcome reconstruction(Config& cfg, const RunOptions&) {
    const auto system = cfg.system();
    const auto w = cfg.set("set");
    const auto lags = cfg.list("lags", {1, 2, 3});
    const auto seed = cfg.seed();
    const auto trials = cfg.trials(1000);
    cfg.finish();

    const auto report = reconstruction_round_trips(system, w, lags, trials, {seed, 0});
    Outcome out;
    out.report_csv = fmt::format("attempts,exact_round_trips,points,duplicate_control_raised\n{},{},{},{}\n",
                                 report.attempts, report.exact_round_trips, report.points,
                                 int{report.duplicate_control_raised});
    out.verdict = pass_verdict(report.passes());
    out.verdict_body = report.first_failure.empty() ? "" : fmt::format("first_failure = {}\n", report.first_failure);
    return out;
}

struct ExperimentEntry {
    std::string_view name;
    std::string_view subcommand;
    std::function<Outcome(Config&, const RunOptions&, const KvDocument&)> body;
};

template <class F>
auto plain(F f) {
    return [f](Config& c, const RunOptions& o, const KvDocument&) { return f(c, o); };
}

const std::vector<ExperimentEntry>& registry() {
    static const std::vector<ExperimentEntry> entries{
        {"simulate", "simulate", plain(simulate)},
        {"zero-type", "mixing", plain(zero_type)},
        {"rigidity", "mixing", plain(rigidity)},
        {"ergodic", "mixing", plain(ergodic)},
        {"dissipative", "mixing", plain(dissipative)},
        {"exp-type", "spectral", plain(exp_type)},
        {"singularity", "spectral", plain(singularity)},
        {"sequence", "spectral", plain(sequence)},
        {"fock-battery", "fock", plain(fock_battery)},
        {"ageev", "fock", plain(ageev)},
        {"joining-structure", "joinings", joining_structure},
        {"joining-covariance", "joinings", joining_covariance},
        {"reconstruction", "joinings", plain(reconstruction)},
    };
    return entries;
}

int exit_code(Verdict v) {
    switch (v) {
        case Verdict::Consistent: return kExitConsistent;
        case Verdict::Inconsistent: return kExitInconsistent;
        case Verdict::Inconclusive: return kExitInconclusive;
    }
    return kExitInconclusive;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error(Errc::InvalidArgument, fmt::format("cannot write {}", path.string()));
    f << content;
}

}  // namespace

std::vector<std::string_view> experiments_for(std::string_view subcommand) {
    std::vector<std::string_view> out;
    for (const auto& e : registry()) {
        if (e.subcommand == subcommand) out.push_back(e.name);
    }
    return out;
}

int run_or_throw(const KvDocument& config, const RunOptions& options) {
    const auto& kind = config.require("experiment");
    const auto it = std::find_if(registry().begin(), registry().end(),
                                 [&](const ExperimentEntry& e) { return e.name == kind.value; });
    if (it == registry().end()) throw_at(kind, fmt::format("unknown experiment '{}'", kind.value));

    Config cfg(config, options);
    const Outcome outcome = it->body(cfg, options, config);

    KvDocument resolved = config;
    if (options.seed) resolved.set("seed", std::to_string(*options.seed));
    if (options.trials) resolved.set("trials", std::to_string(*options.trials));

    std::filesystem::create_directories(options.out);
    write_file(options.out / "config.txt", resolved.to_string());
    write_file(options.out / "report.csv", outcome.report_csv);
    for (const auto& [name, content] : outcome.extra_files) write_file(options.out / name, content);
    std::string header = fmt::format("experiment = {}\n", kind.value);
    if (!outcome.body_has_verdict) header += fmt::format("verdict = {}\n", to_string(outcome.verdict));
    write_file(options.out / "verdict.txt", header + outcome.verdict_body);
    return exit_code(outcome.verdict);
}

int run(const KvDocument& config, const RunOptions& options, std::ostream& err) {
    try {
        return run_or_throw(config, options);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
}

}  // namespace psusp::cli
