#include <fstream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "psusp/errors.hpp"
#include "runner.hpp"

namespace psusp::cli {

namespace {

struct Flags {
    std::string config;
    std::uint64_t seed = 0;
    std::int64_t trials = 0;
    std::string out = "psusp-out";
    unsigned workers = 0;
    bool long_run = false;
};

void add_common(CLI::App* sub, Flags& f) {
    sub->add_option("--seed", f.seed, "override the config seed");
    sub->add_option("--trials", f.trials, "override the config trial count")->check(CLI::PositiveNumber);
    sub->add_option("--out", f.out, "output directory")->capture_default_str();
    sub->add_option("--workers", f.workers, "worker threads (0 = one per core); never changes output bytes");
    sub->add_flag("--long", f.long_run, "allow presets marked as long running");
}

RunOptions options_from(const CLI::App* sub, const Flags& f) {
    RunOptions o;
    if (sub->count("--seed") > 0) o.seed = f.seed;
    if (sub->count("--trials") > 0) o.trials = f.trials;
    o.out = f.out;
    o.workers = f.workers;
    return o;
}

KvDocument load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::InvalidArgument, fmt::format("cannot read config '{}'", path));
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return KvDocument::parse(text.str());
    } catch (const Error& e) {
        throw Error(e.code(), fmt::format("{}: {}", path, e.what()));
    }
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Poisson suspension laboratory"};
    app.name("psusp");
    app.require_subcommand(1);
    Flags flags;

    std::vector<std::pair<std::string, CLI::App*>> experiment_subs;
    for (const char* name : {"simulate", "mixing", "spectral", "fock", "joinings"}) {
        auto* sub = app.add_subcommand(name, fmt::format("run a {} experiment from a config file", name));
        sub->add_option("--config", flags.config, "key = value experiment file")->required();
        add_common(sub, flags);
        experiment_subs.emplace_back(name, sub);
    }
    std::string suite_name;
    auto* suite = app.add_subcommand("suite", "run a built-in preset");
    suite->add_option("name", suite_name, "preset name (see `list`)")->required();
    add_common(suite, flags);
    auto* list = app.add_subcommand("list", "list built-in presets");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (list->parsed()) {
            out << list_suites();
            return 0;
        }
        if (suite->parsed()) {
            const Preset* p = find_preset(suite_name);
            if (!p) {
                err << fmt::format("error: unknown preset '{}'; run `psusp list`\n", suite_name);
                return kExitUsage;
            }
            if (p->long_run && !flags.long_run) {
                err << fmt::format("error: preset '{}' is long running; pass --long to run it\n", p->name);
                return kExitUsage;
            }
            return run(KvDocument::parse(p->config), options_from(suite, flags), err);
        }
        for (const auto& [name, sub] : experiment_subs) {
            if (!sub->parsed()) continue;
            const auto doc = load_config(flags.config);
            const auto& kind = doc.require("experiment");
            const auto allowed = experiments_for(name);
            if (std::find(allowed.begin(), allowed.end(), kind.value) == allowed.end()) {
                throw_at(kind, fmt::format("experiment '{}' does not belong to `{}` (expected one of: {})", kind.value,
                                           name, fmt::join(allowed, ", ")));
            }
            return run(doc, options_from(sub, flags), err);
        }
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace psusp::cli
