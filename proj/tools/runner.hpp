#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psusp/kv_format.hpp"

namespace psusp::cli {

inline constexpr int kExitConsistent = 0;
inline constexpr int kExitInconsistent = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInconclusive = 3;

struct RunOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> trials;
    std::filesystem::path out = "psusp-out";
    unsigned workers = 0;
};

/// Runs the experiment described by `config` and writes `config.txt`,
/// `report.csv` and `verdict.txt` (plus experiment-specific files) into
/// `options.out`. Returns one of the kExit* codes; parse and validation
/// failures are reported on `err` and give kExitUsage.
int run(const KvDocument& config, const RunOptions& options, std::ostream& err);

/// Same as run() but lets library errors propagate.
int run_or_throw(const KvDocument& config, const RunOptions& options);

struct Preset {
    std::string name;
    std::string claim;
    std::string config;
    /// Needs `--long`: expected to exceed five minutes on one core.
    bool long_run = false;
};

const std::vector<Preset>& presets();
const Preset* find_preset(std::string_view name);
/// One line per preset: name, claim and a `[--long]` marker where relevant.
std::string list_suites();

/// Experiments accepted by each subcommand.
std::vector<std::string_view> experiments_for(std::string_view subcommand);

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace psusp::cli
