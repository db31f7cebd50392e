// commands.hpp: The four CLI subcommands and their shared plumbing
//
// Exit status: 0 when every declared tolerance holds, 1 when one is breached,
// 2 on configuration or engine errors. Each run writes metadata.json (config
// hash, version, wall time) next to its tables.

#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>

namespace kmsorder {

enum ExitStatus : int { kExitPass = 0, kExitBreach = 1, kExitError = 2 };

struct CommandOptions {
    std::string config_path;
    std::optional<std::string> out_dir;  // overrides [run] output_dir
    std::optional<int> workers;          // overrides KMSORDER_WORKERS and [run] workers
    double tolerance_scale = 1.0;
    std::ostream* log = nullptr;         // progress and summaries; defaults to std::cout
    std::ostream* err = nullptr;         // diagnostics; defaults to std::cerr
};

int cmd_asymmetry(const CommandOptions& opt);
int cmd_oracle(const CommandOptions& opt);
int cmd_geometry(const CommandOptions& opt);
int cmd_kms_check(const CommandOptions& opt);

// Dispatches on "asymmetry", "oracle", "geometry" or "kms-check".
int run_command(const std::string& name, const CommandOptions& opt);

// CLI value, then $KMSORDER_WORKERS, then the config value, then the hardware
// thread count; always at least 1.
int resolve_workers(std::optional<int> cli, int config_value);

// Runs fn(0..n-1) on up to `workers` threads. Every index runs exactly once;
// the first exception is rethrown after all threads join.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace kmsorder
