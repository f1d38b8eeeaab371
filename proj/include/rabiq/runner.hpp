#pragma once

// Command runner behind the rabiq executable. Every command reads an
// ExperimentConfig, writes its CSV into output_dir and a short report to `out`.
//
// Exit status: 0 success, 1 configuration error, 2 numerical failure.
// Results of simulate, ensemble and table are cached under
// $RABIQ_CACHE_DIR (default: <output_dir>/.rabiq-cache), keyed by command
// and cache_key(config).

#include "rabiq/experiment.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>

namespace rabiq {

enum class Command { simulate, ensemble, fit, table, predict, verify };

inline constexpr const char* kCacheDirEnv = "RABIQ_CACHE_DIR";

struct RunOptions {
    Command command = Command::simulate;
    std::optional<std::filesystem::path> config_path;
    unsigned jobs = 0;  ///< 0: hardware concurrency
    std::optional<std::uint64_t> seed;
    bool no_cache = false;
    std::optional<int> table_id;
    std::optional<std::string> fit_input;
    std::optional<std::string> output_dir;
};

[[nodiscard]] const char* command_name(Command command) noexcept;

/// Config with command-line overrides applied.
[[nodiscard]] ExperimentConfig effective_config(const RunOptions& options);

/// Directory holding cached results for `config`.
[[nodiscard]] std::filesystem::path cache_dir(const ExperimentConfig& config);

int run(const RunOptions& options, std::ostream& out, std::ostream& err);

}  // namespace rabiq
