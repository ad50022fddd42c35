#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace nblearn {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;
inline constexpr int kExitVerification = 3;

struct CliOptions {
    std::filesystem::path config_path;
    std::optional<std::string> out_dir;  // overrides output.directory
    int workers = 0;                     // 0 = hardware concurrency
    bool quiet = false;
};

// Single simulation: trajectory/summary CSVs, plus the bound-vs-empirical
// curve when a concentration certificate applies.
int cmd_run(const CliOptions& opt, std::ostream& out, std::ostream& err);

// Ensemble over (size, rule) cells of the configured topology family; one
// summary row per cell.
int cmd_sweep(const CliOptions& opt, std::ostream& out, std::ostream& err);

// Executable bound checks; prints one pass/fail line per check.
int cmd_verify(const CliOptions& opt, std::ostream& out, std::ostream& err);

}  // namespace nblearn
