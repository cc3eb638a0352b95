/**
 * @file cli.hpp
 * @brief The `roughstep` command line: one JSON config per run, artifacts
 * built in memory and written only after every step has succeeded.
 *
 * Exit codes: 0 success, 1 I/O failure, 2 config error, 3 numerical failure.
 */
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include "roughstep/io.hpp"

namespace roughstep::cli {

inline constexpr int kOk = 0;
inline constexpr int kIoError = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kNumericalError = 3;

inline constexpr const char* kVersion = "0.1.0";

/// File name → bytes, including manifest.json.
using Artifacts = std::map<std::string, std::string>;

/// Runs a subcommand on a parsed config. Throws ContractError for config
/// problems and NumericalError for numerical failures.
Artifacts execute(const std::string& command, const io::json& config,
                  std::optional<std::uint64_t> seed_override = std::nullopt);

/// Loads the config, executes and writes the artifacts into out_dir.
int run(const std::string& command, const std::string& config_path, const std::string& out_dir,
        std::optional<std::uint64_t> seed_override, std::ostream& err);

/// Full argv handling: `roughstep <subcommand> --config FILE --out DIR [--seed N]`.
int main(int argc, char** argv);

}  // namespace roughstep::cli
