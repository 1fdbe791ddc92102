#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>

#include <CLI11.hpp>

namespace spg::cli {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::filesystem::path out = ".";
};

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kFailure = 1;
inline constexpr int kConfigError = 2;
inline constexpr int kNotConverged = 3;

/// Adds every subcommand to app. The callback of the chosen subcommand is
/// stored in `run` and returns the process exit code.
void register_commands(CLI::App& app, GlobalOptions& global,
                       std::function<int()>& run);

}  // namespace spg::cli
