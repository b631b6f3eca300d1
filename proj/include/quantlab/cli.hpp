#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "quantlab/config.hpp"

namespace quantlab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitPartial = 3;
inline constexpr int kExitIo = 4;

inline constexpr std::string_view kVersion = "0.1.0";

struct CliOptions {
  Command command = Command::Sweep;
  std::optional<std::string> config_path;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;
  bool check = false;
};

/// Runs one command and returns its exit code. Messages go to `out` and `err`.
int execute(const CliOptions& options, std::ostream& out, std::ostream& err,
            const std::atomic<bool>* cancel = nullptr);

/// Argument parsing, SIGINT handling and dispatch for the quantlab binary.
int run_cli(int argc, char** argv);

}  // namespace quantlab
