#pragma once

// Run configuration: flat `key = value` text with dotted keys (or the same
// keys as nested JSON), validated against a fixed schema. See docs/config.md.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quantlab/experiments.hpp"
#include "quantlab/optimal.hpp"

namespace quantlab {

using FlatConfig = std::map<std::string, std::string>;

/// `key = value` lines; `#` starts a comment; `[section]` prefixes the
/// following keys with `section.`. Duplicate keys are a ConfigError.
FlatConfig parse_flat_config(std::string_view text);

/// Nested objects flatten to dotted keys; arrays join with commas.
FlatConfig parse_json_config(std::string_view text);

/// JSON when the first non-blank character is '{', flat text otherwise.
FlatConfig parse_config(std::string_view text);

/// Reads and parses a file. Unreadable files are an IoError.
FlatConfig load_config(const std::string& path);

/// Canonical `key=value\n` rendering in key order.
std::string canonical_config(const FlatConfig& config);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);

/// Every accepted key.
const std::vector<std::string>& config_keys();

/// Throws ConfigError naming every key outside the schema.
void check_known_keys(const FlatConfig& config);

enum class Command { Generate, Metrics, Optimal, Sweep, Report };
std::string_view to_string(Command command);
Command parse_command(std::string_view text);

enum class OutputFormat { Csv, Json };

struct OptimalConfig {
  std::size_t n = 1;
  OptimalMethod method = OptimalMethod::ClosedForm;
  std::size_t grid = 10000;
  DensitySpec density = DensitySpec::uniform();
  double tol = 1e-12;
  std::size_t max_iter = 100000;
  std::vector<double> init;  ///< empty: random sorted start from the seed
};

struct RunConfig {
  Command command = Command::Sweep;
  SweepConfig sweep;
  std::uint64_t master_seed = 0;
  std::size_t generate_n = 0;  ///< generate and metrics commands
  OptimalConfig optimal;
  std::string output_dir = "out";
  std::optional<std::size_t> threads;
  OutputFormat format = OutputFormat::Csv;
  std::string report_input;  ///< report command; empty means <out>/results.csv
  FlatConfig echo;           ///< the flat config after defaults and overrides
};

/// Count lists: `10,100,1000`, `log:<lo>:<hi>:<k>` (k log-spaced, rounded,
/// deduplicated), `dyadic:<lo>:<hi>` (powers of two in range) or
/// `range:<lo>:<hi>:<step>`.
std::vector<std::size_t> parse_count_list(std::string_view text);

/// Builds and validates a run. Defaults are filled into `echo`, including
/// generator.farey_endpoints = half_open.
RunConfig build_run_config(Command command, FlatConfig config);

}  // namespace quantlab
