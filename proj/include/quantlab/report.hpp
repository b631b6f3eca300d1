#pragma once

// Rendering of experiment results: results.csv, JSON, per-metric plot data,
// and the atomic file writer every output goes through.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "quantlab/experiments.hpp"

namespace quantlab {

inline constexpr std::string_view kResultsHeader =
    "experiment_id,generator,params,n,seed,metric,raw_value,normalized_value";

/// RFC 4180 quoting for fields holding a comma, quote or line break.
std::string csv_field(std::string_view text);
/// Splits one CSV record (no embedded line breaks).
std::vector<std::string> split_csv_line(std::string_view line);

/// Header plus one line per row, '\n' line ends.
std::string results_csv(const ExperimentResult& result);
/// The same rows as an array of objects in column order; values are the CSV strings.
std::string results_json(const ExperimentResult& result);

/// Parses results.csv back. Values written as p/q come back exact.
ExperimentResult read_results_csv(std::string_view text);

/// plot_<metric>.csv contents keyed by file name: n,median,q25,q75 over the
/// seeds of each n, from normalized values.
std::map<std::string, std::string> plot_files(const ExperimentResult& result);

/// File-name-safe form of a metric string.
std::string metric_slug(std::string_view metric);

/// Parses "p/q" or a decimal float.
MetricValue parse_metric_value(std::string_view text);

/// Writes via a temporary file and rename. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);
/// Throws IoError when the file cannot be read.
std::string read_file(const std::filesystem::path& path);

}  // namespace quantlab
