#include "quantlab/report.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "quantlab/errors.hpp"

namespace quantlab {

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

std::string results_csv(const ExperimentResult& result) {
  std::string out(kResultsHeader);
  out += '\n';
  for (const auto& r : result.rows) {
    out += csv_field(r.experiment_id) + ',' + csv_field(r.generator) + ',' + csv_field(r.params) +
           ',' + std::to_string(r.n) + ',' + std::to_string(r.seed) + ',' + csv_field(r.metric) +
           ',' + csv_field(r.raw.to_string()) + ',' + csv_field(r.normalized.to_string()) + '\n';
  }
  return out;
}

std::string results_json(const ExperimentResult& result) {
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& r : result.rows) {
    nlohmann::ordered_json row;
    row["experiment_id"] = r.experiment_id;
    row["generator"] = r.generator;
    row["params"] = r.params;
    row["n"] = r.n;
    row["seed"] = r.seed;
    row["metric"] = r.metric;
    row["raw_value"] = r.raw.to_string();
    row["normalized_value"] = r.normalized.to_string();
    rows.push_back(std::move(row));
  }
  return rows.dump(2) + "\n";
}

MetricValue parse_metric_value(std::string_view text) {
  const auto slash = text.find('/');
  if (slash != std::string_view::npos) {
    try {
      const BigInt p(std::string(text.substr(0, slash)));
      const BigInt q(std::string(text.substr(slash + 1)));
      if (q == 0) throw DomainError("zero denominator");
      return MetricValue::of(Rational(p, q));
    } catch (const std::exception&) {
      throw DomainError("bad rational value '" + std::string(text) + "'");
    }
  }
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, value);
  if (text.empty() || r.ec != std::errc{} || r.ptr != end) {
    throw DomainError("bad value '" + std::string(text) + "'");
  }
  return MetricValue::approx(value);
}

ExperimentResult read_results_csv(std::string_view text) {
  ExperimentResult result;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line_no == 1) {
      std::string_view header = line;
      if (!header.empty() && header.back() == '\r') header.remove_suffix(1);
      if (header != kResultsHeader) throw DomainError("results file has an unexpected header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != 8) {
      throw DomainError("results line " + std::to_string(line_no) + " has " +
                        std::to_string(f.size()) + " fields, expected 8");
    }
    ResultRow row;
    row.experiment_id = f[0];
    row.generator = f[1];
    row.params = f[2];
    try {
      row.n = std::stoull(f[3]);
      row.seed = std::stoull(f[4]);
    } catch (const std::exception&) {
      throw DomainError("results line " + std::to_string(line_no) + ": bad n or seed");
    }
    row.metric = f[5];
    row.raw = parse_metric_value(f[6]);
    row.normalized = parse_metric_value(f[7]);
    result.rows.push_back(std::move(row));
  }
  if (line_no == 0) throw DomainError("results file is empty");
  return result;
}

std::string metric_slug(std::string_view metric) {
  std::string out;
  for (char c : metric) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '_' || c == '-' || c == '.';
    out += keep ? c : '_';
  }
  return out;
}

std::map<std::string, std::string> plot_files(const ExperimentResult& result) {
  std::map<std::string, std::map<std::size_t, std::vector<double>>> grouped;
  std::vector<std::string> order;
  for (const auto& r : result.rows) {
    if (!grouped.count(r.metric)) order.push_back(r.metric);
    grouped[r.metric][r.n].push_back(r.normalized.value);
  }
  std::map<std::string, std::string> out;
  for (const auto& metric : order) {
    std::string body = "n,median,q25,q75\n";
    for (auto& [n, values] : grouped[metric]) {
      const Summary s = summarize(values);
      body += std::to_string(n) + ',' + format_double(s.median) + ',' + format_double(s.q25) + ',' +
              format_double(s.q75) + '\n';
    }
    out["plot_" + metric_slug(metric) + ".csv"] = std::move(body);
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot move output into place: " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace quantlab
