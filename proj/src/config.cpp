#include "quantlab/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "quantlab/errors.hpp"

namespace quantlab {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::uint64_t to_u64(std::string_view text, const std::string& key) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, value);
  if (text.empty() || r.ec != std::errc{} || r.ptr != end) {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + std::string(text) + "'", {key});
  }
  return value;
}

double to_real(std::string_view text, const std::string& key) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, value);
  if (text.empty() || r.ec != std::errc{} || r.ptr != end || !std::isfinite(value)) {
    throw ConfigError(key + ": expected a number, got '" + std::string(text) + "'", {key});
  }
  return value;
}

/// Runs `f`, turning library argument errors into ConfigErrors on `key`.
template <typename F>
auto keyed(const std::string& key, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const DomainError& e) {
    throw ConfigError(key + ": " + e.what(), {key});
  }
}

void flatten(const nlohmann::json& node, const std::string& prefix, FlatConfig& out) {
  if (node.is_object()) {
    for (const auto& [k, v] : node.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    return;
  }
  const auto scalar = [](const nlohmann::json& v) -> std::string {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_float()) return format_double(v.get<double>());
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_null()) return "";
    return v.dump();
  };
  if (node.is_array()) {
    std::string joined;
    for (std::size_t i = 0; i < node.size(); ++i) {
      if (i) joined += ",";
      joined += scalar(node[i]);
    }
    out[prefix] = joined;
    return;
  }
  out[prefix] = scalar(node);
}

const std::vector<std::string> kKeys = {
    "experiment.id",
    "generator.kind",
    "generator.theta",
    "generator.theta_precision",
    "generator.seed",
    "generator.density",
    "generator.power",
    "generator.base",
    "generator.matrix",
    "generator.start",
    "generator.farey_endpoints",
    "sweep.ns",
    "seeds.master",
    "seeds.count",
    "seeds.list",
    "metrics",
    "generate.n",
    "optimal.n",
    "optimal.method",
    "optimal.grid",
    "optimal.density",
    "optimal.tol",
    "optimal.max_iter",
    "optimal.init",
    "run.threads",
    "output.dir",
    "output.format",
    "report.input",
};

std::optional<std::string> get(const FlatConfig& config, const std::string& key) {
  const auto it = config.find(key);
  if (it == config.end()) return std::nullopt;
  return it->second;
}

std::string require(const FlatConfig& config, const std::string& key, std::string_view why) {
  auto v = get(config, key);
  if (!v || v->empty()) throw ConfigError(std::string(why) + " needs " + key, {key});
  return *v;
}

GeneratorSpec parse_generator(FlatConfig& config) {
  GeneratorSpec g;
  const std::string kind = require(config, "generator.kind", "this command");
  g.kind = keyed("generator.kind", [&] { return parse_generator_kind(kind); });
  if (auto v = get(config, "generator.theta")) {
    g.theta = keyed("generator.theta", [&] { return ThetaSpec::parse(*v); });
  }
  if (auto v = get(config, "generator.theta_precision")) {
    const auto bits = to_u64(*v, "generator.theta_precision");
    if (bits < 128) {
      throw ConfigError("generator.theta_precision must be >= 128", {"generator.theta_precision"});
    }
    g.theta.precision_bits = bits;
  }
  if (auto v = get(config, "generator.seed")) g.seed = to_u64(*v, "generator.seed");
  if (auto v = get(config, "generator.density")) {
    g.density = keyed("generator.density", [&] { return DensitySpec::parse(*v); });
  }
  if (auto v = get(config, "generator.power")) {
    g.power = to_real(*v, "generator.power");
    if (!(g.power > 0.0)) throw ConfigError("generator.power must be > 0", {"generator.power"});
  }
  if (auto v = get(config, "generator.base")) {
    g.base = to_u64(*v, "generator.base");
    if (g.base < 2) throw ConfigError("generator.base must be >= 2", {"generator.base"});
  }
  if (auto v = get(config, "generator.matrix")) {
    const auto parts = split(*v, '/');
    if (parts.size() != 4) throw ConfigError("generator.matrix needs a/b/c/d", {"generator.matrix"});
    std::int64_t e[4];
    for (int i = 0; i < 4; ++i) {
      const auto* end = parts[i].data() + parts[i].size();
      const auto r = std::from_chars(parts[i].data(), end, e[i]);
      if (parts[i].empty() || r.ec != std::errc{} || r.ptr != end) {
        throw ConfigError("generator.matrix entries must be integers", {"generator.matrix"});
      }
    }
    g.matrix = Matrix2{e[0], e[1], e[2], e[3]};
  }
  if (g.kind == GeneratorSpec::Kind::TorusOrbit && !g.matrix.is_hyperbolic_automorphism()) {
    throw ConfigError("generator.matrix is not a hyperbolic toral automorphism", {"generator.matrix"});
  }
  if (auto v = get(config, "generator.start"); v && *v != "default") {
    const auto parts = split(*v, '/');
    if (parts.size() != 2) throw ConfigError("generator.start needs x/y", {"generator.start"});
    const double x = to_real(parts[0], "generator.start");
    const double y = to_real(parts[1], "generator.start");
    g.start = keyed("generator.start", [&] {
      return Point2D{to_unit(x, Geometry::Circle), to_unit(y, Geometry::Circle)};
    });
  }
  // Half-open is the default endpoint convention for Farey sets in runs.
  if (!get(config, "generator.farey_endpoints") && g.kind == GeneratorSpec::Kind::Farey) {
    config["generator.farey_endpoints"] = "half_open";
  }
  g.farey_endpoints = FareyEndpoints::HalfOpen;
  if (auto v = get(config, "generator.farey_endpoints")) {
    g.farey_endpoints =
        keyed("generator.farey_endpoints", [&] { return parse_farey_endpoints(*v); });
  }
  return g;
}

std::vector<MetricSpec> parse_metrics(const FlatConfig& config, std::string_view why) {
  const std::string text = require(config, "metrics", why);
  std::vector<MetricSpec> out;
  for (auto item : split(text, ',')) {
    if (item.empty()) continue;
    out.push_back(keyed("metrics", [&] { return MetricSpec::parse(item); }));
  }
  if (out.empty()) throw ConfigError("metrics is empty", {"metrics"});
  return out;
}

}  // namespace

FlatConfig parse_flat_config(std::string_view text) {
  FlatConfig out;
  std::string section;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    std::string_view line = text.substr(start, end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key =
        (section.empty() ? "" : section + ".") + std::string(trim(line.substr(0, eq)));
    if (key.empty() || key.back() == '.') {
      throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    }
    if (!out.emplace(key, std::string(trim(line.substr(eq + 1)))).second) {
      throw ConfigError("duplicate key " + key, {key});
    }
  }
  return out;
}

FlatConfig parse_json_config(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON config: ") + e.what());
  }
  if (!doc.is_object()) throw ConfigError("JSON config must be an object");
  FlatConfig out;
  flatten(doc, "", out);
  return out;
}

FlatConfig parse_config(std::string_view text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') return parse_json_config(text);
  return parse_flat_config(text);
}

FlatConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read config file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string canonical_config(const FlatConfig& config) {
  std::string out;
  for (const auto& [k, v] : config) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[value & 0xF];
    value >>= 4;
  }
  return out;
}

const std::vector<std::string>& config_keys() { return kKeys; }

void check_known_keys(const FlatConfig& config) {
  std::vector<std::string> unknown;
  for (const auto& [k, v] : config) {
    if (std::find(kKeys.begin(), kKeys.end(), k) == kKeys.end()) unknown.push_back(k);
  }
  if (!unknown.empty()) {
    std::string message = "unknown config key";
    message += unknown.size() > 1 ? "s: " : ": ";
    for (std::size_t i = 0; i < unknown.size(); ++i) message += (i ? ", " : "") + unknown[i];
    throw ConfigError(message, unknown);
  }
}

std::string_view to_string(Command command) {
  switch (command) {
    case Command::Generate:
      return "generate";
    case Command::Metrics:
      return "metrics";
    case Command::Optimal:
      return "optimal";
    case Command::Sweep:
      return "sweep";
    case Command::Report:
      return "report";
  }
  return "";
}

Command parse_command(std::string_view text) {
  for (auto c : {Command::Generate, Command::Metrics, Command::Optimal, Command::Sweep,
                 Command::Report}) {
    if (text == to_string(c)) return c;
  }
  throw ConfigError("unknown command '" + std::string(text) + "'");
}

std::vector<std::size_t> parse_count_list(std::string_view text) {
  text = trim(text);
  std::vector<std::size_t> out;
  const auto fields = [&](std::string_view body) { return split(body, ':'); };
  if (text.starts_with("log:")) {
    const auto f = fields(text.substr(4));
    if (f.size() != 3) throw DomainError("log list needs log:<lo>:<hi>:<k>");
    const double lo = static_cast<double>(to_u64(f[0], "sweep.ns"));
    const double hi = static_cast<double>(to_u64(f[1], "sweep.ns"));
    const auto k = to_u64(f[2], "sweep.ns");
    if (lo < 1 || hi < lo || k < 1) throw DomainError("log list needs 1 <= lo <= hi and k >= 1");
    for (std::uint64_t i = 0; i < k; ++i) {
      const double t = k == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(k - 1);
      const auto v = static_cast<std::size_t>(std::llround(lo * std::pow(hi / lo, t)));
      if (out.empty() || v > out.back()) out.push_back(v);
    }
    return out;
  }
  if (text.starts_with("dyadic:")) {
    const auto f = fields(text.substr(7));
    if (f.size() != 2) throw DomainError("dyadic list needs dyadic:<lo>:<hi>");
    const auto lo = to_u64(f[0], "sweep.ns");
    const auto hi = to_u64(f[1], "sweep.ns");
    for (std::uint64_t p = 1; p <= hi && p != 0; p <<= 1) {
      if (p >= lo) out.push_back(p);
    }
    if (out.empty()) throw DomainError("dyadic range holds no power of two");
    return out;
  }
  if (text.starts_with("range:")) {
    const auto f = fields(text.substr(6));
    if (f.size() != 3) throw DomainError("range list needs range:<lo>:<hi>:<step>");
    const auto lo = to_u64(f[0], "sweep.ns");
    const auto hi = to_u64(f[1], "sweep.ns");
    const auto step = to_u64(f[2], "sweep.ns");
    if (step == 0 || lo == 0) throw DomainError("range list needs lo >= 1 and step >= 1");
    for (auto v = lo; v <= hi; v += step) out.push_back(v);
    return out;
  }
  for (auto item : split(text, ',')) {
    if (item.empty()) continue;
    out.push_back(to_u64(item, "sweep.ns"));
  }
  return out;
}

RunConfig build_run_config(Command command, FlatConfig config) {
  check_known_keys(config);
  RunConfig run;
  run.command = command;
  if (auto v = get(config, "output.dir")) run.output_dir = *v;
  if (auto v = get(config, "output.format")) {
    if (*v == "csv") {
      run.format = OutputFormat::Csv;
    } else if (*v == "json") {
      run.format = OutputFormat::Json;
    } else {
      throw ConfigError("output.format must be csv or json", {"output.format"});
    }
  }
  if (auto v = get(config, "run.threads")) {
    run.threads = to_u64(*v, "run.threads");
    if (*run.threads == 0) throw ConfigError("run.threads must be >= 1", {"run.threads"});
  }
  if (auto v = get(config, "seeds.master")) run.master_seed = to_u64(*v, "seeds.master");
  if (!get(config, "experiment.id")) config["experiment.id"] = std::string(to_string(command));
  run.sweep.experiment_id = *get(config, "experiment.id");

  switch (command) {
    case Command::Generate:
    case Command::Metrics: {
      run.sweep.generator = parse_generator(config);
      run.generate_n = to_u64(require(config, "generate.n", to_string(command)), "generate.n");
      if (run.generate_n == 0) throw ConfigError("generate.n must be >= 1", {"generate.n"});
      if (command == Command::Metrics) {
        run.sweep.metrics = parse_metrics(config, "metrics");
        for (const auto& m : run.sweep.metrics) {
          if (m.is_two_dimensional() != run.sweep.generator.is_two_dimensional()) {
            throw ConfigError("metric " + m.to_string() + " does not apply to generator " +
                                  run.sweep.generator.name(),
                              {"metrics"});
          }
        }
      }
      break;
    }
    case Command::Sweep: {
      run.sweep.generator = parse_generator(config);
      run.sweep.ns = keyed("sweep.ns", [&] {
        return parse_count_list(require(config, "sweep.ns", "sweep"));
      });
      run.sweep.metrics = parse_metrics(config, "sweep");
      if (auto v = get(config, "seeds.list")) {
        for (auto item : split(*v, ',')) {
          if (!item.empty()) run.sweep.seeds.push_back(to_u64(item, "seeds.list"));
        }
      } else {
        std::size_t count = 1;
        if (auto c = get(config, "seeds.count")) count = to_u64(*c, "seeds.count");
        run.sweep.seeds = derive_seeds(run.master_seed, count);
      }
      run.sweep.validate();
      break;
    }
    case Command::Optimal: {
      auto& o = run.optimal;
      o.n = to_u64(require(config, "optimal.n", "optimal"), "optimal.n");
      if (o.n == 0) throw ConfigError("optimal.n must be >= 1", {"optimal.n"});
      if (auto v = get(config, "optimal.method")) {
        if (*v == "closed_form") {
          o.method = OptimalMethod::ClosedForm;
        } else if (*v == "dp") {
          o.method = OptimalMethod::DP;
        } else if (*v == "lloyd") {
          o.method = OptimalMethod::Lloyd;
        } else {
          throw ConfigError("optimal.method must be closed_form, dp or lloyd", {"optimal.method"});
        }
      }
      if (auto v = get(config, "optimal.grid")) o.grid = to_u64(*v, "optimal.grid");
      if (auto v = get(config, "optimal.density")) {
        o.density = keyed("optimal.density", [&] { return DensitySpec::parse(*v); });
      }
      if (auto v = get(config, "optimal.tol")) o.tol = to_real(*v, "optimal.tol");
      if (!(o.tol > 0.0)) throw ConfigError("optimal.tol must be > 0", {"optimal.tol"});
      if (auto v = get(config, "optimal.max_iter")) o.max_iter = to_u64(*v, "optimal.max_iter");
      if (auto v = get(config, "optimal.init")) {
        for (auto item : split(*v, ',')) {
          if (!item.empty()) o.init.push_back(to_real(item, "optimal.init"));
        }
        if (o.init.size() != o.n) {
          throw ConfigError("optimal.init needs exactly optimal.n points", {"optimal.init"});
        }
        for (double x : o.init) {
          if (!(x >= 0.0 && x <= 1.0)) {
            throw ConfigError("optimal.init points must lie in [0,1]", {"optimal.init"});
          }
        }
      }
      if (o.method == OptimalMethod::ClosedForm &&
          o.density.kind() != DensitySpec::Kind::Uniform) {
        throw ConfigError("closed_form only covers the uniform density", {"optimal.method"});
      }
      if (o.method == OptimalMethod::DP && o.n > o.grid) {
        throw ConfigError("optimal.n exceeds optimal.grid", {"optimal.n"});
      }
      break;
    }
    case Command::Report: {
      if (auto v = get(config, "report.input")) run.report_input = *v;
      break;
    }
  }
  run.echo = std::move(config);
  return run;
}

}  // namespace quantlab
