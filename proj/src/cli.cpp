#include "quantlab/cli.hpp"

#include <chrono>
#include <csignal>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "quantlab/errors.hpp"
#include "quantlab/generators.hpp"
#include "quantlab/report.hpp"
#include "quantlab/rng.hpp"

namespace quantlab {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::size_t resolve_threads(const CliOptions& options, const RunConfig& run) {
  if (options.threads) {
    if (*options.threads == 0) throw ConfigError("--threads must be >= 1");
    return *options.threads;
  }
  if (const char* env = std::getenv("QUANTLAB_THREADS"); env && *env) {
    try {
      std::size_t used = 0;
      const auto v = std::stoull(env, &used);
      if (used != std::string_view(env).size() || v == 0) throw std::invalid_argument("");
      return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
      throw ConfigError("QUANTLAB_THREADS must be a positive integer");
    }
  }
  if (run.threads) return *run.threads;
  return std::max(1U, std::thread::hardware_concurrency());
}

std::string point_text(const PointSet& ps, std::size_t i) {
  if (const auto* r = ps.rational_points()) return (*r)[i].to_string();
  return format_double((*ps.unit_points())[i].to_double());
}

/// What a command produced: the file compared by --check, other files, and
/// per-cell status for the manifest.
struct Outputs {
  std::string primary_name;
  std::string primary;
  std::map<std::string, std::string> extra;
  std::vector<CellRecord> cells;
  ordered_json details = ordered_json::object();
};

Outputs do_generate(const RunConfig& run) {
  const GeneratorSpec spec = with_seed(run.sweep.generator, run.sweep.generator.seed);
  Outputs out;
  out.primary_name = "points.csv";
  if (spec.is_two_dimensional()) {
    const auto orbit = generate_orbit(spec, run.generate_n);
    out.primary = "index,x,y\n";
    for (std::size_t i = 0; i < orbit.size(); ++i) {
      out.primary += std::to_string(i + 1) + ',' + format_double(orbit[i].x.to_double()) + ',' +
                     format_double(orbit[i].y.to_double()) + '\n';
    }
  } else {
    const PointSet ps = generate(spec, run.generate_n);
    out.primary = "index,value\n";
    for (std::size_t i = 0; i < ps.size(); ++i) {
      out.primary += std::to_string(i + 1) + ',' + point_text(ps, i) + '\n';
    }
  }
  out.cells.push_back({run.generate_n, spec.seed, CellStatus::Ok, ""});
  out.details["generator"] = spec.name();
  out.details["params"] = spec.params();
  return out;
}

Outputs do_metrics(const RunConfig& run) {
  const GeneratorSpec spec = with_seed(run.sweep.generator, run.sweep.generator.seed);
  ExperimentResult result;
  const auto add = [&](const MetricSpec& m, const MetricValue& raw) {
    result.rows.push_back({run.sweep.experiment_id, spec.name(), spec.params(), run.generate_n,
                           spec.seed, m.to_string(), raw,
                           apply_normalizer(m.normalizer, raw, run.generate_n)});
  };
  if (spec.is_two_dimensional()) {
    const auto orbit = generate_orbit(spec, run.generate_n);
    for (const auto& m : run.sweep.metrics) add(m, evaluate_metric(m, orbit));
  } else {
    const PointSet ps = generate(spec, run.generate_n).sorted();
    for (const auto& m : run.sweep.metrics) add(m, evaluate_metric(m, ps));
  }
  Outputs out;
  out.primary_name = "results.csv";
  out.primary = results_csv(result);
  if (run.format == OutputFormat::Json) out.extra["results.json"] = results_json(result);
  out.cells.push_back({run.generate_n, spec.seed, CellStatus::Ok, ""});
  return out;
}

Outputs do_optimal(const RunConfig& run) {
  const auto& o = run.optimal;
  OptimalResult result = [&] {
    switch (o.method) {
      case OptimalMethod::ClosedForm:
        return optimal_uniform_means(o.n);
      case OptimalMethod::DP:
        return dp_optimal_means(o.n, DensityGrid::from_density(o.density, o.grid));
      case OptimalMethod::Lloyd: {
        std::vector<double> init = o.init;
        if (init.empty()) {
          CounterRng rng(run.master_seed, streams::kLloydInit);
          for (std::size_t i = 0; i < o.n; ++i) init.push_back(rng.uniform());
        }
        PointSet::UnitPoints pts;
        for (double x : init) pts.push_back(to_unit(x, Geometry::Interval));
        return lloyd(sort_points(std::move(pts), Geometry::Interval), o.density,
                     LloydOptions{o.tol, o.max_iter});
      }
    }
    throw DomainError("unknown method");
  }();

  std::string params = "method=" + std::string(to_string(o.method)) +
                       ";density=" + o.density.to_string();
  if (o.method == OptimalMethod::DP) params += ";grid=" + std::to_string(o.grid);
  if (o.method == OptimalMethod::Lloyd) params += ";tol=" + format_double(o.tol);
  MetricValue error = MetricValue::approx(result.error);
  if (o.method == OptimalMethod::ClosedForm) {
    const auto n = static_cast<unsigned long long>(o.n);
    error = MetricValue::of(Rational(1, 12) / (Rational(n) * n));
  }
  ExperimentResult table;
  table.rows.push_back({run.sweep.experiment_id, "optimal", params, o.n, run.master_seed,
                        "optimal_error", error, error});
  Outputs out;
  out.primary_name = "results.csv";
  out.primary = results_csv(table);
  std::string means = "index,mean\n";
  for (std::size_t i = 0; i < result.means.size(); ++i) {
    means += std::to_string(i + 1) + ',' + point_text(result.means, i) + '\n';
  }
  out.extra["means.csv"] = std::move(means);
  if (run.format == OutputFormat::Json) out.extra["results.json"] = results_json(table);
  out.cells.push_back({o.n, run.master_seed, CellStatus::Ok, ""});
  out.details["method"] = std::string(to_string(o.method));
  out.details["iterations"] = result.iterations;
  out.details["reseeds"] = result.reseeds;
  return out;
}

Outputs do_sweep(const RunConfig& run, std::size_t threads, const std::atomic<bool>* cancel) {
  SweepConfig sweep = run.sweep;
  sweep.threads = threads;
  ExperimentResult result = run_sweep(sweep, cancel);
  Outputs out;
  out.primary_name = "results.csv";
  out.primary = results_csv(result);
  out.extra = plot_files(result);
  if (run.format == OutputFormat::Json) out.extra["results.json"] = results_json(result);
  out.cells = result.cells;
  return out;
}

Outputs do_report(const RunConfig& run) {
  const fs::path input =
      run.report_input.empty() ? fs::path(run.output_dir) / "results.csv" : fs::path(run.report_input);
  const std::string text = read_file(input);
  const ExperimentResult result = [&] {
    try {
      return read_results_csv(text);
    } catch (const DomainError& e) {
      throw IoError(input.string() + ": " + e.what());
    }
  }();
  if (result.rows.empty()) throw IoError(input.string() + " holds no rows");
  Outputs out;
  out.extra = plot_files(result);
  std::map<std::string, std::map<std::size_t, std::vector<double>>> grouped;
  for (const auto& r : result.rows) grouped[r.metric][r.n].push_back(r.normalized.value);
  if (run.format == OutputFormat::Json) {
    ordered_json doc;
    doc["rows"] = ordered_json::parse(results_json(result));
    ordered_json summary = ordered_json::array();
    for (const auto& [metric, by_n] : grouped) {
      for (const auto& [n, values] : by_n) {
        const Summary s = summarize(values);
        summary.push_back({{"metric", metric},
                           {"n", n},
                           {"count", s.count},
                           {"median", format_double(s.median)},
                           {"q25", format_double(s.q25)},
                           {"q75", format_double(s.q75)},
                           {"mean", format_double(s.mean)},
                           {"stderr", format_double(s.stderr_mean)}});
      }
    }
    doc["summary"] = std::move(summary);
    out.primary_name = "report.json";
    out.primary = doc.dump(2) + "\n";
  } else {
    std::string csv = "metric,n,count,median,q25,q75,mean,stderr\n";
    for (const auto& [metric, by_n] : grouped) {
      for (const auto& [n, values] : by_n) {
        const Summary s = summarize(values);
        csv += csv_field(metric) + ',' + std::to_string(n) + ',' + std::to_string(s.count) + ',' +
               format_double(s.median) + ',' + format_double(s.q25) + ',' + format_double(s.q75) +
               ',' + format_double(s.mean) + ',' + format_double(s.stderr_mean) + '\n';
      }
    }
    out.primary_name = "summary.csv";
    out.primary = std::move(csv);
  }
  return out;
}

std::string manifest_json(const RunConfig& run, const Outputs& outputs, std::size_t threads,
                          const std::string& started, const std::string& status) {
  ordered_json m;
  m["tool"] = "quantlab";
  m["version"] = std::string(kVersion);
  m["command"] = std::string(to_string(run.command));
  m["status"] = status;
  m["started"] = started;
  m["finished"] = utc_now();
  m["threads"] = threads;
  ordered_json config = ordered_json::object();
  for (const auto& [k, v] : run.echo) config[k] = v;
  m["config"] = std::move(config);
  m["config_hash"] = hex64(fnv1a64(canonical_config(run.echo)));
  m["output"] = outputs.primary_name;
  m["output_hash"] = hex64(fnv1a64(outputs.primary));
  ordered_json conventions;
  conventions["fixed_point_bits"] = 128;
  conventions["prng"] = "splitmix64 counter streams";
  conventions["float_format"] = "17 significant digits";
  conventions["rational_format"] = "p/q";
  if (run.sweep.generator.kind == GeneratorSpec::Kind::Farey) {
    conventions["farey_endpoints"] = std::string(to_string(run.sweep.generator.farey_endpoints));
  }
  m["conventions"] = std::move(conventions);
  if (!outputs.details.empty()) m["details"] = outputs.details;
  ordered_json cells = ordered_json::array();
  for (const auto& c : outputs.cells) {
    ordered_json cell;
    cell["n"] = c.n;
    cell["seed"] = c.seed;
    cell["status"] = std::string(to_string(c.status));
    if (!c.message.empty()) cell["message"] = c.message;
    cells.push_back(std::move(cell));
  }
  m["cells"] = std::move(cells);
  return m.dump(2) + "\n";
}

std::atomic<bool> g_interrupted{false};

extern "C" void on_sigint(int) { g_interrupted.store(true); }

}  // namespace

int execute(const CliOptions& options, std::ostream& out, std::ostream& err,
            const std::atomic<bool>* cancel) {
  RunConfig run;
  std::size_t threads = 1;
  try {
    FlatConfig config = options.config_path ? load_config(*options.config_path) : FlatConfig{};
    if (options.seed) {
      config["seeds.master"] = std::to_string(*options.seed);
      if (options.command == Command::Generate || options.command == Command::Metrics) {
        config["generator.seed"] = std::to_string(*options.seed);
      }
    }
    run = build_run_config(options.command, std::move(config));
    if (options.out) run.output_dir = *options.out;
    threads = resolve_threads(options, run);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }

  const std::string started = utc_now();
  Outputs outputs;
  try {
    switch (run.command) {
      case Command::Generate:
        outputs = do_generate(run);
        break;
      case Command::Metrics:
        outputs = do_metrics(run);
        break;
      case Command::Optimal:
        outputs = do_optimal(run);
        break;
      case Command::Sweep:
        outputs = do_sweep(run, threads, cancel);
        break;
      case Command::Report:
        outputs = do_report(run);
        break;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "invalid parameters: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << "\n";
    return kExitPartial;
  }

  std::size_t failed = 0;
  std::size_t incomplete = 0;
  for (const auto& c : outputs.cells) {
    failed += c.status == CellStatus::Failed;
    incomplete += c.status == CellStatus::Incomplete;
  }
  const std::string status = incomplete ? "interrupted" : failed ? "partial" : "complete";
  const fs::path dir(run.output_dir);

  try {
    if (options.check) {
      const std::string previous = read_file(dir / outputs.primary_name);
      const bool same = previous == outputs.primary;
      out << (same ? "identical" : "different") << " " << outputs.primary_name << " "
          << hex64(fnv1a64(previous)) << " " << hex64(fnv1a64(outputs.primary)) << "\n";
      return same && status == "complete" ? kExitOk : kExitPartial;
    }
    write_file_atomic(dir / outputs.primary_name, outputs.primary);
    for (const auto& [name, content] : outputs.extra) write_file_atomic(dir / name, content);
    write_file_atomic(dir / "manifest.json", manifest_json(run, outputs, threads, started, status));
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }

  for (const auto& c : outputs.cells) {
    if (c.status == CellStatus::Failed) {
      err << "cell n=" << c.n << " seed=" << c.seed << " failed: " << c.message << "\n";
    }
  }
  if (incomplete) err << incomplete << " cells not run (interrupted)\n";
  out << status << ": wrote " << (dir / outputs.primary_name).string() << "\n";
  return status == "complete" ? kExitOk : kExitPartial;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"quantlab: quantizer sequences, distortion and discrepancy experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  CliOptions options;
  std::string config_path;
  std::string out_dir;
  std::size_t threads = 0;
  std::uint64_t seed = 0;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Run configuration (flat key = value or JSON)");
    cmd->add_option("--out", out_dir, "Output directory (default: output.dir or ./out)");
    cmd->add_option("--threads", threads, "Worker threads (fallback: QUANTLAB_THREADS)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Master seed override");
    cmd->add_flag("--check", options.check,
                  "Recompute and compare with the existing output instead of writing");
  };
  const std::pair<Command, const char*> commands[] = {
      {Command::Generate, "Write the points of one generator"},
      {Command::Metrics, "Evaluate metrics on one generated set"},
      {Command::Optimal, "Compute an optimal quantizer"},
      {Command::Sweep, "Run an (n, seed) sweep"},
      {Command::Report, "Summarize an existing results.csv"},
  };
  std::vector<std::pair<Command, CLI::App*>> subs;
  for (const auto& [command, help] : commands) {
    auto* sub = app.add_subcommand(std::string(to_string(command)), help);
    add_common(sub);
    subs.emplace_back(command, sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  for (const auto& [command, sub] : subs) {
    if (!sub->parsed()) continue;
    options.command = command;
    if (sub->count("--config")) options.config_path = config_path;
    if (sub->count("--out")) options.out = out_dir;
    if (sub->count("--threads")) options.threads = threads;
    if (sub->count("--seed")) options.seed = seed;
  }

  g_interrupted.store(false);
  const auto previous = std::signal(SIGINT, on_sigint);
  const int code = execute(options, std::cout, std::cerr, &g_interrupted);
  std::signal(SIGINT, previous);
  return code;
}

}  // namespace quantlab
