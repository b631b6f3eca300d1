#include "quantlab/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <thread>

#include "quantlab/errors.hpp"
#include "quantlab/rng.hpp"

namespace quantlab {

namespace {

double parse_real(std::string_view text, std::string_view what) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto r = std::from_chars(text.data(), end, value);
  if (r.ec != std::errc{} || r.ptr != end) {
    throw DomainError("bad " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

double uniform_optimum(std::size_t n) {
  const double nn = static_cast<double>(n);
  return 1.0 / (12.0 * nn * nn);
}

double median_of(std::vector<double> values) { return summarize(std::move(values)).median; }

}  // namespace

// ---------------------------------------------------------------------------
// Normalizers and metrics

std::string_view to_string(Normalizer normalizer) {
  switch (normalizer) {
    case Normalizer::None:
      return "none";
    case Normalizer::N:
      return "n";
    case Normalizer::N2:
      return "n2";
    case Normalizer::NOverLn:
      return "n_over_ln";
    case Normalizer::N2OverLn:
      return "n2_over_ln";
    case Normalizer::SqrtNOverLnLn:
      return "sqrt_n_over_lnln";
  }
  return "";
}

Normalizer parse_normalizer(std::string_view text) {
  for (auto v : {Normalizer::None, Normalizer::N, Normalizer::N2, Normalizer::NOverLn,
                 Normalizer::N2OverLn, Normalizer::SqrtNOverLnLn}) {
    if (text == to_string(v)) return v;
  }
  throw DomainError("unknown normalizer '" + std::string(text) + "'");
}

double normalizer_factor(Normalizer normalizer, std::size_t n) {
  const double x = static_cast<double>(n);
  switch (normalizer) {
    case Normalizer::None:
      return 1.0;
    case Normalizer::N:
      return x;
    case Normalizer::N2:
      return x * x;
    case Normalizer::NOverLn:
      return x / std::log(x);
    case Normalizer::N2OverLn:
      return x * x / std::log(x);
    case Normalizer::SqrtNOverLnLn:
      return std::sqrt(x) / std::log(std::log(x));
  }
  return 1.0;
}

MetricValue apply_normalizer(Normalizer normalizer, const MetricValue& raw, std::size_t n) {
  if (raw.exact && (normalizer == Normalizer::None || normalizer == Normalizer::N ||
                    normalizer == Normalizer::N2)) {
    Rational factor = 1;
    if (normalizer == Normalizer::N) factor = Rational(static_cast<unsigned long long>(n));
    if (normalizer == Normalizer::N2) {
      factor = Rational(static_cast<unsigned long long>(n)) * static_cast<unsigned long long>(n);
    }
    return MetricValue::of(*raw.exact * factor);
  }
  return MetricValue::approx(raw.value * normalizer_factor(normalizer, n));
}

namespace {
const std::vector<std::string_view> kMetricNames = {
    "max_gap",          "geometric_distortion", "max_distortion",     "mean_distortion",
    "point_distortion", "distinct_gaps",        "star_discrepancy",   "extent_discrepancy",
    "deviation_from_uniform", "optimal_ratio",  "geometric_ratio",    "discrepancy_2d"};
}  // namespace

MetricSpec MetricSpec::parse(std::string_view text) {
  MetricSpec m;
  const auto at = text.find('@');
  if (at != std::string_view::npos) {
    m.normalizer = parse_normalizer(text.substr(at + 1));
    text = text.substr(0, at);
  }
  const auto colon = text.find(':');
  m.name = std::string(text.substr(0, colon));
  if (std::find(kMetricNames.begin(), kMetricNames.end(), m.name) == kMetricNames.end()) {
    throw DomainError("unknown metric '" + m.name + "'");
  }
  if (m.name == "deviation_from_uniform") m.s = 2.0;
  std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  while (!rest.empty()) {
    // A density value has colons of its own, so it runs to the end.
    const auto next = rest.starts_with("density=") ? std::string_view::npos : rest.find(':');
    const auto item = rest.substr(0, next);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw DomainError("metric parameter needs key=value: '" + std::string(item) + "'");
    }
    const auto key = item.substr(0, eq);
    const auto value = item.substr(eq + 1);
    if (key == "s") {
      m.s = parse_real(value, "exponent");
      if (!(m.s > 0.0)) throw DomainError("metric exponent s must be > 0");
    } else if (key == "y") {
      m.y = parse_real(value, "query point");
      if (!(m.y >= 0.0 && m.y <= 1.0)) throw DomainError("query point y must lie in [0,1]");
    } else if (key == "geometry") {
      m.geometry = parse_geometry(value);
    } else if (key == "density") {
      DensitySpec::parse(value);
      m.density = std::string(value);
    } else {
      throw DomainError("unknown metric parameter '" + std::string(key) + "'");
    }
    rest = next == std::string_view::npos ? std::string_view{} : rest.substr(next + 1);
  }
  return m;
}

std::string MetricSpec::to_string() const {
  std::string out = name;
  const double default_s = name == "deviation_from_uniform" ? 2.0 : 1.0;
  if (s != default_s) out += ":s=" + format_double(s);
  if (name == "point_distortion" && y != 0.5) out += ":y=" + format_double(y);
  if (geometry) out += ":geometry=" + std::string(quantlab::to_string(*geometry));
  if (density) out += ":density=" + *density;
  if (normalizer != Normalizer::None) out += "@" + std::string(quantlab::to_string(normalizer));
  return out;
}

MetricValue evaluate_metric(const MetricSpec& metric, const PointSet& input) {
  if (metric.is_two_dimensional()) {
    throw DomainError("metric " + metric.name + " needs a torus orbit");
  }
  const PointSet ps = (metric.geometry ? input.with_geometry(*metric.geometry) : input).sorted();
  const auto& name = metric.name;
  if (name == "max_gap") return gap_stats(ps).max_gap;
  if (name == "geometric_distortion") return MetricValue::approx(gap_stats(ps).geometric_distortion);
  if (name == "max_distortion") return MetricValue::approx(max_distortion(ps));
  if (name == "mean_distortion") {
    if (metric.density) {
      return MetricValue::approx(
          mean_distortion_density(ps, metric.s, DensitySpec::parse(*metric.density)));
    }
    return MetricValue::approx(mean_distortion_uniform(ps, metric.s));
  }
  if (name == "point_distortion") return MetricValue::approx(point_distortion(ps, metric.y, metric.s));
  if (name == "distinct_gaps") {
    return MetricValue::approx(static_cast<double>(gap_stats(ps).distinct_count));
  }
  if (name == "star_discrepancy") return star_discrepancy(ps);
  if (name == "extent_discrepancy") return extent_discrepancy(ps);
  if (name == "deviation_from_uniform") return deviation_from_uniform(ps, metric.s);
  if (name == "optimal_ratio") {
    return MetricValue::approx(mean_distortion_uniform(ps, 2.0) / uniform_optimum(ps.size()));
  }
  if (name == "geometric_ratio") {
    const double r = gap_stats(ps).geometric_distortion;
    return MetricValue::approx(r * r / uniform_optimum(ps.size()));
  }
  throw DomainError("unknown metric '" + name + "'");
}

MetricValue evaluate_metric(const MetricSpec& metric, const std::vector<Point2D>& orbit) {
  if (!metric.is_two_dimensional()) {
    throw DomainError("metric " + metric.name + " is not defined for torus orbits");
  }
  return MetricValue::approx(discrepancy_2d(orbit).star);
}

// ---------------------------------------------------------------------------
// Sweeps

void SweepConfig::validate() const {
  if (ns.empty()) throw ConfigError("sweep needs at least one n", {"sweep.ns"});
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] == 0) throw ConfigError("sweep counts must be >= 1", {"sweep.ns"});
    if (i && ns[i] <= ns[i - 1]) throw ConfigError("sweep counts must increase strictly", {"sweep.ns"});
  }
  if (metrics.empty()) throw ConfigError("sweep needs at least one metric", {"metrics"});
  if (generator.is_stochastic() && seeds.empty()) {
    throw ConfigError("stochastic generator needs at least one seed", {"seeds.count"});
  }
  for (const auto& m : metrics) {
    if (m.is_two_dimensional() != generator.is_two_dimensional()) {
      throw ConfigError("metric " + m.to_string() + " does not apply to generator " +
                            generator.name(),
                        {"metrics"});
    }
  }
  if (threads == 0) throw ConfigError("threads must be >= 1", {"run.threads"});
}

std::vector<std::uint64_t> SweepConfig::effective_seeds() const {
  if (generator.is_stochastic()) return seeds;
  return {0};
}

std::vector<std::uint64_t> derive_seeds(std::uint64_t master, std::size_t count) {
  std::vector<std::uint64_t> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = derive_seed(master, i);
  return out;
}

GeneratorSpec with_seed(const GeneratorSpec& generator, std::uint64_t seed) {
  GeneratorSpec out = generator;
  if (out.kind == GeneratorSpec::Kind::IidUniform || out.kind == GeneratorSpec::Kind::IidDensity) {
    out.seed = seed;
  } else if (out.theta.kind == ThetaSpec::Kind::RandomUniform) {
    out.theta.seed = seed;
  }
  return out;
}

std::string_view to_string(CellStatus status) {
  switch (status) {
    case CellStatus::Ok:
      return "ok";
    case CellStatus::Failed:
      return "failed";
    case CellStatus::Incomplete:
      return "incomplete";
  }
  return "";
}

std::size_t ExperimentResult::failed_cells() const {
  return static_cast<std::size_t>(std::count_if(
      cells.begin(), cells.end(), [](const CellRecord& c) { return c.status == CellStatus::Failed; }));
}

std::size_t ExperimentResult::incomplete_cells() const {
  return static_cast<std::size_t>(std::count_if(cells.begin(), cells.end(), [](const CellRecord& c) {
    return c.status == CellStatus::Incomplete;
  }));
}

std::vector<const ResultRow*> ExperimentResult::rows_for(std::string_view metric) const {
  std::vector<const ResultRow*> out;
  for (const auto& r : rows) {
    if (r.metric == metric) out.push_back(&r);
  }
  return out;
}

ExperimentResult run_sweep(const SweepConfig& config, const std::atomic<bool>* cancel) {
  config.validate();
  const auto seeds = config.effective_seeds();
  const std::size_t cell_count = config.ns.size() * seeds.size();

  std::vector<CellRecord> cells(cell_count);
  std::vector<std::vector<ResultRow>> cell_rows(cell_count);
  for (std::size_t i = 0; i < config.ns.size(); ++i) {
    for (std::size_t j = 0; j < seeds.size(); ++j) {
      cells[i * seeds.size() + j] = {config.ns[i], seeds[j], CellStatus::Incomplete, ""};
    }
  }

  const auto compute = [&](std::size_t index) {
    CellRecord& cell = cells[index];
    const GeneratorSpec spec = with_seed(config.generator, cell.seed);
    const std::string generator = spec.name();
    const std::string params = spec.params();
    try {
      std::vector<ResultRow> rows;
      const auto emit = [&](const MetricSpec& m, const MetricValue& raw) {
        rows.push_back({config.experiment_id, generator, params, cell.n, cell.seed, m.to_string(), raw,
                        apply_normalizer(m.normalizer, raw, cell.n)});
      };
      if (spec.is_two_dimensional()) {
        const auto orbit = generate_orbit(spec, cell.n);
        for (const auto& m : config.metrics) emit(m, evaluate_metric(m, orbit));
      } else {
        const PointSet ps = generate(spec, cell.n).sorted();
        for (const auto& m : config.metrics) emit(m, evaluate_metric(m, ps));
      }
      cell_rows[index] = std::move(rows);
      cell.status = CellStatus::Ok;
    } catch (const std::exception& e) {
      cell.status = CellStatus::Failed;
      cell.message = e.what();
    }
  };

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    while (true) {
      if (cancel && cancel->load()) return;
      const std::size_t index = next.fetch_add(1);
      if (index >= cell_count) return;
      compute(index);
    }
  };
  const std::size_t threads = std::min(config.threads, cell_count);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ExperimentResult result;
  result.cells = std::move(cells);
  for (auto& rows : cell_rows) {
    for (auto& r : rows) result.rows.push_back(std::move(r));
  }
  if (cell_count > 0 && result.failed_cells() == cell_count) {
    throw RunError("every cell failed; first error: " + result.cells.front().message);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Rate fits

std::string_view to_string(RateModel model) {
  return model == RateModel::PowerLaw ? "power_law" : "power_law_times_log";
}

RateModel parse_rate_model(std::string_view text) {
  if (text == "power_law") return RateModel::PowerLaw;
  if (text == "power_law_times_log") return RateModel::PowerLawTimesLog;
  throw DomainError("unknown rate model '" + std::string(text) + "'");
}

RateFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw DomainError("fit needs matching x and y lists");
  const std::size_t m = xs.size();
  if (m < 3) throw DomainError("fit needs at least 3 points");
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(m);
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / static_cast<double>(m);
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (!(sxx > 0.0)) throw DomainError("fit needs at least 3 distinct x values");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = m;
  double sse = 0.0;
  fit.residuals.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    fit.residuals[i] = ys[i] - (fit.intercept + fit.slope * xs[i]);
    sse += fit.residuals[i] * fit.residuals[i];
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  return fit;
}

RateFit fit_power_law(const std::vector<double>& ns, const std::vector<double>& values,
                      RateModel model) {
  if (ns.size() != values.size()) throw DomainError("fit needs matching n and value lists");
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (!(values[i] > 0.0)) throw DomainError("log fit needs positive values");
    if (!(ns[i] > 0.0)) throw DomainError("log fit needs positive n");
    double y = values[i];
    if (model == RateModel::PowerLawTimesLog) {
      if (!(ns[i] > 1.0)) throw DomainError("power_law_times_log needs n > 1");
      y /= std::log(ns[i]);
    }
    xs.push_back(std::log(ns[i]));
    ys.push_back(std::log(y));
  }
  RateFit fit = fit_line(xs, ys);
  fit.model = model;
  return fit;
}

RateFitSummary fit_rate(const ExperimentResult& result, std::string_view metric, RateModel model) {
  const auto rows = result.rows_for(metric);
  std::string offending;
  std::size_t bad = 0;
  for (const auto* r : rows) {
    if (!(r->raw.value > 0.0)) {
      if (bad < 10) {
        offending += (bad ? ", " : "") + std::string("(n=") + std::to_string(r->n) +
                     ", seed=" + std::to_string(r->seed) + ")";
      }
      ++bad;
    }
  }
  if (bad) {
    throw DomainError("log fit of " + std::string(metric) + " has " + std::to_string(bad) +
                      " nonpositive values: " + offending);
  }
  std::map<std::uint64_t, std::vector<std::pair<double, double>>> by_seed;
  std::map<std::size_t, std::vector<double>> by_n;
  for (const auto* r : rows) {
    by_seed[r->seed].emplace_back(static_cast<double>(r->n), r->raw.value);
    by_n[r->n].push_back(r->raw.value);
  }
  if (by_n.size() < 3) {
    throw DomainError("rate fit of " + std::string(metric) + " needs at least 3 distinct n, got " +
                      std::to_string(by_n.size()));
  }
  RateFitSummary out;
  for (auto& [seed, points] : by_seed) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& [n, v] : points) {
      xs.push_back(n);
      ys.push_back(v);
    }
    out.per_seed.emplace_back(seed, fit_power_law(xs, ys, model));
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (auto& [n, values] : by_n) {
    xs.push_back(static_cast<double>(n));
    ys.push_back(median_of(values));
  }
  out.median = fit_power_law(xs, ys, model);
  return out;
}

// ---------------------------------------------------------------------------
// Constants

std::string_view to_string(Statistic statistic) {
  switch (statistic) {
    case Statistic::NMeanDistortion:
      return "n_mean_distortion";
    case Statistic::NMaxGapOverLn:
      return "n_max_gap_over_ln";
    case Statistic::N2MeanDistortionOverLn:
      return "n2_mean_distortion_over_ln";
    case Statistic::NPointDistortion:
      return "n_point_distortion";
  }
  return "";
}

Statistic parse_statistic(std::string_view text) {
  for (auto s : {Statistic::NMeanDistortion, Statistic::NMaxGapOverLn,
                 Statistic::N2MeanDistortionOverLn, Statistic::NPointDistortion}) {
    if (text == to_string(s)) return s;
  }
  throw DomainError("unknown statistic '" + std::string(text) + "'");
}

MetricSpec statistic_metric(Statistic statistic, double y) {
  switch (statistic) {
    case Statistic::NMeanDistortion:
      return MetricSpec::parse("mean_distortion@n");
    case Statistic::NMaxGapOverLn:
      return MetricSpec::parse("max_gap@n_over_ln");
    case Statistic::N2MeanDistortionOverLn:
      return MetricSpec::parse("mean_distortion@n2_over_ln");
    case Statistic::NPointDistortion: {
      MetricSpec m = MetricSpec::parse("point_distortion@n");
      m.y = y;
      return m;
    }
  }
  throw DomainError("unknown statistic");
}

Summary summarize(std::vector<double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  std::sort(values.begin(), values.end());
  const auto quantile = [&](double p) {
    const double h = p * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
  };
  s.median = quantile(0.5);
  s.q25 = quantile(0.25);
  s.q75 = quantile(0.75);
  const double m = static_cast<double>(values.size());
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / m;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_mean = std::sqrt(ss / (m - 1.0) / m);
  }
  return s;
}

ConstantEstimate estimate_constant(SweepConfig config, Statistic statistic, double y,
                                   const std::atomic<bool>* cancel) {
  const MetricSpec metric = statistic_metric(statistic, y);
  config.metrics = {metric};
  ConstantEstimate out;
  out.statistic = statistic;
  out.result = run_sweep(config, cancel);
  const std::string key = metric.to_string();
  std::map<std::size_t, std::vector<double>> by_n;
  for (const auto* r : out.result.rows_for(key)) by_n[r->n].push_back(r->normalized.value);
  for (auto& [n, values] : by_n) out.trace.emplace_back(n, summarize(values));
  if (!by_n.empty()) {
    out.n = by_n.rbegin()->first;
    out.per_seed = by_n.rbegin()->second;
    out.summary = summarize(out.per_seed);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Shrinking targets, ratios, traces

double RadiusSchedule::radius(std::size_t n) const {
  const double x = static_cast<double>(n);
  return kind == Kind::COverN ? c / x : c * std::log(x) / x;
}

ShrinkingTargetHits shrinking_target_hits(const PointSet& orbit, double y,
                                          const RadiusSchedule& schedule, std::size_t N) {
  if (orbit.size() < N) throw DomainError("orbit shorter than N");
  if (!(schedule.c >= 0.0)) throw DomainError("radius constant must be >= 0");
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("target must lie in [0,1]");
  ShrinkingTargetHits out;
  const Geometry geometry = orbit.geometry();
  const auto* unit = orbit.unit_points();
  const UnitPoint target = unit ? to_unit(y, geometry) : UnitPoint{};
  for (std::size_t k = 1; k <= N; ++k) {
    long double d = 0.0L;
    if (unit) {
      d = distance((*unit)[k - 1], target, geometry).to_long_double();
    } else {
      d = std::abs(orbit.coordinate(k - 1) - static_cast<long double>(y));
      if (geometry == Geometry::Circle) d = std::min(d, 1.0L - d);
    }
    if (d <= static_cast<long double>(schedule.radius(k))) out.hits.push_back(k);
  }
  out.count = out.hits.size();
  return out;
}

RatioTable geometric_vs_optimal_ratio(const GeneratorSpec& generator,
                                      const std::vector<std::size_t>& ns,
                                      const std::vector<std::uint64_t>& seeds, std::size_t threads) {
  SweepConfig config;
  config.experiment_id = "ratio";
  config.generator = generator;
  config.ns = ns;
  config.seeds = seeds;
  config.threads = threads;
  config.metrics = {MetricSpec::parse("geometric_ratio"), MetricSpec::parse("optimal_ratio")};
  const ExperimentResult result = run_sweep(config);

  std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> by_n;
  for (const auto& r : result.rows) {
    auto& slot = by_n[r.n];
    (r.metric == "geometric_ratio" ? slot.first : slot.second).push_back(r.raw.value);
  }
  RatioTable table;
  for (auto& [n, values] : by_n) {
    table.rows.push_back({n, median_of(values.first), median_of(values.second)});
  }
  const std::size_t half = table.rows.size() / 2;
  double lower = 0.0;
  double upper = 0.0;
  const std::size_t split = std::max<std::size_t>(half, 1);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const double v = table.rows[i].mean_ratio;
    table.max_mean_ratio = std::max(table.max_mean_ratio, v);
    if (i < split) {
      lower = std::max(lower, v);
    } else {
      upper = std::max(upper, v);
    }
  }
  table.mean_ratio_appears_bounded = table.rows.size() < 2 || upper <= 2.0 * lower;

  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& row : table.rows) {
    if (row.n < 3 || !(row.geometric_ratio > 0.0)) continue;
    xs.push_back(std::log(std::log(static_cast<double>(row.n))));
    ys.push_back(std::log(row.geometric_ratio));
  }
  if (xs.size() >= 3) table.geometric_slope_vs_lnln = fit_line(xs, ys).slope;
  return table;
}

std::vector<DevroyeRow> devroye_trace(const std::vector<std::size_t>& ns,
                                      const std::vector<std::uint64_t>& seeds, std::size_t threads) {
  SweepConfig config;
  config.experiment_id = "devroye";
  config.generator.kind = GeneratorSpec::Kind::IidUniform;
  config.ns = ns;
  config.seeds = seeds;
  config.threads = threads;
  config.metrics = {MetricSpec::parse("max_gap@n")};
  const ExperimentResult result = run_sweep(config);
  std::map<std::size_t, std::vector<double>> by_n;
  for (const auto& r : result.rows) {
    by_n[r.n].push_back(r.normalized.value - std::log(static_cast<double>(r.n)));
  }
  std::vector<DevroyeRow> out;
  for (auto& [n, values] : by_n) {
    const double lnn = std::log(static_cast<double>(n));
    const double lnln = n > 2 ? std::log(lnn) : std::nan("");
    const double lnlnln = lnln > 0.0 ? std::log(lnln) : std::nan("");
    out.push_back({n, median_of(values), lnln, lnlnln});
  }
  return out;
}

bool covers_all_bins(const PointSet& ps, std::size_t bins) {
  if (bins == 0) throw DomainError("bin count must be >= 1");
  std::vector<char> hit(bins, 0);
  std::size_t filled = 0;
  const auto* unit = ps.unit_points();
  for (std::size_t i = 0; i < ps.size(); ++i) {
    std::size_t b = 0;
    if (unit) {
      // floor(x * bins) exactly: high 64 bits of raw * bins for bins < 2^64.
      const u128 raw = (*unit)[i].raw();
      const u128 hi = (raw >> 64) * bins;
      const u128 lo = (raw & ~std::uint64_t{0}) * bins;
      b = static_cast<std::size_t>((hi + (lo >> 64)) >> 64);
    } else {
      const auto& p = (*ps.rational_points())[i];
      const BigInt scaled = p.p() * static_cast<unsigned long long>(bins) / p.q();
      b = scaled.convert_to<std::size_t>();
    }
    if (b >= bins) continue;  // the point 1 on the interval
    if (!hit[b]) {
      hit[b] = 1;
      ++filled;
    }
  }
  return filled == bins;
}

SandwichCheck check_sandwich(const PointSet& ps) {
  SandwichCheck out;
  out.optimal = uniform_optimum(ps.size());
  out.mean = mean_distortion_uniform(ps, 2.0);
  const double r = gap_stats(ps).geometric_distortion;
  out.geometric2 = r * r;
  // Relative slack covers rounding when a bound is attained (midpoint sets).
  constexpr double slack = 1e-12;
  out.holds = out.optimal <= out.mean * (1.0 + slack) && out.mean <= out.geometric2 * (1.0 + slack);
  return out;
}

}  // namespace quantlab
