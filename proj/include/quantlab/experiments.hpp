#pragma once

// Rate sweeps over (n, seed) cells, log-log rate fits, constant estimates and
// the schedule checks built on top of them.

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quantlab/generators.hpp"
#include "quantlab/metrics.hpp"
#include "quantlab/numerics.hpp"

namespace quantlab {

/// Symbolic scaling applied to a raw metric value at reporting time.
enum class Normalizer { None, N, N2, NOverLn, N2OverLn, SqrtNOverLnLn };

std::string_view to_string(Normalizer normalizer);
Normalizer parse_normalizer(std::string_view text);
/// Multiplier for count n (for Farey cells, n is the order).
double normalizer_factor(Normalizer normalizer, std::size_t n);
/// Exact for None, N and N2 when the raw value is exact.
MetricValue apply_normalizer(Normalizer normalizer, const MetricValue& raw, std::size_t n);

/// A metric request: `name[:key=value]...[@normalizer]`.
///
/// Names: max_gap, geometric_distortion, max_distortion, mean_distortion,
/// point_distortion, distinct_gaps, star_discrepancy, extent_discrepancy,
/// deviation_from_uniform, optimal_ratio, geometric_ratio, discrepancy_2d.
/// Keys: s (exponent), y (query point), geometry (interval|circle override),
/// density (for mean_distortion; must come last).
struct MetricSpec {
  std::string name;
  double s = 1.0;
  double y = 0.5;
  std::optional<Geometry> geometry;
  std::optional<std::string> density;
  Normalizer normalizer = Normalizer::None;

  static MetricSpec parse(std::string_view text);
  /// Canonical text; parse(to_string()) round-trips.
  std::string to_string() const;
  bool is_two_dimensional() const noexcept { return name == "discrepancy_2d"; }
};

/// Raw metric value on a one-dimensional set.
MetricValue evaluate_metric(const MetricSpec& metric, const PointSet& ps);
/// Raw metric value on a torus orbit (discrepancy_2d only).
MetricValue evaluate_metric(const MetricSpec& metric, const std::vector<Point2D>& orbit);

struct SweepConfig {
  std::string experiment_id = "sweep";
  GeneratorSpec generator;
  std::vector<std::size_t> ns;        ///< strictly increasing
  std::vector<std::uint64_t> seeds;   ///< ignored (one cell per n) for deterministic generators
  std::vector<MetricSpec> metrics;
  std::size_t threads = 1;

  /// Throws ConfigError on an empty or non-increasing n list, no metrics, or
  /// metrics that do not match the generator's dimension.
  void validate() const;
  /// Seeds actually run: `seeds` for stochastic generators, {0} otherwise.
  std::vector<std::uint64_t> effective_seeds() const;
};

/// Seeds derived from a master seed; seed i never depends on count.
std::vector<std::uint64_t> derive_seeds(std::uint64_t master, std::size_t count);

/// The generator with its randomness keyed to `seed`: the IID stream seed or,
/// for a random theta, the theta seed.
GeneratorSpec with_seed(const GeneratorSpec& generator, std::uint64_t seed);

struct ResultRow {
  std::string experiment_id;
  std::string generator;
  std::string params;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::string metric;
  MetricValue raw;
  MetricValue normalized;
};

enum class CellStatus { Ok, Failed, Incomplete };
std::string_view to_string(CellStatus status);

struct CellRecord {
  std::size_t n = 0;
  std::uint64_t seed = 0;
  CellStatus status = CellStatus::Incomplete;
  std::string message;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;    ///< ordered by n, then seed, then metric
  std::vector<CellRecord> cells;  ///< same order, one per (n, seed)

  std::size_t failed_cells() const;
  std::size_t incomplete_cells() const;
  bool complete() const { return failed_cells() == 0 && incomplete_cells() == 0; }
  /// Rows of one metric (canonical text).
  std::vector<const ResultRow*> rows_for(std::string_view metric) const;
};

/// Computes every (n, seed) cell on `config.threads` workers. Rows do not
/// depend on the worker count. A failing cell is recorded and the run goes
/// on; if every cell fails, throws RunError. Setting `cancel` stops new cells
/// from starting; those stay Incomplete.
ExperimentResult run_sweep(const SweepConfig& config, const std::atomic<bool>* cancel = nullptr);

enum class RateModel { PowerLaw, PowerLawTimesLog };
std::string_view to_string(RateModel model);
RateModel parse_rate_model(std::string_view text);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> residuals;
  RateModel model = RateModel::PowerLaw;
  std::size_t points = 0;
};

/// OLS of ln y (PowerLaw) or ln(y / ln n) (PowerLawTimesLog) on ln n.
RateFit fit_power_law(const std::vector<double>& ns, const std::vector<double>& values,
                      RateModel model);

/// Plain OLS of y on x.
RateFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys);

struct RateFitSummary {
  std::vector<std::pair<std::uint64_t, RateFit>> per_seed;
  RateFit median;  ///< fit to the per-n medians of the raw values
};

/// Needs at least three distinct n. Nonpositive values are a DomainError
/// naming the offending rows.
RateFitSummary fit_rate(const ExperimentResult& result, std::string_view metric, RateModel model);

enum class Statistic {
  NMeanDistortion,         ///< n I_n, s = 1
  NMaxGapOverLn,           ///< n g_n / ln n
  N2MeanDistortionOverLn,  ///< n^2 I_n / ln n, s = 1
  NPointDistortion,        ///< n d_n(y), s = 1
};

std::string_view to_string(Statistic statistic);
Statistic parse_statistic(std::string_view text);
/// The sweep metric whose normalized value is the statistic.
MetricSpec statistic_metric(Statistic statistic, double y = 0.5);

struct Summary {
  std::size_t count = 0;
  double mean = 0.0;
  double stderr_mean = 0.0;
  double median = 0.0;
  double q25 = 0.0;
  double q75 = 0.0;
};

/// Linear-interpolated quantiles (type 7) and the mean with its standard error.
Summary summarize(std::vector<double> values);

struct ConstantEstimate {
  Statistic statistic = Statistic::NMeanDistortion;
  std::size_t n = 0;  ///< the largest n
  std::vector<double> per_seed;
  Summary summary;
  std::vector<std::pair<std::size_t, Summary>> trace;  ///< per n
  ExperimentResult result;
};

/// Runs the sweep for the statistic's metric (replacing config.metrics) and
/// summarizes the normalized values.
ConstantEstimate estimate_constant(SweepConfig config, Statistic statistic, double y = 0.5,
                                   const std::atomic<bool>* cancel = nullptr);

struct RadiusSchedule {
  enum class Kind { COverN, CLnNOverN };
  Kind kind = Kind::COverN;
  double c = 1.0;
  double radius(std::size_t n) const;
};

struct ShrinkingTargetHits {
  std::vector<std::size_t> hits;  ///< 1-based indices
  std::size_t count = 0;
};

/// Indices k <= N with distance(orbit[k], y) <= rho(k), orbit in generation order.
ShrinkingTargetHits shrinking_target_hits(const PointSet& orbit, double y,
                                          const RadiusSchedule& schedule, std::size_t N);

struct RatioRow {
  std::size_t n = 0;
  double geometric_ratio = 0.0;  ///< r_n^2 / V_n (median over seeds)
  double mean_ratio = 0.0;       ///< I_n(2) / V_n (median over seeds)
};

struct RatioTable {
  std::vector<RatioRow> rows;
  double max_mean_ratio = 0.0;
  /// Max of I_n(2)/V_n over the upper half of ns is at most twice the max
  /// over the lower half.
  bool mean_ratio_appears_bounded = false;
  /// Slope of ln(geometric ratio) against ln ln n, when ns has >= 3 entries > e.
  std::optional<double> geometric_slope_vs_lnln;
};

/// Ratios against the uniform optimum V_n = 1/(12 n^2), n the set size.
RatioTable geometric_vs_optimal_ratio(const GeneratorSpec& generator,
                                      const std::vector<std::size_t>& ns,
                                      const std::vector<std::uint64_t>& seeds,
                                      std::size_t threads = 1);

struct DevroyeRow {
  std::size_t n = 0;
  double median_excess = 0.0;  ///< median over seeds of n g_n - ln n
  double lnln = 0.0;
  double lnlnln = 0.0;
};

/// Trace of n g_n - ln n for IID uniform sets; no thresholds.
std::vector<DevroyeRow> devroye_trace(const std::vector<std::size_t>& ns,
                                      const std::vector<std::uint64_t>& seeds,
                                      std::size_t threads = 1);

/// Whether every bin [j/M, (j+1)/M) holds at least one point.
bool covers_all_bins(const PointSet& ps, std::size_t bins);

struct SandwichCheck {
  double optimal = 0.0;     ///< V_n, uniform measure
  double mean = 0.0;        ///< I_n(s=2)
  double geometric2 = 0.0;  ///< r_n^2
  bool holds = false;
};

/// V_n <= I_n(2) <= r_n^2 for the set against Lebesgue measure.
SandwichCheck check_sandwich(const PointSet& ps);

}  // namespace quantlab
