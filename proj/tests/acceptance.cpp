// Acceptance checks A1-A12. Prints one PASS/FAIL line per criterion, plus
// indented "info" lines with the measured values.
//
//   acceptance            run every criterion
//   acceptance A3 A7      run a subset
//
// Exit status is 0 when every selected criterion passes, 1 otherwise. A10
// counts every one-dimensional set the other criteria build, so selecting it
// runs the rest as well (their lines are printed only when selected).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "oracles.hpp"
#include "quantlab/cli.hpp"
#include "quantlab/config.hpp"
#include "quantlab/errors.hpp"
#include "quantlab/experiments.hpp"
#include "quantlab/generators.hpp"
#include "quantlab/metrics.hpp"
#include "quantlab/optimal.hpp"
#include "quantlab/report.hpp"
#include "quantlab/rng.hpp"

using namespace quantlab;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kMasterSeed = 1;
// The Farey endpoint convention used by the pipeline (see generators).
constexpr FareyEndpoints kFareyConvention = FareyEndpoints::HalfOpen;

struct Outcome {
  bool pass = false;
  std::string summary;
  std::vector<std::string> info;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Every one-dimensional set built during the run goes through the sandwich
// check; A10 reports the totals.
struct SandwichTally {
  std::mutex mutex;
  std::size_t checked = 0;
  std::vector<std::string> violations;

  void observe(const PointSet& ps, const std::string& label) {
    const auto c = check_sandwich(ps);
    std::lock_guard lock(mutex);
    ++checked;
    if (!c.holds) {
      violations.push_back(label + " n=" + std::to_string(ps.size()) + " V=" + fmt(c.optimal) +
                           " I=" + fmt(c.mean) + " r2=" + fmt(c.geometric2));
    }
  }
};

SandwichTally g_sandwich;

// Regenerates every (n, seed) cell of a sweep and feeds it to the tally.
void observe_cells(const SweepConfig& config, const std::string& label) {
  for (std::size_t n : config.ns) {
    for (auto seed : config.effective_seeds()) {
      g_sandwich.observe(generate(with_seed(config.generator, seed), n), label);
    }
  }
}

GeneratorSpec weyl(ThetaSpec theta) {
  GeneratorSpec g;
  g.kind = GeneratorSpec::Kind::Weyl;
  g.theta = std::move(theta);
  return g;
}

// ---------------------------------------------------------------------------

Outcome a1() {
  Outcome out;
  std::size_t mismatches = 0, star_exact = 0, closed_mismatches = 0;
  std::string first;
  for (std::size_t n = 1; n <= 200; ++n) {
    const auto ps = gen_farey(n, kFareyConvention);
    const auto d = extent_discrepancy(ps);
    const Rational target(1, static_cast<long>(n));
    if (!d.exact || *d.exact != target) {
      if (!mismatches) first = "order " + std::to_string(n) + ": " + d.to_string();
      ++mismatches;
    }
    const auto s = star_discrepancy(ps);
    star_exact += s.exact && *s.exact == target;
    const auto c = extent_discrepancy(gen_farey(n, FareyEndpoints::Closed));
    closed_mismatches += !c.exact || *c.exact != target;
    g_sandwich.observe(ps, "farey");
  }
  out.pass = mismatches == 0;
  out.summary = std::to_string(200 - mismatches) + "/200 orders with extent discrepancy exactly 1/n (" +
                std::string(to_string(kFareyConvention)) + ")";
  if (mismatches) out.info.push_back("first mismatch at " + first);
  out.info.push_back("closed convention: " + std::to_string(200 - closed_mismatches) + "/200 orders match");
  out.info.push_back("star discrepancy equals 1/n on " + std::to_string(star_exact) + "/200 orders (" +
                     std::string(to_string(kFareyConvention)) + ")");
  return out;
}

Outcome a2() {
  Outcome out;
  std::vector<ThetaSpec> thetas = {ThetaSpec::golden_mean(), ThetaSpec::sqrt2()};
  for (auto seed : derive_seeds(kMasterSeed, 1000)) thetas.push_back(ThetaSpec::random(seed));
  std::size_t failures = 0, cases = 0, worst = 0;
  for (const auto& theta : thetas) {
    for (std::size_t n : {10u, 100u, 1000u, 10000u}) {
      const auto ps = gen_weyl(n, theta);
      const auto count = gap_stats(ps).distinct_count;
      worst = std::max(worst, count);
      failures += count > 3;
      ++cases;
      g_sandwich.observe(ps, "weyl");
    }
  }
  out.pass = failures == 0;
  out.summary = std::to_string(failures) + " failures over " + std::to_string(cases) +
                " (theta, n) cases, max distinct gaps " + std::to_string(worst);
  return out;
}

Outcome a3() {
  Outcome out;
  bool closed_ok = true, dp_ok = true, lloyd_ok = true;
  double closed_worst = 0.0, dp_worst = 0.0, lloyd_worst = 0.0;
  for (std::size_t n = 1; n <= 1000; ++n) {
    const auto res = optimal_uniform_means(n);
    g_sandwich.observe(res.means, "midpoints");
    const double target = 1.0 / (12.0 * static_cast<double>(n) * static_cast<double>(n));
    const double err = std::abs(res.error - target);
    closed_worst = std::max(closed_worst, err);
    closed_ok &= err <= 1e-15;
    const auto& means = *res.means.rational_points();
    for (std::size_t k = 1; k <= n; ++k) {
      closed_ok &= means[k - 1].to_rational() == Rational(2 * k - 1, 2 * n);
    }
  }
  const auto errors = dp_optimal_errors(16, DensityGrid::uniform(10000));
  for (std::size_t n = 1; n <= 16; ++n) {
    const double err = std::abs(errors[n - 1] - 1.0 / (12.0 * n * n));
    dp_worst = std::max(dp_worst, err);
    dp_ok &= err <= 1e-6;
  }
  LloydOptions options;
  options.tol = 1e-14;
  options.max_iter = 1000000;
  std::size_t runs = 0, max_iter = 0;
  for (std::size_t n = 1; n <= 64; ++n) {
    for (std::uint64_t r = 0; r < 10; ++r) {
      CounterRng rng(derive_seed(kMasterSeed, n * 10 + r), streams::kLloydInit);
      std::vector<UnitPoint> init;
      for (std::size_t i = 0; i < n; ++i) init.push_back(rng.unit_point());
      const auto res = lloyd(sort_points(std::move(init), Geometry::Interval), DensitySpec::uniform(), options);
      g_sandwich.observe(res.means, "lloyd");
      const auto xs = res.means.coordinates();
      double dist = 0.0;
      for (std::size_t k = 0; k < n; ++k) {
        dist = std::max(dist, static_cast<double>(std::abs(xs[k] - (2.0L * k + 1) / (2.0L * n))));
      }
      lloyd_worst = std::max(lloyd_worst, dist);
      lloyd_ok &= dist <= 1e-10;
      max_iter = std::max(max_iter, res.iterations);
      ++runs;
    }
  }
  out.pass = closed_ok && dp_ok && lloyd_ok;
  out.summary = "closed form worst " + fmt(closed_worst) + " (<=1e-15), DP G=1e4 worst " + fmt(dp_worst) +
                " (<=1e-6), Lloyd worst " + fmt(lloyd_worst) + " over " + std::to_string(runs) +
                " runs (<=1e-10)";
  out.info.push_back("Lloyd: displacement tol 1e-14, at most " + std::to_string(max_iter) + " iterations");
  return out;
}

Outcome a4() {
  Outcome out;
  SweepConfig config;
  config.generator.kind = GeneratorSpec::Kind::IidUniform;
  config.ns = {10, 100, 1000};
  config.seeds = derive_seeds(kMasterSeed, 10000);
  config.threads = std::max(1u, std::thread::hardware_concurrency());
  const auto est = estimate_constant(config, Statistic::NPointDistortion, 0.5);
  observe_cells(config, "iid_uniform");
  out.pass = true;
  std::string detail;
  for (const auto& [n, s] : est.trace) {
    const double target = static_cast<double>(n) / (2.0 * (static_cast<double>(n) + 1.0));
    const double z = (s.mean - target) / s.stderr_mean;
    out.pass &= std::abs(z) <= 3.0;
    detail += (detail.empty() ? "" : ", ") + std::string("n=") + std::to_string(n) + " z=" + fmt(z);
    out.info.push_back("n=" + std::to_string(n) + ": mean " + fmt(s.mean) + " +- " + fmt(s.stderr_mean) +
                       ", target " + fmt(target));
  }
  out.summary = "Monte Carlo over 10^4 seeds within 3 standard errors: " + detail;
  return out;
}

Outcome a5() {
  Outcome out;
  SweepConfig config;
  config.generator.kind = GeneratorSpec::Kind::IidUniform;
  config.ns = {1000, 3162, 10000, 31623, 100000, 316228, 1000000};
  config.seeds = derive_seeds(kMasterSeed, 50);
  config.metrics = {MetricSpec::parse("max_gap@n_over_ln")};
  config.threads = std::max(1u, std::thread::hardware_concurrency());
  const auto result = run_sweep(config);
  std::vector<double> top;
  for (const auto* r : result.rows_for("max_gap@n_over_ln")) {
    if (r->n == 1000000) top.push_back(r->normalized.value);
  }
  const double median = summarize(top).median;
  const auto fit = fit_rate(result, "max_gap@n_over_ln", RateModel::PowerLawTimesLog);
  const bool median_ok = median >= 0.7 && median <= 1.4;
  const bool slope_ok = fit.median.slope >= -1.1 && fit.median.slope <= -0.9;
  out.pass = median_ok && slope_ok && result.complete();
  out.summary = "median n g_n / ln n at 1e6 = " + fmt(median) + " (in [0.7,1.4]), log-corrected slope " +
                fmt(fit.median.slope) + " (in [-1.1,-0.9])";
  std::vector<double> slopes;
  for (const auto& [seed, f] : fit.per_seed) slopes.push_back(f.slope);
  const auto ss = summarize(slopes);
  out.info.push_back("per-seed slopes: median " + fmt(ss.median) + ", IQR [" + fmt(ss.q25) + ", " +
                     fmt(ss.q75) + "]");
  observe_cells(config, "iid_uniform");
  return out;
}

Outcome a6() {
  Outcome out;
  const std::size_t order = 2000;
  const double target = 3.0 / (std::numbers::pi * std::numbers::pi);
  const auto value = [&](FareyEndpoints e) {
    const auto ps = gen_farey(order, e);
    g_sandwich.observe(ps, "farey");
    const double n = static_cast<double>(order);
    return n * n * mean_distortion_uniform(ps, 1.0) / std::log(n);
  };
  const double v = value(kFareyConvention);
  const double rel = std::abs(v - target) / target;
  out.pass = rel <= 0.15;
  out.summary = "n^2 I_n / ln n at order 2000 = " + fmt(v) + ", 3/pi^2 = " + fmt(target) +
                ", relative error " + fmt(rel) + " (<=0.15, " + std::string(to_string(kFareyConvention)) + ")";
  const double closed = value(FareyEndpoints::Closed);
  out.info.push_back("closed convention: " + fmt(closed) + ", relative error " +
                     fmt(std::abs(closed - target) / target));
  // The O(1/n^2) term divided by ln n decays slowly; show it across orders.
  std::string trace;
  for (std::size_t n : {250u, 500u, 1000u, 2000u}) {
    const double nn = static_cast<double>(n);
    const double x = nn * nn * mean_distortion_uniform(gen_farey(n, kFareyConvention), 1.0);
    trace += (trace.empty() ? "" : ", ") + std::to_string(n) + ": " + fmt(x / std::log(nn)) +
             " (n^2 I_n - 3 ln n / pi^2 = " + fmt(x - target * std::log(nn)) + ")";
  }
  out.info.push_back("trace " + trace);
  return out;
}

Outcome a7() {
  Outcome out;
  SweepConfig config;
  config.generator = weyl(ThetaSpec::golden_mean());
  for (std::size_t n = 1024; n <= 1000000; n *= 2) config.ns.push_back(n);
  config.metrics = {MetricSpec::parse("max_distortion@n")};
  config.threads = std::max(1u, std::thread::hardware_concurrency());
  const auto result = run_sweep(config);
  double overall = 0.0, low = 0.0, high = 0.0;
  for (const auto& r : result.rows) {
    const double v = r.normalized.value;
    overall = std::max(overall, v);
    if (r.n >= 1000 && r.n <= 10000) low = std::max(low, v);
    if (r.n >= 100000 && r.n <= 1000000) high = std::max(high, v);
  }
  const double ratio = low / high;
  out.pass = result.complete() && overall <= 5.0 && ratio >= 0.5 && ratio <= 2.0;
  out.summary = "max n M_n = " + fmt(overall) + " (<=5), max[1e3,1e4] / max[1e5,1e6] = " + fmt(ratio) +
                " (in [0.5,2])";
  observe_cells(config, "weyl golden");
  return out;
}

Outcome a8() {
  Outcome out;
  CounterRng rng(derive_seed(kMasterSeed, 8));
  std::size_t mismatches = 0, chain = 0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = 1 + rng.next() % 50;
    // Alternate small denominators (many ties) and large ones.
    const std::uint64_t max_den = t % 2 ? 1 + rng.next() % 12 : 1 + rng.next() % 100000;
    PointSet::RationalPoints pts;
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t q = 1 + static_cast<std::int64_t>(rng.next() % max_den);
      const std::int64_t p = static_cast<std::int64_t>(rng.next() % (static_cast<std::uint64_t>(q) + 1));
      const auto g = std::gcd(p, q);
      pts.emplace_back(p / g, q / g);
    }
    const PointSet ps(std::move(pts), Geometry::Interval);
    const auto star = star_discrepancy(ps);
    const auto extent = extent_discrepancy(ps);
    if (!star.exact || !extent.exact || *star.exact != qtest::brute_star(ps) ||
        *extent.exact != qtest::brute_extent(ps)) {
      ++mismatches;
      continue;
    }
    const Rational& ds = *star.exact;
    const Rational& d = *extent.exact;
    const bool ok = max_distortion(ps) <= d.convert_to<double>() && ds <= d && d <= 2 * ds;
    chain += !ok;
    g_sandwich.observe(ps, "random_rational");
  }
  out.pass = mismatches == 0 && chain == 0;
  out.summary = std::to_string(mismatches) + " closed-form mismatches and " + std::to_string(chain) +
                " chain violations over 500 sets";
  return out;
}

Outcome a9() {
  Outcome out;
  const std::size_t n = 100000;
  const double ln = std::log(static_cast<double>(n));
  const double band = ln * std::pow(std::log(ln), 2.0);
  std::size_t inside = 0;
  std::vector<double> values;
  for (auto seed : derive_seeds(kMasterSeed, 100)) {
    const auto ps = gen_weyl(n, ThetaSpec::random(seed));
    const double v = static_cast<double>(n) * extent_discrepancy(ps).value;
    values.push_back(v);
    inside += v <= band;
    g_sandwich.observe(ps, "weyl random");
  }
  const auto s = summarize(values);
  out.pass = inside >= 95;
  out.summary = std::to_string(inside) + "/100 theta with n D_n <= ln n (lnln n)^2 = " + fmt(band) + " (>=95)";
  out.info.push_back("n D_n median " + fmt(s.median) + ", max " +
                     fmt(*std::max_element(values.begin(), values.end())));
  return out;
}

Outcome a10() {
  Outcome out;
  std::vector<std::pair<std::string, GeneratorSpec>> gens;
  GeneratorSpec g;
  g.kind = GeneratorSpec::Kind::IidUniform;
  gens.emplace_back("iid_uniform", g);
  g.kind = GeneratorSpec::Kind::IidDensity;
  g.density = DensitySpec::power_law(2.0);
  gens.emplace_back("iid_density power:2", g);
  g.density = DensitySpec::piecewise_constant({0.5}, {1.5, 0.5});
  gens.emplace_back("iid_density piecewise", g);
  gens.emplace_back("weyl golden", weyl(ThetaSpec::golden_mean()));
  gens.emplace_back("weyl sqrt2", weyl(ThetaSpec::sqrt2()));
  gens.emplace_back("weyl random", weyl(ThetaSpec::random(kMasterSeed)));
  gens.emplace_back("weyl rational", weyl(ThetaSpec::rational(3, 7)));
  g = GeneratorSpec{};
  g.kind = GeneratorSpec::Kind::Lacunary;
  g.theta = ThetaSpec::sqrt2();
  gens.emplace_back("lacunary base 2", g);
  g.base = 3;
  gens.emplace_back("lacunary base 3", g);
  g = GeneratorSpec{};
  g.kind = GeneratorSpec::Kind::Farey;
  g.farey_endpoints = kFareyConvention;
  gens.emplace_back("farey", g);
  g.farey_endpoints = FareyEndpoints::Closed;
  gens.emplace_back("farey closed", g);

  const auto seeds = derive_seeds(kMasterSeed, 3);
  for (const auto& [label, spec] : gens) {
    for (std::size_t n : {10u, 100u, 1000u}) {
      if (spec.is_stochastic()) {
        for (auto seed : seeds) g_sandwich.observe(generate(with_seed(spec, seed), n), label);
      } else {
        g_sandwich.observe(generate(spec, n), label);
      }
    }
  }
  for (std::size_t n : {10u, 100u, 1000u}) g_sandwich.observe(optimal_uniform_means(n).means, "midpoints");

  out.pass = g_sandwich.violations.empty();
  out.summary = std::to_string(g_sandwich.violations.size()) + " violations of V_n <= I_n(2) <= r_n^2 over " +
                std::to_string(g_sandwich.checked) + " sets";
  for (std::size_t i = 0; i < std::min<std::size_t>(5, g_sandwich.violations.size()); ++i) {
    out.info.push_back(g_sandwich.violations[i]);
  }
  return out;
}

Outcome a11() {
  Outcome out;
  const auto orbit = gen_torus_orbit(10000, Matrix2{}, default_torus_start());
  const std::vector<std::size_t> ns = {100, 316, 1000, 3162, 10000};
  std::vector<double> xs, ys;
  bool band_ok = true;
  std::string detail;
  for (std::size_t n : ns) {
    const std::span<const Point2D> head(orbit.data(), n);
    const double d = discrepancy_2d(head).star;
    xs.push_back(static_cast<double>(n));
    ys.push_back(d);
    if (n == 1000 || n == 10000) {
      const double ln = std::log(static_cast<double>(n));
      const double band = 10.0 * std::pow(ln, 5.0) / std::sqrt(static_cast<double>(n));
      band_ok &= d <= band;
      detail += " D(" + std::to_string(n) + ")=" + fmt(d) + " <= " + fmt(band) + ";";
    }
  }
  const auto fit = fit_power_law(xs, ys, RateModel::PowerLaw);
  out.pass = band_ok && fit.slope >= -0.7 && fit.slope <= -0.3;
  out.summary = "cat map" + detail + " log-log slope " + fmt(fit.slope) + " (in [-0.7,-0.3])";
  return out;
}

Outcome a12() {
  Outcome out;
  const auto base = fs::temp_directory_path() / ("quantlab_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(base);
  fs::create_directories(base);
  const std::vector<std::pair<std::string, std::string>> configs = {
      {"iid", "experiment.id = a12_iid\n"
              "metrics = max_gap@n_over_ln, mean_distortion:s=2@n2, star_discrepancy, point_distortion:y=0.3@n\n"
              "[generator]\nkind = iid_uniform\n[sweep]\nns = log:10:100000:6\n[seeds]\nmaster = 1\ncount = 8\n"},
      {"weyl", "experiment.id = a12_weyl\nmetrics = max_distortion@n, distinct_gaps\n"
               "[generator]\nkind = weyl\ntheta = random:3\n[sweep]\nns = dyadic:16:65536\n"},
      {"farey", "experiment.id = a12_farey\nmetrics = star_discrepancy, extent_discrepancy@n, max_gap\n"
                "[generator]\nkind = farey\n[sweep]\nns = range:10:200:10\n"},
  };
  bool all_same = true;
  for (const auto& [name, text] : configs) {
    const auto cfg = base / (name + ".cfg");
    std::ofstream(cfg) << text;
    std::string produced[2];
    const std::size_t workers[2] = {1, 4};
    for (int i = 0; i < 2; ++i) {
      CliOptions options;
      options.command = Command::Sweep;
      options.config_path = cfg.string();
      options.out = (base / (name + "_" + std::to_string(workers[i]))).string();
      options.threads = workers[i];
      std::ostringstream sink;
      const int code = execute(options, sink, sink);
      if (code != kExitOk) {
        out.info.push_back(name + ": exit " + std::to_string(code) + ": " + sink.str());
        all_same = false;
      }
      produced[i] = read_file(fs::path(*options.out) / "results.csv");
    }
    const bool same = produced[0] == produced[1];
    all_same &= same;
    out.info.push_back(name + ": " + (same ? "identical " : "different ") + hex64(fnv1a64(produced[0])) + " " +
                       hex64(fnv1a64(produced[1])));
  }
  fs::remove_all(base);
  out.pass = all_same;
  out.summary = "results.csv byte-identical with 1 and 4 workers for " + std::to_string(configs.size()) +
                " configs";
  return out;
}

struct Criterion {
  const char* id;
  const char* title;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  // A10 tallies sets seen by the others, so it runs last.
  const std::vector<Criterion> criteria = {
      {"A1", "Dress exact discrepancy", a1},
      {"A2", "three-gap property", a2},
      {"A3", "optimal baseline identity", a3},
      {"A4", "IID point-distortion mean", a4},
      {"A5", "Levy gap rate", a5},
      {"A6", "Farey mean distortion constant", a6},
      {"A7", "bounded-quotient boundedness", a7},
      {"A8", "discrepancy closed forms vs brute force", a8},
      {"A9", "Khinchin band", a9},
      {"A11", "torus discrepancy band", a11},
      {"A12", "pipeline determinism", a12},
      {"A10", "sandwich inequality", a10},
  };
  std::vector<std::string> selected(argv + 1, argv + argc);
  for (const auto& s : selected) {
    if (std::none_of(criteria.begin(), criteria.end(), [&](const Criterion& c) { return s == c.id; })) {
      std::cerr << "unknown criterion " << s << "\n";
      return 2;
    }
  }
  const auto is_selected = [&](const Criterion& c) {
    return selected.empty() || std::find(selected.begin(), selected.end(), c.id) != selected.end();
  };
  const bool want_sandwich = std::any_of(criteria.begin(), criteria.end(), [&](const Criterion& c) {
    return std::string_view(c.id) == "A10" && is_selected(c);
  });
  bool all = true;
  for (const auto& c : criteria) {
    if (!is_selected(c)) {
      // A10 covers every cell of the full run, so the others still compute.
      if (want_sandwich && std::string_view(c.id) != "A10") {
        try {
          c.run();
        } catch (const std::exception&) {
        }
      }
      continue;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.summary = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    all &= o.pass;
    std::cout << c.id << " " << (o.pass ? "PASS" : "FAIL") << "  " << c.title << ": " << o.summary << " ["
              << fmt(secs) << " s]\n";
    for (const auto& line : o.info) std::cout << "    info: " << line << "\n";
    std::cout.flush();
  }
  return all ? 0 : 1;
}
