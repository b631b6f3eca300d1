// Python bindings. Point sets cross as PointSet objects; floats come back as
// lists and exact values as "p/q" strings.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "quantlab/config.hpp"
#include "quantlab/errors.hpp"
#include "quantlab/experiments.hpp"
#include "quantlab/generators.hpp"
#include "quantlab/metrics.hpp"
#include "quantlab/optimal.hpp"
#include "quantlab/report.hpp"

namespace py = pybind11;
using namespace quantlab;

namespace {

PointSet from_values(const std::vector<double>& values, const std::string& geometry) {
  const Geometry g = parse_geometry(geometry);
  PointSet::UnitPoints pts;
  pts.reserve(values.size());
  for (double v : values) pts.push_back(to_unit(v, g));
  return PointSet(std::move(pts), g);
}

PointSet from_fractions(const std::vector<std::pair<std::int64_t, std::int64_t>>& fractions,
                        const std::string& geometry) {
  PointSet::RationalPoints pts;
  pts.reserve(fractions.size());
  for (const auto& [p, q] : fractions) pts.emplace_back(p, q);
  return PointSet(std::move(pts), parse_geometry(geometry));
}

std::optional<std::vector<std::string>> exact_points(const PointSet& ps) {
  const auto* pts = ps.rational_points();
  if (!pts) return std::nullopt;
  std::vector<std::string> out;
  out.reserve(pts->size());
  for (const auto& p : *pts) out.push_back(p.to_string());
  return out;
}

Matrix2 to_matrix(const std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>& m) {
  return Matrix2{std::get<0>(m), std::get<1>(m), std::get<2>(m), std::get<3>(m)};
}

using Orbit = std::vector<std::pair<double, double>>;

Orbit orbit_values(const std::vector<Point2D>& orbit) {
  Orbit out;
  out.reserve(orbit.size());
  for (const auto& p : orbit) out.emplace_back(p.x.to_double(), p.y.to_double());
  return out;
}

std::vector<Point2D> orbit_points(const Orbit& orbit) {
  std::vector<Point2D> out;
  out.reserve(orbit.size());
  for (const auto& [x, y] : orbit) {
    out.push_back({to_unit(x, Geometry::Circle), to_unit(y, Geometry::Circle)});
  }
  return out;
}

py::dict row_dict(const ResultRow& r) {
  py::dict d;
  d["experiment_id"] = r.experiment_id;
  d["generator"] = r.generator;
  d["params"] = r.params;
  d["n"] = r.n;
  d["seed"] = r.seed;
  d["metric"] = r.metric;
  d["raw_value"] = r.raw;
  d["normalized_value"] = r.normalized;
  return d;
}

SweepConfig sweep_from_text(const std::string& text) {
  return build_run_config(Command::Sweep, parse_config(text)).sweep;
}

}  // namespace

PYBIND11_MODULE(_quantlab, m) {
  m.doc() = "Quantizer sequences, distortion and discrepancy functionals";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);
  py::register_exception<ResourceError>(m, "ResourceError", PyExc_MemoryError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
  py::register_exception<RunError>(m, "RunError", PyExc_RuntimeError);
  // std::domain_error already maps to ValueError.

  py::class_<MetricValue>(m, "MetricValue")
      .def_readonly("value", &MetricValue::value)
      .def_property_readonly("exact",
                             [](const MetricValue& v) -> std::optional<std::string> {
                               if (!v.exact) return std::nullopt;
                               return MetricValue::of(*v.exact).to_string();
                             })
      .def("__float__", [](const MetricValue& v) { return v.value; })
      .def("__str__", &MetricValue::to_string)
      .def("__repr__", [](const MetricValue& v) { return "MetricValue(" + v.to_string() + ")"; });

  py::class_<PointSet>(m, "PointSet")
      .def(py::init(&from_values), py::arg("values"), py::arg("geometry") = "interval")
      .def_static("from_fractions", &from_fractions, py::arg("fractions"),
                  py::arg("geometry") = "interval")
      .def("__len__", &PointSet::size)
      .def_property_readonly("geometry",
                             [](const PointSet& ps) { return std::string(to_string(ps.geometry())); })
      .def_property_readonly("is_rational", &PointSet::is_rational)
      .def("values", &PointSet::values)
      .def("exact", &exact_points)
      .def("sorted", &PointSet::sorted)
      .def("prefix", &PointSet::prefix, py::arg("n"));

  // Generators.
  m.def("iid_uniform", &gen_iid_uniform, py::arg("n"), py::arg("seed"));
  m.def(
      "iid_density",
      [](std::size_t n, std::uint64_t seed, const std::string& density, double power) {
        return gen_iid_density(n, seed, DensitySpec::parse(density), power);
      },
      py::arg("n"), py::arg("seed"), py::arg("density") = "uniform", py::arg("power") = 3.0);
  m.def(
      "weyl", [](std::size_t n, const std::string& theta) { return gen_weyl(n, ThetaSpec::parse(theta)); },
      py::arg("n"), py::arg("theta") = "golden");
  m.def(
      "lacunary",
      [](std::size_t n, const std::string& theta, std::uint64_t base) {
        return gen_lacunary(n, ThetaSpec::parse(theta), base);
      },
      py::arg("n"), py::arg("theta") = "golden", py::arg("base") = 2);
  m.def(
      "farey",
      [](std::size_t order, const std::string& endpoints) {
        return gen_farey(order, parse_farey_endpoints(endpoints));
      },
      py::arg("order"), py::arg("endpoints") = "half_open");
  m.def(
      "farey_size",
      [](std::size_t order, const std::string& endpoints) {
        return farey_size(order, parse_farey_endpoints(endpoints));
      },
      py::arg("order"), py::arg("endpoints") = "half_open");
  m.def(
      "torus_orbit",
      [](std::size_t n, const std::tuple<std::int64_t, std::int64_t, std::int64_t, std::int64_t>& matrix,
         std::optional<std::pair<double, double>> start) {
        const Point2D s = start ? Point2D{to_unit(start->first, Geometry::Circle),
                                          to_unit(start->second, Geometry::Circle)}
                                : default_torus_start();
        return orbit_values(gen_torus_orbit(n, to_matrix(matrix), s));
      },
      py::arg("n"), py::arg("matrix") = std::make_tuple(2, 1, 1, 1), py::arg("start") = py::none());
  m.def("derive_seeds", &derive_seeds, py::arg("master"), py::arg("count"));

  // Metrics.
  m.def(
      "gap_stats",
      [](const PointSet& ps) {
        const auto g = gap_stats(ps);
        py::dict d;
        d["gaps"] = g.gaps;
        d["max_gap"] = g.max_gap;
        d["geometric_distortion"] = g.geometric_distortion;
        d["distinct_count"] = g.distinct_count;
        return d;
      },
      py::arg("ps"));
  m.def("point_distortion", py::overload_cast<const PointSet&, double, double>(&point_distortion),
        py::arg("ps"), py::arg("y"), py::arg("s") = 1.0);
  m.def("max_distortion", &max_distortion, py::arg("ps"));
  m.def(
      "mean_distortion",
      [](const PointSet& ps, double s, std::optional<std::string> density) {
        return density ? mean_distortion_density(ps, s, DensitySpec::parse(*density))
                       : mean_distortion_uniform(ps, s);
      },
      py::arg("ps"), py::arg("s") = 1.0, py::arg("density") = py::none());
  m.def("star_discrepancy", &star_discrepancy, py::arg("ps"));
  m.def("extent_discrepancy", &extent_discrepancy, py::arg("ps"));
  m.def(
      "discrepancy_2d",
      [](const Orbit& orbit) { return discrepancy_2d(orbit_points(orbit)).star; }, py::arg("orbit"));
  m.def("deviation_from_uniform", &deviation_from_uniform, py::arg("ps"), py::arg("s") = 2.0);
  m.def("deviation_between", &deviation_between, py::arg("a"), py::arg("b"), py::arg("s") = 1.0);
  m.def(
      "evaluate_metric",
      [](const std::string& metric, const PointSet& ps) {
        return evaluate_metric(MetricSpec::parse(metric), ps);
      },
      py::arg("metric"), py::arg("ps"));
  m.def(
      "check_sandwich",
      [](const PointSet& ps) {
        const auto c = check_sandwich(ps);
        return py::make_tuple(c.optimal, c.mean, c.geometric2, c.holds);
      },
      py::arg("ps"));

  // Optimal quantizers.
  const auto optimal_dict = [](const OptimalResult& r) {
    py::dict d;
    d["means"] = r.means.values();
    d["error"] = r.error;
    d["method"] = std::string(to_string(r.method));
    d["iterations"] = r.iterations;
    d["reseeds"] = r.reseeds;
    return d;
  };
  m.def(
      "optimal_uniform_means", [=](std::size_t n) { return optimal_dict(optimal_uniform_means(n)); },
      py::arg("n"));
  m.def(
      "dp_optimal_means",
      [=](std::size_t n, const std::string& density, std::size_t grid) {
        return optimal_dict(dp_optimal_means(n, DensityGrid::from_density(DensitySpec::parse(density), grid)));
      },
      py::arg("n"), py::arg("density") = "uniform", py::arg("grid") = 10000);
  m.def(
      "lloyd",
      [=](const std::vector<double>& init, const std::string& density, double tol, std::size_t max_iter) {
        return optimal_dict(lloyd(from_values(init, "interval"), DensitySpec::parse(density),
                                  LloydOptions{tol, max_iter}));
      },
      py::arg("init"), py::arg("density") = "uniform", py::arg("tol") = 1e-12,
      py::arg("max_iter") = 100000);

  // Sweeps. The config is the same flat or JSON text the CLI reads.
  m.def(
      "sweep",
      [](const std::string& config, std::size_t threads) {
        SweepConfig sweep = sweep_from_text(config);
        sweep.threads = threads;
        ExperimentResult result;
        {
          py::gil_scoped_release release;
          result = run_sweep(sweep);
        }
        py::list rows;
        for (const auto& r : result.rows) rows.append(row_dict(r));
        return rows;
      },
      py::arg("config"), py::arg("threads") = 1);
  m.def(
      "sweep_csv",
      [](const std::string& config, std::size_t threads) {
        SweepConfig sweep = sweep_from_text(config);
        sweep.threads = threads;
        py::gil_scoped_release release;
        return results_csv(run_sweep(sweep));
      },
      py::arg("config"), py::arg("threads") = 1);
  m.def(
      "fit_power_law",
      [](const std::vector<double>& ns, const std::vector<double>& values, const std::string& model) {
        const auto fit = fit_power_law(ns, values, parse_rate_model(model));
        return py::make_tuple(fit.slope, fit.intercept, fit.r_squared);
      },
      py::arg("ns"), py::arg("values"), py::arg("model") = "power_law");
}
