#include "quantlab/optimal.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "quantlab/errors.hpp"

namespace quantlab {

namespace {

constexpr double kMassTol = 1e-12;
constexpr double kMonotoneSlack = 1e-12;

PointSet interval_set(const std::vector<double>& values, const std::string& generator) {
  PointSet::UnitPoints pts;
  pts.reserve(values.size());
  for (double v : values) pts.push_back(to_unit(std::clamp(v, 0.0, 1.0), Geometry::Interval));
  return sort_points(std::move(pts), Geometry::Interval, Provenance{generator, 0, "", true});
}

/// Prefix moments of the atoms; cost(i, j) is the squared error of atoms
/// [i, j) about their mean.
class PrefixMoments {
 public:
  explicit PrefixMoments(const DensityGrid& grid)
      : s0_(grid.size() + 1, 0.0L), s1_(grid.size() + 1, 0.0L), s2_(grid.size() + 1, 0.0L) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const long double x = grid.positions[i];
      const long double m = grid.masses[i];
      s0_[i + 1] = s0_[i] + m;
      s1_[i + 1] = s1_[i] + m * x;
      s2_[i + 1] = s2_[i] + m * x * x;
    }
  }

  long double mass(std::size_t i, std::size_t j) const { return s0_[j] - s0_[i]; }
  long double first(std::size_t i, std::size_t j) const { return s1_[j] - s1_[i]; }

  long double cost(std::size_t i, std::size_t j) const {
    const long double m = mass(i, j);
    if (m <= 0.0L) return 0.0L;
    const long double f = first(i, j);
    return std::max(0.0L, (s2_[j] - s2_[i]) - f * f / m);
  }

 private:
  std::vector<long double> s0_;
  std::vector<long double> s1_;
  std::vector<long double> s2_;
};

/// One DP layer: next[j] = min_{i < j} prev[i] + cost(i, j) for j in [first, G],
/// filled by divide and conquer on the monotone leftmost argmin.
void fill_layer(const PrefixMoments& pm, const std::vector<long double>& prev,
                std::vector<long double>& next, std::vector<std::uint32_t>* split, std::size_t lo,
                std::size_t hi, std::size_t opt_lo, std::size_t opt_hi) {
  // Iterative stack avoids deep recursion for large G.
  struct Frame {
    std::size_t lo, hi, opt_lo, opt_hi;
  };
  std::vector<Frame> stack{{lo, hi, opt_lo, opt_hi}};
  const long double inf = std::numeric_limits<long double>::infinity();
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (f.lo > f.hi) continue;
    const std::size_t mid = f.lo + (f.hi - f.lo) / 2;
    long double best = inf;
    std::size_t best_i = f.opt_lo;
    const std::size_t last = std::min(mid - 1, f.opt_hi);
    for (std::size_t i = f.opt_lo; i <= last; ++i) {
      if (prev[i] == inf) continue;
      const long double v = prev[i] + pm.cost(i, mid);
      if (v < best) {
        best = v;
        best_i = i;
      }
    }
    next[mid] = best;
    if (split) (*split)[mid] = static_cast<std::uint32_t>(best_i);
    if (mid > f.lo) stack.push_back({f.lo, mid - 1, f.opt_lo, best_i});
    stack.push_back({mid + 1, f.hi, best_i, f.opt_hi});
  }
}

void validate_grid(const DensityGrid& grid) {
  if (grid.positions.empty() || grid.positions.size() != grid.masses.size()) {
    throw DomainError("density grid needs matching, nonempty positions and masses");
  }
  if (grid.positions.size() >= std::numeric_limits<std::uint32_t>::max()) {
    throw ResourceError("density grid too large");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double x = grid.positions[i];
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("grid positions must lie in [0,1]");
    if (i && !(x > grid.positions[i - 1])) throw DomainError("grid positions must increase");
    if (!(grid.masses[i] >= 0.0) || !std::isfinite(grid.masses[i])) {
      throw DomainError("grid masses must be finite and >= 0");
    }
    total += grid.masses[i];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw DomainError("grid masses sum to " + format_double(total) + ", not 1");
  }
}

/// Runs the layered DP; `splits` receives per-layer argmins when non-null.
std::vector<long double> run_dp(const DensityGrid& grid, std::size_t n_max,
                                std::vector<std::vector<std::uint32_t>>* splits) {
  validate_grid(grid);
  const std::size_t g = grid.size();
  if (n_max == 0) throw DomainError("need at least one mean");
  if (n_max > g) {
    throw DomainError("cannot place " + std::to_string(n_max) + " means on a grid of " +
                      std::to_string(g) + " cells");
  }
  const PrefixMoments pm(grid);
  const long double inf = std::numeric_limits<long double>::infinity();
  std::vector<long double> prev(g + 1, inf);
  for (std::size_t j = 1; j <= g; ++j) prev[j] = pm.cost(0, j);
  std::vector<long double> finals{prev[g]};
  if (splits) splits->assign(n_max + 1, {});
  std::vector<long double> next(g + 1, inf);
  for (std::size_t k = 2; k <= n_max; ++k) {
    std::fill(next.begin(), next.end(), inf);
    std::vector<std::uint32_t>* layer = nullptr;
    if (splits) {
      (*splits)[k].assign(g + 1, 0);
      layer = &(*splits)[k];
    }
    fill_layer(pm, prev, next, layer, k, g, k - 1, g - 1);
    std::swap(prev, next);
    finals.push_back(prev[g]);
  }
  return finals;
}

}  // namespace

std::string_view to_string(OptimalMethod method) {
  switch (method) {
    case OptimalMethod::ClosedForm:
      return "closed_form";
    case OptimalMethod::DP:
      return "dp";
    case OptimalMethod::Lloyd:
      return "lloyd";
  }
  return "";
}

OptimalResult optimal_uniform_means(std::size_t n) {
  if (n == 0) throw DomainError("optimal_uniform_means needs n >= 1");
  PointSet::RationalPoints pts;
  pts.reserve(n);
  const BigInt two_n = 2 * BigInt(static_cast<unsigned long long>(n));
  for (std::size_t k = 1; k <= n; ++k) {
    // (2k-1)/(2n) is reduced after dividing by gcd, which is 1 or an odd factor of n.
    BigInt p = 2 * BigInt(static_cast<unsigned long long>(k)) - 1;
    BigInt q = two_n;
    const BigInt g = boost::multiprecision::gcd(p, q);
    pts.emplace_back(p / g, q / g);
  }
  const double nn = static_cast<double>(n);
  return OptimalResult{
      PointSet(std::move(pts), Geometry::Interval, Provenance{"optimal_uniform", 0, "", true}),
      1.0 / (12.0 * nn * nn), OptimalMethod::ClosedForm, 0, 0, {}};
}

DensityGrid DensityGrid::uniform(std::size_t cells) {
  if (cells == 0) throw DomainError("grid needs at least one cell");
  DensityGrid grid;
  grid.positions.resize(cells);
  grid.masses.assign(cells, 1.0 / static_cast<double>(cells));
  for (std::size_t i = 0; i < cells; ++i) {
    grid.positions[i] = (static_cast<double>(i) + 0.5) / static_cast<double>(cells);
  }
  return grid;
}

DensityGrid DensityGrid::from_density(const DensitySpec& density, std::size_t cells) {
  DensityGrid grid = uniform(cells);
  const double g = static_cast<double>(cells);
  for (std::size_t i = 0; i < cells; ++i) {
    grid.masses[i] = density.mass(static_cast<double>(i) / g, static_cast<double>(i + 1) / g);
  }
  return grid;
}

DensityGrid DensityGrid::atoms(std::vector<double> positions, std::vector<double> masses) {
  DensityGrid grid{std::move(positions), std::move(masses)};
  validate_grid(grid);
  return grid;
}

std::vector<double> dp_optimal_errors(std::size_t n_max, const DensityGrid& grid) {
  const auto finals = run_dp(grid, n_max, nullptr);
  return {finals.begin(), finals.end()};
}

OptimalResult dp_optimal_means(std::size_t n, const DensityGrid& grid) {
  std::vector<std::vector<std::uint32_t>> splits;
  const auto finals = run_dp(grid, n, &splits);
  const PrefixMoments pm(grid);

  std::vector<double> means(n);
  std::size_t right = grid.size();
  for (std::size_t k = n; k >= 1; --k) {
    const std::size_t left = k == 1 ? 0 : splits[k][right];
    const long double m = pm.mass(left, right);
    means[k - 1] = m > 0.0L ? static_cast<double>(pm.first(left, right) / m)
                            : 0.5 * (grid.positions[left] + grid.positions[right - 1]);
    right = left;
  }
  return OptimalResult{interval_set(means, "dp"), static_cast<double>(finals.back()),
                       OptimalMethod::DP, 0, 0, {}};
}

OptimalResult lloyd(const PointSet& init, const DensitySpec& density, LloydOptions options) {
  if (init.size() == 0) throw DomainError("lloyd needs a nonempty initial set");
  if (!(options.tol > 0.0)) throw DomainError("lloyd tolerance must be > 0");
  if (!init.is_sorted()) throw DomainError("lloyd needs a sorted initial set");
  std::vector<double> x = init.values();
  const std::size_t n = x.size();
  std::vector<double> bounds(n + 1);
  std::vector<double> next(n);
  std::vector<char> empty(n);

  const auto partition = [&] {
    bounds[0] = 0.0;
    bounds[n] = 1.0;
    for (std::size_t i = 1; i < n; ++i) bounds[i] = 0.5 * (x[i - 1] + x[i]);
  };
  const auto current_error = [&] {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      e += density.central_second_moment(bounds[i], bounds[i + 1], x[i]);
    }
    return e;
  };

  OptimalResult result{init, 0.0, OptimalMethod::Lloyd, 0, 0, {}};
  auto& history = result.error_history;
  const auto record = [&](double e) {
    if (!history.empty() && e > history.back() * (1.0 + kMonotoneSlack) + 1e-300) {
      throw NumericError("lloyd error increased at iteration " + std::to_string(history.size()) +
                         ": " + format_double(history.back()) + " -> " + format_double(e));
    }
    history.push_back(e);
  };

  partition();
  record(current_error());
  for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
    bool any_empty = false;
    for (std::size_t i = 0; i < n; ++i) {
      const double m = density.mass(bounds[i], bounds[i + 1]);
      empty[i] = m <= kMassTol * (bounds[i + 1] - bounds[i]) || m <= 0.0;
      if (empty[i]) {
        any_empty = true;
        next[i] = x[i];
      } else {
        next[i] = std::clamp(density.first_moment(bounds[i], bounds[i + 1]) / m, bounds[i],
                             bounds[i + 1]);
      }
    }
    if (any_empty) {
      // Move each massless mean to the middle of the widest gap among the rest.
      for (std::size_t i = 0; i < n; ++i) {
        if (!empty[i]) continue;
        std::vector<double> others;
        for (std::size_t j = 0; j < n; ++j) {
          if (j != i) others.push_back(next[j]);
        }
        std::sort(others.begin(), others.end());
        double lo = 0.0;
        double best_lo = 0.0;
        double best_width = -1.0;
        for (std::size_t j = 0; j <= others.size(); ++j) {
          const double hi = j < others.size() ? others[j] : 1.0;
          if (hi - lo > best_width) {
            best_width = hi - lo;
            best_lo = lo;
          }
          lo = hi;
        }
        next[i] = best_lo + 0.5 * best_width;
        ++result.reseeds;
      }
      std::sort(next.begin(), next.end());
    }
    double moved = 0.0;
    for (std::size_t i = 0; i < n; ++i) moved = std::max(moved, std::abs(next[i] - x[i]));
    std::swap(x, next);
    ++result.iterations;
    partition();
    record(current_error());
    if (moved < options.tol) break;
  }
  result.error = history.back();
  result.means = interval_set(x, "lloyd");
  return result;
}

}  // namespace quantlab
