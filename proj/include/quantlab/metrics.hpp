#pragma once

// Error functionals of a point set: point, mean and max distortion, gap
// statistics, one- and two-dimensional discrepancy, and deviation sums.
//
// Every function accepts unsorted input and works on a sorted copy where
// order matters, except deviation_between, which is index-wise by design.

#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "quantlab/density.hpp"
#include "quantlab/numerics.hpp"

namespace quantlab {

/// A gap length on the 2^-128 grid. `whole` marks the single length that
/// does not fit 128 bits: the full unit.
struct FixedGap {
  u128 raw = 0;
  bool whole = false;

  long double to_long_double() const noexcept;
  friend constexpr auto operator<=>(const FixedGap& a, const FixedGap& b) noexcept {
    if (a.whole != b.whole) return a.whole <=> b.whole;
    return a.raw <=> b.raw;
  }
  friend constexpr bool operator==(const FixedGap&, const FixedGap&) = default;
};

using ExactGaps = std::variant<std::vector<FixedGap>, std::vector<Rational>>;

/// Gaps of the sorted multiset in positional order. Interval: n+1 gaps on
/// {0} + points + {1}. Circle: n gaps, the last one wrapping through 0.
ExactGaps exact_gaps(const PointSet& ps);

/// Exact check that the gaps partition the unit.
bool gaps_sum_to_one(const ExactGaps& gaps);

struct GapStats {
  std::vector<double> gaps;  ///< ascending
  MetricValue max_gap;       ///< g_n, exact for rational sets
  double geometric_distortion = 0.0;
  std::size_t distinct_count = 0;
  std::size_t n = 0;
  Geometry geometry = Geometry::Interval;
};

/// Distinct gap values are counted by exact equality; for sets drawn from a
/// random stream the gaps are first rounded to multiples of 2^-80.
GapStats gap_stats(const PointSet& ps);

/// min over a in ps of distance(y, a)^s, by binary search.
double point_distortion(const PointSet& ps, double y, double s = 1.0);
double point_distortion(const PointSet& ps, UnitPoint y, double s = 1.0);

/// max over y of the point distortion (s = 1), read off the gaps.
double max_distortion(const PointSet& ps);

/// Integral of distance^s against Lebesgue measure, summed gap by gap.
double mean_distortion_uniform(const PointSet& ps, double s = 1.0);

/// Integral of distance^s * h by quadrature over each Voronoi cell.
double mean_distortion_density(const PointSet& ps, double s, const DensitySpec& density);

struct DistortionReport {
  std::size_t n = 0;
  double s = 1.0;
  std::vector<std::pair<double, double>> point_values;  ///< (y, d_n(y)^s) samples
  double mean = 0.0;
  double max = 0.0;
  Geometry geometry = Geometry::Interval;
};

/// Mean and max distortion, with `samples` equally spaced point values.
DistortionReport distortion_report(const PointSet& ps, double s = 1.0, std::size_t samples = 0);

/// D*_n = 1/(2n) + max_k |x_(k) - (2k-1)/(2n)|.
MetricValue star_discrepancy(const PointSet& ps);
/// D_n = 1/n + max_k (k/n - x_(k)) - min_k (k/n - x_(k)).
MetricValue extent_discrepancy(const PointSet& ps);

struct DiscrepancyReport {
  MetricValue d_star;
  MetricValue d_extent;
  bool exact = false;  ///< rational arithmetic throughout
  std::size_t n = 0;
};

DiscrepancyReport discrepancy(const PointSet& ps);

struct Discrepancy2DReport {
  double star = 0.0;          ///< anchored boxes [0,u) x [0,v)
  double extent_lower = 0.0;  ///< all boxes, lower bound (= star)
  double extent_upper = 0.0;  ///< all boxes, upper bound (min(1, 4 star))
  bool exact = true;
  std::size_t n = 0;
};

inline constexpr std::size_t kDefaultDiscrepancy2DCap = 20000;

/// Exact anchored discrepancy on the unit square by sweeping the critical
/// coordinates, O(n^2). Throws ResourceError above `cap` points.
Discrepancy2DReport discrepancy_2d(std::span<const Point2D> orbit,
                                   std::size_t cap = kDefaultDiscrepancy2DCap);

/// sum_k |x_(k) - k/n|^s over the sorted set. Exact for rational sets and
/// integer s.
MetricValue deviation_from_uniform(const PointSet& ps, double s);

/// sum_k |a(k) - b(k)|^s in generation order. Exact when both sets are
/// rational and s is an integer.
MetricValue deviation_between(const PointSet& a, const PointSet& b, double s);

}  // namespace quantlab
