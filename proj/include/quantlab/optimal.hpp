#pragma once

// Optimal n-point quantizers on [0,1] under squared distance: the closed form
// for Lebesgue measure, dynamic programming on a discretized measure, and
// Lloyd iteration for a density.

#include <cstddef>
#include <string_view>
#include <vector>

#include "quantlab/density.hpp"
#include "quantlab/numerics.hpp"

namespace quantlab {

enum class OptimalMethod { ClosedForm, DP, Lloyd };

std::string_view to_string(OptimalMethod method);

struct OptimalResult {
  PointSet means;
  double error = 0.0;  ///< mean squared distortion
  OptimalMethod method = OptimalMethod::ClosedForm;
  std::size_t iterations = 0;
  std::size_t reseeds = 0;
  std::vector<double> error_history;  ///< Lloyd only, one entry per iteration
};

/// Midpoints (2k-1)/(2n) as exact rationals; error 1/(12 n^2).
OptimalResult optimal_uniform_means(std::size_t n);

/// A discrete measure: atoms at increasing positions in [0,1].
struct DensityGrid {
  std::vector<double> positions;
  std::vector<double> masses;

  /// G equal atoms at the cell centers (i + 1/2)/G.
  static DensityGrid uniform(std::size_t cells);
  /// G atoms at the cell centers carrying the density's mass on each cell.
  static DensityGrid from_density(const DensitySpec& density, std::size_t cells);
  /// Arbitrary atoms. Validates ordering, nonnegativity and total mass 1.
  static DensityGrid atoms(std::vector<double> positions, std::vector<double> masses);

  std::size_t size() const noexcept { return positions.size(); }
};

/// Exact optimum of the discrete problem by interval-partition dynamic
/// programming. Each layer is filled by divide and conquer over the monotone
/// optimal split, O(n G log G). Ties go to the leftmost split. A cluster of
/// zero mass is represented by the midpoint of its atoms.
OptimalResult dp_optimal_means(std::size_t n, const DensityGrid& grid);

/// Minimum total squared error for every cluster count 1..n_max, from the
/// same recursion.
std::vector<double> dp_optimal_errors(std::size_t n_max, const DensityGrid& grid);

struct LloydOptions {
  /// Stop once no mean moves by more than tol in one iteration.
  double tol = 1e-12;
  std::size_t max_iter = 100000;
};

/// Lloyd iteration from a sorted initial set. Errors must be non-increasing
/// up to a 1e-12 relative slack; a violation throws NumericError. Means whose
/// cell carries no mass are moved to the middle of the widest gap.
OptimalResult lloyd(const PointSet& init, const DensitySpec& density, LloydOptions options = {});

}  // namespace quantlab
