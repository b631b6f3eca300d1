#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "quantlab/errors.hpp"
#include "quantlab/metrics.hpp"
#include "quantlab/optimal.hpp"
#include "quantlab/rng.hpp"
#include "support.hpp"

using namespace quantlab;

namespace {

// O(G^2 n) interval-partition DP with no monotonicity shortcut.
std::vector<double> naive_dp(std::size_t n, const DensityGrid& grid) {
  const std::size_t g = grid.size();
  std::vector<long double> m0(g + 1), m1(g + 1), m2(g + 1);
  for (std::size_t i = 0; i < g; ++i) {
    const long double w = grid.masses[i], x = grid.positions[i];
    m0[i + 1] = m0[i] + w;
    m1[i + 1] = m1[i] + w * x;
    m2[i + 1] = m2[i] + w * x * x;
  }
  auto cost = [&](std::size_t a, std::size_t b) {
    const long double w = m0[b] - m0[a];
    if (w <= 0) return 0.0L;
    const long double s = m1[b] - m1[a];
    return std::max(0.0L, m2[b] - m2[a] - s * s / w);
  };
  const long double inf = std::numeric_limits<long double>::infinity();
  std::vector<long double> prev(g + 1, inf), cur(g + 1, inf);
  for (std::size_t j = 1; j <= g; ++j) prev[j] = cost(0, j);
  std::vector<double> out{static_cast<double>(prev[g])};
  for (std::size_t k = 2; k <= n; ++k) {
    std::fill(cur.begin(), cur.end(), inf);
    for (std::size_t j = k; j <= g; ++j) {
      for (std::size_t i = k - 1; i < j; ++i) cur[j] = std::min(cur[j], prev[i] + cost(i, j));
    }
    std::swap(prev, cur);
    out.push_back(static_cast<double>(prev[g]));
  }
  return out;
}

PointSet random_init(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed, streams::kLloydInit);
  std::vector<double> xs;
  for (std::size_t i = 0; i < n; ++i) xs.push_back(rng.uniform());
  std::sort(xs.begin(), xs.end());
  return qtest::unit_set(xs);
}

}  // namespace

TEST_CASE("closed form means") {
  const auto one = optimal_uniform_means(1);
  CHECK(one.means.values()[0] == 0.5);
  CHECK(one.error == doctest::Approx(1.0 / 12).epsilon(1e-15));
  const auto two = optimal_uniform_means(2);
  CHECK(two.means.values() == std::vector<double>{0.25, 0.75});
  CHECK(two.error == doctest::Approx(1.0 / 48).epsilon(1e-15));
  const auto ten = optimal_uniform_means(10);
  CHECK(ten.error == doctest::Approx(1.0 / 1200).epsilon(1e-15));
  CHECK(std::abs(mean_distortion_uniform(ten.means, 2) - ten.error) < 1e-15);
  CHECK((*ten.means.rational_points())[3] == RationalPoint(7, 20));
  CHECK_THROWS_AS(optimal_uniform_means(0), DomainError);
}

TEST_CASE("dp on a uniform grid") {
  const auto grid = DensityGrid::uniform(10000);
  const auto one = dp_optimal_means(1, grid);
  CHECK(std::abs(one.means.values()[0] - 0.5) < 1e-6);
  CHECK(std::abs(one.error - 1.0 / 12) < 1e-6);
  const auto four = dp_optimal_means(4, grid);
  CHECK(std::abs(four.error - 1.0 / 192) < 1e-6);
  CHECK_THROWS_AS(dp_optimal_means(5, DensityGrid::uniform(4)), DomainError);
}

TEST_CASE("dp converges to the closed form as the grid refines") {
  const auto coarse = dp_optimal_errors(16, DensityGrid::uniform(10000));
  const auto fine = dp_optimal_errors(16, DensityGrid::uniform(100000));
  for (std::size_t n = 1; n <= 16; ++n) {
    const double exact = 1.0 / (12.0 * n * n);
    CAPTURE(n);
    CHECK(std::abs(coarse[n - 1] - exact) < 1e-6);
    CHECK(std::abs(fine[n - 1] - exact) < 1e-8);
  }
}

TEST_CASE("dp on two atoms") {
  const auto grid = DensityGrid::atoms({0.2, 0.8}, {0.5, 0.5});
  const auto res = dp_optimal_means(2, grid);
  CHECK(res.means.values()[0] == doctest::Approx(0.2));
  CHECK(res.means.values()[1] == doctest::Approx(0.8));
  CHECK(res.error == 0.0);
  CHECK_THROWS_AS(DensityGrid::atoms({0.5, 0.2}, {0.5, 0.5}), DomainError);
  CHECK_THROWS_AS(DensityGrid::atoms({0.2, 0.5}, {0.5, 0.6}), DomainError);
}

TEST_CASE("divide and conquer agrees with the quadratic recursion") {
  CounterRng rng(4);
  for (int t = 0; t < 20; ++t) {
    const std::size_t g = 5 + rng.next() % 60;
    std::vector<double> pos, mass;
    double total = 0.0;
    for (std::size_t i = 0; i < g; ++i) {
      pos.push_back((i + rng.uniform()) / g);
      // Some atoms carry no mass.
      const double w = rng.uniform() < 0.2 ? 0.0 : rng.uniform();
      mass.push_back(w);
      total += w;
    }
    if (total == 0.0) continue;
    for (double& w : mass) w /= total;
    const auto grid = DensityGrid::atoms(pos, mass);
    const std::size_t n = 1 + rng.next() % std::min<std::size_t>(g, 12);
    const auto fast = dp_optimal_errors(n, grid);
    const auto slow = naive_dp(n, grid);
    for (std::size_t k = 0; k < n; ++k) REQUIRE(std::abs(fast[k] - slow[k]) < 1e-14);
  }
}

TEST_CASE("lloyd on the uniform density") {
  const auto res = lloyd(qtest::unit_set({0.1, 0.2}), DensitySpec::uniform());
  CHECK(std::abs(res.means.values()[0] - 0.25) < 1e-10);
  CHECK(std::abs(res.means.values()[1] - 0.75) < 1e-10);

  LloydOptions one_step;
  one_step.max_iter = 1;
  const auto single = lloyd(qtest::unit_set({0.9}), DensitySpec::uniform(), one_step);
  CHECK(single.means.values()[0] == 0.5);
  CHECK(single.iterations == 1);
}

TEST_CASE("lloyd error never increases") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto res = lloyd(random_init(12, seed), DensitySpec::power_law(2.0));
    for (std::size_t i = 1; i < res.error_history.size(); ++i) {
      REQUIRE(res.error_history[i] <= res.error_history[i - 1] * (1 + 1e-12));
    }
  }
}

TEST_CASE("lloyd matches dp for h(x) = 2x") {
  const auto h = DensitySpec::power_law(1.0);
  const auto dp = dp_optimal_means(2, DensityGrid::from_density(h, 10000));
  const auto ll = lloyd(qtest::unit_set({0.3, 0.6}), h);
  CHECK(std::abs(ll.error - dp.error) < 1e-5);
}

TEST_CASE("lloyd reseeds a mean with an empty cell") {
  // Both means start in the massless right half; the left one is pulled to
  // the support, the other keeps an empty cell until it is moved.
  const auto left = DensitySpec::piecewise_constant({0.5}, {2.0, 0.0});
  const auto res = lloyd(qtest::unit_set({0.9, 0.95}), left);
  CHECK(res.reseeds >= 1);
  CHECK(res.error == doctest::Approx(2.0 * 2.0 * std::pow(0.125, 3) / 3.0 * 2.0).epsilon(1e-6));
}
