#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "quantlab/errors.hpp"
#include "quantlab/generators.hpp"
#include "quantlab/metrics.hpp"
#include "quantlab/optimal.hpp"
#include "quantlab/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace quantlab;
using qtest::brute_extent;
using qtest::brute_star;
using qtest::brute_star_2d;

namespace {

PointSet random_rational_set(std::mt19937_64& gen, std::size_t n, std::int64_t max_den) {
  PointSet::RationalPoints pts;
  for (std::size_t i = 0; i < n; ++i) {
    const std::int64_t q = 1 + static_cast<std::int64_t>(gen() % max_den);
    const std::int64_t p = static_cast<std::int64_t>(gen() % (q + 1));
    const auto g = std::gcd(p, q);
    pts.emplace_back(p / g, q / g);
  }
  return PointSet(std::move(pts), Geometry::Interval);
}

double riemann_mean(const PointSet& ps, double s, const DensitySpec& density, std::size_t cells) {
  double total = 0.0;
  for (std::size_t i = 0; i < cells; ++i) {
    const double y = (i + 0.5) / cells;
    total += point_distortion(ps, y, s) * density.pdf(y);
  }
  return total / cells;
}

}  // namespace

TEST_CASE("gap examples") {
  const auto st = gap_stats(qtest::unit_set({0.25, 0.75}));
  REQUIRE(st.gaps.size() == 3);
  CHECK(st.gaps[0] == 0.25);
  CHECK(st.gaps[1] == 0.25);
  CHECK(st.gaps[2] == 0.5);
  CHECK(st.max_gap.value == 0.5);
  CHECK(st.distinct_count == 2);

  const auto w = gap_stats(gen_weyl(3, ThetaSpec::golden_mean()));
  REQUIRE(w.gaps.size() == 3);
  CHECK(w.gaps[0] == doctest::Approx(0.2360679775));
  CHECK(w.gaps[1] == doctest::Approx(0.3819660113));
  CHECK(w.gaps[2] == doctest::Approx(0.3819660113));
  CHECK(w.distinct_count == 2);
}

TEST_CASE("gap counts and exact sums") {
  std::mt19937_64 gen(2);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 1 + gen() % 40;
    const auto iid = gen_iid_uniform(n, t);
    CHECK(std::get<0>(exact_gaps(iid)).size() == n + 1);
    CHECK(gaps_sum_to_one(exact_gaps(iid)));
    const auto circ = iid.with_geometry(Geometry::Circle);
    CHECK(std::get<0>(exact_gaps(circ)).size() == n);
    CHECK(gaps_sum_to_one(exact_gaps(circ)));
    const auto rat = random_rational_set(gen, n, 30);
    CHECK(std::get<1>(exact_gaps(rat)).size() == n + 1);
    CHECK(gaps_sum_to_one(exact_gaps(rat)));
  }
  // A single repeated point on the circle leaves one full-length gap.
  const auto same = qtest::unit_set({0.3, 0.3}, Geometry::Circle);
  CHECK(gaps_sum_to_one(exact_gaps(same)));
  CHECK(gap_stats(same).max_gap.value == 1.0);
}

TEST_CASE("circle geometric distortion is half the max gap") {
  const auto ps = gen_weyl(777, ThetaSpec::random(5));
  const auto st = gap_stats(ps);
  CHECK(st.geometric_distortion == doctest::Approx(st.max_gap.value / 2).epsilon(1e-15));
  CHECK(st.gaps.size() == 777);
}

TEST_CASE("three gaps for random rotations") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    for (std::size_t n : {2u, 17u, 100u, 1234u, 10000u}) {
      REQUIRE(gap_stats(gen_weyl(n, ThetaSpec::random(seed))).distinct_count <= 3);
    }
  }
}

TEST_CASE("rational gap fast path is exact") {
  const auto st = gap_stats(gen_farey(7));
  REQUIRE(st.max_gap.exact);
  CHECK(*st.max_gap.exact == qtest::rat(1, 7));
  const auto big = gen_farey(300);
  CHECK(*gap_stats(big).max_gap.exact == qtest::rat(1, 300));
}

TEST_CASE("point distortion examples") {
  CHECK(point_distortion(qtest::unit_set({0.5}), 0.5, 1) == 0.0);
  CHECK(point_distortion(qtest::unit_set({0.25, 0.75}), 0.5, 2) == doctest::Approx(0.0625));
  CHECK(point_distortion(qtest::unit_set({0.1, 0.9}, Geometry::Circle), 0.0, 1) ==
        doctest::Approx(0.1));
  CHECK(point_distortion(qtest::unit_set({0.1, 0.9}), 0.0, 1) == doctest::Approx(0.1));
  CHECK(point_distortion(qtest::unit_set({0.1, 0.8}), 0.99, 1) == doctest::Approx(0.19));
}

TEST_CASE("max distortion examples") {
  CHECK(max_distortion(qtest::unit_set({0.5})) == 0.5);
  CHECK(max_distortion(qtest::unit_set({0.25, 0.75})) == 0.25);
  CHECK(max_distortion(qtest::unit_set({0.25, 0.75}, Geometry::Circle)) == 0.25);
}

TEST_CASE("max distortion matches a dense scan") {
  const auto ps = gen_iid_uniform(30, 4);
  double scan = 0.0;
  for (int i = 0; i <= 200000; ++i) scan = std::max(scan, point_distortion(ps, i / 200000.0, 1));
  CHECK(max_distortion(ps) >= scan);
  CHECK(max_distortion(ps) - scan < 1e-5);
}

TEST_CASE("mean distortion examples") {
  const auto half = qtest::unit_set({0.5});
  CHECK(mean_distortion_uniform(half, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(mean_distortion_uniform(half, 2) == doctest::Approx(1.0 / 12).epsilon(1e-15));

  const auto left = DensitySpec::piecewise_constant({0.5}, {2.0, 0.0});
  CHECK(mean_distortion_density(half, 1, left) == doctest::Approx(0.25).epsilon(1e-12));

  const auto ps = qtest::unit_set({0.25, 0.75});
  const auto h = DensitySpec::power_law(1.0);
  CHECK(std::abs(mean_distortion_density(ps, 2, h) - riemann_mean(ps, 2, h, 1000000)) < 1e-6);
}

TEST_CASE("density mean distortion agrees with the uniform closed form") {
  const auto ps = gen_weyl(50, ThetaSpec::golden_mean());
  for (double s : {1.0, 2.0}) {
    CHECK(mean_distortion_density(ps, s, DensitySpec::uniform()) ==
          doctest::Approx(mean_distortion_uniform(ps, s)).epsilon(1e-12));
  }
  const auto piece = DensitySpec::piecewise_constant({0.3, 0.6}, {0.5, 2.0, 0.625});
  const auto iid = gen_iid_uniform(20, 3);
  CHECK(std::abs(mean_distortion_density(iid, 1, piece) - riemann_mean(iid, 1, piece, 1000000)) < 1e-6);
}

TEST_CASE("equally spaced midpoints reach the optimum") {
  for (std::size_t n : {1u, 2u, 10u, 100u}) {
    const auto opt = optimal_uniform_means(n);
    CHECK(mean_distortion_uniform(opt.means, 2) ==
          doctest::Approx(1.0 / (12.0 * n * n)).epsilon(1e-13));
  }
}

TEST_CASE("star discrepancy examples") {
  const auto eighths = qtest::rational_set({{1, 8}, {3, 8}, {5, 8}, {7, 8}});
  CHECK(*star_discrepancy(eighths).exact == qtest::rat(1, 8));
  CHECK(star_discrepancy(qtest::unit_set({0.5})).value == 0.5);
  const auto f3 = gen_farey(3);
  CHECK(*star_discrepancy(f3).exact == brute_star(f3));
}

TEST_CASE("extent discrepancy examples") {
  CHECK(*extent_discrepancy(qtest::rational_set({{1, 2}})).exact == 1);
  CHECK(extent_discrepancy(qtest::unit_set({0.5})).value == 1.0);
  const auto eighths = qtest::rational_set({{1, 8}, {3, 8}, {5, 8}, {7, 8}});
  CHECK(*extent_discrepancy(eighths).exact == qtest::rat(1, 4));
  CHECK(brute_extent(eighths) == qtest::rat(1, 4));
}

TEST_CASE("closed forms equal the brute-force sup in rational arithmetic") {
  std::mt19937_64 gen(77);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 1 + gen() % 50;
    const auto ps = random_rational_set(gen, n, 1 + gen() % 60);
    const auto star = star_discrepancy(ps);
    const auto extent = extent_discrepancy(ps);
    REQUIRE(star.exact);
    REQUIRE(extent.exact);
    REQUIRE(*star.exact == brute_star(ps));
    REQUIRE(*extent.exact == brute_extent(ps));
  }
}

TEST_CASE("closed forms match brute force in fixed point") {
  for (std::size_t n : {5u, 100u, 1000u}) {
    const auto ps = gen_iid_uniform(n, n);
    // Coordinates are dyadic, so the exact brute force is available.
    if (n <= 100) {
      CHECK(std::abs(star_discrepancy(ps).value - brute_star(ps).convert_to<double>()) < 1e-12);
      CHECK(std::abs(extent_discrepancy(ps).value - brute_extent(ps).convert_to<double>()) < 1e-12);
    } else {
      // Double-precision sweep of the same candidates.
      auto xs = ps.sorted().values();
      double star = 0.0, hi = -1e9, lo = 1e9;
      for (std::size_t k = 0; k < n; ++k) {
        star = std::max({star, std::abs(k / double(n) - xs[k]), std::abs((k + 1) / double(n) - xs[k])});
        hi = std::max(hi, (k + 1) / double(n) - xs[k]);
        lo = std::min(lo, k / double(n) - xs[k]);
      }
      CHECK(std::abs(star_discrepancy(ps).value - star) < 1e-12);
      CHECK(std::abs(extent_discrepancy(ps).value - (hi - lo)) < 1e-12);
    }
  }
}

TEST_CASE("discrepancy chain and the max distortion bound") {
  std::vector<PointSet> sets;
  for (std::uint64_t s = 0; s < 10; ++s) sets.push_back(gen_iid_uniform(1 + s * 37, s));
  sets.push_back(gen_weyl(1000, ThetaSpec::golden_mean()).with_geometry(Geometry::Interval));
  sets.push_back(gen_lacunary(300, ThetaSpec::sqrt2()).with_geometry(Geometry::Interval));
  sets.push_back(gen_farey(40));
  sets.push_back(gen_farey(40, FareyEndpoints::HalfOpen));
  sets.push_back(gen_iid_density(200, 1, DensitySpec::power_law(2.0)));
  for (const auto& ps : sets) {
    const auto rep = discrepancy(ps);
    const double n = static_cast<double>(ps.size());
    const double star = rep.d_star.value, extent = rep.d_extent.value;
    CHECK(star <= extent * (1 + 1e-15));
    CHECK(extent <= 2 * star * (1 + 1e-15));
    CHECK(star >= 1 / (2 * n) * (1 - 1e-15));
    CHECK(extent >= 1 / n * (1 - 1e-15));
    CHECK(extent <= 1.0);
    const double m = max_distortion(ps);
    CHECK(m <= extent * (1 + 1e-15));
    CHECK(mean_distortion_uniform(ps, 1) <= m * (1 + 1e-15));
    CHECK(mean_distortion_uniform(ps, 2) <= m * m * (1 + 1e-15));
    const auto report = distortion_report(ps, 1, 5);
    CHECK(report.point_values.size() == 5);
    CHECK((0 <= report.mean && report.mean <= report.max && report.max <= 1));
  }
}

TEST_CASE("discrepancy of the interval endpoints themselves") {
  // 0 and 1 both included: checks the candidate y = 1 in the brute force.
  const auto ps = qtest::rational_set({{0, 1}, {1, 1}});
  CHECK(*star_discrepancy(ps).exact == brute_star(ps));
  CHECK(*extent_discrepancy(ps).exact == brute_extent(ps));
}

TEST_CASE("two-dimensional star discrepancy") {
  const Point2D centre{to_unit(0.5, Geometry::Circle), to_unit(0.5, Geometry::Circle)};
  const std::vector<Point2D> single{centre};
  CHECK(discrepancy_2d(single).star == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(brute_star_2d(single) == qtest::rat(3, 4));

  std::vector<Point2D> grid;
  for (double x : {0.25, 0.75}) {
    for (double y : {0.25, 0.75}) grid.push_back({to_unit(x, Geometry::Circle), to_unit(y, Geometry::Circle)});
  }
  CHECK(discrepancy_2d(grid).star == doctest::Approx(brute_star_2d(grid).convert_to<double>()).epsilon(1e-15));

  CounterRng rng(8);
  for (int t = 0; t < 40; ++t) {
    std::vector<Point2D> pts;
    const std::size_t n = 1 + rng.next() % 25;
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse coordinates so that ties in x and in y occur.
      pts.push_back({UnitPoint::from_ratio(rng.next() % 8, 8), UnitPoint::from_ratio(rng.next() % 8, 8)});
    }
    const auto rep = discrepancy_2d(pts);
    REQUIRE(std::abs(rep.star - brute_star_2d(pts).convert_to<double>()) < 1e-15);
    CHECK(rep.extent_lower == rep.star);
    CHECK(rep.extent_upper == std::min(1.0, 4 * rep.star));
  }
}

TEST_CASE("cat map discrepancy band and cap") {
  const auto orbit = gen_torus_orbit(1000, Matrix2{}, default_torus_start());
  const double n = 1000;
  CHECK(discrepancy_2d(orbit).star <= 10 * std::pow(std::log(n), 5) / std::sqrt(n));
  CHECK_THROWS_AS(discrepancy_2d(orbit, 999), ResourceError);
}

TEST_CASE("deviation examples") {
  CHECK(*deviation_from_uniform(qtest::rational_set({{1, 4}, {1, 2}, {3, 4}, {1, 1}}), 2).exact == 0);
  CHECK(deviation_from_uniform(qtest::unit_set({0.5}), 2).value == doctest::Approx(0.25));
  CHECK(*deviation_from_uniform(qtest::rational_set({{1, 2}}), 2).exact == qtest::rat(1, 4));

  const auto a = qtest::unit_set({0.1, 0.2});
  const auto b = qtest::unit_set({0.2, 0.4});
  CHECK(deviation_between(a, a, 1).value == 0.0);
  CHECK(deviation_between(a, b, 1).value == doctest::Approx(0.3).epsilon(1e-15));
  CHECK_THROWS_AS(deviation_between(a, qtest::unit_set({0.1}), 1), DomainError);
  const auto ra = qtest::rational_set({{1, 10}, {1, 5}});
  const auto rb = qtest::rational_set({{1, 5}, {2, 5}});
  CHECK(*deviation_between(ra, rb, 1).exact == qtest::rat(3, 10));
}

TEST_CASE("Farey Franel sums decrease with the order") {
  double previous = 1e9;
  for (std::size_t order : {10u, 20u, 50u, 100u, 200u, 500u}) {
    const double d = deviation_from_uniform(gen_farey(order), 2).value;
    CAPTURE(order);
    CHECK(d < previous);
    previous = d;
  }
}

TEST_CASE("sorted deviation is bounded by the star discrepancies") {
  // |a_(k) - b_(k)| <= (D*_a - 1/2N) + (D*_b - 1/2N) term by term.
  for (std::size_t order : {50u, 100u, 200u}) {
    const auto farey = gen_farey(order);
    const auto n = farey.size();
    const auto weyl = gen_weyl(n, ThetaSpec::golden_mean()).sorted();
    const double sum = deviation_between(weyl, farey, 1).value;
    const double bound = static_cast<double>(n) * (star_discrepancy(weyl).value +
                                                   star_discrepancy(farey).value) - 1.0;
    CAPTURE(order);
    CHECK(sum > 0.0);
    CHECK(sum <= bound * (1 + 1e-12));
  }
}

TEST_CASE("metrics reject empty input and bad exponents") {
  CHECK_THROWS_AS(point_distortion(qtest::unit_set({0.5}), 0.5, 0.0), DomainError);
  CHECK_THROWS_AS(point_distortion(qtest::unit_set({0.5}), 1.5, 1.0), DomainError);
}
