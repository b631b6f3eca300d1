#pragma once

// Small builders shared by the test files. Oracles live in the individual
// test files next to the checks that use them.

#include <cstdint>
#include <numeric>
#include <utility>
#include <vector>

#include "quantlab/numerics.hpp"

namespace qtest {

inline quantlab::PointSet unit_set(const std::vector<double>& values,
                                   quantlab::Geometry geometry = quantlab::Geometry::Interval) {
  quantlab::PointSet::UnitPoints pts;
  for (double v : values) pts.push_back(quantlab::to_unit(v, geometry));
  return quantlab::PointSet(std::move(pts), geometry);
}

inline quantlab::PointSet rational_set(const std::vector<std::pair<std::int64_t, std::int64_t>>& pq,
                                       quantlab::Geometry geometry = quantlab::Geometry::Interval) {
  quantlab::PointSet::RationalPoints pts;
  for (auto [p, q] : pq) {
    const auto g = quantlab::BigInt(std::gcd(p, q));
    pts.emplace_back(quantlab::BigInt(p) / g, quantlab::BigInt(q) / g);
  }
  return quantlab::PointSet(std::move(pts), geometry);
}

inline quantlab::Rational rat(std::int64_t p, std::int64_t q) { return quantlab::Rational(p, q); }

}  // namespace qtest
