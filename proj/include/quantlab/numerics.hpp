#pragma once

// Coordinate arithmetic shared by every module: 128-bit fixed-point points on
// [0,1), exact rational points, the interval/circle geometries and the
// PointSet container.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace quantlab {

using u128 = unsigned __int128;
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

enum class Geometry { Interval, Circle };

std::string_view to_string(Geometry geometry);
Geometry parse_geometry(std::string_view text);

/// A point of [0,1) stored as raw / 2^128. Addition, subtraction and integer
/// scaling wrap modulo 1, so rotations of the circle are exact.
class UnitPoint {
 public:
  constexpr UnitPoint() = default;

  static constexpr UnitPoint from_raw(u128 raw) noexcept { return UnitPoint(raw); }

  /// Nearest grid point to p/q, wrapped mod 1. Requires q > 0 and p <= q.
  static UnitPoint from_ratio(std::uint64_t p, std::uint64_t q);

  constexpr u128 raw() const noexcept { return raw_; }

  double to_double() const noexcept;
  long double to_long_double() const noexcept;
  Rational to_rational() const;

  friend constexpr UnitPoint operator+(UnitPoint a, UnitPoint b) noexcept {
    return UnitPoint(a.raw_ + b.raw_);
  }
  friend constexpr UnitPoint operator-(UnitPoint a, UnitPoint b) noexcept {
    return UnitPoint(a.raw_ - b.raw_);
  }
  /// k * a mod 1; negative k wraps through two's complement.
  friend constexpr UnitPoint operator*(std::int64_t k, UnitPoint a) noexcept {
    return UnitPoint(static_cast<u128>(static_cast<__int128>(k)) * a.raw_);
  }
  friend constexpr UnitPoint operator*(std::uint64_t k, UnitPoint a) noexcept {
    return UnitPoint(static_cast<u128>(k) * a.raw_);
  }
  UnitPoint& operator+=(UnitPoint other) noexcept {
    raw_ += other.raw_;
    return *this;
  }

  friend constexpr auto operator<=>(const UnitPoint&, const UnitPoint&) = default;

 private:
  constexpr explicit UnitPoint(u128 raw) noexcept : raw_(raw) {}
  u128 raw_ = 0;
};

/// Converts v in [0,1] to the nearest fixed-point value. v = 1 maps to 0 on the
/// circle and to the largest representable value on the interval.
UnitPoint to_unit(double v, Geometry geometry);

/// Reduced fraction p/q with 0 <= p <= q.
class RationalPoint {
 public:
  RationalPoint(BigInt p, BigInt q);
  RationalPoint(std::int64_t p, std::int64_t q) : RationalPoint(BigInt(p), BigInt(q)) {}

  const BigInt& p() const noexcept { return p_; }
  const BigInt& q() const noexcept { return q_; }

  Rational to_rational() const { return Rational(p_, q_); }
  long double to_long_double() const;
  std::string to_string() const;

  friend bool operator==(const RationalPoint& a, const RationalPoint& b) {
    return a.p_ == b.p_ && a.q_ == b.q_;
  }
  friend std::strong_ordering operator<=>(const RationalPoint& a, const RationalPoint& b);

 private:
  BigInt p_;
  BigInt q_;
};

struct Point2D {
  UnitPoint x;
  UnitPoint y;
  friend constexpr bool operator==(const Point2D&, const Point2D&) = default;
};

/// Fixed-point length. Interval distances are |a-b|, circle distances
/// min(|a-b|, 1-|a-b|); both are strictly below 1 and so fit a UnitPoint.
UnitPoint distance(UnitPoint a, UnitPoint b, Geometry geometry) noexcept;
Rational distance(const RationalPoint& a, const RationalPoint& b, Geometry geometry);

/// A scalar result that may additionally carry an exact rational value.
struct MetricValue {
  double value = 0.0;
  std::optional<Rational> exact;

  static MetricValue approx(double v) { return {v, std::nullopt}; }
  static MetricValue of(const Rational& r) { return {r.convert_to<double>(), r}; }

  /// "p/q" when exact, otherwise 17 significant digits.
  std::string to_string() const;
};

/// Shortest round-trip-exact rendering with 17 significant digits.
std::string format_double(double value);

struct Provenance {
  std::string generator;
  std::uint64_t seed = 0;
  std::string params;
  /// False for points drawn from a random stream; gap de-duplication then
  /// rounds to a coarser grid.
  bool exact_lattice = true;
};

/// Ordered multiset of points in one geometry. Holds either fixed-point or
/// rational coordinates, never a mix. Points keep generation order until
/// sorted().
class PointSet {
 public:
  using UnitPoints = std::vector<UnitPoint>;
  using RationalPoints = std::vector<RationalPoint>;

  PointSet(UnitPoints points, Geometry geometry, Provenance provenance = {});
  PointSet(RationalPoints points, Geometry geometry, Provenance provenance = {});

  std::size_t size() const noexcept;
  Geometry geometry() const noexcept { return geometry_; }
  const Provenance& provenance() const noexcept { return provenance_; }
  bool is_sorted() const noexcept { return sorted_; }
  bool is_rational() const noexcept { return std::holds_alternative<RationalPoints>(points_); }

  /// Null when the set holds the other representation.
  const UnitPoints* unit_points() const noexcept { return std::get_if<UnitPoints>(&points_); }
  const RationalPoints* rational_points() const noexcept {
    return std::get_if<RationalPoints>(&points_);
  }

  long double coordinate(std::size_t i) const;
  std::vector<long double> coordinates() const;
  std::vector<double> values() const;

  /// Stable ascending copy (or *this when already sorted).
  PointSet sorted() const;
  /// First n points in current order.
  PointSet prefix(std::size_t n) const;
  PointSet with_geometry(Geometry geometry) const;

 private:
  std::variant<UnitPoints, RationalPoints> points_;
  Geometry geometry_;
  Provenance provenance_;
  bool sorted_ = false;
};

PointSet sort_points(PointSet::UnitPoints raw, Geometry geometry, Provenance provenance = {});
PointSet sort_points(PointSet::RationalPoints raw, Geometry geometry, Provenance provenance = {});

/// floor(sqrt(v)) for nonnegative big integers.
BigInt isqrt(const BigInt& v);

}  // namespace quantlab
