#include "quantlab/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "quantlab/errors.hpp"

namespace quantlab {

namespace {

constexpr u128 kMaxRaw = ~u128{0};

BigInt to_bigint(u128 v) {
  BigInt out = static_cast<std::uint64_t>(v >> 64);
  out <<= 64;
  out |= static_cast<std::uint64_t>(v);
  return out;
}

}  // namespace

std::string_view to_string(Geometry geometry) {
  return geometry == Geometry::Interval ? "interval" : "circle";
}

Geometry parse_geometry(std::string_view text) {
  if (text == "interval") return Geometry::Interval;
  if (text == "circle") return Geometry::Circle;
  throw DomainError("unknown geometry '" + std::string(text) + "'");
}

UnitPoint UnitPoint::from_ratio(std::uint64_t p, std::uint64_t q) {
  if (q == 0 || p > q) throw DomainError("from_ratio requires 0 <= p <= q and q > 0");
  if (p == q) return UnitPoint(0);
  // Two-step long division of p * 2^128 by q; p < q < 2^64 keeps each step in range.
  const u128 first = static_cast<u128>(p) << 64;
  const u128 hi = first / q;
  const u128 second = (first % q) << 64;
  const u128 lo = second / q;
  const u128 rem = second % q;
  u128 raw = (hi << 64) | lo;
  if (2 * rem >= q) ++raw;
  return UnitPoint(raw);
}

double UnitPoint::to_double() const noexcept {
  return std::ldexp(static_cast<double>(raw_), -128);
}

long double UnitPoint::to_long_double() const noexcept {
  return std::ldexp(static_cast<long double>(raw_), -128);
}

Rational UnitPoint::to_rational() const {
  return Rational(to_bigint(raw_), BigInt(1) << 128);
}

UnitPoint to_unit(double v, Geometry geometry) {
  if (!(v >= 0.0 && v <= 1.0)) throw DomainError("to_unit: value outside [0,1]");
  if (v == 1.0) return geometry == Geometry::Circle ? UnitPoint{} : UnitPoint::from_raw(kMaxRaw);
  if (v == 0.0) return UnitPoint{};
  int exponent = 0;
  const double fraction = std::frexp(v, &exponent);  // v = fraction * 2^exponent, exponent <= 0
  const auto mantissa = static_cast<std::uint64_t>(std::ldexp(fraction, 53));
  const int shift = 128 - 53 + exponent;
  if (shift >= 0) return UnitPoint::from_raw(static_cast<u128>(mantissa) << shift);
  const int down = -shift;
  if (down > 64) return UnitPoint{};
  const u128 m = mantissa;
  u128 raw = m >> down;
  if ((m >> (down - 1)) & 1U) ++raw;
  return UnitPoint::from_raw(raw);
}

RationalPoint::RationalPoint(BigInt p, BigInt q) : p_(std::move(p)), q_(std::move(q)) {
  if (q_ <= 0) throw DomainError("rational point needs a positive denominator");
  if (p_ < 0 || p_ > q_) throw DomainError("rational point must lie in [0,1]");
  if (boost::multiprecision::gcd(p_, q_) != 1) throw DomainError("rational point not in lowest terms");
}

long double RationalPoint::to_long_double() const {
  return p_.convert_to<long double>() / q_.convert_to<long double>();
}

std::string RationalPoint::to_string() const { return p_.str() + "/" + q_.str(); }

std::strong_ordering operator<=>(const RationalPoint& a, const RationalPoint& b) {
  const BigInt lhs = a.p_ * b.q_;
  const BigInt rhs = b.p_ * a.q_;
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

UnitPoint distance(UnitPoint a, UnitPoint b, Geometry geometry) noexcept {
  const u128 d = a.raw() >= b.raw() ? a.raw() - b.raw() : b.raw() - a.raw();
  if (geometry == Geometry::Interval) return UnitPoint::from_raw(d);
  const u128 complement = -d;  // 2^128 - d, and 0 when d == 0
  return UnitPoint::from_raw(std::min(d, complement));
}

Rational distance(const RationalPoint& a, const RationalPoint& b, Geometry geometry) {
  Rational d = a.to_rational() - b.to_rational();
  if (d < 0) d = -d;
  if (geometry == Geometry::Circle) {
    const Rational complement = Rational(1) - d;
    if (complement < d) return complement;
  }
  return d;
}

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof buffer, value,
                                    std::chars_format::general, 17);
  return std::string(buffer, result.ptr);
}

std::string MetricValue::to_string() const {
  if (exact) {
    return boost::multiprecision::numerator(*exact).str() + "/" +
           boost::multiprecision::denominator(*exact).str();
  }
  return format_double(value);
}

PointSet::PointSet(UnitPoints points, Geometry geometry, Provenance provenance)
    : points_(std::move(points)), geometry_(geometry), provenance_(std::move(provenance)) {
  if (size() == 0) throw DomainError("point set must be nonempty");
  const auto& pts = std::get<UnitPoints>(points_);
  sorted_ = std::is_sorted(pts.begin(), pts.end());
}

PointSet::PointSet(RationalPoints points, Geometry geometry, Provenance provenance)
    : points_(std::move(points)), geometry_(geometry), provenance_(std::move(provenance)) {
  if (size() == 0) throw DomainError("point set must be nonempty");
  const auto& pts = std::get<RationalPoints>(points_);
  sorted_ = std::is_sorted(pts.begin(), pts.end());
}

std::size_t PointSet::size() const noexcept {
  return std::visit([](const auto& pts) { return pts.size(); }, points_);
}

long double PointSet::coordinate(std::size_t i) const {
  return std::visit([i](const auto& pts) -> long double { return pts[i].to_long_double(); },
                    points_);
}

std::vector<long double> PointSet::coordinates() const {
  return std::visit(
      [](const auto& pts) {
        std::vector<long double> out;
        out.reserve(pts.size());
        for (const auto& p : pts) out.push_back(p.to_long_double());
        return out;
      },
      points_);
}

std::vector<double> PointSet::values() const {
  const auto coords = coordinates();
  return {coords.begin(), coords.end()};
}

PointSet PointSet::sorted() const {
  if (sorted_) return *this;
  PointSet copy = *this;
  std::visit([](auto& pts) { std::stable_sort(pts.begin(), pts.end()); }, copy.points_);
  copy.sorted_ = true;
  return copy;
}

PointSet PointSet::prefix(std::size_t n) const {
  if (n == 0 || n > size()) throw DomainError("prefix length out of range");
  return std::visit(
      [&](const auto& pts) {
        using Vec = std::decay_t<decltype(pts)>;
        return PointSet(Vec(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(n)), geometry_,
                        provenance_);
      },
      points_);
}

PointSet PointSet::with_geometry(Geometry geometry) const {
  PointSet copy = *this;
  copy.geometry_ = geometry;
  return copy;
}

PointSet sort_points(PointSet::UnitPoints raw, Geometry geometry, Provenance provenance) {
  return PointSet(std::move(raw), geometry, std::move(provenance)).sorted();
}

PointSet sort_points(PointSet::RationalPoints raw, Geometry geometry, Provenance provenance) {
  return PointSet(std::move(raw), geometry, std::move(provenance)).sorted();
}

BigInt isqrt(const BigInt& v) {
  if (v < 0) throw DomainError("isqrt of negative value");
  return boost::multiprecision::sqrt(v);
}

}  // namespace quantlab
