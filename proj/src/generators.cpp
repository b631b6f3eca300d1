#include "quantlab/generators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iterator>

#include "quantlab/errors.hpp"
#include "quantlab/rng.hpp"

namespace quantlab {

namespace {

std::size_t ceil_log2(std::size_t n) {
  std::size_t k = 0;
  while ((std::size_t{1} << k) < n) ++k;
  return k;
}

u128 low_u128(const BigInt& v) {
  const BigInt mask64 = (BigInt(1) << 64) - 1;
  const auto lo = static_cast<std::uint64_t>(v & mask64);
  const auto hi = static_cast<std::uint64_t>((v >> 64) & mask64);
  return (static_cast<u128>(hi) << 64) | lo;
}

std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto result = std::from_chars(text.data(), end, value);
  if (result.ec != std::errc{} || result.ptr != end) {
    throw DomainError("bad " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

/// Bits available for theta, checked against what the sequence needs.
std::size_t resolve_precision(const ThetaSpec& theta, std::size_t required) {
  if (theta.precision_bits && *theta.precision_bits < 128) {
    throw DomainError("theta precision_bits must be at least 128");
  }
  std::size_t available = theta.precision_bits.value_or(required);
  if (theta.kind == ThetaSpec::Kind::ExplicitBits) {
    available = std::min(theta.precision_bits.value_or(theta.bits.size()), theta.bits.size());
  }
  if (available < required) {
    throw DomainError("theta carries " + std::to_string(available) +
                      " bits but this sequence needs " + std::to_string(required) + " bits");
  }
  return available;
}

/// T (a `bits`-bit integer) as msb-first 64-bit words with bit 0 of the
/// expansion in the top bit of word 0, followed by two words of zero padding.
std::vector<std::uint64_t> expansion_words(const BigInt& value, std::size_t bits) {
  const std::size_t used = (bits + 63) / 64;
  const BigInt aligned = value << (used * 64 - bits);
  std::vector<std::uint64_t> exported;
  boost::multiprecision::export_bits(aligned, std::back_inserter(exported), 64);
  std::vector<std::uint64_t> words(used + 2, 0);
  const std::size_t skip = used - std::min(used, exported.size());
  std::copy(exported.end() - static_cast<std::ptrdiff_t>(used - skip), exported.end(),
            words.begin() + static_cast<std::ptrdiff_t>(skip));
  return words;
}

/// 128 bits of the expansion starting at bit `offset` after the binary point.
u128 bit_window(const std::vector<std::uint64_t>& words, std::size_t offset) {
  const std::size_t idx = offset / 64;
  const unsigned shift = offset % 64;
  const std::uint64_t w0 = words[idx];
  const std::uint64_t w1 = words[idx + 1];
  const std::uint64_t w2 = words[idx + 2];
  const std::uint64_t hi = shift ? (w0 << shift) | (w1 >> (64 - shift)) : w0;
  const std::uint64_t lo = shift ? (w1 << shift) | (w2 >> (64 - shift)) : w1;
  return (static_cast<u128>(hi) << 64) | lo;
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
  return static_cast<std::uint64_t>(static_cast<u128>(a) * b % m);
}

std::string theta_params(const ThetaSpec& theta) {
  std::string out = "theta=" + theta.to_string();
  if (theta.precision_bits) out += ";precision=" + std::to_string(*theta.precision_bits);
  return out;
}

}  // namespace

// --- ThetaSpec ------------------------------------------------------------

ThetaSpec ThetaSpec::sqrt2() {
  ThetaSpec t;
  t.kind = Kind::Sqrt2;
  return t;
}

ThetaSpec ThetaSpec::rational(std::uint64_t p, std::uint64_t q) {
  if (q == 0 || p > q) throw DomainError("rational theta needs 0 <= p <= q, q > 0");
  ThetaSpec t;
  t.kind = Kind::RationalApprox;
  t.p = p;
  t.q = q;
  return t;
}

ThetaSpec ThetaSpec::random(std::uint64_t seed) {
  ThetaSpec t;
  t.kind = Kind::RandomUniform;
  t.seed = seed;
  return t;
}

ThetaSpec ThetaSpec::explicit_bits(std::string bits) {
  if (bits.starts_with("0.")) bits.erase(0, 2);
  if (bits.empty() || bits.find_first_not_of("01") != std::string::npos) {
    throw DomainError("explicit theta bits must be a nonempty binary string");
  }
  ThetaSpec t;
  t.kind = Kind::ExplicitBits;
  t.bits = std::move(bits);
  return t;
}

ThetaSpec ThetaSpec::parse(std::string_view text) {
  if (text == "golden") return golden_mean();
  if (text == "sqrt2") return sqrt2();
  if (text.starts_with("rational:")) {
    const auto body = text.substr(9);
    const auto slash = body.find('/');
    if (slash == std::string_view::npos) throw DomainError("rational theta needs p/q");
    return rational(parse_u64(body.substr(0, slash), "numerator"),
                    parse_u64(body.substr(slash + 1), "denominator"));
  }
  if (text == "random") return random(0);
  if (text.starts_with("random:")) return random(parse_u64(text.substr(7), "theta seed"));
  if (text.starts_with("bits:")) return explicit_bits(std::string(text.substr(5)));
  throw DomainError("unknown theta '" + std::string(text) + "'");
}

std::string ThetaSpec::to_string() const {
  switch (kind) {
    case Kind::GoldenMean:
      return "golden";
    case Kind::Sqrt2:
      return "sqrt2";
    case Kind::RationalApprox:
      return "rational:" + std::to_string(p) + "/" + std::to_string(q);
    case Kind::RandomUniform:
      return "random:" + std::to_string(seed);
    case Kind::ExplicitBits:
      return "bits:" + bits;
  }
  return {};
}

BigInt theta_bits(const ThetaSpec& theta, std::size_t bits) {
  const BigInt one = BigInt(1) << bits;
  switch (theta.kind) {
    case ThetaSpec::Kind::GoldenMean:
      // (sqrt5 - 1)/2 = (sqrt(5 * 4^bits) - 2^bits) / 2 after scaling.
      return (isqrt(BigInt(5) << (2 * bits)) - one) >> 1;
    case ThetaSpec::Kind::Sqrt2:
      return isqrt(BigInt(2) << (2 * bits)) - one;
    case ThetaSpec::Kind::RationalApprox:
      if (theta.p == theta.q) return 0;
      return (BigInt(theta.p) << bits) / theta.q;
    case ThetaSpec::Kind::RandomUniform: {
      CounterRng rng(theta.seed, streams::kTheta);
      const std::size_t words = (bits + 63) / 64;
      BigInt value = 0;
      for (std::size_t i = 0; i < words; ++i) {
        value <<= 64;
        value |= rng.next();
      }
      return value >> (words * 64 - bits);
    }
    case ThetaSpec::Kind::ExplicitBits: {
      if (bits > theta.bits.size()) {
        throw DomainError("theta carries " + std::to_string(theta.bits.size()) +
                          " bits but " + std::to_string(bits) + " bits are needed");
      }
      BigInt value = 0;
      for (std::size_t i = 0; i < bits; ++i) {
        value <<= 1;
        if (theta.bits[i] == '1') value |= 1;
      }
      return value;
    }
  }
  return 0;
}

UnitPoint sqrt_fraction(std::uint64_t k) {
  const BigInt scaled = isqrt(BigInt(k) << 256);
  return UnitPoint::from_raw(low_u128(scaled));
}

// --- Matrix2 / enums --------------------------------------------------------

bool Matrix2::is_hyperbolic_automorphism() const noexcept {
  const auto t = trace();
  switch (det()) {
    case 1:
      return t > 2 || t < -2;
    case -1:
      return t != 0;
    default:
      return false;
  }
}

std::string Matrix2::to_string() const {
  return std::to_string(a) + "/" + std::to_string(b) + "/" + std::to_string(c) + "/" +
         std::to_string(d);
}

std::string_view to_string(FareyEndpoints endpoints) {
  return endpoints == FareyEndpoints::Closed ? "closed" : "half_open";
}

FareyEndpoints parse_farey_endpoints(std::string_view text) {
  if (text == "closed") return FareyEndpoints::Closed;
  if (text == "half_open") return FareyEndpoints::HalfOpen;
  throw DomainError("unknown Farey endpoint convention '" + std::string(text) + "'");
}

std::string_view to_string(GeneratorSpec::Kind kind) {
  using K = GeneratorSpec::Kind;
  switch (kind) {
    case K::IidUniform:
      return "iid_uniform";
    case K::IidDensity:
      return "iid_density";
    case K::Weyl:
      return "weyl";
    case K::Lacunary:
      return "lacunary";
    case K::Farey:
      return "farey";
    case K::TorusOrbit:
      return "torus_orbit";
  }
  return {};
}

GeneratorSpec::Kind parse_generator_kind(std::string_view text) {
  using K = GeneratorSpec::Kind;
  for (auto kind : {K::IidUniform, K::IidDensity, K::Weyl, K::Lacunary, K::Farey, K::TorusOrbit}) {
    if (to_string(kind) == text) return kind;
  }
  throw DomainError("unknown generator kind '" + std::string(text) + "'");
}

std::string GeneratorSpec::name() const { return std::string(to_string(kind)); }

std::string GeneratorSpec::params() const {
  switch (kind) {
    case Kind::IidUniform:
      return "seed=" + std::to_string(seed);
    case Kind::IidDensity:
      return "seed=" + std::to_string(seed) + ";density=" + density.to_string() +
             ";power=" + format_double(power);
    case Kind::Weyl:
      return theta_params(theta);
    case Kind::Lacunary:
      return theta_params(theta) + ";base=" + std::to_string(base);
    case Kind::Farey:
      return "endpoints=" + std::string(to_string(farey_endpoints));
    case Kind::TorusOrbit: {
      std::string out = "matrix=" + matrix.to_string() + ";start=";
      if (start) {
        out += format_double(start->x.to_double()) + "/" + format_double(start->y.to_double());
      } else {
        out += "sqrt2/sqrt3";
      }
      return out;
    }
  }
  return {};
}

bool GeneratorSpec::is_stochastic() const noexcept {
  return kind == Kind::IidUniform || kind == Kind::IidDensity ||
         ((kind == Kind::Weyl || kind == Kind::Lacunary) &&
          theta.kind == ThetaSpec::Kind::RandomUniform);
}

bool GeneratorSpec::is_prefix_nested() const noexcept { return kind != Kind::Farey; }

// --- generators -------------------------------------------------------------

PointSet gen_iid_uniform(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw DomainError("gen_iid_uniform needs n >= 1");
  CounterRng rng(seed, streams::kIidUniform);
  PointSet::UnitPoints points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) points.push_back(rng.unit_point());
  return PointSet(std::move(points), Geometry::Interval,
                  {"iid_uniform", seed, "seed=" + std::to_string(seed), false});
}

PointSet gen_iid_density(std::size_t n, std::uint64_t seed, const DensitySpec& density,
                         double power) {
  if (n == 0) throw DomainError("gen_iid_density needs n >= 1");
  const PowerDensitySampler sampler(density, power);
  CounterRng rng(seed, streams::kIidDensity);
  PointSet::UnitPoints points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    points.push_back(to_unit(sampler.quantile(rng.uniform()), Geometry::Interval));
  }
  return PointSet(std::move(points), Geometry::Interval,
                  {"iid_density", seed,
                   "seed=" + std::to_string(seed) + ";density=" + density.to_string() +
                       ";power=" + format_double(power),
                   false});
}

PointSet gen_weyl(std::size_t n, const ThetaSpec& theta) {
  if (n == 0) throw DomainError("gen_weyl needs n >= 1");
  PointSet::UnitPoints points;
  points.reserve(n);
  Provenance provenance{"weyl", theta.seed, theta_params(theta), true};
  if (theta.is_rational()) {
    provenance.params += ";rational";
    for (std::size_t k = 1; k <= n; ++k) {
      points.push_back(UnitPoint::from_ratio(mulmod(k % theta.q, theta.p % theta.q, theta.q), theta.q));
    }
    return PointSet(std::move(points), Geometry::Circle, std::move(provenance));
  }
  resolve_precision(theta, 128 + ceil_log2(n));
  const UnitPoint step = UnitPoint::from_raw(low_u128(theta_bits(theta, 128)));
  UnitPoint current;
  for (std::size_t k = 1; k <= n; ++k) {
    current += step;
    points.push_back(current);
  }
  return PointSet(std::move(points), Geometry::Circle, std::move(provenance));
}

PointSet gen_lacunary(std::size_t n, const ThetaSpec& theta, std::uint64_t base) {
  if (n == 0) throw DomainError("gen_lacunary needs n >= 1");
  if (base < 2) throw DomainError("lacunary base must be >= 2");
  PointSet::UnitPoints points;
  points.reserve(n);
  Provenance provenance{"lacunary", theta.seed,
                        theta_params(theta) + ";base=" + std::to_string(base), true};
  if (theta.is_rational()) {
    provenance.params += ";rational";
    const std::uint64_t q = theta.q;
    std::uint64_t r = theta.p % q;
    for (std::size_t k = 1; k <= n; ++k) {
      r = mulmod(r, base % q, q);
      points.push_back(UnitPoint::from_ratio(r, q));
    }
    return PointSet(std::move(points), Geometry::Circle, std::move(provenance));
  }

  const bool power_of_two = (base & (base - 1)) == 0;
  std::size_t log_base = 0;
  while ((std::uint64_t{1} << (log_base + 1)) <= base) ++log_base;
  // n * log2(base) bits are shifted out by the last term; one guard bit when
  // the logarithm is irrational.
  const std::size_t shifted =
      power_of_two ? n * log_base
                   : static_cast<std::size_t>(std::ceil(static_cast<double>(n) *
                                                        std::log2(static_cast<double>(base)))) + 1;
  const std::size_t precision = resolve_precision(theta, shifted + 128);
  const BigInt expansion = theta_bits(theta, precision);

  if (power_of_two) {
    const auto words = expansion_words(expansion, precision);
    for (std::size_t k = 1; k <= n; ++k) {
      points.push_back(UnitPoint::from_raw(bit_window(words, k * log_base)));
    }
  } else {
    const BigInt mask = (BigInt(1) << precision) - 1;
    BigInt residue = expansion;
    for (std::size_t k = 1; k <= n; ++k) {
      residue = (residue * base) & mask;
      points.push_back(UnitPoint::from_raw(low_u128(residue >> (precision - 128))));
    }
  }
  return PointSet(std::move(points), Geometry::Circle, std::move(provenance));
}

PointSet gen_farey(std::size_t order, FareyEndpoints endpoints) {
  if (order == 0) throw DomainError("Farey order must be >= 1");
  const auto n = static_cast<std::int64_t>(order);
  PointSet::RationalPoints points;
  points.reserve(farey_size(order));
  std::int64_t a = 0, b = 1, c = 1, d = n;
  points.emplace_back(a, b);
  while (c <= n) {
    const std::int64_t k = (n + b) / d;
    const std::int64_t next_c = k * c - a;
    const std::int64_t next_d = k * d - b;
    a = c;
    b = d;
    c = next_c;
    d = next_d;
    points.emplace_back(a, b);
  }
  if (endpoints == FareyEndpoints::HalfOpen) points.pop_back();
  return PointSet(std::move(points), Geometry::Interval,
                  {"farey", 0, "endpoints=" + std::string(to_string(endpoints)), true});
}

std::size_t farey_size(std::size_t order, FareyEndpoints endpoints) {
  std::vector<std::size_t> phi(order + 1);
  for (std::size_t i = 0; i <= order; ++i) phi[i] = i;
  for (std::size_t i = 2; i <= order; ++i) {
    if (phi[i] != i) continue;
    for (std::size_t j = i; j <= order; j += i) phi[j] -= phi[j] / i;
  }
  std::size_t total = 1;
  for (std::size_t q = 1; q <= order; ++q) total += phi[q];
  return endpoints == FareyEndpoints::Closed ? total : total - 1;
}

std::vector<Point2D> gen_torus_orbit(std::size_t n, const Matrix2& m, const Point2D& start) {
  if (n == 0) throw DomainError("gen_torus_orbit needs n >= 1");
  if (!m.is_hyperbolic_automorphism()) {
    throw DomainError("torus matrix " + m.to_string() +
                      " is not a hyperbolic automorphism (need |det| = 1, no unit eigenvalue)");
  }
  std::vector<Point2D> orbit;
  orbit.reserve(n);
  Point2D p = start;
  for (std::size_t k = 0; k < n; ++k) {
    p = Point2D{m.a * p.x + m.b * p.y, m.c * p.x + m.d * p.y};
    orbit.push_back(p);
  }
  return orbit;
}

Point2D default_torus_start() { return {sqrt_fraction(2), sqrt_fraction(3)}; }

PointSet generate(const GeneratorSpec& spec, std::size_t n) {
  using K = GeneratorSpec::Kind;
  switch (spec.kind) {
    case K::IidUniform:
      return gen_iid_uniform(n, spec.seed);
    case K::IidDensity:
      return gen_iid_density(n, spec.seed, spec.density, spec.power);
    case K::Weyl:
      return gen_weyl(n, spec.theta);
    case K::Lacunary:
      return gen_lacunary(n, spec.theta, spec.base);
    case K::Farey:
      return gen_farey(n, spec.farey_endpoints);
    case K::TorusOrbit:
      break;
  }
  throw DomainError("torus orbits are two-dimensional; use generate_orbit");
}

std::vector<Point2D> generate_orbit(const GeneratorSpec& spec, std::size_t n) {
  if (spec.kind != GeneratorSpec::Kind::TorusOrbit) {
    throw DomainError("generate_orbit needs a torus_orbit generator");
  }
  return gen_torus_orbit(n, spec.matrix, spec.start.value_or(default_torus_start()));
}

}  // namespace quantlab
