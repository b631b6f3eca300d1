#pragma once

// Quantizer sequences: IID uniform and density-transformed draws, Weyl
// rotations, lacunary sequences, Farey fractions and hyperbolic torus orbits.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "quantlab/density.hpp"
#include "quantlab/numerics.hpp"

namespace quantlab {

/// Rotation number theta in [0,1), by construction rule.
///
/// Text forms: golden | sqrt2 | rational:<p>/<q> | random:<seed> | bits:<binary digits>
struct ThetaSpec {
  enum class Kind { GoldenMean, Sqrt2, RationalApprox, RandomUniform, ExplicitBits };

  Kind kind = Kind::GoldenMean;
  std::uint64_t p = 0;
  std::uint64_t q = 1;
  std::uint64_t seed = 0;
  std::string bits;
  /// Bits of theta to compute. Unset means "as many as the sequence needs".
  std::optional<std::size_t> precision_bits;

  static ThetaSpec golden_mean() { return {}; }
  static ThetaSpec sqrt2();
  static ThetaSpec rational(std::uint64_t p, std::uint64_t q);
  static ThetaSpec random(std::uint64_t seed);
  static ThetaSpec explicit_bits(std::string bits);
  static ThetaSpec parse(std::string_view text);

  bool is_rational() const noexcept { return kind == Kind::RationalApprox; }
  std::string to_string() const;
};

/// floor(frac(theta) * 2^bits). Irrational kinds are exact truncations; for
/// ExplicitBits, requesting more bits than were given is a DomainError.
BigInt theta_bits(const ThetaSpec& theta, std::size_t bits);

/// frac(sqrt(k)) truncated to 128 bits.
UnitPoint sqrt_fraction(std::uint64_t k);

struct Matrix2 {
  std::int64_t a = 2;
  std::int64_t b = 1;
  std::int64_t c = 1;
  std::int64_t d = 1;

  std::int64_t det() const noexcept { return a * d - b * c; }
  std::int64_t trace() const noexcept { return a + d; }
  /// |det| = 1 and no eigenvalue on the unit circle.
  bool is_hyperbolic_automorphism() const noexcept;
  std::string to_string() const;
};

enum class FareyEndpoints {
  Closed,    ///< 0/1 through 1/1
  HalfOpen,  ///< 0/1 through the last fraction below 1
};

std::string_view to_string(FareyEndpoints endpoints);
FareyEndpoints parse_farey_endpoints(std::string_view text);

struct GeneratorSpec {
  enum class Kind { IidUniform, IidDensity, Weyl, Lacunary, Farey, TorusOrbit };

  Kind kind = Kind::IidUniform;
  ThetaSpec theta;
  std::uint64_t seed = 0;
  DensitySpec density = DensitySpec::uniform();
  double power = 3.0;
  Matrix2 matrix;
  std::optional<Point2D> start;
  std::uint64_t base = 2;
  FareyEndpoints farey_endpoints = FareyEndpoints::Closed;

  /// Short kind name: iid_uniform, iid_density, weyl, lacunary, farey, torus_orbit.
  std::string name() const;
  /// Canonical parameter string, ';'-separated key=value pairs.
  std::string params() const;
  bool is_stochastic() const noexcept;
  /// Whether generate(n) is a prefix of generate(m) for n <= m.
  bool is_prefix_nested() const noexcept;
  bool is_two_dimensional() const noexcept { return kind == Kind::TorusOrbit; }
};

std::string_view to_string(GeneratorSpec::Kind kind);
GeneratorSpec::Kind parse_generator_kind(std::string_view text);

PointSet gen_iid_uniform(std::size_t n, std::uint64_t seed);
PointSet gen_iid_density(std::size_t n, std::uint64_t seed, const DensitySpec& density,
                         double power = 3.0);
PointSet gen_weyl(std::size_t n, const ThetaSpec& theta);
PointSet gen_lacunary(std::size_t n, const ThetaSpec& theta, std::uint64_t base = 2);
PointSet gen_farey(std::size_t order, FareyEndpoints endpoints = FareyEndpoints::Closed);
std::vector<Point2D> gen_torus_orbit(std::size_t n, const Matrix2& matrix, const Point2D& start);

/// (frac sqrt 2, frac sqrt 3): an irrational-looking start that avoids the
/// periodic orbits of rational points.
Point2D default_torus_start();

/// |F_order| under the given endpoint convention, by totient sieve.
std::size_t farey_size(std::size_t order, FareyEndpoints endpoints = FareyEndpoints::Closed);

/// Dispatch on spec.kind. For Farey, n is the order. TorusOrbit is rejected;
/// use generate_orbit.
PointSet generate(const GeneratorSpec& spec, std::size_t n);
std::vector<Point2D> generate_orbit(const GeneratorSpec& spec, std::size_t n);

}  // namespace quantlab
