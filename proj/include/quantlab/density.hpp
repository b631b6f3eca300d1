#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace quantlab {

/// Normalized probability density on [0,1].
///
/// Canonical text forms (used by config files and result params):
///   uniform
///   piecewise:<b1>/<b2>/...:<h0>/<h1>/...   heights for [0,b1), [b1,b2), ..., [bk,1]
///   power:<a>                               h(x) = (a+1) x^a, a >= 0
class DensitySpec {
 public:
  enum class Kind { Uniform, PiecewiseConstant, PowerLaw };

  static DensitySpec uniform();
  static DensitySpec piecewise_constant(std::vector<double> breakpoints, std::vector<double> heights);
  static DensitySpec power_law(double exponent);
  static DensitySpec parse(std::string_view text);

  Kind kind() const noexcept { return kind_; }
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& heights() const noexcept { return heights_; }
  double exponent() const noexcept { return exponent_; }

  double pdf(double x) const;

  // Closed-form moments of h over [a,b] (0 <= a <= b <= 1).
  double mass(double a, double b) const;
  double first_moment(double a, double b) const;
  double second_moment(double a, double b) const;
  /// Integral of (x-c)^2 h(x) over [a,b], in a form without cancellation for
  /// the constant-height kinds.
  double central_second_moment(double a, double b, double c) const;

  /// 0, the interior breakpoints, and 1.
  std::vector<double> knots() const;

  std::string to_string() const;

 private:
  DensitySpec() = default;
  void validate() const;

  template <typename Piece>
  double accumulate(double a, double b, Piece piece) const;

  Kind kind_ = Kind::Uniform;
  std::vector<double> breakpoints_;
  std::vector<double> heights_;
  double exponent_ = 0.0;
};

/// Adaptive Gauss-Kronrod quadrature of f over [a,b]. Throws NumericError
/// naming `where` if the error estimate stays above abs_tol.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 const std::string& where);

/// Inverse CDF sampler for the law proportional to h^power. The CDF is
/// tabulated by quadrature on a knot grid; inversion inside a knot cell uses
/// safeguarded Newton steps on the quadrature CDF.
class PowerDensitySampler {
 public:
  PowerDensitySampler(DensitySpec density, double power);

  /// x with CDF(x) = u, for u in [0,1).
  double quantile(double u) const;
  double cdf(double x) const;
  double total_mass() const noexcept { return total_; }

 private:
  double weight(double x) const;
  double partial(std::size_t cell, double x) const;

  DensitySpec density_;
  double power_;
  std::vector<double> knots_;
  std::vector<double> cumulative_;  // unnormalized, cumulative_[i] = integral over [0, knots_[i]]
  double total_ = 0.0;
};

}  // namespace quantlab
