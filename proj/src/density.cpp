#include "quantlab/density.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "quantlab/errors.hpp"
#include "quantlab/numerics.hpp"

namespace quantlab {

namespace {

constexpr double kNormalizationTol = 1e-12;

double parse_number(std::string_view text) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  const auto result = std::from_chars(text.data(), end, value);
  if (result.ec != std::errc{} || result.ptr != end) {
    throw DomainError("not a number: '" + std::string(text) + "'");
  }
  return value;
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto slash = text.find('/', start);
    out.push_back(parse_number(text.substr(start, slash - start)));
    if (slash == std::string_view::npos) break;
    start = slash + 1;
  }
  return out;
}

std::string join_list(const std::vector<double>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += '/';
    out += format_double(values[i]);
  }
  return out;
}

}  // namespace

DensitySpec DensitySpec::uniform() { return DensitySpec(); }

DensitySpec DensitySpec::piecewise_constant(std::vector<double> breakpoints,
                                            std::vector<double> heights) {
  DensitySpec d;
  d.kind_ = Kind::PiecewiseConstant;
  d.breakpoints_ = std::move(breakpoints);
  d.heights_ = std::move(heights);
  d.validate();
  return d;
}

DensitySpec DensitySpec::power_law(double exponent) {
  DensitySpec d;
  d.kind_ = Kind::PowerLaw;
  d.exponent_ = exponent;
  d.validate();
  return d;
}

DensitySpec DensitySpec::parse(std::string_view text) {
  if (text == "uniform") return uniform();
  if (text.starts_with("power:")) return power_law(parse_number(text.substr(6)));
  if (text.starts_with("piecewise:")) {
    const auto rest = text.substr(10);
    const auto colon = rest.find(':');
    if (colon == std::string_view::npos) {
      throw DomainError("piecewise density needs 'piecewise:<breakpoints>:<heights>'");
    }
    return piecewise_constant(parse_list(rest.substr(0, colon)), parse_list(rest.substr(colon + 1)));
  }
  throw DomainError("unknown density '" + std::string(text) + "'");
}

void DensitySpec::validate() const {
  if (kind_ == Kind::PowerLaw) {
    if (!std::isfinite(exponent_) || exponent_ < 0.0) {
      throw DomainError("power-law density needs a finite exponent >= 0");
    }
    return;
  }
  if (kind_ != Kind::PiecewiseConstant) return;
  if (heights_.size() != breakpoints_.size() + 1) {
    throw DomainError("piecewise density needs one more height than breakpoints");
  }
  double previous = 0.0;
  for (double b : breakpoints_) {
    if (!(b > previous && b < 1.0)) {
      throw DomainError("piecewise breakpoints must increase strictly inside (0,1)");
    }
    previous = b;
  }
  for (double h : heights_) {
    if (!std::isfinite(h) || h < 0.0) throw DomainError("density heights must be finite and >= 0");
  }
  const double total = mass(0.0, 1.0);
  if (std::abs(total - 1.0) > kNormalizationTol) {
    throw DomainError("density integrates to " + format_double(total) + ", not 1");
  }
}

double DensitySpec::pdf(double x) const {
  switch (kind_) {
    case Kind::Uniform:
      return 1.0;
    case Kind::PowerLaw:
      return (exponent_ + 1.0) * std::pow(x, exponent_);
    case Kind::PiecewiseConstant: {
      const auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
      return heights_[static_cast<std::size_t>(it - breakpoints_.begin())];
    }
  }
  return 0.0;
}

template <typename Piece>
double DensitySpec::accumulate(double a, double b, Piece piece) const {
  double total = 0.0;
  for (std::size_t i = 0; i < heights_.size(); ++i) {
    const double left = i == 0 ? 0.0 : breakpoints_[i - 1];
    const double right = i == breakpoints_.size() ? 1.0 : breakpoints_[i];
    const double lo = std::max(a, left);
    const double hi = std::min(b, right);
    if (hi > lo) total += heights_[i] * piece(lo, hi);
  }
  return total;
}

double DensitySpec::mass(double a, double b) const {
  switch (kind_) {
    case Kind::Uniform:
      return b - a;
    case Kind::PowerLaw:
      return std::pow(b, exponent_ + 1.0) - std::pow(a, exponent_ + 1.0);
    case Kind::PiecewiseConstant:
      return accumulate(a, b, [](double lo, double hi) { return hi - lo; });
  }
  return 0.0;
}

double DensitySpec::first_moment(double a, double b) const {
  switch (kind_) {
    case Kind::Uniform:
      return (b * b - a * a) / 2.0;
    case Kind::PowerLaw: {
      const double k = exponent_ + 2.0;
      return (exponent_ + 1.0) / k * (std::pow(b, k) - std::pow(a, k));
    }
    case Kind::PiecewiseConstant:
      return accumulate(a, b, [](double lo, double hi) { return (hi * hi - lo * lo) / 2.0; });
  }
  return 0.0;
}

double DensitySpec::second_moment(double a, double b) const {
  switch (kind_) {
    case Kind::Uniform:
      return (b * b * b - a * a * a) / 3.0;
    case Kind::PowerLaw: {
      const double k = exponent_ + 3.0;
      return (exponent_ + 1.0) / k * (std::pow(b, k) - std::pow(a, k));
    }
    case Kind::PiecewiseConstant:
      return accumulate(a, b,
                        [](double lo, double hi) { return (hi * hi * hi - lo * lo * lo) / 3.0; });
  }
  return 0.0;
}

double DensitySpec::central_second_moment(double a, double b, double c) const {
  const auto cubic = [c](double lo, double hi) {
    const double u = hi - c;
    const double l = lo - c;
    return (u * u * u - l * l * l) / 3.0;
  };
  switch (kind_) {
    case Kind::Uniform:
      return cubic(a, b);
    case Kind::PowerLaw:
      return std::max(0.0, second_moment(a, b) - 2.0 * c * first_moment(a, b) + c * c * mass(a, b));
    case Kind::PiecewiseConstant:
      return accumulate(a, b, cubic);
  }
  return 0.0;
}

std::vector<double> DensitySpec::knots() const {
  std::vector<double> out{0.0};
  out.insert(out.end(), breakpoints_.begin(), breakpoints_.end());
  out.push_back(1.0);
  return out;
}

std::string DensitySpec::to_string() const {
  switch (kind_) {
    case Kind::Uniform:
      return "uniform";
    case Kind::PowerLaw:
      return "power:" + format_double(exponent_);
    case Kind::PiecewiseConstant:
      return "piecewise:" + join_list(breakpoints_) + ":" + join_list(heights_);
  }
  return {};
}

namespace {

// Boost's adaptive driver reports its error on the [-1,1] image of each
// subinterval and floors it at 2 eps |K| per leaf, so the sum stops meaning
// anything once it recurses deeply. Bisect here and keep absolute errors.
double integrate_piece(const std::function<double(double)>& f, double a, double b, double abs_tol,
                       int depth, double& error) {
  double local = 0.0;
  const double value =
      boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 0, 0.0, &local);
  const double scaled = local * 0.5 * (b - a);
  // Below a few ulps of the value the Kronrod-Gauss difference is rounding.
  const double floor = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(value);
  const double mid = 0.5 * (a + b);
  if (scaled <= std::max(abs_tol, floor) || depth == 0 || !(mid > a && mid < b)) {
    error += scaled;
    return value;
  }
  return integrate_piece(f, a, mid, 0.5 * abs_tol, depth - 1, error) +
         integrate_piece(f, mid, b, 0.5 * abs_tol, depth - 1, error);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                 const std::string& where) {
  if (!(b > a)) return 0.0;
  double error = 0.0;
  const double value = integrate_piece(f, a, b, abs_tol, 30, error);
  const double slack = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(value);
  if (!std::isfinite(value) || !(error <= abs_tol + slack)) {
    throw NumericError("quadrature did not converge in " + where + " (error estimate " +
                       format_double(error) + ")");
  }
  return value;
}

// ---------------------------------------------------------------------------

namespace {
constexpr std::size_t kSamplerCells = 256;
constexpr double kCdfTol = 1e-12;
}  // namespace

PowerDensitySampler::PowerDensitySampler(DensitySpec density, double power)
    : density_(std::move(density)), power_(power) {
  if (!(power_ > 0.0) || !std::isfinite(power_)) throw DomainError("density power must be > 0");
  knots_ = density_.knots();
  for (std::size_t i = 1; i < kSamplerCells; ++i) {
    knots_.push_back(static_cast<double>(i) / kSamplerCells);
  }
  std::sort(knots_.begin(), knots_.end());
  knots_.erase(std::unique(knots_.begin(), knots_.end()), knots_.end());

  cumulative_.assign(knots_.size(), 0.0);
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    cumulative_[i + 1] = cumulative_[i] + partial(i, knots_[i + 1]);
  }
  total_ = cumulative_.back();
  if (!(total_ > 0.0)) throw DomainError("h^r has zero total mass");
}

double PowerDensitySampler::weight(double x) const {
  const double h = density_.pdf(x);
  return h > 0.0 ? std::pow(h, power_) : 0.0;
}

double PowerDensitySampler::partial(std::size_t cell, double x) const {
  return integrate([this](double t) { return weight(t); }, knots_[cell], x, kCdfTol,
                   "cdf cell " + std::to_string(cell));
}

double PowerDensitySampler::cdf(double x) const {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), x);
  const auto cell = static_cast<std::size_t>(it - knots_.begin()) - 1;
  return (cumulative_[cell] + partial(cell, x)) / total_;
}

double PowerDensitySampler::quantile(double u) const {
  if (!(u >= 0.0 && u < 1.0)) throw DomainError("quantile needs u in [0,1)");
  const double target = u * total_;
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  const auto cell = std::min(static_cast<std::size_t>(it - cumulative_.begin()) - 1,
                             knots_.size() - 2);
  const double residual = target - cumulative_[cell];
  double lo = knots_[cell];
  double hi = knots_[cell + 1];
  const double cell_mass = cumulative_[cell + 1] - cumulative_[cell];
  double x = lo + (hi - lo) * std::clamp(residual / cell_mass, 0.0, 1.0);
  for (int iter = 0; iter < 100 && hi - lo > 1e-15; ++iter) {
    const double f = partial(cell, x) - residual;
    if (std::abs(f) <= 1e-15 * total_) break;
    if (f > 0.0) {
      hi = x;
    } else {
      lo = x;
    }
    const double slope = weight(x);
    double next = slope > 0.0 ? x - f / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

}  // namespace quantlab
