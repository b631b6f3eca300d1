#include "quantlab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <limits>
#include <numeric>
#include <optional>

#include "quantlab/errors.hpp"

namespace quantlab {

namespace {

constexpr long double kTwo128 = 340282366920938463463374607431768211456.0L;
constexpr double kCellTol = 1e-12;

void require_nonempty(const PointSet& ps, const char* what) {
  if (ps.size() == 0) throw DomainError(std::string(what) + " needs a nonempty point set");
}

void require_exponent(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw DomainError("exponent s must be finite and > 0");
}

bool is_small_integer(double s) { return s >= 1.0 && s <= 64.0 && std::floor(s) == s; }

BigInt bigint_pow(const BigInt& base, unsigned exponent) {
  return boost::multiprecision::pow(base, exponent);
}

/// Sums num/den terms by first adding numerators over equal denominators, so
/// the expensive rational normalization runs once per distinct denominator.
class GroupedSum {
 public:
  void add(const BigInt& num, const BigInt& den) { groups_[den] += num; }
  Rational total() const {
    Rational out = 0;
    for (const auto& [den, num] : groups_) out += Rational(num, den);
    return out;
  }

 private:
  std::map<BigInt, BigInt> groups_;
};

long double gap_value(const FixedGap& g) { return g.to_long_double(); }
long double gap_value(const Rational& g) { return g.convert_to<long double>(); }

/// Numeric gaps in positional order, from exact differences for fixed point
/// and from long double coordinates for rational sets.
std::vector<long double> numeric_gaps(const PointSet& sorted) {
  std::vector<long double> out;
  if (!sorted.is_rational()) {
    const auto exact = std::get<std::vector<FixedGap>>(exact_gaps(sorted));
    out.reserve(exact.size());
    for (const auto& g : exact) out.push_back(g.to_long_double());
    return out;
  }
  const auto c = sorted.coordinates();
  const std::size_t n = c.size();
  if (sorted.geometry() == Geometry::Interval) {
    out.reserve(n + 1);
    out.push_back(c.front());
    for (std::size_t i = 1; i < n; ++i) out.push_back(c[i] - c[i - 1]);
    out.push_back(1.0L - c.back());
  } else {
    out.reserve(n);
    for (std::size_t i = 1; i < n; ++i) out.push_back(c[i] - c[i - 1]);
    out.push_back(1.0L - c.back() + c.front());
  }
  return out;
}

/// Reduced gap num/den with both parts below 2^128.
struct SmallFraction {
  u128 num = 0;
  u128 den = 1;
};

bool fraction_less(const SmallFraction& a, const SmallFraction& b) {
  using boost::multiprecision::uint256_t;
  return uint256_t(a.num) * uint256_t(b.den) < uint256_t(b.num) * uint256_t(a.den);
}

u128 gcd128(u128 a, u128 b) {
  while (b) {
    const u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

/// Gaps of a sorted rational set whose denominators stay below 2^62,
/// without big-number arithmetic. Empty when some entry is too large.
std::optional<std::vector<SmallFraction>> small_rational_gaps(const PointSet& sorted) {
  const auto& v = *sorted.rational_points();
  const std::uint64_t limit = std::uint64_t(1) << 62;  // keeps a*d + b*d below 2^128
  std::vector<std::pair<std::uint64_t, std::uint64_t>> pq;
  pq.reserve(v.size());
  for (const auto& x : v) {
    if (x.q() > limit) return std::nullopt;
    pq.emplace_back(static_cast<std::uint64_t>(x.p()), static_cast<std::uint64_t>(x.q()));
  }
  // a/b - c/d with a/b >= c/d, plus one for the circle wrap.
  const auto diff = [](std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d,
                       bool plus_one) {
    const u128 bd = u128(b) * d;
    const u128 num = u128(a) * d + (plus_one ? bd : 0) - u128(c) * b;
    if (num == 0) return SmallFraction{0, 1};
    const u128 g = gcd128(num, bd);
    return SmallFraction{num / g, bd / g};
  };
  std::vector<SmallFraction> out;
  out.reserve(pq.size() + 1);
  const bool circle = sorted.geometry() == Geometry::Circle;
  if (!circle) out.push_back(diff(pq.front().first, pq.front().second, 0, 1, false));
  for (std::size_t i = 1; i < pq.size(); ++i) {
    out.push_back(diff(pq[i].first, pq[i].second, pq[i - 1].first, pq[i - 1].second, false));
  }
  if (circle) {
    out.push_back(diff(pq.front().first, pq.front().second, pq.back().first, pq.back().second, true));
  } else {
    out.push_back(diff(1, 1, pq.back().first, pq.back().second, false));
  }
  return out;
}

long double max_distortion_from_gaps(const std::vector<long double>& gaps, Geometry geometry) {
  if (geometry == Geometry::Circle) return *std::max_element(gaps.begin(), gaps.end()) / 2.0L;
  long double best = std::max(gaps.front(), gaps.back());
  for (std::size_t i = 1; i + 1 < gaps.size(); ++i) best = std::max(best, gaps[i] / 2.0L);
  return best;
}

}  // namespace

long double FixedGap::to_long_double() const noexcept {
  if (whole) return 1.0L;
  return static_cast<long double>(raw) / kTwo128;
}

ExactGaps exact_gaps(const PointSet& input) {
  require_nonempty(input, "exact_gaps");
  const PointSet ps = input.sorted();
  const bool circle = ps.geometry() == Geometry::Circle;
  if (const auto* pts = ps.unit_points()) {
    const auto& v = *pts;
    std::vector<FixedGap> out;
    out.reserve(v.size() + 1);
    if (!circle) out.push_back({v.front().raw(), false});
    for (std::size_t i = 1; i < v.size(); ++i) out.push_back({(v[i] - v[i - 1]).raw(), false});
    if (circle) {
      out.push_back({(v.front() - v.back()).raw(), v.front() == v.back()});
    } else {
      out.push_back({(UnitPoint() - v.back()).raw(), v.back().raw() == 0});
    }
    return out;
  }
  const auto& v = *ps.rational_points();
  std::vector<Rational> out;
  out.reserve(v.size() + 1);
  if (!circle) out.push_back(v.front().to_rational());
  Rational previous = v.front().to_rational();
  for (std::size_t i = 1; i < v.size(); ++i) {
    Rational current = v[i].to_rational();
    out.push_back(current - previous);
    previous = std::move(current);
  }
  if (circle) {
    out.push_back(1 - previous + v.front().to_rational());
  } else {
    out.push_back(1 - previous);
  }
  return out;
}

bool gaps_sum_to_one(const ExactGaps& gaps) {
  if (const auto* fixed = std::get_if<std::vector<FixedGap>>(&gaps)) {
    u128 low = 0;
    std::size_t units = 0;
    for (const auto& g : *fixed) {
      if (g.whole) {
        ++units;
        continue;
      }
      const u128 next = low + g.raw;
      if (next < low) ++units;
      low = next;
    }
    return low == 0 && units == 1;
  }
  Rational total = 0;
  for (const auto& g : std::get<std::vector<Rational>>(gaps)) total += g;
  return total == 1;
}

GapStats gap_stats(const PointSet& input) {
  require_nonempty(input, "gap_stats");
  const PointSet ps = input.sorted();
  GapStats out;
  out.n = ps.size();
  out.geometry = ps.geometry();

  std::vector<long double> positional;
  if (!ps.is_rational()) {
    const ExactGaps exact = exact_gaps(ps);
    const auto* fixed = &std::get<std::vector<FixedGap>>(exact);
    positional.reserve(fixed->size());
    for (const auto& g : *fixed) positional.push_back(gap_value(g));

    std::vector<FixedGap> keys = *fixed;
    if (!ps.provenance().exact_lattice) {
      for (auto& k : keys) {
        if (k.whole) continue;
        // Round to the nearest multiple of 2^-80.
        const u128 q = (k.raw >> 48) + ((k.raw >> 47) & 1U);
        k.raw = q;
        if (q == (u128(1) << 80)) k = {0, true};
      }
    }
    std::sort(keys.begin(), keys.end());
    out.distinct_count =
        static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
    const auto it = std::max_element(fixed->begin(), fixed->end());
    out.max_gap = MetricValue::approx(static_cast<double>(gap_value(*it)));
  } else if (auto small = small_rational_gaps(ps)) {
    positional.reserve(small->size());
    for (const auto& g : *small) {
      positional.push_back(static_cast<long double>(g.num) / static_cast<long double>(g.den));
    }
    std::vector<SmallFraction> keys = *small;
    std::sort(keys.begin(), keys.end(), [](const SmallFraction& a, const SmallFraction& b) {
      return a.num != b.num ? a.num < b.num : a.den < b.den;
    });
    out.distinct_count = static_cast<std::size_t>(
        std::unique(keys.begin(), keys.end(),
                    [](const SmallFraction& a, const SmallFraction& b) {
                      return a.num == b.num && a.den == b.den;
                    }) -
        keys.begin());
    const auto& best = *std::max_element(small->begin(), small->end(), fraction_less);
    out.max_gap = MetricValue::of(Rational(BigInt(best.num), BigInt(best.den)));
  } else {
    const auto& rational = std::get<std::vector<Rational>>(exact_gaps(ps));
    positional.reserve(rational.size());
    for (const auto& g : rational) positional.push_back(gap_value(g));
    std::vector<Rational> keys = rational;
    std::sort(keys.begin(), keys.end());
    out.distinct_count =
        static_cast<std::size_t>(std::unique(keys.begin(), keys.end()) - keys.begin());
    out.max_gap = MetricValue::of(keys.back());
  }

  out.geometric_distortion =
      static_cast<double>(max_distortion_from_gaps(positional, ps.geometry()));
  out.gaps.reserve(positional.size());
  for (long double g : positional) out.gaps.push_back(static_cast<double>(g));
  std::sort(out.gaps.begin(), out.gaps.end());
  return out;
}

// ---------------------------------------------------------------------------
// Distortion

double point_distortion(const PointSet& input, UnitPoint y, double s) {
  require_nonempty(input, "point_distortion");
  require_exponent(s);
  const PointSet ps = input.sorted();
  const auto* pts = ps.unit_points();
  if (!pts) return point_distortion(ps, static_cast<double>(y.to_long_double()), s);
  const auto& v = *pts;
  const Geometry geometry = ps.geometry();
  const auto it = std::lower_bound(v.begin(), v.end(), y);
  UnitPoint best = UnitPoint::from_raw(~u128(0));
  const auto consider = [&](UnitPoint a) { best = std::min(best, distance(a, y, geometry)); };
  if (it != v.end()) consider(*it);
  if (it != v.begin()) consider(*(it - 1));
  if (geometry == Geometry::Circle) {
    consider(v.front());
    consider(v.back());
  }
  return static_cast<double>(std::pow(best.to_long_double(), static_cast<long double>(s)));
}

double point_distortion(const PointSet& input, double y, double s) {
  require_nonempty(input, "point_distortion");
  require_exponent(s);
  if (!(y >= 0.0 && y <= 1.0)) throw DomainError("point_distortion needs y in [0,1]");
  if (!input.is_rational()) return point_distortion(input, to_unit(y, input.geometry()), s);
  const PointSet ps = input.sorted();
  const auto c = ps.coordinates();
  const long double target = y;
  const bool circle = ps.geometry() == Geometry::Circle;
  const auto dist = [&](long double a) {
    const long double d = std::abs(a - target);
    return circle ? std::min(d, 1.0L - d) : d;
  };
  const auto it = std::lower_bound(c.begin(), c.end(), target);
  long double best = 2.0L;
  if (it != c.end()) best = std::min(best, dist(*it));
  if (it != c.begin()) best = std::min(best, dist(*(it - 1)));
  if (circle) best = std::min({best, dist(c.front()), dist(c.back())});
  return static_cast<double>(std::pow(best, static_cast<long double>(s)));
}

double max_distortion(const PointSet& input) {
  require_nonempty(input, "max_distortion");
  const PointSet ps = input.sorted();
  return static_cast<double>(max_distortion_from_gaps(numeric_gaps(ps), ps.geometry()));
}

double mean_distortion_uniform(const PointSet& input, double s) {
  require_nonempty(input, "mean_distortion_uniform");
  require_exponent(s);
  const PointSet ps = input.sorted();
  const auto gaps = numeric_gaps(ps);
  const long double s1 = static_cast<long double>(s) + 1.0L;
  long double total = 0.0L;
  const auto interior = [&](long double g) { return 2.0L * std::pow(g / 2.0L, s1) / s1; };
  if (ps.geometry() == Geometry::Circle) {
    for (long double g : gaps) total += interior(g);
  } else {
    total += std::pow(gaps.front(), s1) / s1 + std::pow(gaps.back(), s1) / s1;
    for (std::size_t i = 1; i + 1 < gaps.size(); ++i) total += interior(gaps[i]);
  }
  return static_cast<double>(total);
}

double mean_distortion_density(const PointSet& input, double s, const DensitySpec& density) {
  require_nonempty(input, "mean_distortion_density");
  require_exponent(s);
  const PointSet ps = input.sorted();
  const auto coords = ps.coordinates();
  const std::size_t n = coords.size();
  const bool circle = ps.geometry() == Geometry::Circle;

  // Split points for a cell: 0, 1 and the density knots, shifted by -1 and +1
  // so wrapped circle cells split correctly too.
  std::vector<double> splits;
  for (double k : density.knots()) {
    splits.push_back(k - 1.0);
    splits.push_back(k);
    splits.push_back(k + 1.0);
  }
  std::sort(splits.begin(), splits.end());
  splits.erase(std::unique(splits.begin(), splits.end()), splits.end());

  const auto wrap = [](double t) {
    if (t < 0.0) return t + 1.0;
    if (t >= 1.0) return t - 1.0;
    return t;
  };

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double c = static_cast<double>(coords[i]);
    double left;
    double right;
    if (circle) {
      const double prev = i == 0 ? static_cast<double>(coords[n - 1] - 1.0L)
                                 : static_cast<double>(coords[i - 1]);
      const double next = i + 1 == n ? static_cast<double>(coords[0] + 1.0L)
                                     : static_cast<double>(coords[i + 1]);
      left = n == 1 ? c - 0.5 : 0.5 * (prev + c);
      right = n == 1 ? c + 0.5 : 0.5 * (c + next);
    } else {
      left = i == 0 ? 0.0 : static_cast<double>((coords[i - 1] + coords[i]) / 2.0L);
      right = i + 1 == n ? 1.0 : static_cast<double>((coords[i] + coords[i + 1]) / 2.0L);
    }
    const auto integrand = [&](double t) {
      return std::pow(std::abs(t - c), s) * density.pdf(wrap(t));
    };
    const auto integrate_span = [&](double a, double b) {
      if (!(b > a)) return;
      double lo = a;
      for (double k : splits) {
        if (k <= lo) continue;
        if (k >= b) break;
        total += integrate(integrand, lo, k, kCellTol, "voronoi cell " + std::to_string(i));
        lo = k;
      }
      total += integrate(integrand, lo, b, kCellTol, "voronoi cell " + std::to_string(i));
    };
    integrate_span(left, c);
    integrate_span(c, right);
  }
  return total;
}

DistortionReport distortion_report(const PointSet& input, double s, std::size_t samples) {
  require_nonempty(input, "distortion_report");
  const PointSet ps = input.sorted();
  DistortionReport out;
  out.n = ps.size();
  out.s = s;
  out.geometry = ps.geometry();
  out.mean = mean_distortion_uniform(ps, s);
  out.max = std::pow(max_distortion(ps), s);
  if (samples > 0) {
    out.point_values.reserve(samples);
    for (std::size_t i = 0; i < samples; ++i) {
      const double y = samples == 1 ? 0.5 : static_cast<double>(i) / static_cast<double>(samples - 1);
      out.point_values.emplace_back(y, point_distortion(ps, y, s));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Discrepancy

MetricValue star_discrepancy(const PointSet& input) {
  require_nonempty(input, "star_discrepancy");
  const PointSet ps = input.sorted();
  const std::size_t n = ps.size();
  if (const auto* pts = ps.rational_points()) {
    const Rational two_n(2 * static_cast<long long>(n));
    Rational worst = 0;
    for (std::size_t k = 1; k <= n; ++k) {
      Rational d = (*pts)[k - 1].to_rational() - Rational(2 * static_cast<long long>(k) - 1) / two_n;
      if (d < 0) d = -d;
      if (d > worst) worst = d;
    }
    return MetricValue::of(Rational(1) / two_n + worst);
  }
  const auto c = ps.coordinates();
  const long double two_n = 2.0L * static_cast<long double>(n);
  long double worst = 0.0L;
  for (std::size_t k = 1; k <= n; ++k) {
    worst = std::max(worst, std::abs(c[k - 1] - (2.0L * static_cast<long double>(k) - 1.0L) / two_n));
  }
  return MetricValue::approx(static_cast<double>(1.0L / two_n + worst));
}

MetricValue extent_discrepancy(const PointSet& input) {
  require_nonempty(input, "extent_discrepancy");
  const PointSet ps = input.sorted();
  const std::size_t n = ps.size();
  if (const auto* pts = ps.rational_points()) {
    const Rational inv_n(Rational(1) / static_cast<long long>(n));
    Rational hi;
    Rational lo;
    for (std::size_t k = 1; k <= n; ++k) {
      Rational d = Rational(static_cast<long long>(k)) * inv_n - (*pts)[k - 1].to_rational();
      if (k == 1 || d > hi) hi = d;
      if (k == 1 || d < lo) lo = d;
    }
    return MetricValue::of(inv_n + hi - lo);
  }
  const auto c = ps.coordinates();
  const long double nn = static_cast<long double>(n);
  long double hi = -2.0L;
  long double lo = 2.0L;
  for (std::size_t k = 1; k <= n; ++k) {
    const long double d = static_cast<long double>(k) / nn - c[k - 1];
    hi = std::max(hi, d);
    lo = std::min(lo, d);
  }
  return MetricValue::approx(static_cast<double>(1.0L / nn + hi - lo));
}

DiscrepancyReport discrepancy(const PointSet& input) {
  const PointSet ps = input.sorted();
  DiscrepancyReport out;
  out.d_star = star_discrepancy(ps);
  out.d_extent = extent_discrepancy(ps);
  out.exact = ps.is_rational();
  out.n = ps.size();
  return out;
}

Discrepancy2DReport discrepancy_2d(std::span<const Point2D> orbit, std::size_t cap) {
  const std::size_t n = orbit.size();
  if (n == 0) throw DomainError("discrepancy_2d needs at least one point");
  if (n > cap) {
    throw ResourceError("discrepancy_2d: " + std::to_string(n) + " points exceed the cap of " +
                        std::to_string(cap) + "; use a prefix or subsample");
  }
  // Points by ascending y; group boundaries mark runs of equal y.
  std::vector<Point2D> pts(orbit.begin(), orbit.end());
  std::sort(pts.begin(), pts.end(), [](const Point2D& a, const Point2D& b) {
    return a.y != b.y ? a.y < b.y : a.x < b.x;
  });
  std::vector<u128> xs(n);
  std::vector<long double> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = pts[i].x.raw();
    ys[i] = pts[i].y.to_long_double();
  }
  std::vector<std::size_t> group_end(n);
  for (std::size_t i = n; i-- > 0;) {
    group_end[i] = (i + 1 < n && pts[i + 1].y == pts[i].y) ? group_end[i + 1] : i + 1;
  }

  std::vector<u128> candidates(xs);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  const long double inv_n = 1.0L / static_cast<long double>(n);
  long double best = 0.0L;
  // u runs over the x coordinates and 1, v over the y coordinates and 1.
  // Closed boxes [0,u] x [0,v] are limits from above of half-open boxes and
  // only arise for u, v at point coordinates.
  const auto sweep = [&](bool u_is_one, u128 u_raw) {
    const long double u = u_is_one ? 1.0L : static_cast<long double>(u_raw) / kTwo128;
    std::size_t below_lt = 0;
    std::size_t below_le = 0;
    std::size_t i = 0;
    while (i < n) {
      const std::size_t end = group_end[i];
      const long double uv = u * ys[i];
      best = std::max(best, uv - static_cast<long double>(below_lt) * inv_n);
      for (std::size_t j = i; j < end; ++j) {
        below_lt += u_is_one || xs[j] < u_raw;
        below_le += u_is_one || xs[j] <= u_raw;
      }
      if (!u_is_one) best = std::max(best, static_cast<long double>(below_le) * inv_n - uv);
      i = end;
    }
    best = std::max(best, u - static_cast<long double>(below_lt) * inv_n);
  };
  for (u128 u_raw : candidates) sweep(false, u_raw);
  sweep(true, 0);

  Discrepancy2DReport out;
  out.n = n;
  out.star = static_cast<double>(best);
  out.extent_lower = out.star;
  out.extent_upper = std::min(1.0, 4.0 * out.star);
  out.exact = true;
  return out;
}

// ---------------------------------------------------------------------------
// Deviation sums

MetricValue deviation_from_uniform(const PointSet& input, double s) {
  require_nonempty(input, "deviation_from_uniform");
  require_exponent(s);
  const PointSet ps = input.sorted();
  const std::size_t n = ps.size();
  if (const auto* pts = ps.rational_points(); pts && is_small_integer(s)) {
    // |p/q - k/n|^s = |p n - k q|^s / (q n)^s
    const auto e = static_cast<unsigned>(s);
    const BigInt big_n(static_cast<unsigned long long>(n));
    GroupedSum sum;
    std::map<BigInt, BigInt> den_cache;
    for (std::size_t k = 1; k <= n; ++k) {
      const auto& x = (*pts)[k - 1];
      BigInt num = x.p() * big_n - BigInt(static_cast<unsigned long long>(k)) * x.q();
      if (num < 0) num = -num;
      auto [it, inserted] = den_cache.try_emplace(x.q());
      if (inserted) it->second = bigint_pow(x.q() * big_n, e);
      sum.add(bigint_pow(num, e), it->second);
    }
    return MetricValue::of(sum.total());
  }
  const auto c = ps.coordinates();
  const long double nn = static_cast<long double>(n);
  long double total = 0.0L;
  for (std::size_t k = 1; k <= n; ++k) {
    total += std::pow(std::abs(c[k - 1] - static_cast<long double>(k) / nn),
                      static_cast<long double>(s));
  }
  return MetricValue::approx(static_cast<double>(total));
}

MetricValue deviation_between(const PointSet& a, const PointSet& b, double s) {
  require_nonempty(a, "deviation_between");
  require_exponent(s);
  if (a.size() != b.size()) {
    throw DomainError("deviation_between: lengths differ (" + std::to_string(a.size()) + " vs " +
                      std::to_string(b.size()) + ")");
  }
  const std::size_t n = a.size();
  const auto* ra = a.rational_points();
  const auto* rb = b.rational_points();
  if (ra && rb && is_small_integer(s)) {
    const auto e = static_cast<unsigned>(s);
    GroupedSum sum;
    for (std::size_t k = 0; k < n; ++k) {
      const auto& x = (*ra)[k];
      const auto& y = (*rb)[k];
      BigInt num = x.p() * y.q() - y.p() * x.q();
      if (num < 0) num = -num;
      sum.add(bigint_pow(num, e), bigint_pow(x.q() * y.q(), e));
    }
    return MetricValue::of(sum.total());
  }
  if (!ra && !rb) {
    const auto& ua = *a.unit_points();
    const auto& ub = *b.unit_points();
    long double total = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
      const long double d =
          ua[k] < ub[k] ? (ub[k] - ua[k]).to_long_double() : (ua[k] - ub[k]).to_long_double();
      total += std::pow(d, static_cast<long double>(s));
    }
    return MetricValue::approx(static_cast<double>(total));
  }
  long double total = 0.0L;
  for (std::size_t k = 0; k < n; ++k) {
    total += std::pow(std::abs(a.coordinate(k) - b.coordinate(k)), static_cast<long double>(s));
  }
  return MetricValue::approx(static_cast<double>(total));
}

}  // namespace quantlab
