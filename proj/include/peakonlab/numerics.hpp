#pragma once

// Shared numerical plumbing: periodic reduction, kink bookkeeping, adaptive
// quadrature and the error types used across the library.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace peakonlab {

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Raised when an operation is asked for something outside its mathematical
/// domain (a non-amenable wave where a uniformizer is required, a trace below
/// -2, ...).
class NumericDomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The wave has no uniform representative.
class NotAmenableError : public NumericDomainError {
 public:
  using NumericDomainError::NumericDomainError;
};

/// A second or third derivative was requested exactly on a kink.
class KinkEvaluationError : public NumericDomainError {
 public:
  using NumericDomainError::NumericDomainError;
};

/// Reduces x to [0, 2pi), floor based so negative inputs land correctly.
inline double wrap_two_pi(double x) {
  double r = x - two_pi * std::floor(x / two_pi);
  if (r >= two_pi || r < 0.0) r = 0.0;
  return r;
}

/// Distance between two points on the circle of circumference 2pi.
inline double circle_distance(double a, double b) {
  const double d = std::abs(wrap_two_pi(a) - wrap_two_pi(b));
  return std::min(d, two_pi - d);
}

inline bool near_periodic_point(double x, std::span<const double> points, double tol = 1e-12) {
  return std::any_of(points.begin(), points.end(),
                     [&](double p) { return circle_distance(x, p) <= tol; });
}

/// Sorted, de-duplicated copy of `points` reduced to [0, 2pi).
inline std::vector<double> canonical_points(std::span<const double> points) {
  std::vector<double> out;
  out.reserve(points.size());
  for (double p : points) out.push_back(wrap_two_pi(p));
  std::sort(out.begin(), out.end());
  std::vector<double> unique;
  for (double p : out) {
    if (unique.empty() || circle_distance(unique.back(), p) > 1e-12) unique.push_back(p);
  }
  if (unique.size() > 1 && circle_distance(unique.front(), unique.back()) <= 1e-12) unique.pop_back();
  return unique;
}

/// Every lift p + 2pi n of the given periodic positions lying strictly inside (a, b), sorted.
inline std::vector<double> periodic_points_between(double a, double b, std::span<const double> points) {
  std::vector<double> out;
  if (!(b > a)) return out;
  for (double p : points) {
    const double base = wrap_two_pi(p);
    for (double n = std::floor((a - base) / two_pi); base + two_pi * n < b; n += 1.0) {
      const double x = base + two_pi * n;
      if (x > a && x < b) out.push_back(x);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

struct QuadratureOptions {
  double relative_tolerance = 1e-13;
  unsigned max_depth = 18;
};

/// Adaptive 15-point Gauss-Kronrod integral of f over [a, b], split at every
/// lift of `periodic_breaks` inside the interval so each piece is analytic.
/// Gauss-Kronrod nodes are interior, so f is never evaluated on a break.
template <class F>
double integrate(F&& f, double a, double b, std::span<const double> periodic_breaks = {},
                 QuadratureOptions options = {}) {
  if (a == b) return 0.0;
  if (b < a) return -integrate(f, b, a, periodic_breaks, options);
  std::vector<double> nodes{a};
  for (double x : periodic_points_between(a, b, periodic_breaks)) {
    if (x - nodes.back() > 1e-13) nodes.push_back(x);
  }
  if (b - nodes.back() <= 1e-13 && nodes.size() > 1) nodes.back() = b;
  else nodes.push_back(b);

  double total = 0.0;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    total += boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
        f, nodes[i], nodes[i + 1], options.max_depth, options.relative_tolerance);
  }
  return total;
}

/// Bisection on a sign-changing bracket [lo, hi] down to `width`, followed by
/// at most `newton_steps` safeguarded Newton iterations.
template <class F, class DF>
double polish_root(F&& f, DF&& df, double lo, double hi, double width = 1e-6, int newton_steps = 10,
                   double tol = 1e-12) {
  double flo = f(lo);
  while (hi - lo > width) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < newton_steps; ++i) {
    const double fx = f(x);
    if (std::abs(fx) < tol) break;
    if ((fx < 0.0) == (flo < 0.0)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
    }
    const double d = df(x);
    double next = (d != 0.0 && std::isfinite(d)) ? x - fx / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == x) break;
    x = next;
  }
  return x;
}

/// One-sided limit of g at x from the right (side = +1) or left (side = -1),
/// by linear extrapolation from two nearby samples.
template <class G>
double one_sided_limit(G&& g, double x, int side, double eps = 1e-6) {
  const double s = side >= 0 ? 1.0 : -1.0;
  return 2.0 * g(x + s * eps) - g(x + 2.0 * s * eps);
}

}  // namespace peakonlab
