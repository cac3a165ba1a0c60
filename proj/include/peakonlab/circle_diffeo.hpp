#pragma once

// Lifts of orientation-preserving circle diffeomorphisms, their group
// operations, the Virasoro coadjoint action on (possibly distributional)
// momenta, and rotation numbers.

#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "peakonlab/numerics.hpp"

namespace peakonlab {

enum class Smoothness { C1, C2, Smooth };

inline Smoothness weaker(Smoothness a, Smoothness b) { return static_cast<int>(a) < static_cast<int>(b) ? a : b; }

/// Lift f: R -> R of a circle diffeomorphism, f' > 0 and f(x + 2pi) = f(x) + 2pi.
///
/// Derivatives are supplied analytically by whoever builds the lift. A C1
/// lift declares its kinks (positions mod 2pi where f'' jumps); asking for f''
/// or f''' exactly there throws KinkEvaluationError.
///
/// A lift may carry its exact inverse. Otherwise inverse() builds one from
/// invert() plus the inverse function theorem for the derivatives.
class CircleLift {
 public:
  using Map = std::function<double(double)>;

  CircleLift(Map value, Map d1, Map d2, Map d3, Smoothness smoothness = Smoothness::Smooth,
             std::vector<double> kinks = {})
      : forward_(std::make_shared<const Maps>(Maps{std::move(value), std::move(d1), std::move(d2),
                                                   std::move(d3), smoothness,
                                                   canonical_points(kinks)})) {
    if (smoothness != Smoothness::C1 && !forward_->kinks.empty()) {
      throw std::invalid_argument("CircleLift: only C1 lifts may declare kinks");
    }
  }

  static CircleLift rotation(double theta) {
    CircleLift r([theta](double x) { return x + theta; }, [](double) { return 1.0; },
                 [](double) { return 0.0; }, [](double) { return 0.0; });
    CircleLift inv([theta](double x) { return x - theta; }, [](double) { return 1.0; },
                   [](double) { return 0.0; }, [](double) { return 0.0; });
    r.backward_ = inv.forward_;
    return r;
  }

  static CircleLift identity() { return rotation(0.0); }

  /// Attaches an exact inverse; `inv` must satisfy inv(f(x)) = x.
  CircleLift with_inverse(const CircleLift& inv) const {
    CircleLift out = *this;
    out.backward_ = inv.forward_;
    return out;
  }

  double operator()(double x) const { return forward_->value(x); }
  double d1(double x) const { return forward_->d1(x); }
  double d2(double x) const {
    reject_kink(x, "second derivative");
    return forward_->d2(x);
  }
  double d3(double x) const {
    reject_kink(x, "third derivative");
    return forward_->d3(x);
  }

  /// Derivatives without the kink guard, for one-sided limits and for
  /// building composite lifts that apply their own guard.
  double d2_unchecked(double x) const { return forward_->d2(x); }
  double d3_unchecked(double x) const { return forward_->d3(x); }

  Smoothness smoothness() const { return forward_->smoothness; }
  std::span<const double> kinks() const { return forward_->kinks; }
  bool is_kink(double x) const {
    return forward_->smoothness == Smoothness::C1 && near_periodic_point(x, forward_->kinks);
  }
  bool has_exact_inverse() const { return backward_ != nullptr; }

  CircleLift inverse(double tol = 1e-12) const;

 private:
  struct Maps {
    Map value, d1, d2, d3;
    Smoothness smoothness;
    std::vector<double> kinks;
  };

  CircleLift(std::shared_ptr<const Maps> forward, std::shared_ptr<const Maps> backward)
      : forward_(std::move(forward)), backward_(std::move(backward)) {}

  void reject_kink(double x, std::string_view what) const {
    if (is_kink(x)) {
      throw KinkEvaluationError("CircleLift: " + std::string(what) + " requested at a kink (x = " +
                                std::to_string(x) + ")");
    }
  }

  std::shared_ptr<const Maps> forward_;
  std::shared_ptr<const Maps> backward_;
};

/// Solves f(x) = y. Brackets over a window of width 2pi, bisects to 1e-6 and
/// polishes with at most ten Newton steps; falls back to full bisection.
/// Throws NumericDomainError if the residual never drops below tol, which
/// only happens for a non-monotone (corrupt) lift.
inline double invert(const CircleLift& f, double y, double tol = 1e-12) {
  if (!(tol > 0.0)) throw std::invalid_argument("invert: tol must be positive");
  // f(x) - x is 2pi-periodic, so y - (f(y) - y) is within one period of the answer.
  const double guess = y - (f(y) - y);
  double lo = guess - pi;
  double hi = guess + pi;
  int expansions = 0;
  while (f(lo) > y) {
    lo -= two_pi;
    if (++expansions > 64) throw NumericDomainError("invert: cannot bracket, lift is not monotone");
  }
  while (f(hi) < y) {
    hi += two_pi;
    if (++expansions > 128) throw NumericDomainError("invert: cannot bracket, lift is not monotone");
  }
  const double accept = tol + 4.0 * std::numeric_limits<double>::epsilon() * std::abs(y);
  auto residual = [&](double x) { return f(x) - y; };
  double x = polish_root(residual, [&](double s) { return f.d1(s); }, lo, hi, 1e-6, 10, accept);
  if (std::abs(residual(x)) <= accept) return x;

  // Newton stalled: finish by plain bisection.
  for (int i = 0; i < 200 && hi - lo > 0.0; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (residual(mid) > 0.0) hi = mid;
    else lo = mid;
  }
  x = std::abs(residual(lo)) < std::abs(residual(hi)) ? lo : hi;
  if (std::abs(residual(x)) > accept) {
    throw NumericDomainError("invert: no convergence, lift is not monotone");
  }
  return x;
}

inline CircleLift CircleLift::inverse(double tol) const {
  if (backward_) return CircleLift(backward_, forward_);

  auto fwd = forward_;
  CircleLift self(fwd, nullptr);
  auto value = [self, tol](double y) { return invert(self, y, tol); };
  // (f^-1)' = 1/f', (f^-1)'' = -f''/f'^3, (f^-1)''' = (3 f''^2 - f' f''')/f'^5, all at f^-1(y).
  auto d1 = [self, tol](double y) { return 1.0 / self.d1(invert(self, y, tol)); };
  auto d2 = [fwd, self, tol](double y) {
    const double x = invert(self, y, tol);
    const double a = fwd->d1(x);
    return -fwd->d2(x) / (a * a * a);
  };
  auto d3 = [fwd, self, tol](double y) {
    const double x = invert(self, y, tol);
    const double a = fwd->d1(x);
    const double b = fwd->d2(x);
    return (3.0 * b * b - a * fwd->d3(x)) / std::pow(a, 5);
  };
  std::vector<double> kink_images;
  for (double k : fwd->kinks) kink_images.push_back(fwd->value(k));
  auto inv = std::make_shared<const Maps>(
      Maps{value, d1, d2, d3, fwd->smoothness, canonical_points(kink_images)});
  return CircleLift(inv, fwd);
}

/// f o g with derivatives by the chain rule (Faa di Bruno to third order).
inline CircleLift compose(const CircleLift& f, const CircleLift& g) {
  auto value = [f, g](double x) { return f(g(x)); };
  auto d1 = [f, g](double x) { return f.d1(g(x)) * g.d1(x); };
  auto d2 = [f, g](double x) {
    const double y = g(x);
    const double g1 = g.d1(x);
    return f.d2_unchecked(y) * g1 * g1 + f.d1(y) * g.d2_unchecked(x);
  };
  auto d3 = [f, g](double x) {
    const double y = g(x);
    const double g1 = g.d1(x);
    const double g2 = g.d2_unchecked(x);
    return f.d3_unchecked(y) * g1 * g1 * g1 + 3.0 * f.d2_unchecked(y) * g1 * g2 + f.d1(y) * g.d3_unchecked(x);
  };
  const Smoothness s = weaker(f.smoothness(), g.smoothness());
  std::vector<double> kinks(g.kinks().begin(), g.kinks().end());
  if (!f.kinks().empty()) {
    const CircleLift g_inv = g.inverse();
    for (double k : f.kinks()) kinks.push_back(g_inv(k));
  }
  CircleLift out(value, d1, d2, d3, s, s == Smoothness::C1 ? kinks : std::vector<double>{});
  if (f.has_exact_inverse() && g.has_exact_inverse()) {
    const CircleLift gi = g.inverse();
    const CircleLift fi = f.inverse();
    CircleLift inv([gi, fi](double y) { return gi(fi(y)); },
                   [gi, fi](double y) { return gi.d1(fi(y)) * fi.d1(y); },
                   [gi, fi](double y) {
                     const double z = fi(y);
                     const double h1 = fi.d1(y);
                     return gi.d2_unchecked(z) * h1 * h1 + gi.d1(z) * fi.d2_unchecked(y);
                   },
                   [gi, fi](double y) {
                     const double z = fi(y);
                     const double h1 = fi.d1(y);
                     const double h2 = fi.d2_unchecked(y);
                     return gi.d3_unchecked(z) * h1 * h1 * h1 + 3.0 * gi.d2_unchecked(z) * h1 * h2 +
                            gi.d1(z) * fi.d3_unchecked(y);
                   },
                   s, s == Smoothness::C1 ? std::vector<double>(fi.kinks().begin(), fi.kinks().end())
                                          : std::vector<double>{});
    out = out.with_inverse(inv);
  }
  return out;
}

/// f'''/f' - (3/2)(f''/f')^2 at x.
inline double schwarzian(const CircleLift& f, double x) {
  const double a = f.d1(x);
  const double b = f.d2(x);
  const double r = b / a;
  return f.d3(x) / a - 1.5 * r * r;
}

/// (f^n(x0) - x0) / n. Accepts anything callable as a lift, e.g. a flow map.
template <class Lift>
double rotation_number(const Lift& f, double x0, int n_iter) {
  if (n_iter < 1) throw std::invalid_argument("rotation_number: n_iter must be >= 1");
  double x = x0;
  for (int i = 0; i < n_iter; ++i) x = f(x);
  return (x - x0) / static_cast<double>(n_iter);
}

struct Delta {
  double position;
  double weight;
};

/// A coadjoint vector (p, c): a 2pi-periodic smooth density plus a periodic
/// comb of delta functions, at fixed non-zero central charge c.
///
/// Delta positions are kept in [0, 2pi), coincident deltas merged and
/// weights below 1e-14 dropped. `breakpoints` lists positions where the
/// smooth part itself may fail to be smooth; quadratures split there.
class MomentumField {
 public:
  using Profile = std::function<double(double)>;

  MomentumField(Profile smooth, std::vector<Delta> deltas, double c, std::vector<double> breakpoints = {})
      : smooth_(std::move(smooth)), deltas_(canonical_deltas(std::move(deltas))), c_(c),
        breakpoints_(canonical_points(breakpoints)) {
    if (c == 0.0 || !std::isfinite(c)) throw std::invalid_argument("MomentumField: central charge must be non-zero");
  }

  static MomentumField uniform(double k, double c, std::vector<Delta> deltas = {}) {
    MomentumField p([k](double) { return k; }, std::move(deltas), c);
    p.constant_ = k;
    return p;
  }

  double smooth(double x) const { return smooth_(x); }
  std::optional<double> constant() const { return constant_; }
  std::span<const Delta> deltas() const { return deltas_; }
  double central_charge() const { return c_; }
  std::span<const double> breakpoints() const { return breakpoints_; }

 private:
  static std::vector<Delta> canonical_deltas(std::vector<Delta> in) {
    for (auto& d : in) d.position = wrap_two_pi(d.position);
    std::sort(in.begin(), in.end(), [](const Delta& a, const Delta& b) { return a.position < b.position; });
    std::vector<Delta> out;
    for (const auto& d : in) {
      if (!out.empty() && circle_distance(out.back().position, d.position) <= 1e-12) out.back().weight += d.weight;
      else out.push_back(d);
    }
    if (out.size() > 1 && circle_distance(out.front().position, out.back().position) <= 1e-12) {
      out.front().weight += out.back().weight;
      out.pop_back();
    }
    std::erase_if(out, [](const Delta& d) { return std::abs(d.weight) < 1e-14; });
    return out;
  }

  Profile smooth_;
  std::vector<Delta> deltas_;
  double c_;
  std::vector<double> breakpoints_;
  std::optional<double> constant_;
};

/// Virasoro coadjoint action f . (p, c), with h = f^-1:
///   smooth part  h'^2 p(h) - (c/12) S[h]
///   delta w at x0  ->  weight w h'(f(x0)) at f(x0)
///   kink of h at xk  ->  extra delta of weight -(c/12) [h''](xk) / h'(xk)
/// The smooth part of the result throws when evaluated on a kink of h.
inline MomentumField coadjoint_act(const CircleLift& f, const MomentumField& p) {
  const CircleLift h = f.inverse();
  const double c = p.central_charge();

  auto smooth = [h, p, c](double x) {
    const double a = h.d1(x);
    return a * a * p.smooth(h(x)) - c / 12.0 * schwarzian(h, x);
  };

  std::vector<Delta> deltas;
  for (const auto& d : p.deltas()) {
    const double y = f(d.position);
    deltas.push_back({y, d.weight * h.d1(y)});
  }
  for (double xk : h.kinks()) {
    auto second = [&h](double s) { return h.d2_unchecked(s); };
    const double jump = one_sided_limit(second, xk, +1) - one_sided_limit(second, xk, -1);
    deltas.push_back({xk, -c / 12.0 * jump / h.d1(xk)});
  }

  std::vector<double> breaks(h.kinks().begin(), h.kinks().end());
  for (double b : p.breakpoints()) breaks.push_back(f(b));
  return MomentumField(smooth, std::move(deltas), c, std::move(breaks));
}

enum class OrbitKind { AmenableHyperbolic, AmenableElliptic, ExceptionalBoundary, NonAmenable };

inline std::string_view to_string(OrbitKind kind) {
  switch (kind) {
    case OrbitKind::AmenableHyperbolic: return "AmenableHyperbolic";
    case OrbitKind::AmenableElliptic: return "AmenableElliptic";
    case OrbitKind::ExceptionalBoundary: return "ExceptionalBoundary";
    case OrbitKind::NonAmenable: return "NonAmenable";
  }
  return "?";
}

/// Virasoro orbit of a wave: amenable ones carry the uniform representative
/// k/c, non-amenable ones a winding number instead.
struct OrbitClass {
  OrbitKind kind;
  std::optional<double> k_over_c;
  std::optional<int> winding;

  bool amenable() const { return kind != OrbitKind::NonAmenable; }
};

}  // namespace peakonlab
