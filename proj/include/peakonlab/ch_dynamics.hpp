#pragma once

// Camassa-Holm structure on the circle: Green's function, velocity map and
// inertia operator, energy/Hamiltonian, periodic peakon profiles and the
// pointwise CH residual.

#include <cmath>
#include <functional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "peakonlab/circle_diffeo.hpp"
#include "peakonlab/numerics.hpp"

namespace peakonlab {

/// (m, v, c) labelling a periodic peakon: mass scale m = 1/l, wave speed v and
/// central charge c. Only m and v/c matter physically.
struct PeakonParams {
  double m;
  double v;
  double c = 1.0;

  static PeakonParams from_ratio(double m, double v_over_c, double c = 1.0) { return {m, v_over_c * c, c}; }

  double v_over_c() const { return v / c; }
  double correlation_length() const { return 1.0 / m; }

  void validate() const {
    if (!(m > 0.0) || !std::isfinite(m)) throw std::invalid_argument("PeakonParams: m must be positive");
    if (c == 0.0 || !std::isfinite(c)) throw std::invalid_argument("PeakonParams: c must be non-zero");
    if (!std::isfinite(v)) throw std::invalid_argument("PeakonParams: v must be finite");
  }
};

/// A kink of a velocity profile: u' jumps by `slope_jump` = u'(x+) - u'(x-).
struct Kink {
  double position;
  double slope_jump;
};

/// 2pi-periodic velocity profile u(x) with analytic derivatives to third
/// order away from its kinks. Derivatives throw KinkEvaluationError on a kink.
class VelocityField {
 public:
  using Profile = std::function<double(double)>;

  VelocityField(Profile value, Profile d1, Profile d2, Profile d3, std::vector<Kink> kinks = {})
      : value_(std::move(value)), d1_(std::move(d1)), d2_(std::move(d2)), d3_(std::move(d3)) {
    for (auto& k : kinks) k.position = wrap_two_pi(k.position);
    kinks_ = std::move(kinks);
    for (const auto& k : kinks_) kink_positions_.push_back(k.position);
  }

  static VelocityField constant(double u0) {
    auto zero = [](double) { return 0.0; };
    return VelocityField([u0](double) { return u0; }, zero, zero, zero);
  }

  double operator()(double x) const { return value_(x); }
  double d1(double x) const { return guarded(d1_, x); }
  double d2(double x) const { return guarded(d2_, x); }
  double d3(double x) const { return guarded(d3_, x); }

  std::span<const Kink> kinks() const { return kinks_; }
  std::span<const double> kink_positions() const { return kink_positions_; }
  bool is_kink(double x) const { return near_periodic_point(x, kink_positions_); }

 private:
  double guarded(const Profile& p, double x) const {
    if (!kinks_.empty() && is_kink(x)) throw KinkEvaluationError("VelocityField: derivative requested at a kink");
    return p(x);
  }

  Profile value_, d1_, d2_, d3_;
  std::vector<Kink> kinks_;
  std::vector<double> kink_positions_;
};

namespace detail {
/// cosh(m pi) and sinh(m pi) style factors are large; ratios below are formed
/// from exponentials so nothing overflows for m up to 50.
inline double cosh_ratio(double m, double s) {
  // cosh(m s) / cosh(m pi) for |s| <= pi
  const double e = std::exp(-2.0 * m * pi);
  return std::exp(m * (std::abs(s) - pi)) * (1.0 + std::exp(-2.0 * m * std::abs(s))) / (1.0 + e);
}
inline double sinh_over_cosh(double m, double s) {
  // sinh(m s) / cosh(m pi) for |s| <= pi
  const double e = std::exp(-2.0 * m * pi);
  const double mag = std::exp(m * (std::abs(s) - pi)) * (1.0 - std::exp(-2.0 * m * std::abs(s))) / (1.0 + e);
  return s < 0.0 ? -mag : mag;
}
inline double cosh_over_sinh(double m, double s) {
  // cosh(m s) / sinh(m pi) for |s| <= pi
  const double e = std::exp(-2.0 * m * pi);
  return std::exp(m * (std::abs(s) - pi)) * (1.0 + std::exp(-2.0 * m * std::abs(s))) / (1.0 - e);
}
inline double sinh_over_sinh(double m, double s) {
  const double e = std::exp(-2.0 * m * pi);
  const double mag = std::exp(m * (std::abs(s) - pi)) * (1.0 - std::exp(-2.0 * m * std::abs(s))) / (1.0 - e);
  return s < 0.0 ? -mag : mag;
}
}  // namespace detail

/// Periodic Green's function of 1 - l^2 d^2/dx^2:
/// G(x) = (m/2) cosh[m(x - pi)] / sinh(m pi) on [0, 2pi], extended periodically.
inline double green(double m, double x) {
  if (!(m > 0.0)) throw std::invalid_argument("green: m must be positive");
  return 0.5 * m * detail::cosh_over_sinh(m, wrap_two_pi(x) - pi);
}

/// d^order G / dx^order for order 0..3, valid away from 2pi Z.
inline double green_derivative(double m, double x, int order) {
  const double s = wrap_two_pi(x) - pi;
  switch (order) {
    case 0: return green(m, x);
    case 1: return 0.5 * m * m * detail::sinh_over_sinh(m, s);
    case 2: return 0.5 * m * m * m * detail::cosh_over_sinh(m, s);
    case 3: return 0.5 * m * m * m * m * detail::sinh_over_sinh(m, s);
    default: throw std::invalid_argument("green_derivative: order must be 0..3");
  }
}

/// W[p](x) = int G(x - y) p(y) dy + sum_i w_i G(x - x_i).
inline double velocity_map(const MomentumField& p, double m, double x) {
  double result = 0.0;
  if (auto k = p.constant()) {
    result = *k;
  } else {
    std::vector<double> breaks(p.breakpoints().begin(), p.breakpoints().end());
    breaks.push_back(x);
    result = integrate([&](double y) { return green(m, x - y) * p.smooth(y); }, 0.0, two_pi, breaks);
  }
  for (const auto& d : p.deltas()) result += d.weight * green(m, x - d.position);
  return result;
}

/// I[u] = u - u''/m^2; each kink with slope jump [u'] adds a delta of weight -[u']/m^2.
inline MomentumField inertia(const VelocityField& u, double m, double c) {
  const double l2 = 1.0 / (m * m);
  std::vector<Delta> deltas;
  for (const auto& k : u.kinks()) deltas.push_back({k.position, -k.slope_jump * l2});
  std::vector<double> breaks(u.kink_positions().begin(), u.kink_positions().end());
  return MomentumField([u, l2](double x) { return u(x) - l2 * u.d2(x); }, std::move(deltas), c, std::move(breaks));
}

/// Periodic peakon u(x) = (v - m^2 c/8) cosh[m(x - pi)]/cosh(m pi) + m^2 c/24, kinks at 2pi Z.
inline VelocityField peakon_velocity(const PeakonParams& params) {
  params.validate();
  const double m = params.m;
  const double lambda = params.v - m * m * params.c / 8.0;
  const double floor_value = m * m * params.c / 24.0;
  auto value = [=](double x) { return lambda * detail::cosh_ratio(m, wrap_two_pi(x) - pi) + floor_value; };
  auto d1 = [=](double x) { return lambda * m * detail::sinh_over_cosh(m, wrap_two_pi(x) - pi); };
  auto d2 = [=](double x) { return lambda * m * m * detail::cosh_ratio(m, wrap_two_pi(x) - pi); };
  auto d3 = [=](double x) { return lambda * m * m * m * detail::sinh_over_cosh(m, wrap_two_pi(x) - pi); };
  // u'(0+) = -lambda m tanh(m pi), u'(0-) = +lambda m tanh(m pi)
  const double jump = -2.0 * lambda * m * std::tanh(m * pi);
  return VelocityField(value, d1, d2, d3, {Kink{0.0, jump}});
}

/// Peakon momentum I[u] = m^2 c/24 + (2v/m - mc/4) tanh(m pi) sum_n delta(x - 2 pi n).
inline MomentumField peakon_momentum(const PeakonParams& params) {
  params.validate();
  const double m = params.m;
  const double weight = (2.0 * params.v / m - m * params.c / 4.0) * std::tanh(m * pi);
  return MomentumField::uniform(m * m * params.c / 24.0, params.c, {Delta{0.0, weight}});
}

/// Residual of the CH equation
///   u_t + 3uu' - l^2 u_t'' - l^2 u u''' - 2 l^2 u' u'' - (c/12) u''' = 0
/// for the travelling peakon, with u_t = -v u'.
inline double ch_residual(const PeakonParams& params, double x) {
  const VelocityField u = peakon_velocity(params);
  if (u.is_kink(x)) throw KinkEvaluationError("ch_residual: x lies on a peak");
  const double l2 = 1.0 / (params.m * params.m);
  const double v = params.v;
  const double u0 = u(x), u1 = u.d1(x), u2 = u.d2(x), u3 = u.d3(x);
  return -v * u1 + 3.0 * u0 * u1 + l2 * v * u3 - l2 * u0 * u3 - 2.0 * l2 * u1 * u2 - params.c / 12.0 * u3;
}

/// E[u] = int (u^2 + l^2 u'^2)/2.
inline double energy(const VelocityField& u, double m) {
  const double l2 = 1.0 / (m * m);
  return integrate(
      [&](double x) {
        const double a = u(x), b = u.d1(x);
        return 0.5 * (a * a + l2 * b * b);
      },
      0.0, two_pi, u.kink_positions());
}

/// H[p] = (1/2) int int p(x) G(x - y) p(y), delta cross terms included.
inline double hamiltonian(const MomentumField& p, double m) {
  // W[p] has slope jumps at the deltas
  std::vector<double> breaks(p.breakpoints().begin(), p.breakpoints().end());
  for (const auto& d : p.deltas()) breaks.push_back(d.position);
  double total = integrate([&](double x) { return p.smooth(x) * velocity_map(p, m, x); }, 0.0, two_pi, breaks,
                           QuadratureOptions{1e-12, 16});
  for (const auto& d : p.deltas()) total += d.weight * velocity_map(p, m, d.position);
  return 0.5 * total;
}

/// Parameters of the textbook form U_t + 2 kappa U_X - U_XXt + 3 U U_X = 2 U_X U_XX + U U_XXX,
/// reached by X = m x and U = u/l + c/(12 l^3).
struct OriginalVariables {
  double kappa;
  double shift;
  double scale;
};

inline OriginalVariables to_original_vars(const PeakonParams& params) {
  params.validate();
  const double m3 = params.m * params.m * params.m;
  return {-params.c * m3 / 24.0, params.c * m3 / 12.0, params.m};
}

/// True iff u itself (not u - v) changes sign: m^2 (3 - cosh m pi)/24 < v/c < m^2/12.
inline bool has_velocity_roots(const PeakonParams& params) {
  params.validate();
  const double m2 = params.m * params.m;
  const double r = params.v_over_c();
  return m2 * (3.0 - std::cosh(params.m * pi)) / 24.0 < r && r < m2 / 12.0;
}

}  // namespace peakonlab
