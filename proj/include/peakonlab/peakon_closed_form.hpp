#pragma once

// Closed-form reconstruction of periodic peakons: amenability and
// hyperbolicity thresholds, the drift constant calV, the uniformizing
// diffeomorphism g0^-1, the uniform representative k and the orbit
// classifier.
//
// Everything is driven by
//   a = v/c - m^2/24,  b = v/c - m^2/8,  C = cosh(m pi),  tau = tanh(m pi/2),
//   R = (aC + b)/(aC - b),
// with aC - b > 0 exactly on the amenable side. R > 0 is the hyperbolic
// branch (artanh), R < 0 the elliptic one (arctan).

#include <cmath>
#include <stdexcept>

#include "peakonlab/ch_dynamics.hpp"
#include "peakonlab/circle_diffeo.hpp"
#include "peakonlab/numerics.hpp"
#include "peakonlab/reconstruction.hpp"

namespace peakonlab {

inline constexpr double max_closed_form_mass = 50.0;

inline double amenability_threshold(double m) {
  if (!(m > 0.0)) throw std::invalid_argument("amenability_threshold: m must be positive");
  // (C - 3)/(C - 1) = 1 - 1/sinh^2(m pi/2), C = cosh(m pi); stable as m -> 0
  const double s = std::sinh(0.5 * m * pi);
  return m * m / 24.0 * (1.0 - 1.0 / (s * s));
}

inline double hyperbolicity_threshold(double m) {
  if (!(m > 0.0)) throw std::invalid_argument("hyperbolicity_threshold: m must be positive");
  // (C + 3)/(C + 1) = 1 + 1/cosh^2(m pi/2)
  const double ch = std::cosh(0.5 * m * pi);
  return m * m / 24.0 * (1.0 + 1.0 / (ch * ch));
}

inline bool is_amenable(const PeakonParams& p) {
  p.validate();
  return p.v_over_c() > amenability_threshold(p.m);
}

inline bool is_hyperbolic_amenable(const PeakonParams& p) {
  p.validate();
  return p.v_over_c() > hyperbolicity_threshold(p.m);
}

enum class Branch { Hyperbolic, Elliptic };

/// A branch-continued scalar: artanh(sqrt(R) t)/sqrt(R) for R >= 0,
/// arctan(sqrt(-R) t)/sqrt(-R) for R < 0. The two agree analytically at R = 0.
struct BranchScalar {
  double value;
  Branch branch;
};

inline BranchScalar branch_ratio(double R, double t) {
  if (R >= 0.0) {
    if (R < 1e-12) return {t + R * t * t * t / 3.0, Branch::Hyperbolic};
    const double r = std::sqrt(R);
    return {std::atanh(r * t) / r, Branch::Hyperbolic};
  }
  if (R > -1e-12) return {t + R * t * t * t / 3.0, Branch::Elliptic};
  const double r = std::sqrt(-R);
  return {std::atan(r * t) / r, Branch::Elliptic};
}

namespace detail {

struct PeakonShape {
  double a;            // v/c - m^2/24
  double b;            // v/c - m^2/8
  double inv_cosh;     // 1/cosh(m pi)
  double tau;          // tanh(m pi/2)
  double gap;          // a - b/C, positive iff amenable
  double R;            // (aC + b)/(aC - b)
};

inline PeakonShape peakon_shape(const PeakonParams& p) {
  p.validate();
  if (p.m > max_closed_form_mass) throw std::invalid_argument("closed form: m > 50 is not supported");
  PeakonShape s{};
  const double r = p.v_over_c();
  const double m2 = p.m * p.m;
  s.a = r - m2 / 24.0;
  s.b = r - m2 / 8.0;
  const double e = std::exp(-p.m * pi);
  s.inv_cosh = 2.0 * e / (1.0 + e * e);
  s.tau = std::tanh(0.5 * p.m * pi);
  s.gap = s.a - s.b * s.inv_cosh;
  s.R = (s.a + s.b * s.inv_cosh) / s.gap;
  return s;
}

inline PeakonShape amenable_shape(const PeakonParams& p, const char* who) {
  const PeakonShape s = peakon_shape(p);
  if (!(s.gap > 0.0) || !is_amenable(p)) throw NotAmenableError(std::string(who) + ": peakon is not amenable");
  return s;
}

}  // namespace detail

/// Which branch the closed forms use at this point, decided by the sign of R.
inline Branch closed_form_branch(const PeakonParams& p) {
  const auto s = detail::amenable_shape(p, "closed_form_branch");
  return s.R >= 0.0 ? Branch::Hyperbolic : Branch::Elliptic;
}

/// calV = -(c/2) m pi (a - b/C) / F(R, tau), F the branch ratio.
inline double calV_closed(const PeakonParams& p) {
  const auto s = detail::amenable_shape(p, "calV_closed");
  const BranchScalar F = branch_ratio(s.R, s.tau);
  return -0.5 * p.c * p.m * pi * s.gap / F.value;
}

/// Uniformizing lift g0^-1 normalised by g0^-1(0) = 0, g0^-1(pi) = pi:
///   g0^-1(x) = pi + pi F(R, tanh(m(x - pi)/2)) / F(R, tau)   on [0, 2pi],
/// extended by g0^-1(x + 2pi) = g0^-1(x) + 2pi.
inline double g0_inverse_closed(const PeakonParams& p, double x) {
  const auto s = detail::amenable_shape(p, "g0_inverse_closed");
  const double n = std::floor(x / two_pi);
  const double r = x - two_pi * n;
  const double num = branch_ratio(s.R, std::tanh(0.5 * p.m * (r - pi))).value;
  const double den = branch_ratio(s.R, s.tau).value;
  return two_pi * n + pi + pi * num / den;
}

/// g0^-1 as a C1 lift with kinks at 2pi Z. Derivatives come from
/// (g0^-1)' = calV / (u - v) and the analytic peakon derivatives.
inline CircleLift g0_inverse_lift(const PeakonParams& p) {
  const double V = calV_closed(p);
  const VelocityField u = peakon_velocity(p);
  const double v = p.v;
  auto value = [p](double x) { return g0_inverse_closed(p, x); };
  auto d1 = [u, v, V](double x) { return V / (u(x) - v); };
  auto d2 = [u, v, V](double x) {
    const double U = u(x) - v;
    return -V * u.d1(x) / (U * U);
  };
  auto d3 = [u, v, V](double x) {
    const double U = u(x) - v;
    const double U1 = u.d1(x);
    return V * (2.0 * U1 * U1 - U * u.d2(x)) / (U * U * U);
  };
  return CircleLift(value, d1, d2, d3, Smoothness::C1, {0.0});
}

/// g0, carrying g0_inverse_lift as its exact inverse.
inline CircleLift uniformizer(const PeakonParams& p) { return g0_inverse_lift(p).inverse(); }

/// k = (c/6pi^2) artanh(sqrt(R) tau)^2 on the hyperbolic branch and
/// -(c/6pi^2) arctan(sqrt(-R) tau)^2 on the elliptic one.
inline double k_closed(const PeakonParams& p) {
  const auto s = detail::amenable_shape(p, "k_closed");
  const double scale = p.c / (6.0 * pi * pi);
  if (s.R == 0.0) return 0.0;
  if (s.R > 0.0) {
    const double z = std::atanh(std::sqrt(s.R) * s.tau);
    return scale * z * z;
  }
  const double z = std::atan(std::sqrt(-s.R) * s.tau);
  return -scale * z * z;
}

/// Large-v/c asymptote of the drift velocity,
///   v - v m pi tanh(m pi) / log[(24/m^2)(sinh^2(m pi)/cosh(m pi))(v/c)].
inline double drift_asymptotic(const PeakonParams& p) {
  p.validate();
  const double mp = p.m * pi;
  const double S = std::sinh(mp), C = std::cosh(mp);
  return p.v - p.v * mp * std::tanh(mp) / std::log(24.0 / (p.m * p.m) * (S * S / C) * p.v_over_c());
}

/// The asymptote is only meaningful well inside the amenable region.
inline bool drift_asymptotic_applicable(const PeakonParams& p) {
  p.validate();
  return p.v_over_c() > 10.0 * std::abs(amenability_threshold(p.m)) && p.v_over_c() > 0.0;
}

/// Orbit class of a peakon. Points within `boundary_tol` (in v/c) of the
/// amenability threshold are reported as the exceptional orbit k = -c/24.
inline OrbitClass classify_peakon(const PeakonParams& p, double boundary_tol = 1e-12) {
  p.validate();
  const double d = p.v_over_c() - amenability_threshold(p.m);
  if (std::abs(d) <= boundary_tol) return {OrbitKind::ExceptionalBoundary, -1.0 / 24.0, std::nullopt};
  if (d < 0.0) return {OrbitKind::NonAmenable, std::nullopt, 1};
  const double k_over_c = k_closed(p) / p.c;
  const OrbitKind kind =
      closed_form_branch(p) == Branch::Hyperbolic ? OrbitKind::AmenableHyperbolic : OrbitKind::AmenableElliptic;
  return {kind, k_over_c, std::nullopt};
}

/// Drift from the closed form: v + calV when amenable, v otherwise (and on
/// the exceptional boundary, where calV vanishes).
inline DriftResult drift_closed_form(const PeakonParams& p, double boundary_tol = 1e-12) {
  const OrbitClass orbit = classify_peakon(p, boundary_tol);
  if (orbit.kind == OrbitKind::NonAmenable) {
    return {std::nullopt, p.v, DriftMethod::ClosedForm, phase_per_period(p.v, p.v)};
  }
  const double V = orbit.kind == OrbitKind::ExceptionalBoundary ? 0.0 : calV_closed(p);
  return {V, p.v + V, DriftMethod::ClosedForm, phase_per_period(p.v + V, p.v)};
}

inline TravellingWave peakon_wave(const PeakonParams& p) { return {peakon_velocity(p), p.v}; }

}  // namespace peakonlab
