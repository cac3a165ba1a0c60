#pragma once

// Uniform representatives through Hill's equation -(c/6) psi'' + p psi = 0:
// the closed-form trace of the delta-comb monodromy, a transfer-matrix
// integrator for general potentials, and the inversion trace -> k.

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <variant>
#include <vector>

#include "peakonlab/ch_dynamics.hpp"
#include "peakonlab/circle_diffeo.hpp"
#include "peakonlab/numerics.hpp"

namespace peakonlab {

/// -psi'' + (A + B sum_n delta(x - 2 pi n)) psi = 0.
struct DeltaCombPotential {
  double A;
  double B;
};

/// Either the two-parameter comb above or a general momentum, entering as
/// psi'' = (6/c) p psi.
using HillPotential = std::variant<DeltaCombPotential, MomentumField>;

struct MonodromyMatrix {
  double a11 = 1.0, a12 = 0.0, a21 = 0.0, a22 = 1.0;

  double trace() const { return a11 + a22; }
  double determinant() const { return a11 * a22 - a12 * a21; }
};

/// A = m^2/4, B = (12 v/(m c) - 3m/2) tanh(m pi).
inline DeltaCombPotential peakon_AB(const PeakonParams& p) {
  p.validate();
  return {p.m * p.m / 4.0, (12.0 * p.v / (p.m * p.c) - 1.5 * p.m) * std::tanh(p.m * pi)};
}

/// Tr M = 2 cosh(2 pi sqrt A) + (B/sqrt A) sinh(2 pi sqrt A), continued to A <= 0.
inline double trace_delta_comb(double A, double B) {
  if (A > 0.0) {
    const double s = std::sqrt(A);
    return 2.0 * std::cosh(two_pi * s) + B / s * std::sinh(two_pi * s);
  }
  if (A < 0.0) {
    const double s = std::sqrt(-A);
    return 2.0 * std::cos(two_pi * s) + B / s * std::sin(two_pi * s);
  }
  return 2.0 + two_pi * B;
}

namespace detail {

using State = std::array<double, 2>;

/// RK4 for (psi, psi')' = (psi', q(x) psi) over [a, b] in steps no longer than h_max.
template <class Q>
void propagate(State& col1, State& col2, Q&& q, double a, double b, double h_max) {
  if (!(b > a)) return;
  const auto n = static_cast<std::size_t>(std::ceil((b - a) / h_max));
  const double h = (b - a) / static_cast<double>(n);
  auto rhs = [&q](double x, const State& y) { return State{y[1], q(x) * y[0]}; };
  auto step = [&](State& y, double x) {
    const State k1 = rhs(x, y);
    const State k2 = rhs(x + 0.5 * h, {y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]});
    const State k3 = rhs(x + 0.5 * h, {y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]});
    const State k4 = rhs(x + h, {y[0] + h * k3[0], y[1] + h * k3[1]});
    y[0] += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]);
    y[1] += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]);
  };
  for (std::size_t i = 0; i < n; ++i) {
    const double x = a + static_cast<double>(i) * h;
    step(col1, x);
    step(col2, x);
  }
}

template <class Q>
MonodromyMatrix transfer(Q&& q, const std::vector<Delta>& jumps, double h_max) {
  // fundamental system from x = 0-, deltas in [0, 2pi) applied exactly
  State col1{1.0, 0.0}, col2{0.0, 1.0};
  double x = 0.0;
  for (const auto& d : jumps) {
    propagate(col1, col2, q, x, d.position, h_max);
    col1[1] += d.weight * col1[0];
    col2[1] += d.weight * col2[0];
    x = d.position;
  }
  propagate(col1, col2, q, x, two_pi, h_max);
  return {col1[0], col2[0], col1[1], col2[1]};
}

}  // namespace detail

/// Monodromy over one period by RK4 on smooth stretches (step <= max_step)
/// with exact jumps psi' -> psi' + (strength) psi at each delta.
inline MonodromyMatrix monodromy_numeric(const HillPotential& potential, double c, double max_step = 1e-4) {
  if (!(max_step > 0.0)) throw std::invalid_argument("monodromy_numeric: max_step must be positive");
  if (const auto* comb = std::get_if<DeltaCombPotential>(&potential)) {
    const double A = comb->A;
    return detail::transfer([A](double) { return A; }, {Delta{0.0, comb->B}}, max_step);
  }
  const auto& p = std::get<MomentumField>(potential);
  if (c == 0.0) throw std::invalid_argument("monodromy_numeric: c must be non-zero");
  std::vector<Delta> jumps;
  for (const auto& d : p.deltas()) jumps.push_back({d.position, 6.0 * d.weight / c});
  const double scale = 6.0 / c;
  if (auto k = p.constant()) {
    const double q = scale * *k;
    return detail::transfer([q](double) { return q; }, jumps, max_step);
  }
  // smooth stretches must not straddle a breakpoint of p
  std::vector<Delta> stops = jumps;
  for (double b : p.breakpoints()) stops.push_back({b, 0.0});
  std::sort(stops.begin(), stops.end(), [](const Delta& a, const Delta& b) { return a.position < b.position; });
  return detail::transfer([&p, scale](double x) { return scale * p.smooth(x); }, stops, max_step);
}

/// Inverts Tr M = 2 cosh(2 pi sqrt(6k/c)) on the principal branch.
/// Tr < -2 means no uniform representative exists.
inline double k_from_trace(double tr, double c) {
  if (c == 0.0) throw std::invalid_argument("k_from_trace: c must be non-zero");
  if (tr < -2.0) throw NotAmenableError("k_from_trace: Tr(M) < -2, the momentum is not amenable");
  if (tr == 2.0) return 0.0;
  if (tr > 2.0) {
    const double s = std::acosh(0.5 * tr) / two_pi;
    return c * s * s / 6.0;
  }
  const double q = std::acos(0.5 * tr) / two_pi;
  return -c * q * q / 6.0;
}

/// Bloch crystal momentum q = sqrt(-6k/c) of an elliptic profile.
inline double crystal_momentum(double k, double c) {
  if (c == 0.0) throw std::invalid_argument("crystal_momentum: c must be non-zero");
  if (!(k / c < 0.0)) throw NumericDomainError("crystal_momentum: k/c >= 0, q is not real");
  return std::sqrt(-6.0 * k / c);
}

}  // namespace peakonlab
