#pragma once

// Reconstruction of travelling waves p(x - vt) for any rotation-invariant
// Lie-Poisson dynamics: the drift constant, the uniformizing diffeomorphism
// g0, exact particle paths, RK4 particle integration, drift estimation and
// the root-based flow classification.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "peakonlab/ch_dynamics.hpp"
#include "peakonlab/circle_diffeo.hpp"
#include "peakonlab/numerics.hpp"

namespace peakonlab {

/// Velocity profile u moving rigidly at speed v: u(x, t) = u(x - vt).
struct TravellingWave {
  VelocityField u;
  double v;

  /// u(X) - v, the co-moving flow.
  double flow(double x) const { return u(x) - v; }
  /// Time period 2pi/|v|; infinite for a standing wave.
  double period() const { return v == 0.0 ? std::numeric_limits<double>::infinity() : two_pi / std::abs(v); }
};

enum class FlowKind { NoRoots, SimpleRoots, DegenerateRoot };

inline std::string_view to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::NoRoots: return "NoRoots";
    case FlowKind::SimpleRoots: return "SimpleRoots";
    case FlowKind::DegenerateRoot: return "DegenerateRoot";
  }
  return "?";
}

/// Root structure of U = u - v over one wavelength.
struct FlowClass {
  FlowKind kind = FlowKind::NoRoots;
  std::vector<double> roots;             // SimpleRoots, sorted in [0, 2pi)
  std::optional<double> degenerate_root;  // DegenerateRoot
  double min_abs_flow = 0.0;              // min |U| over the wavelength
  bool near_degenerate = false;           // NoRoots but min |U| < 1e-6: badly conditioned

  std::size_t root_count() const { return roots.size(); }
  bool amenable() const { return kind == FlowKind::NoRoots; }
};

namespace detail {

/// Extremum of s*U on [a, b] (golden section), s = +1 to maximise.
template <class F>
double golden_extremum(F&& f, double a, double b, double s) {
  constexpr double g = 0.6180339887498949;
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = s * f(x1), f2 = s * f(x2);
  for (int i = 0; i < 100 && b - a > 1e-13; ++i) {
    if (f1 > f2) {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - g * (b - a); f1 = s * f(x1);
    } else {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + g * (b - a); f2 = s * f(x2);
    }
  }
  return 0.5 * (a + b);
}

inline double safe_slope(const TravellingWave& w, double x) {
  if (w.u.is_kink(x)) return std::numeric_limits<double>::quiet_NaN();
  return w.u.d1(x);
}

}  // namespace detail

/// Samples U = u - v on grid_n points (plus the kinks), brackets sign
/// changes and polishes each root to 1e-12. Roots with |U'| < 1e-8 and
/// tangencies where the extremum of U touches zero are DegenerateRoot.
inline FlowClass classify_flow(const TravellingWave& wave, int grid_n = 256) {
  if (grid_n < 64) throw std::invalid_argument("classify_flow: grid_n must be >= 64");
  std::vector<double> xs;
  for (int i = 0; i < grid_n; ++i) xs.push_back(two_pi * i / grid_n);
  for (double k : wave.u.kink_positions()) xs.push_back(k);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(), [](double a, double b) { return b - a < 1e-12; }), xs.end());
  xs.push_back(two_pi);

  auto U = [&](double x) { return wave.flow(x); };
  auto dU = [&](double x) { return detail::safe_slope(wave, x); };
  std::vector<double> values;
  for (double x : xs) values.push_back(U(x));

  FlowClass out;
  std::vector<double> roots;
  auto add_root = [&](double lo, double hi) { roots.push_back(polish_root(U, dU, lo, hi, 1e-6, 10, 1e-12)); };

  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    const double a = values[i], b = values[i + 1];
    if (a == 0.0) {
      roots.push_back(xs[i]);
    } else if ((a < 0.0) != (b < 0.0) && b != 0.0) {
      add_root(xs[i], xs[i + 1]);
    }
  }

  // Extremum of U closest to zero: catches tangencies and root pairs hiding inside one grid cell.
  std::size_t best = 0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i) {
    if (std::abs(values[i]) < std::abs(values[best])) best = i;
  }
  const std::size_t n = xs.size() - 1;
  const double lo = best == 0 ? xs[n - 1] - two_pi : xs[best - 1];
  const double hi = xs[best + 1];
  const double s = values[best] < 0.0 ? 1.0 : -1.0;  // push U towards zero
  const double x_ext = detail::golden_extremum(U, lo, hi, s);
  const double u_ext = U(x_ext);
  out.min_abs_flow = std::min(std::abs(values[best]), std::abs(u_ext));
  if (roots.empty() && (u_ext < 0.0) != (values[best] < 0.0) && u_ext != 0.0) {
    // a root pair inside a single cell
    add_root(std::min(lo, x_ext), std::max(lo, x_ext));
    add_root(std::min(x_ext, hi), std::max(x_ext, hi));
  }

  for (double& r : roots) r = wrap_two_pi(r);
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(), [](double a, double b) { return b - a < 1e-10; }), roots.end());
  if (roots.size() > 1 && circle_distance(roots.front(), roots.back()) < 1e-10) roots.pop_back();

  if (roots.empty()) {
    if (std::abs(u_ext) < 1e-12) {
      out.kind = FlowKind::DegenerateRoot;
      out.degenerate_root = wrap_two_pi(x_ext);
      return out;
    }
    out.kind = FlowKind::NoRoots;
    out.near_degenerate = out.min_abs_flow < 1e-6;
    return out;
  }
  for (double r : roots) {
    const double slope = detail::safe_slope(wave, r);
    if (std::isfinite(slope) && std::abs(slope) < 1e-8) {
      out.kind = FlowKind::DegenerateRoot;
      out.degenerate_root = r;
      return out;
    }
  }
  out.kind = FlowKind::SimpleRoots;
  out.roots = std::move(roots);
  return out;
}

/// The quadrature route to the uniformizing diffeomorphism of an amenable
/// wave. Construction fails with NotAmenableError when u - v has roots.
class QuadratureUniformizer {
 public:
  explicit QuadratureUniformizer(TravellingWave wave, int grid_n = 256)
      : wave_(std::move(wave)), flow_(classify_flow(wave_, grid_n)) {
    if (!flow_.amenable()) {
      throw NotAmenableError(std::string("wave is not amenable: u - v has ") +
                             std::string(to_string(flow_.kind)));
    }
    options_ = flow_.near_degenerate ? QuadratureOptions{1e-8, 24} : QuadratureOptions{1e-13, 18};
    calV_ = two_pi / integrate([this](double x) { return 1.0 / wave_.flow(x); }, 0.0, two_pi, kinks(), options_);
  }

  const TravellingWave& wave() const { return wave_; }
  const FlowClass& flow() const { return flow_; }
  double calV() const { return calV_; }

  /// g0^-1(x) = phi + calV int_0^x dy/(u(y) - v), continued by the lift condition.
  double inverse(double x, double phi = 0.0) const {
    const double n = std::floor(x / two_pi);
    const double r = x - two_pi * n;
    return phi + two_pi * n + calV_ * integrate([this](double y) { return 1.0 / wave_.flow(y); }, 0.0, r, kinks(), options_);
  }

  /// g0^-1 as a lift; derivatives follow from (g0^-1)' = calV/U exactly.
  CircleLift inverse_lift(double phi = 0.0) const {
    const QuadratureUniformizer self = *this;
    auto value = [self, phi](double x) { return self.inverse(x, phi); };
    auto d1 = [self](double x) { return self.calV_ / self.wave_.flow(x); };
    auto d2 = [self](double x) {
      const double U = self.wave_.flow(x);
      return -self.calV_ * self.wave_.u.d1(x) / (U * U);
    };
    auto d3 = [self](double x) {
      const double U = self.wave_.flow(x);
      const double U1 = self.wave_.u.d1(x);
      return self.calV_ * (2.0 * U1 * U1 - U * self.wave_.u.d2(x)) / (U * U * U);
    };
    std::vector<double> ks(kinks().begin(), kinks().end());
    const Smoothness s = ks.empty() ? Smoothness::Smooth : Smoothness::C1;
    return CircleLift(value, d1, d2, d3, s, ks);
  }

  /// g0 itself.
  CircleLift lift(double phi = 0.0) const { return inverse_lift(phi).inverse(); }

 private:
  std::span<const double> kinks() const { return wave_.u.kink_positions(); }

  TravellingWave wave_;
  FlowClass flow_;
  QuadratureOptions options_;
  double calV_ = 0.0;
};

/// 2pi / int_0^{2pi} dx/(u - v). Throws NotAmenableError when u - v has roots.
inline double calV_quadrature(const TravellingWave& wave) { return QuadratureUniformizer(wave).calV(); }

inline double g0_inverse_quadrature(const TravellingWave& wave, double x, double phi = 0.0) {
  return QuadratureUniformizer(wave).inverse(x, phi);
}

/// x(t) = g0(g0^-1(x0) + calV t) + v t.
inline double reconstruct_path(const TravellingWave& wave, const CircleLift& g0, double calV, double x0, double t) {
  if (t == 0.0) return x0;
  const CircleLift g0_inv = g0.inverse();
  return g0(g0_inv(x0) + calV * t) + wave.v * t;
}

inline double reconstruct_path(const TravellingWave& wave, const CircleLift& g0, double x0, double t) {
  return reconstruct_path(wave, g0, calV_quadrature(wave), x0, t);
}

/// Particle path sampled at fixed steps; positions are lifted, not reduced.
struct Trajectory {
  std::vector<double> times;
  std::vector<double> positions;
  double x0 = 0.0;
  double dt = 0.0;
  double wave_period = std::numeric_limits<double>::infinity();
};

namespace detail {
inline double rk4_step(const TravellingWave& w, double t, double x, double h) {
  auto f = [&w](double tt, double xx) { return w.u(xx - w.v * tt); };
  const double k1 = f(t, x);
  const double k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
  const double k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
  const double k4 = f(t + h, x + h * k3);
  return x + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}
}  // namespace detail

/// Classical fixed-step RK4 for dx/dt = u(x - vt). The last step is shortened
/// to land on t_max exactly.
inline Trajectory integrate_particle(const TravellingWave& wave, double x0, double t_max, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("integrate_particle: dt must be positive");
  if (!(t_max >= 0.0)) throw std::invalid_argument("integrate_particle: t_max must be non-negative");
  Trajectory traj;
  traj.x0 = x0;
  traj.dt = dt;
  traj.wave_period = wave.period();
  const auto steps = static_cast<std::size_t>(std::ceil(t_max / dt - 1e-9));
  traj.times.reserve(steps + 1);
  traj.positions.reserve(steps + 1);
  double t = 0.0, x = x0;
  traj.times.push_back(t);
  traj.positions.push_back(x);
  for (std::size_t i = 1; i <= steps; ++i) {
    const double t_next = i == steps ? t_max : static_cast<double>(i) * dt;
    x = detail::rk4_step(wave, t, x, t_next - t);
    t = t_next;
    traj.times.push_back(t);
    traj.positions.push_back(x);
  }
  return traj;
}

/// Flow map over one wave period, x0 -> x(T). It is a circle lift, and its
/// rotation number is the phase gained per period.
inline auto period_map(const TravellingWave& wave, double dt) {
  const double T = wave.period();
  if (!std::isfinite(T)) throw std::invalid_argument("period_map: standing wave has no period");
  const auto steps = static_cast<std::size_t>(std::ceil(T / dt));
  const double h = T / static_cast<double>(steps);
  return [wave, steps, h](double x0) {
    double x = x0;
    for (std::size_t i = 0; i < steps; ++i) x = detail::rk4_step(wave, static_cast<double>(i) * h, x, h);
    return x;
  };
}

/// Least-squares slope of x(t) over the trailing `tail_fraction` of samples.
/// The trajectory must span at least `min_periods` wave periods.
inline double drift_estimate(const Trajectory& traj, double tail_fraction = 0.5, double min_periods = 20.0) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
    throw std::invalid_argument("drift_estimate: tail_fraction must lie in (0, 1]");
  }
  if (traj.times.size() < 3) throw std::invalid_argument("drift_estimate: trajectory too short");
  const double span = traj.times.back() - traj.times.front();
  if (std::isfinite(traj.wave_period) && span < min_periods * traj.wave_period) {
    throw std::invalid_argument("drift_estimate: trajectory spans fewer than the required wave periods");
  }
  const std::size_t n = traj.times.size();
  const std::size_t count = std::max<std::size_t>(2, static_cast<std::size_t>(std::llround(tail_fraction * n)));
  const std::size_t first = n - std::min(count, n);
  double tm = 0.0, xm = 0.0;
  for (std::size_t i = first; i < n; ++i) {
    tm += traj.times[i];
    xm += traj.positions[i];
  }
  const double len = static_cast<double>(n - first);
  tm /= len;
  xm /= len;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = first; i < n; ++i) {
    const double dt = traj.times[i] - tm;
    sxy += dt * (traj.positions[i] - xm);
    sxx += dt * dt;
  }
  return sxy / sxx;
}

/// int_{X0}^{X1} dX/(u(X) - v). Throws if u - v vanishes on the interval.
inline double implicit_time(const TravellingWave& wave, double X0, double X1) {
  const double a = std::min(X0, X1), b = std::max(X0, X1);
  const int samples = std::max(64, static_cast<int>(std::ceil((b - a) / two_pi * 256.0)));
  const double first = wave.flow(a);
  for (int i = 0; i <= samples; ++i) {
    const double x = a + (b - a) * i / samples;
    const double U = wave.flow(x);
    if (U == 0.0 || (U < 0.0) != (first < 0.0)) {
      throw NumericDomainError("implicit_time: u - v has a root inside the interval");
    }
  }
  return integrate([&](double x) { return 1.0 / wave.flow(x); }, X0, X1, wave.u.kink_positions());
}

/// A(x) = U [U p - (c/12) u''] + (c/24) u'^2, U = u - v. Constant in x for a
/// travelling-wave solution.
inline double dynamics_invariant(const TravellingWave& wave, const MomentumField& p, double x) {
  if (wave.u.is_kink(x) || near_periodic_point(x, p.breakpoints()) ||
      std::any_of(p.deltas().begin(), p.deltas().end(),
                  [x](const Delta& d) { return circle_distance(x, d.position) <= 1e-12; })) {
    throw KinkEvaluationError("dynamics_invariant: x lies on a kink");
  }
  const double c = p.central_charge();
  const double U = wave.flow(x);
  const double u1 = wave.u.d1(x);
  return U * (U * p.smooth(x) - c / 12.0 * wave.u.d2(x)) + c / 24.0 * u1 * u1;
}

/// Uniform representative k = A / calV^2, calV by quadrature.
inline double uniform_k_from_dynamics(const TravellingWave& wave, const MomentumField& p, double x) {
  const double A = dynamics_invariant(wave, p, x);
  const double V = calV_quadrature(wave);
  return A / (V * V);
}

enum class DriftMethod { ClosedForm, Quadrature, OdeEstimate };

inline std::string_view to_string(DriftMethod m) {
  switch (m) {
    case DriftMethod::ClosedForm: return "closed-form";
    case DriftMethod::Quadrature: return "quadrature";
    case DriftMethod::OdeEstimate: return "ode";
  }
  return "?";
}

/// v_drift = v + calV for amenable waves, v otherwise; delta_phi = v_drift T.
struct DriftResult {
  std::optional<double> calV;
  double v_drift;
  DriftMethod method;
  double delta_phi;
};

inline double phase_per_period(double v_drift, double v) {
  return v == 0.0 ? std::numeric_limits<double>::quiet_NaN() : v_drift * two_pi / std::abs(v);
}

inline DriftResult drift_by_quadrature(const TravellingWave& wave) {
  const FlowClass flow = classify_flow(wave);
  if (flow.kind == FlowKind::DegenerateRoot) {
    throw NumericDomainError("drift: degenerate root, drift velocity is not determined");
  }
  if (flow.kind == FlowKind::SimpleRoots) {
    return {std::nullopt, wave.v, DriftMethod::Quadrature, phase_per_period(wave.v, wave.v)};
  }
  const double V = QuadratureUniformizer(wave).calV();
  return {V, wave.v + V, DriftMethod::Quadrature, phase_per_period(wave.v + V, wave.v)};
}

inline DriftResult drift_by_ode(const TravellingWave& wave, double x0, double t_max, double dt,
                                double tail_fraction = 0.5) {
  const Trajectory traj = integrate_particle(wave, x0, t_max, dt);
  const double vd = drift_estimate(traj, tail_fraction);
  return {std::nullopt, vd, DriftMethod::OdeEstimate, phase_per_period(vd, wave.v)};
}

}  // namespace peakonlab
