#pragma once

// Command-line front end. Everything lives in this header so the test suite
// can drive run_cli() in-process.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include "peakonlab/peakonlab.hpp"

namespace peakonlab::cli {

/// Raised for unwritable outputs; maps to exit status 1.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for malformed flag values that CLI11 cannot check itself.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int exit_ok = 0;
inline constexpr int exit_io = 1;
inline constexpr int exit_usage = 2;
inline constexpr int exit_domain = 3;

inline constexpr std::string_view scan_header = "m,v_over_c,class,k_over_c,calV,v_drift,trace";

/// All floating output goes through here: 12 significant digits.
inline std::string num(double x) { return fmt::format("{:.12g}", x); }

inline double parse_double(std::string_view s, std::string_view what) {
  double x = 0.0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, x);
  if (ec != std::errc() || ptr != end) throw UsageError(fmt::format("{}: '{}' is not a number", what, s));
  return x;
}

inline std::pair<double, double> parse_range(std::string_view s, std::string_view what) {
  const auto colon = s.find(':');
  if (colon == std::string_view::npos) throw UsageError(fmt::format("{}: expected a:b, got '{}'", what, s));
  return {parse_double(s.substr(0, colon), what), parse_double(s.substr(colon + 1), what)};
}

inline std::pair<int, int> parse_resolution(std::string_view s) {
  const auto x = s.find_first_of("xX");
  if (x == std::string_view::npos) throw UsageError(fmt::format("--res: expected NxM, got '{}'", s));
  auto parse_int = [&](std::string_view part) {
    int n = 0;
    const char* end = part.data() + part.size();
    auto [ptr, ec] = std::from_chars(part.data(), end, n);
    if (ec != std::errc() || ptr != end) throw UsageError(fmt::format("--res: '{}' is not an integer", part));
    return n;
  };
  return {parse_int(s.substr(0, x)), parse_int(s.substr(x + 1))};
}

enum class Format { Csv, Json };

inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::Csv;
  if (s == "json") return Format::Json;
  throw UsageError("--format must be csv or json");
}

struct ScanConfig {
  double m_min = 0.2, m_max = 2.0;
  double v_over_c_min = -0.02, v_over_c_max = 0.16;
  int resolution_m = 200, resolution_v = 200;
  double c = 1.0;
  double boundary_tol = 1e-6;
  std::string output_path;  // empty: standard output
  Format format = Format::Csv;

  void validate() const {
    if (!(m_min > 0.0)) throw UsageError("scan: m_min must be positive");
    if (m_max > max_closed_form_mass) throw UsageError("scan: m_max must not exceed 50");
    if (!(m_min <= m_max) || !(v_over_c_min <= v_over_c_max)) throw UsageError("scan: ranges must satisfy min <= max");
    if (resolution_m < 2 || resolution_v < 2) throw UsageError("scan: resolutions must be >= 2");
    if (c == 0.0 || !std::isfinite(c)) throw UsageError("scan: c must be non-zero");
  }

  double m_at(int i) const { return m_min + (m_max - m_min) * i / (resolution_m - 1); }
  double v_over_c_at(int j) const { return v_over_c_min + (v_over_c_max - v_over_c_min) * j / (resolution_v - 1); }
};

struct ScanRow {
  double m = 0.0;
  double v_over_c = 0.0;
  OrbitKind kind = OrbitKind::NonAmenable;
  std::optional<double> k_over_c;
  std::optional<double> calV;
  double v_drift = 0.0;
  double trace = 0.0;
};

inline ScanRow scan_cell(double m, double v_over_c, double c, double boundary_tol) {
  const auto p = PeakonParams::from_ratio(m, v_over_c, c);
  const OrbitClass orbit = classify_peakon(p, boundary_tol);
  const DriftResult drift = drift_closed_form(p, boundary_tol);
  const auto ab = peakon_AB(p);
  return {m, v_over_c, orbit.kind, orbit.k_over_c, drift.calV, drift.v_drift, trace_delta_comb(ab.A, ab.B)};
}

/// Worker count: hardware concurrency, capped by PEAKONLAB_THREADS when set.
inline unsigned scan_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("PEAKONLAB_THREADS")) {
    unsigned cap = 0;
    const std::string_view s(env);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), cap);
    if (ec == std::errc() && ptr == s.data() + s.size() && cap > 0) n = std::min(n, cap);
  }
  return n;
}

/// Rows in m-major order whatever order the workers finish in.
inline std::vector<ScanRow> run_scan(const ScanConfig& cfg, unsigned threads) {
  cfg.validate();
  const int nm = cfg.resolution_m, nv = cfg.resolution_v;
  std::vector<ScanRow> rows(static_cast<std::size_t>(nm) * nv);
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (int i = next++; i < nm; i = next++) {
      try {
        for (int j = 0; j < nv; ++j) {
          rows[static_cast<std::size_t>(i) * nv + j] = scan_cell(cfg.m_at(i), cfg.v_over_c_at(j), cfg.c, cfg.boundary_tol);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  threads = std::clamp(threads, 1u, static_cast<unsigned>(nm));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return rows;
}

inline std::string optional_num(const std::optional<double>& x) { return x ? num(*x) : std::string(); }

inline void write_scan_csv(std::ostream& os, const std::vector<ScanRow>& rows) {
  os << scan_header << '\n';
  for (const auto& r : rows) {
    os << num(r.m) << ',' << num(r.v_over_c) << ',' << to_string(r.kind) << ',' << optional_num(r.k_over_c) << ','
       << optional_num(r.calV) << ',' << num(r.v_drift) << ',' << num(r.trace) << '\n';
  }
}

/// JSON numbers carry the same 12 significant digits as the CSV.
inline nlohmann::ordered_json json_num(double x) {
  if (!std::isfinite(x)) return nullptr;
  return std::stod(num(x));
}

inline nlohmann::ordered_json json_num(const std::optional<double>& x) { return x ? json_num(*x) : nullptr; }

inline void write_scan_json(std::ostream& os, const std::vector<ScanRow>& rows) {
  auto out = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    nlohmann::ordered_json rec;
    rec["m"] = json_num(r.m);
    rec["v_over_c"] = json_num(r.v_over_c);
    rec["class"] = std::string(to_string(r.kind));
    rec["k_over_c"] = json_num(r.k_over_c);
    rec["calV"] = json_num(r.calV);
    rec["v_drift"] = json_num(r.v_drift);
    rec["trace"] = json_num(r.trace);
    out.push_back(std::move(rec));
  }
  os << out.dump(1) << '\n';
}

/// A table with named columns, emitted as CSV or as an array of records.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void write(std::ostream& os, Format format) const {
    if (format == Format::Csv) {
      for (std::size_t i = 0; i < columns.size(); ++i) os << (i ? "," : "") << columns[i];
      os << '\n';
      for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << num(row[i]);
        os << '\n';
      }
      return;
    }
    auto out = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
      nlohmann::ordered_json rec;
      for (std::size_t i = 0; i < row.size(); ++i) rec[columns[i]] = json_num(row[i]);
      out.push_back(std::move(rec));
    }
    os << out.dump(1) << '\n';
  }
};

/// Writes through `emit` to `path`, or to `out` when the path is empty.
template <class Emit>
void write_output(const std::string& path, std::ostream& out, Emit&& emit) {
  if (path.empty()) {
    emit(out);
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError(fmt::format("cannot open '{}' for writing", path));
  emit(file);
  file.flush();
  if (!file) throw IoError(fmt::format("write to '{}' failed", path));
}

struct PointArgs {
  double m = 0.0;
  double v_over_c = 0.0;
  double c = 1.0;

  PeakonParams params() const {
    if (c == 0.0) throw UsageError("--c must be non-zero");
    const auto p = PeakonParams::from_ratio(m, v_over_c, c);
    p.validate();
    return p;
  }
};

inline void add_point_options(CLI::App* cmd, PointArgs& a) {
  cmd->add_option("--m", a.m, "mass scale m = 1/l")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--v-over-c", a.v_over_c, "wave speed in units of c")->required();
  cmd->add_option("--c", a.c, "central charge (non-zero)")->capture_default_str();
}

inline void cmd_classify(const PointArgs& a, double boundary_tol, std::ostream& out) {
  const auto p = a.params();
  const OrbitClass orbit = classify_peakon(p, boundary_tol);
  const auto ab = peakon_AB(p);
  const double tr = trace_delta_comb(ab.A, ab.B);
  out << "class: " << to_string(orbit.kind) << '\n';
  out << "m: " << num(p.m) << '\n';
  out << "v_over_c: " << num(p.v_over_c()) << '\n';
  out << "c: " << num(p.c) << '\n';
  out << "amenability_threshold: " << num(amenability_threshold(p.m)) << '\n';
  out << "hyperbolicity_threshold: " << num(hyperbolicity_threshold(p.m)) << '\n';
  if (orbit.k_over_c) {
    out << "k: " << num(*orbit.k_over_c * p.c) << '\n';
    out << "k_over_c: " << num(*orbit.k_over_c) << '\n';
  }
  if (orbit.winding) out << "winding: " << *orbit.winding << '\n';
  out << "A: " << num(ab.A) << '\n';
  out << "B: " << num(ab.B) << '\n';
  out << "trace: " << num(tr) << '\n';
}

struct DriftArgs {
  std::string method = "closed-form";
  double x0 = 0.0;
  std::optional<double> t_max;
  double dt = 1e-2;
  double boundary_tol = 1e-6;
};

inline void cmd_drift(const PointArgs& a, const DriftArgs& d, std::ostream& out) {
  const auto p = a.params();
  const TravellingWave wave = peakon_wave(p);
  DriftResult result{};
  double t_max = 0.0;
  if (d.method == "closed-form") {
    result = drift_closed_form(p, d.boundary_tol);
  } else if (d.method == "quadrature") {
    result = drift_by_quadrature(wave);
  } else if (d.method == "ode") {
    if (!(d.dt > 0.0)) throw UsageError("--dt must be positive");
    // the estimate needs at least 20 wave periods
    t_max = d.t_max.value_or(std::max(5000.0, 21.0 * wave.period()));
    result = drift_by_ode(wave, d.x0, t_max, d.dt);
  } else {
    throw UsageError("--method must be closed-form, quadrature or ode");
  }
  out << "method: " << to_string(result.method) << '\n';
  out << "v: " << num(p.v) << '\n';
  out << "v_drift: " << num(result.v_drift) << '\n';
  if (result.calV) out << "calV: " << num(*result.calV) << '\n';
  out << "delta_phi: " << num(result.delta_phi) << '\n';
  if (result.method == DriftMethod::OdeEstimate) {
    out << "x0: " << num(d.x0) << '\n';
    out << "dt: " << num(d.dt) << '\n';
    out << "t_max: " << num(t_max) << '\n';
    out << "integrator: rk4, tail least-squares over the last half\n";
  } else if (!result.calV) {
    out << "note: u - v has roots, particles lock to the wave and v_drift = v\n";
  }
}

struct TrajectoryArgs {
  std::string mode = "ode";
  std::vector<double> x0;
  double t_max = 100.0;
  double dt = 1e-2;
  int stride = 1;
  std::string output;
  std::string format = "csv";
};

/// Columns t, x_0 .. x_{n-1} (one per initial position) and the reference vt.
inline Table trajectory_table(const PointArgs& a, const TrajectoryArgs& args) {
  const auto p = a.params();
  if (!(args.dt > 0.0)) throw UsageError("--dt must be positive");
  if (!(args.t_max >= 0.0)) throw UsageError("--t-max must be non-negative");
  if (args.stride < 1) throw UsageError("--stride must be >= 1");
  std::vector<double> x0 = args.x0.empty() ? std::vector<double>{0.0} : args.x0;
  const TravellingWave wave = peakon_wave(p);

  Table table;
  table.columns.push_back("t");
  for (std::size_t i = 0; i < x0.size(); ++i) table.columns.push_back(fmt::format("x_{}", i));
  table.columns.push_back("vt");

  std::vector<Trajectory> paths;
  if (args.mode == "ode") {
    for (double x : x0) paths.push_back(integrate_particle(wave, x, args.t_max, args.dt));
  } else if (args.mode == "exact") {
    if (!is_amenable(p)) {
      throw NotAmenableError("exact trajectories need an amenable peakon (u - v has roots here); use --mode ode");
    }
    const CircleLift g0 = uniformizer(p);
    const CircleLift g0_inv = g0.inverse();
    const double V = calV_closed(p);
    // same time grid as integrate_particle, so both modes line up row for row
    const auto steps = static_cast<std::size_t>(std::ceil(args.t_max / args.dt - 1e-9));
    for (double x : x0) {
      Trajectory path;
      path.x0 = x;
      path.dt = args.dt;
      const double phase = g0_inv(x);
      for (std::size_t k = 0; k <= steps; ++k) {
        const double t = k == steps ? args.t_max : static_cast<double>(k) * args.dt;
        path.times.push_back(t);
        path.positions.push_back(t == 0.0 ? x : g0(phase + V * t) + p.v * t);
      }
      paths.push_back(std::move(path));
    }
  } else {
    throw UsageError("--mode must be exact or ode");
  }

  const std::size_t n = paths.front().times.size();
  for (std::size_t k = 0; k < n; ++k) {
    if (k % static_cast<std::size_t>(args.stride) != 0 && k + 1 != n) continue;
    const double t = paths.front().times[k];
    std::vector<double> row{t};
    for (const auto& path : paths) row.push_back(path.positions[k]);
    row.push_back(p.v * t);
    table.rows.push_back(std::move(row));
  }
  return table;
}

struct MonodromyArgs {
  std::string method = "analytic";
  double max_step = 1e-4;
};

inline void cmd_monodromy(const PointArgs& a, const MonodromyArgs& args, std::ostream& out) {
  const auto p = a.params();
  const auto ab = peakon_AB(p);
  out << "method: " << args.method << '\n';
  out << "A: " << num(ab.A) << '\n';
  out << "B: " << num(ab.B) << '\n';
  double tr = 0.0;
  if (args.method == "analytic") {
    tr = trace_delta_comb(ab.A, ab.B);
    out << "trace: " << num(tr) << '\n';
  } else if (args.method == "transfer-matrix") {
    if (!(args.max_step > 0.0)) throw UsageError("--max-step must be positive");
    const MonodromyMatrix M = monodromy_numeric(peakon_momentum(p), p.c, args.max_step);
    tr = M.trace();
    out << "trace: " << num(tr) << '\n';
    out << "det: " << num(M.determinant()) << '\n';
  } else {
    throw UsageError("--method must be analytic or transfer-matrix");
  }
  if (tr < -2.0) {
    out << "k: non-amenable (Tr < -2)\n";
  } else {
    const double k = k_from_trace(tr, p.c);
    out << "k: " << num(k) << '\n';
    out << "k_over_c: " << num(k / p.c) << '\n';
  }
}

struct ReconstructArgs {
  std::string method = "closed-form";
  int samples = 64;
  std::string output;
  std::string format = "csv";
};

/// g0^-1 sampled at x = 2pi i/N, i = 0..N, together with (g0^-1)' = calV/(u - v)
/// and the uniform representative it produces.
inline Table reconstruct_table(const PointArgs& a, const ReconstructArgs& args) {
  const auto p = a.params();
  if (args.samples < 1) throw UsageError("--samples must be >= 1");
  const TravellingWave wave = peakon_wave(p);
  Table table;
  table.columns = {"x", "g0_inv", "g0_inv_prime"};
  if (args.method == "closed-form") {
    const CircleLift lift = g0_inverse_lift(p);
    for (int i = 0; i <= args.samples; ++i) {
      const double x = two_pi * i / args.samples;
      table.rows.push_back({x, lift(x), lift.d1(x)});
    }
  } else if (args.method == "quadrature") {
    const QuadratureUniformizer q(wave);
    for (int i = 0; i <= args.samples; ++i) {
      const double x = two_pi * i / args.samples;
      table.rows.push_back({x, q.inverse(x), q.calV() / wave.flow(x)});
    }
  } else {
    throw UsageError("--method must be closed-form or quadrature");
  }
  return table;
}

inline std::unique_ptr<CLI::App> make_app() {
  auto app = std::make_unique<CLI::App>("Periodic peakons: orbit classification, drift, trajectories, monodromy",
                                        "peakonlab");
  app->require_subcommand(1);
  return app;
}

/// Parses argv and runs one subcommand. Returns the process exit status.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  auto app = make_app();

  PointArgs point;
  double boundary_tol = 1e-6;
  auto* classify = app->add_subcommand("classify", "orbit class, thresholds, k and Tr(M)");
  add_point_options(classify, point);
  classify->add_option("--boundary-tol", boundary_tol, "v/c distance reported as the exceptional orbit")
      ->capture_default_str();

  DriftArgs drift;
  auto* drift_cmd = app->add_subcommand("drift", "drift velocity");
  add_point_options(drift_cmd, point);
  drift_cmd->add_option("--method", drift.method, "closed-form | quadrature | ode")->capture_default_str();
  drift_cmd->add_option("--x0", drift.x0, "initial position (ode)");
  drift_cmd->add_option("--t-max", drift.t_max, "integration time (ode, default max(5000, 21 T))");
  drift_cmd->add_option("--dt", drift.dt, "RK4 step (ode)")->capture_default_str();
  drift_cmd->add_option("--boundary-tol", drift.boundary_tol)->capture_default_str();

  ScanConfig scan;
  std::string m_range, v_range, res, scan_format = "csv";
  auto* scan_cmd = app->add_subcommand("scan", "parameter-plane scan");
  scan_cmd->add_option("--m-range", m_range, "a:b (default 0.2:2)");
  scan_cmd->add_option("--v-range", v_range, "v/c range a:b (default -0.02:0.16)");
  scan_cmd->add_option("--res", res, "NxM grid (default 200x200)");
  scan_cmd->add_option("--c", scan.c)->capture_default_str();
  scan_cmd->add_option("--boundary-tol", scan.boundary_tol)->capture_default_str();
  scan_cmd->add_option("--output", scan.output_path, "output file (default stdout)");
  scan_cmd->add_option("--format", scan_format, "csv | json")->capture_default_str();

  TrajectoryArgs traj;
  auto* traj_cmd = app->add_subcommand("trajectory", "particle paths x(t)");
  add_point_options(traj_cmd, point);
  traj_cmd->add_option("--mode", traj.mode, "exact | ode")->capture_default_str();
  traj_cmd->add_option("--x0", traj.x0, "initial position, repeatable")->allow_extra_args(false);
  traj_cmd->add_option("--t-max", traj.t_max)->capture_default_str();
  traj_cmd->add_option("--dt", traj.dt)->capture_default_str();
  traj_cmd->add_option("--stride", traj.stride, "write every n-th step")->capture_default_str();
  traj_cmd->add_option("--output", traj.output);
  traj_cmd->add_option("--format", traj.format)->capture_default_str();

  MonodromyArgs mono;
  auto* mono_cmd = app->add_subcommand("monodromy", "Hill monodromy trace and k");
  add_point_options(mono_cmd, point);
  mono_cmd->add_option("--method", mono.method, "analytic | transfer-matrix")->capture_default_str();
  mono_cmd->add_option("--max-step", mono.max_step)->capture_default_str();

  ReconstructArgs rec;
  auto* rec_cmd = app->add_subcommand("reconstruct", "table of g0^-1 samples");
  add_point_options(rec_cmd, point);
  rec_cmd->add_option("--method", rec.method, "closed-form | quadrature")->capture_default_str();
  rec_cmd->add_option("--samples", rec.samples)->capture_default_str();
  rec_cmd->add_option("--output", rec.output);
  rec_cmd->add_option("--format", rec.format)->capture_default_str();

  try {
    app->parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app->exit(e, out, err);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*classify) {
      cmd_classify(point, boundary_tol, out);
    } else if (*drift_cmd) {
      cmd_drift(point, drift, out);
    } else if (*scan_cmd) {
      if (!m_range.empty()) std::tie(scan.m_min, scan.m_max) = parse_range(m_range, "--m-range");
      if (!v_range.empty()) std::tie(scan.v_over_c_min, scan.v_over_c_max) = parse_range(v_range, "--v-range");
      if (!res.empty()) std::tie(scan.resolution_m, scan.resolution_v) = parse_resolution(res);
      scan.format = parse_format(scan_format);
      const auto rows = run_scan(scan, scan_threads());
      write_output(scan.output_path, out, [&](std::ostream& os) {
        if (scan.format == Format::Csv) {
          write_scan_csv(os, rows);
        } else {
          write_scan_json(os, rows);
        }
      });
    } else if (*traj_cmd) {
      const Format f = parse_format(traj.format);
      const Table t = trajectory_table(point, traj);
      write_output(traj.output, out, [&](std::ostream& os) { t.write(os, f); });
    } else if (*mono_cmd) {
      cmd_monodromy(point, mono, out);
    } else if (*rec_cmd) {
      const Format f = parse_format(rec.format);
      const Table t = reconstruct_table(point, rec);
      write_output(rec.output, out, [&](std::ostream& os) { t.write(os, f); });
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return exit_io;
  } catch (const NumericDomainError& e) {
    err << "error: " << e.what() << '\n';
    return exit_domain;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return exit_usage;
  }
  return exit_ok;
}

}  // namespace peakonlab::cli
