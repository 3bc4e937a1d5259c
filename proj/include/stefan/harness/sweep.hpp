#pragma once

#include <atomic>
#include <thread>

#include "run.hpp"

namespace stefan::harness {

struct SweepPoint {
  double param = 0.0;
  RunResult run;
  double distance = std::numeric_limits<double>::quiet_NaN();  // mixed C-norm to the reference point
  double E_final = std::numeric_limits<double>::quiet_NaN();    // E_sigma or E_kappa at the last frame
  double E_initial = std::numeric_limits<double>::quiet_NaN();
  double E_sup = std::numeric_limits<double>::quiet_NaN();
  double robin_trace = std::numeric_limits<double>::quiet_NaN();  // sup_t max |q| on Gamma
};

struct SweepResult {
  std::string kind;  // "sigma" or "kappa"
  std::vector<SweepPoint> points;
  std::vector<double> consecutive;  // distances between neighbouring points
  double exponent = std::numeric_limits<double>::quiet_NaN();        // fit of distance ~ param^p
  double trace_exponent = std::numeric_limits<double>::quiet_NaN();  // fit of robin_trace ~ kappa^p
  bool monotone = false;        // distances nonincreasing along the ladder
  bool consecutive_decreasing = false;
  bool same_horizon = false;    // every point reached t_end
  bool uniform_bound = false;   // sup E_kappa <= 3 E_kappa(0) at every point
  std::string status = "completed";
  int exit_code = exit_completed;
};

/// Least-squares slope of log y against log x over positive finite pairs.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(y[i])) continue;
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a, sy += b, sxx += a * a, sxy += a * b;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Runs independent configurations on up to `threads` workers; results keep input order.
inline std::vector<RunResult> run_all(const std::vector<RunConfig>& cfgs, int threads) {
  for (const auto& c : cfgs) c.validate();
  std::vector<RunResult> out(cfgs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < cfgs.size();) out[k] = run_simulation(cfgs[k]);
  };
  const int n = std::max(1, std::min<int>(threads, static_cast<int>(cfgs.size())));
  std::vector<std::thread> pool;
  for (int i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  return out;
}

namespace detail {

inline double distance_or_nan(const RunResult& a, const RunResult& b) {
  if (!a.completed() || !b.completed()) return std::numeric_limits<double>::quiet_NaN();
  return mixed_cnorm(a.traj, b.traj);
}

inline void finish(SweepResult& s) {
  for (const auto& p : s.points) {
    if (p.run.exit_code == exit_aborted) {
      s.status = "partial";
      s.exit_code = exit_aborted;
    } else if (p.run.exit_code == exit_taylor_flag && s.exit_code == exit_completed) {
      s.status = "partial";
      s.exit_code = exit_taylor_flag;
    }
  }
  s.same_horizon = true;
  for (const auto& p : s.points)
    s.same_horizon = s.same_horizon && p.run.completed() &&
                     std::abs(p.run.t_final - p.run.config.solver.t_end) <= 1e-12 * p.run.config.solver.t_end;
}

}  // namespace detail

/// Sigma ladder with well-prepared data; distances are to the sigma = 0 run.
inline SweepResult sweep_sigma(const RunConfig& base) {
  SweepResult s;
  s.kind = "sigma";
  const auto ladder = base.sigmas();
  if (ladder.empty() || ladder.back() != 0.0)
    throw Error(ErrorKind::configuration, "sigma ladder must end at 0");
  std::vector<RunConfig> cfgs;
  for (double sigma : ladder) {
    RunConfig c = base;
    c.data.datum = Datum::sigma;
    c.data.sigma = c.solver.sigma = sigma;
    c.solver.mode = sigma > 0.0 ? Mode::surface_tension : Mode::classical;
    cfgs.push_back(c);
  }
  auto runs = run_all(cfgs, base.threads);
  const RunResult& ref = runs.back();
  for (std::size_t k = 0; k < runs.size(); ++k) {
    SweepPoint p;
    p.param = ladder[k];
    p.distance = detail::distance_or_nan(runs[k], ref);
    if (!runs[k].energies.empty()) {
      p.E_initial = runs[k].energies.front().E_sigma;
      p.E_final = runs[k].energies.back().E_sigma;
      p.E_sup = 0.0;
      for (const auto& e : runs[k].energies) p.E_sup = std::max(p.E_sup, e.E_sigma);
    }
    p.run = std::move(runs[k]);
    s.points.push_back(std::move(p));
  }
  std::vector<double> x, y;
  s.monotone = true;
  for (std::size_t k = 0; k + 1 < s.points.size(); ++k) {
    x.push_back(s.points[k].param);
    y.push_back(s.points[k].distance);
    if (k > 0) s.monotone = s.monotone && s.points[k].distance <= s.points[k - 1].distance;
    s.consecutive.push_back(detail::distance_or_nan(s.points[k].run, s.points[k + 1].run));
  }
  s.monotone = s.monotone && s.points.back().distance == 0.0;
  s.exponent = loglog_slope(x, y);
  detail::finish(s);
  return s;
}

/// Kappa ladder on the configured datum; distances are to the smallest kappa.
inline SweepResult sweep_kappa(const RunConfig& base) {
  SweepResult s;
  s.kind = "kappa";
  const auto& ladder = base.kappa_ladder;
  if (ladder.size() < 2) throw Error(ErrorKind::configuration, "kappa ladder needs two points");
  std::vector<RunConfig> cfgs;
  for (double k : ladder) {
    RunConfig c = base;
    c.solver.mode = Mode::kappa;
    c.solver.kappa = k;
    c.solver.sigma = c.data.sigma = 0.0;
    cfgs.push_back(c);
  }
  auto runs = run_all(cfgs, base.threads);
  s.uniform_bound = true;
  std::vector<double> ks, traces, x, y;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    SweepPoint p;
    p.param = ladder[k];
    p.distance = detail::distance_or_nan(runs[k], runs.back());
    if (!runs[k].energies.empty()) {
      p.E_initial = runs[k].energies.front().E_kappa;
      p.E_final = runs[k].energies.back().E_kappa;
      p.E_sup = 0.0;
      for (const auto& e : runs[k].energies) p.E_sup = std::max(p.E_sup, e.E_kappa);
    }
    s.uniform_bound = s.uniform_bound && p.E_sup <= 3.0 * p.E_initial;
    p.robin_trace = 0.0;
    for (double q : runs[k].robin_trace) p.robin_trace = std::max(p.robin_trace, q);
    ks.push_back(p.param);
    traces.push_back(p.robin_trace);
    if (k + 1 < runs.size()) {
      x.push_back(p.param);
      y.push_back(p.distance);
    }
    p.run = std::move(runs[k]);
    s.points.push_back(std::move(p));
  }
  s.consecutive_decreasing = true;
  for (std::size_t k = 0; k + 1 < s.points.size(); ++k) {
    s.consecutive.push_back(detail::distance_or_nan(s.points[k].run, s.points[k + 1].run));
    if (k > 0) s.consecutive_decreasing = s.consecutive_decreasing && s.consecutive[k] < s.consecutive[k - 1];
  }
  s.monotone = true;
  for (std::size_t k = 1; k + 1 < s.points.size(); ++k)
    s.monotone = s.monotone && s.points[k].distance <= s.points[k - 1].distance;
  s.exponent = loglog_slope(x, y);
  s.trace_exponent = loglog_slope(ks, traces);
  detail::finish(s);
  return s;
}

inline std::string sweep_csv(const SweepResult& s) {
  std::string out = s.kind + ",status,t_final,distance,consecutive,E_initial,E_sup,E_final,robin_trace\n";
  char buf[512];
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    const auto& p = s.points[k];
    const double cons = k < s.consecutive.size() ? s.consecutive[k] : std::numeric_limits<double>::quiet_NaN();
    std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", p.param,
                  p.run.status.c_str(), p.run.t_final, p.distance, cons, p.E_initial, p.E_sup, p.E_final,
                  p.robin_trace);
    out += buf;
  }
  return out;
}

/// Per-point run directories, sweep.csv, sweep.json, a distance plot and the top manifest.
inline void write_sweep(const SweepResult& s, const RunConfig& base, const fs::path& dir, double wall) {
  fs::create_directories(dir);
  std::vector<std::string> art;
  for (std::size_t k = 0; k < s.points.size(); ++k) {
    char name[64];
    std::snprintf(name, sizeof name, "point_%02zu_%s_%g", k, s.kind.c_str(), s.points[k].param);
    write_run(s.points[k].run, dir / name);
    art.push_back(std::string(name) + "/manifest.json");
  }
  write_text(dir / "sweep.csv", sweep_csv(s));
  art.push_back("sweep.csv");
  nlohmann::ordered_json j;
  j["kind"] = s.kind;
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(); };
  for (const auto& p : s.points)
    j["points"].push_back({{"param", p.param}, {"status", p.run.status}, {"distance", num(p.distance)},
                           {"E_initial", num(p.E_initial)}, {"E_sup", num(p.E_sup)}, {"E_final", num(p.E_final)},
                           {"robin_trace", num(p.robin_trace)}});
  for (double d : s.consecutive) j["consecutive"].push_back(num(d));
  j["fitted_exponent"] = num(s.exponent);
  if (s.kind == "kappa") {
    j["trace_exponent"] = num(s.trace_exponent);
    j["uniform_bound"] = s.uniform_bound;
    j["consecutive_decreasing"] = s.consecutive_decreasing;
  }
  j["monotone"] = s.monotone;
  j["same_horizon"] = s.same_horizon;
  write_text(dir / "sweep.json", j.dump(2) + "\n");
  art.push_back("sweep.json");
  if (base.svg) {
    Series d{"distance", {}, {}};
    for (const auto& p : s.points)
      if (p.param > 0.0) {
        d.x.push_back(std::log10(p.param));
        d.y.push_back(p.distance);
      }
    write_text(dir / "distance.svg", line_plot_svg("mixed C-norm distance vs log10 " + s.kind, {d}, true));
    art.push_back("distance.svg");
  }
  auto m = manifest_json(base, "sweep-" + s.kind, s.status, s.exit_code, wall, art);
  write_text(dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace stefan::harness
