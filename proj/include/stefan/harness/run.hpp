#pragma once

#include <chrono>
#include <filesystem>

#include "../analysis.hpp"
#include "config.hpp"
#include "svg.hpp"

namespace stefan::harness {

namespace fs = std::filesystem;

/// Exit codes shared by all commands.
enum ExitCode { exit_completed = 0, exit_taylor_flag = 2, exit_aborted = 3, exit_config = 4 };

struct RunResult {
  RunConfig config;
  Trajectory traj;
  std::vector<EnergyReport> energies;      // one per frame; empty with fewer than four frames
  std::vector<IdentityReport> identities;  // one per frame
  std::vector<double> dissipation;         // one per frame, NaN where undefined
  std::vector<double> robin_trace;         // max |q| on Gamma per frame
  nlohmann::ordered_json data_report;
  std::string status = "completed";
  int exit_code = exit_completed;
  std::string message;
  double wall_seconds = 0.0;
  long steps = 0;
  double t_final = 0.0;
  double min_margin = 0.0;
  long first_flag_step = -1;

  bool completed() const { return status == "completed"; }
};

namespace detail {

inline nlohmann::ordered_json compat_json(const CompatReport& r) {
  nlohmann::ordered_json j;
  j["r_dirichlet"] = r.r_dirichlet;
  j["r_second"] = r.r_second;
  j["r_second_unsquared"] = r.r_second_unsquared;
  j["r_flat_sigma"] = r.r_flat_sigma;
  j["taylor_margin"] = r.taylor_margin;
  j["neumann_top"] = r.neumann_top;
  j["flat"] = r.flat;
  return j;
}

inline void abort_with(RunResult& r, ErrorKind kind, const std::string& what) {
  r.status = std::string("aborted:") + to_string(kind);
  r.exit_code = exit_aborted;
  r.message = what;
}

}  // namespace detail

/// Datum for a configuration: the raw pair (q0, h0) and the starting field
/// (Q0^kappa in kappa mode), with the compatibility report.
struct PreparedData {
  InitialData raw;
  Field start;
  nlohmann::ordered_json report;
  bool consistent = true;
};

inline PreparedData prepare_data(const RunConfig& c) {
  PreparedData p;
  p.raw = build_data(c.data, c.solver.grid);
  const double sigma = c.solver.mode == Mode::surface_tension ? c.solver.sigma : 0.0;
  CompatReport cr = compat_residuals(p.raw.q0, p.raw.h0, sigma);
  p.report["datum"] = detail::compat_json(cr);
  if (c.solver.mode == Mode::kappa) {
    KappaData kd = build_Q0_kappa(p.raw.q0, p.raw.h0, c.solver.kappa);
    nlohmann::ordered_json k;
    k["trace_dirichlet"] = kd.trace_dirichlet;
    k["trace_second"] = kd.trace_second;
    k["taylor_margin"] = kd.taylor_margin;
    k["h2_distance"] = interior_norm(kd.Q - p.raw.q0, 2);
    p.report["kappa_datum"] = k;
    p.consistent = kd.trace_dirichlet <= c.compat_tol && kd.trace_second <= c.compat_tol;
    p.start = std::move(kd.Q);
  } else {
    p.consistent = cr.consistent(c.compat_tol);
    p.start = p.raw.q0;
  }
  p.report["consistent"] = p.consistent;
  return p;
}

/// Runs one configuration to t_end, or until a Taylor-sign halt or an abort.
/// Configuration errors propagate; everything else is reported in the result.
inline RunResult run_simulation(const RunConfig& c) {
  c.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunResult r;
  r.config = c;
  r.traj.cfg = c.solver;
  const SolverConfig& sc = c.solver;
  const bool dissipative = sc.mode == Mode::classical;
  std::vector<double> E, D;
  try {
    PreparedData data = prepare_data(c);
    r.data_report = data.report;
    if (!data.consistent && !c.allow_incompatible) {
      detail::abort_with(r, ErrorKind::incompatible_data, "initial data fail the compatibility conditions");
    } else {
      Stepper st(sc);
      SolverState s = st.initialize(data.start, data.raw.h0, &data.raw.q0);
      r.traj.start = st.flow_derivatives(s.q, s.h, 0.0, s.kforce.get());
      r.min_margin = s.margin;
      auto record = [&](const SolverState& x) {
        r.traj.frames.push_back(snapshot(x));
        r.identities.push_back(geometric_identities(x.q, x.v, *x.bundle));
        r.robin_trace.push_back(trace(x.q).max_abs());
      };
      auto account = [&](const SolverState& x) {
        if (dissipative) {
          auto [e, d] = dissipation_terms(x.q, x.v, *x.bundle);
          E.push_back(e);
          D.push_back(d);
        }
        r.min_margin = std::min(r.min_margin, x.margin);
        if (x.taylor_flagged && r.first_flag_step < 0) r.first_flag_step = x.step;
      };
      record(s);
      account(s);
      try {
        while (s.step < sc.steps()) {
          if (r.first_flag_step >= 0 && s.step - r.first_flag_step >= sc.taylor_grace_steps) break;
          s = st.advance(s);
          account(s);
          if (s.step % c.snapshot_every == 0) record(s);
        }
      } catch (const Error& e) {
        detail::abort_with(r, e.kind(), e.what());
      }
      r.steps = s.step;
      r.t_final = s.t;
      if (r.completed() && r.first_flag_step >= 0) {
        r.status = "taylor-flag";
        r.exit_code = exit_taylor_flag;
        r.message = "Taylor sign lost at step " + std::to_string(r.first_flag_step);
      }
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::configuration) throw;
    detail::abort_with(r, e.kind(), e.what());
  }

  const std::size_t nf = r.traj.frames.size();
  r.dissipation.assign(nf, std::numeric_limits<double>::quiet_NaN());
  if (dissipative && E.size() >= 3) {
    auto defects = dissipation_defects(E, D, sc.dt);
    for (std::size_t n = 0; n < nf; ++n) {
      const long step = std::lround(r.traj.frames[n].t / sc.dt);
      if (step >= 1 && static_cast<std::size_t>(step) <= defects.size()) r.dissipation[n] = defects[step - 1];
    }
  }
  if (nf >= 4) {
    try {
      r.energies = energy_series(r.traj);
    } catch (const Error& e) {
      r.message += (r.message.empty() ? "" : "; ") + std::string("energies unavailable: ") + e.what();
    }
  }
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

/// Column order of energies.csv.
inline const std::vector<std::string>& energy_columns() {
  static const std::vector<std::string> cols = {
      "t",           "E",           "E_sigma",       "E_kappa",       "E_kappa_raw",
      "A_kappa",     "F_kappa",     "F",             "F_sigma",       "taylor_margin",
      "curl_residual", "slip_residual", "curvature_identity_error", "dissipation_residual", "ht_mean",
      "Jqy_mean", "norm_energy_ratio"};
  return cols;
}

inline std::string energies_csv(const RunResult& r) {
  std::string out;
  for (std::size_t k = 0; k < energy_columns().size(); ++k) out += (k ? "," : "") + energy_columns()[k];
  out += "\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  char buf[64];
  for (std::size_t n = 0; n < r.traj.frames.size(); ++n) {
    const bool have = n < r.energies.size();
    const EnergyReport e = have ? r.energies[n] : EnergyReport{};
    auto val = [&](double x) { return have ? x : nan; };
    const IdentityReport& id = r.identities[n];
    const std::vector<double> row = {r.traj.frames[n].t, val(e.E), val(e.E_sigma), val(e.E_kappa),
                                     val(e.E_kappa_raw), val(e.A_kappa), val(e.F_kappa), val(e.F),
                                     val(e.F_sigma), r.traj.frames[n].margin, id.curl, id.slip, id.curvature,
                                     r.dissipation[n], id.ht_mean, id.Jqy_mean, val(e.E_kappa / e.F_kappa)};
    for (std::size_t k = 0; k < row.size(); ++k) {
      std::snprintf(buf, sizeof buf, "%s%.17g", k ? "," : "", row[k]);
      out += buf;
    }
    out += "\n";
  }
  return out;
}

inline std::string interface_csv(const Snapshot& s) {
  std::string out = "x,h\n";
  char buf[64];
  const Grid& g = s.q.grid();
  for (int i = 0; i < g.nx(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", g.x(i), s.h[i]);
    out += buf;
  }
  return out;
}

inline void write_text(const fs::path& p, const std::string& text) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(ErrorKind::usage, "cannot write '" + p.string() + "'");
  f << text;
}

inline nlohmann::ordered_json manifest_json(const RunConfig& c, const std::string& kind, const std::string& status,
                                            int exit_code, double wall, const std::vector<std::string>& artifacts) {
  nlohmann::ordered_json m;
  m["command"] = kind;
  m["version"] = kVersion;
  m["config"] = to_json(c);
  m["grid"] = {{"nx", c.solver.grid.nx()}, {"ny", c.solver.grid.ny()}};
  m["mode"] = to_string(c.solver.mode);
  m["sigma"] = c.solver.sigma;
  m["kappa"] = c.solver.mode == Mode::kappa ? nlohmann::ordered_json(c.solver.kappa) : nlohmann::ordered_json();
  m["wall_seconds"] = wall;
  m["status"] = status;
  m["exit_code"] = exit_code;
  m["artifacts"] = artifacts;
  return m;
}

/// Writes energies.csv, interface_t*.csv, optional SVG plots and manifest.json into dir.
inline std::vector<std::string> write_run(const RunResult& r, const fs::path& dir) {
  fs::create_directories(dir);
  std::vector<std::string> art;
  auto put = [&](const std::string& name, const std::string& text) {
    write_text(dir / name, text);
    art.push_back(name);
  };
  put("energies.csv", energies_csv(r));
  const auto& F = r.traj.frames;
  std::vector<std::size_t> shown;
  for (std::size_t n = 0; n < F.size(); ++n)
    if (n % r.config.interface_every == 0 || n + 1 == F.size()) shown.push_back(n);
  for (std::size_t n : shown) {
    char name[64];
    std::snprintf(name, sizeof name, "interface_t%.6f.csv", F[n].t);
    put(name, interface_csv(F[n]));
  }
  if (r.config.svg && !F.empty()) {
    std::vector<double> t;
    for (const auto& s : F) t.push_back(s.t);
    auto col = [&](auto get) {
      std::vector<double> y;
      for (std::size_t n = 0; n < F.size(); ++n)
        y.push_back(n < r.energies.size() ? get(r.energies[n]) : std::numeric_limits<double>::quiet_NaN());
      return y;
    };
    std::vector<Series> es = {{"E", t, col([](const EnergyReport& e) { return e.E; })},
                              {"F", t, col([](const EnergyReport& e) { return e.F; })}};
    if (r.config.solver.mode == Mode::kappa) {
      es.push_back({"E_kappa", t, col([](const EnergyReport& e) { return e.E_kappa; })});
      es.push_back({"F_kappa", t, col([](const EnergyReport& e) { return e.F_kappa; })});
    }
    if (r.config.solver.sigma > 0.0) es.push_back({"E_sigma", t, col([](const EnergyReport& e) { return e.E_sigma; })});
    put("energies.svg", line_plot_svg("energies", es, true));
    std::vector<double> m;
    for (const auto& s : F) m.push_back(s.margin);
    put("margin.svg", line_plot_svg("Taylor margin min q_y on Gamma", {{"margin", t, m}}));
    std::vector<Series> hs;
    for (std::size_t n : shown) {
      Series s;
      char lab[32];
      std::snprintf(lab, sizeof lab, "t=%.4f", F[n].t);
      s.label = lab;
      for (int i = 0; i < F[n].h.nx(); ++i) {
        s.x.push_back(r.config.solver.grid.x(i));
        s.y.push_back(F[n].h[i]);
      }
      hs.push_back(std::move(s));
    }
    put("interface.svg", line_plot_svg("interface height h(x)", hs));
  }
  auto m = manifest_json(r.config, "run", r.status, r.exit_code, r.wall_seconds, art);
  m["message"] = r.message;
  m["steps"] = r.steps;
  m["t_final"] = r.t_final;
  m["min_taylor_margin"] = r.min_margin;
  m["first_taylor_flag_step"] = r.first_flag_step;
  m["snapshots"] = F.size();
  m["data"] = r.data_report;
  m["energy_columns"] = energy_columns();
  write_text(dir / "manifest.json", m.dump(2) + "\n");
  return art;
}

}  // namespace stefan::harness
