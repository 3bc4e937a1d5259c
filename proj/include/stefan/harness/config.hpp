#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "../stepper.hpp"

namespace stefan::harness {

inline constexpr const char* kVersion = "stefan 1.0.0";

/// Everything a run, sweep or study reads from its configuration file.
struct RunConfig {
  SolverConfig solver;
  DataSpec data;
  int snapshot_every = 40;   // steps between stored snapshots
  int interface_every = 10;  // snapshots between interface_t*.csv files
  bool svg = true;
  bool allow_incompatible = false;
  double compat_tol = 1e-6;
  int threads = 1;
  std::vector<double> sigma_ladder;  // empty: 0.1 halved down to 1e-4, then 0
  std::vector<double> kappa_ladder{0.2, 0.1, 0.05, 0.025};

  void validate() const {
    solver.validate();
    data.validate();
    if (solver.mode == Mode::classical && solver.sigma != 0.0)
      throw Error(ErrorKind::configuration, "classical mode has sigma = 0; use mode = surface_tension");
    if (data.datum == Datum::sigma && data.h0_amplitude != 0.0)
      throw Error(ErrorKind::configuration, "the sigma datum is built on a flat interface; set h0_amplitude = 0");
    if (snapshot_every < 1) throw Error(ErrorKind::configuration, "snapshot_every must be >= 1");
    if (interface_every < 1) throw Error(ErrorKind::configuration, "interface_every must be >= 1");
    if (solver.steps() % snapshot_every != 0)
      throw Error(ErrorKind::configuration, "t_end / dt must be a multiple of snapshot_every");
    if (threads < 1) throw Error(ErrorKind::configuration, "threads must be >= 1");
    if (!(compat_tol > 0.0)) throw Error(ErrorKind::configuration, "compat_tol must be positive");
  }

  /// The sigma ladder in use (strictly decreasing, ending at 0).
  std::vector<double> sigmas() const {
    if (!sigma_ladder.empty()) return sigma_ladder;
    std::vector<double> out;
    for (double s = 0.1; s > 1e-4 * (1 + 1e-9); s *= 0.5) out.push_back(s);
    out.push_back(1e-4);
    out.push_back(0.0);
    return out;
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw Error(ErrorKind::configuration, "key '" + key + "': not a number: '" + v + "'");
  }
}

inline int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw Error(ErrorKind::configuration, "key '" + key + "': not an integer: '" + v + "'");
  return static_cast<int>(x);
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw Error(ErrorKind::configuration, "key '" + key + "': not a boolean: '" + v + "'");
}

inline std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, trim(item)));
  for (std::size_t i = 1; i < out.size(); ++i)
    if (!(out[i] < out[i - 1])) throw Error(ErrorKind::configuration, "key '" + key + "': ladder must decrease");
  return out;
}

inline std::string join(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(17);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  return os.str();
}

}  // namespace detail

/// Applies one key=value pair. Unknown keys are configuration errors.
inline void apply(RunConfig& c, const std::string& key, const std::string& value) {
  using namespace detail;
  SolverConfig& s = c.solver;
  DataSpec& d = c.data;
  int nx = s.grid.nx(), ny = s.grid.ny();
  if (key == "nx") nx = to_int(key, value);
  else if (key == "ny") ny = to_int(key, value);
  else if (key == "mode") s.mode = parse_mode(value);
  else if (key == "sigma") s.sigma = d.sigma = to_double(key, value);
  else if (key == "kappa") s.kappa = to_double(key, value);
  else if (key == "dt") s.dt = to_double(key, value);
  else if (key == "t_end") s.t_end = to_double(key, value);
  else if (key == "cfl") s.cfl = to_double(key, value);
  else if (key == "taylor_delta") s.taylor_delta = to_double(key, value);
  else if (key == "taylor_grace_steps") s.taylor_grace_steps = to_int(key, value);
  else if (key == "graph_bound") s.graph_bound = to_double(key, value);
  else if (key == "datum") d.datum = parse_datum(value);
  else if (key == "alpha") d.alpha = to_double(key, value);
  else if (key == "eps_slab") d.eps_slab = to_double(key, value);
  else if (key == "taper_end") d.taper_end = to_double(key, value);
  else if (key == "b_amplitude") d.b_amplitude = to_double(key, value);
  else if (key == "b_mode") d.b_mode = to_int(key, value);
  else if (key == "h0_amplitude") d.h0_amplitude = to_double(key, value);
  else if (key == "h0_mode") d.h0_mode = to_int(key, value);
  else if (key == "snapshot_every") c.snapshot_every = to_int(key, value);
  else if (key == "interface_every") c.interface_every = to_int(key, value);
  else if (key == "svg") c.svg = to_bool(key, value);
  else if (key == "allow_incompatible") c.allow_incompatible = to_bool(key, value);
  else if (key == "compat_tol") c.compat_tol = to_double(key, value);
  else if (key == "threads") c.threads = to_int(key, value);
  else if (key == "sigma_ladder") c.sigma_ladder = to_list(key, value);
  else if (key == "kappa_ladder") c.kappa_ladder = to_list(key, value);
  else throw Error(ErrorKind::configuration, "unknown key '" + key + "'");
  if (nx != s.grid.nx() || ny != s.grid.ny()) {
    try {
      s.grid = Grid(nx, ny);
    } catch (const Error& e) {
      throw Error(ErrorKind::configuration, e.what());
    }
  }
}

/// Parses "key = value" lines; '#' starts a comment. Repeated keys are errors.
inline RunConfig parse_config(std::istream& in, RunConfig base = {}) {
  std::map<std::string, int> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorKind::configuration, "line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq)), value = detail::trim(line.substr(eq + 1));
    if (seen.count(key))
      throw Error(ErrorKind::configuration, "line " + std::to_string(lineno) + ": repeated key '" + key + "'");
    seen[key] = lineno;
    apply(base, key, value);
  }
  return base;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::configuration, "cannot read config '" + path + "'");
  return parse_config(in);
}

/// Applies "key=value" overrides in order.
inline void apply_overrides(RunConfig& c, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::configuration, "override '" + o + "' is not key=value");
    apply(c, detail::trim(o.substr(0, eq)), detail::trim(o.substr(eq + 1)));
  }
}

/// Full snapshot of the configuration, every key present.
inline nlohmann::ordered_json to_json(const RunConfig& c) {
  const auto& s = c.solver;
  const auto& d = c.data;
  nlohmann::ordered_json j;
  j["nx"] = s.grid.nx();
  j["ny"] = s.grid.ny();
  j["mode"] = to_string(s.mode);
  j["sigma"] = s.sigma;
  j["kappa"] = s.kappa;
  j["dt"] = s.dt;
  j["t_end"] = s.t_end;
  j["cfl"] = s.cfl;
  j["taylor_delta"] = s.taylor_delta;
  j["taylor_grace_steps"] = s.taylor_grace_steps;
  j["graph_bound"] = s.graph_bound;
  j["datum"] = to_string(d.datum);
  j["alpha"] = d.alpha;
  j["eps_slab"] = d.eps_slab;
  j["taper_end"] = d.taper_end;
  j["b_amplitude"] = d.b_amplitude;
  j["b_mode"] = d.b_mode;
  j["h0_amplitude"] = d.h0_amplitude;
  j["h0_mode"] = d.h0_mode;
  j["snapshot_every"] = c.snapshot_every;
  j["interface_every"] = c.interface_every;
  j["svg"] = c.svg;
  j["allow_incompatible"] = c.allow_incompatible;
  j["compat_tol"] = c.compat_tol;
  j["threads"] = c.threads;
  j["sigma_ladder"] = detail::join(c.sigmas());
  j["kappa_ladder"] = detail::join(c.kappa_ladder);
  return j;
}

}  // namespace stefan::harness
