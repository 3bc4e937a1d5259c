#include <CLI11.hpp>
#include <iostream>

#include "stefan/harness/mms.hpp"
#include "stefan/harness/sweep.hpp"

using namespace stefan;
using namespace stefan::harness;

namespace {

struct Args {
  std::string config;
  std::string out;
  std::vector<std::string> overrides;
};

RunConfig resolve(const Args& a) {
  RunConfig c = a.config.empty() ? RunConfig{} : load_config(a.config);
  apply_overrides(c, a.overrides);
  c.validate();
  return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int config_error(const std::string& command, const Args& a, const std::string& what) {
  std::cerr << "configuration error: " << what << "\n";
  if (a.out.empty()) return exit_config;
  try {
    fs::create_directories(a.out);
    nlohmann::ordered_json m;
    m["command"] = command;
    m["version"] = kVersion;
    m["config_path"] = a.config;
    m["overrides"] = a.overrides;
    m["status"] = "aborted:configuration";
    m["exit_code"] = static_cast<int>(exit_config);
    m["message"] = what;
    m["artifacts"] = nlohmann::ordered_json::array();
    write_text(fs::path(a.out) / "manifest.json", m.dump(2) + "\n");
  } catch (const std::exception&) {
  }
  return exit_config;
}

int cmd_run(const Args& a) {
  const RunConfig c = resolve(a);
  RunResult r = run_simulation(c);
  write_run(r, a.out);
  std::printf("%s: t=%.6g steps=%ld min_margin=%.6g wall=%.2fs\n", r.status.c_str(), r.t_final, r.steps, r.min_margin,
              r.wall_seconds);
  if (!r.message.empty()) std::printf("%s\n", r.message.c_str());
  return r.exit_code;
}

void print_sweep(const SweepResult& s) {
  std::printf("%s", sweep_csv(s).c_str());
  std::printf("status=%s exponent=%.4g monotone=%d same_horizon=%d", s.status.c_str(), s.exponent, s.monotone,
              s.same_horizon);
  if (s.kind == "kappa")
    std::printf(" uniform_bound=%d consecutive_decreasing=%d trace_exponent=%.4g", s.uniform_bound,
                s.consecutive_decreasing, s.trace_exponent);
  std::printf("\n");
}

int cmd_sweep(const Args& a, bool sigma) {
  const RunConfig c = resolve(a);
  const auto t0 = std::chrono::steady_clock::now();
  SweepResult s = sigma ? sweep_sigma(c) : sweep_kappa(c);
  write_sweep(s, c, a.out, seconds_since(t0));
  print_sweep(s);
  return s.exit_code;
}

int cmd_check_data(const Args& a) {
  const RunConfig c = resolve(a);
  const auto t0 = std::chrono::steady_clock::now();
  int code = exit_completed;
  std::string status = "completed", message;
  nlohmann::ordered_json report;
  try {
    PreparedData p = prepare_data(c);
    report = p.report;
    if (!p.consistent) {
      code = exit_aborted;
      status = "aborted:incompatible-data";
    } else if (taylor_margin(p.start) <= 0.0) {
      code = exit_taylor_flag;
      status = "taylor-flag";
    }
  } catch (const Error& e) {
    code = exit_aborted;
    status = std::string("aborted:") + to_string(e.kind());
    message = e.what();
  }
  fs::create_directories(a.out);
  write_text(fs::path(a.out) / "data.json", report.dump(2) + "\n");
  auto m = manifest_json(c, "check-data", status, code, seconds_since(t0), {"data.json"});
  m["message"] = message;
  m["data"] = report;
  write_text(fs::path(a.out) / "manifest.json", m.dump(2) + "\n");
  std::printf("%s\n%s\n", report.dump(2).c_str(), status.c_str());
  return code;
}

int cmd_mms(const Args& a) {
  const RunConfig c = resolve(a);
  const auto t0 = std::chrono::steady_clock::now();
  MmsTable t = mms_convergence(c);
  fs::create_directories(a.out);
  write_text(fs::path(a.out) / "mms.csv", mms_csv(t));
  const std::string status = t.passed() ? "completed" : "aborted:convergence";
  const int code = t.passed() ? exit_completed : exit_aborted;
  auto m = manifest_json(c, "mms", status, code, seconds_since(t0), {"mms.csv"});
  m["initial_error"] = t.initial_error;
  m["spatial_order"] = t.spatial_order;
  m["temporal_order"] = t.temporal_order;
  m["spatial_ok"] = t.spatial_ok;
  m["temporal_ok"] = t.temporal_ok;
  write_text(fs::path(a.out) / "manifest.json", m.dump(2) + "\n");
  std::printf("%sinitial_error=%.3g spatial_order=%.3f temporal_order=%.3f %s\n", mms_csv(t).c_str(),
              t.initial_error, t.spatial_order, t.temporal_order, status.c_str());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"One-phase Stefan problem in harmonic gauge"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Args args;
  struct Cmd {
    const char* name;
    const char* help;
    std::function<int(const Args&)> fn;
  };
  const std::vector<Cmd> cmds = {
      {"run", "single simulation", cmd_run},
      {"sweep-sigma", "surface-tension ladder down to sigma = 0", [](const Args& a) { return cmd_sweep(a, true); }},
      {"sweep-kappa", "kappa ladder of regularized runs", [](const Args& a) { return cmd_sweep(a, false); }},
      {"check-data", "build the datum and report compatibility", cmd_check_data},
      {"mms", "manufactured-solution convergence study", cmd_mms},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : cmds) {
    auto* s = app.add_subcommand(c.name, c.help);
    s->add_option("--config", args.config, "key = value configuration file");
    s->add_option("--out", args.out, "output directory")->required();
    s->add_option("--override", args.overrides, "key=value applied after the config file");
    subs.push_back(s);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : exit_config;
  }
  for (std::size_t k = 0; k < cmds.size(); ++k) {
    if (!subs[k]->parsed()) continue;
    try {
      return cmds[k].fn(args);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::configuration) return config_error(cmds[k].name, args, e.what());
      std::cerr << "error: " << e.what() << "\n";
      return exit_aborted;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return exit_aborted;
    }
  }
  return exit_config;
}
