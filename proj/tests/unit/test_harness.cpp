/// @file test_harness.cpp
/// @brief Configuration parsing, run orchestration, persistence, sweeps and the CLI.

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <set>

#include "stefan/harness/mms.hpp"
#include "stefan/harness/sweep.hpp"

using namespace stefan;
using namespace stefan::harness;

namespace {

RunConfig small_run() {
  RunConfig c;
  c.solver.grid = Grid(32, 33);
  c.solver.dt = 1e-4;
  c.solver.t_end = 4e-3;
  c.snapshot_every = 5;
  c.interface_every = 4;
  return c;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::usage;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("stefan_harness_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(slurp(p)); }

}  // namespace

TEST(Config, ParsesKeysCommentsAndLadders) {
  std::istringstream in(
      "# comment\n"
      "nx = 32   # trailing\n"
      "ny=33\n"
      "mode = kappa\n"
      "kappa = 0.1\n"
      "datum = zero\n"
      "kappa_ladder = 0.2, 0.1\n"
      "svg = false\n");
  RunConfig c = parse_config(in);
  EXPECT_EQ(c.solver.grid.nx(), 32);
  EXPECT_EQ(c.solver.grid.ny(), 33);
  EXPECT_EQ(c.solver.mode, Mode::kappa);
  EXPECT_DOUBLE_EQ(c.solver.kappa, 0.1);
  EXPECT_EQ(c.data.datum, Datum::zero);
  EXPECT_EQ(c.kappa_ladder, (std::vector<double>{0.2, 0.1}));
  EXPECT_FALSE(c.svg);
}

TEST(Config, ErrorsAreConfigurationErrors) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
  };
  EXPECT_EQ(kind_of([&] { parse("bogus = 1\n"); }), ErrorKind::configuration);
  EXPECT_EQ(kind_of([&] { parse("dt = 1e-5\ndt = 2e-5\n"); }), ErrorKind::configuration);
  EXPECT_EQ(kind_of([&] { parse("dt = fast\n"); }), ErrorKind::configuration);
  EXPECT_EQ(kind_of([&] { parse("nx 64\n"); }), ErrorKind::configuration);
  EXPECT_EQ(kind_of([&] { parse("nx = 64.5\n"); }), ErrorKind::configuration);
  EXPECT_EQ(kind_of([&] { parse("kappa_ladder = 0.1, 0.2\n"); }), ErrorKind::configuration);
  EXPECT_EQ(kind_of([&] { parse("mode = fast\n"); }), ErrorKind::configuration);
  RunConfig c = small_run();
  EXPECT_EQ(kind_of([&] { apply_overrides(c, {"dt"}); }), ErrorKind::configuration);
  c = small_run();
  c.snapshot_every = 7;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::configuration);
  c = small_run();
  c.data.datum = Datum::sigma;
  c.data.h0_amplitude = 0.05;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::configuration);
  c = small_run();
  c.solver.sigma = 0.1;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::configuration);
  EXPECT_EQ(kind_of([&] { run_simulation(c); }), ErrorKind::configuration);
}

TEST(Config, OverridesApplyInOrderAndRoundTrip) {
  RunConfig c = small_run();
  apply_overrides(c, {"dt=5e-5", "dt = 2e-5", "sigma=0.01", "mode=surface_tension"});
  EXPECT_DOUBLE_EQ(c.solver.dt, 2e-5);
  EXPECT_DOUBLE_EQ(c.data.sigma, 0.01);
  auto j = to_json(c);
  std::string text;
  for (auto it = j.begin(); it != j.end(); ++it)
    text += it.key() + " = " + (it->is_string() ? it->get<std::string>() : it->dump()) + "\n";
  std::istringstream in(text);
  EXPECT_EQ(to_json(parse_config(in)), j);
}

TEST(Config, DefaultSigmaLadder) {
  const auto s = RunConfig{}.sigmas();
  ASSERT_EQ(s.size(), 12u);
  EXPECT_DOUBLE_EQ(s.front(), 0.1);
  EXPECT_DOUBLE_EQ(s[s.size() - 2], 1e-4);
  EXPECT_EQ(s.back(), 0.0);
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LT(s[i], s[i - 1]);
}

TEST(Config, ShippedDefaultIsBaseline) {
  const RunConfig c = load_config(STEFAN_SOURCE_DIR "/configs/default.cfg");
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.solver.grid.nx(), 64);
  EXPECT_EQ(c.solver.grid.ny(), 129);
  EXPECT_DOUBLE_EQ(c.solver.dt, 2.5e-5);
  EXPECT_DOUBLE_EQ(c.solver.t_end, 0.05);
  EXPECT_EQ(c.solver.mode, Mode::classical);
}

TEST(Run, ZeroDataCompletesWithZeroTrajectory) {
  RunConfig c = small_run();
  c.data.datum = Datum::zero;
  const RunResult r = run_simulation(c);
  EXPECT_EQ(r.status, "completed");
  EXPECT_EQ(r.exit_code, exit_completed);
  EXPECT_EQ(r.traj.frames.size(), 9u);
  for (const auto& f : r.traj.frames) {
    EXPECT_LE(f.q.max_abs(), 1e-14);
    EXPECT_LE(f.h.max_abs(), 1e-14);
  }
}

TEST(Run, ClassicalDatumKeepsMargin) {
  const RunResult r = run_simulation(small_run());
  EXPECT_TRUE(r.completed());
  EXPECT_EQ(r.steps, 40);
  EXPECT_NEAR(r.t_final, 4e-3, 1e-15);
  EXPECT_GE(r.min_margin, 0.5);
  EXPECT_EQ(r.first_flag_step, -1);
  ASSERT_EQ(r.energies.size(), r.traj.frames.size());
  // centered differences: no defect at the first and last samples
  EXPECT_TRUE(std::isnan(r.dissipation.front()));
  EXPECT_TRUE(std::isnan(r.dissipation.back()));
  for (std::size_t n = 1; n + 1 < r.dissipation.size(); ++n) EXPECT_LT(r.dissipation[n], 0.05);
}

TEST(Run, InvertedDatumIsTaylorFlagged) {
  RunConfig c = small_run();
  c.data.datum = Datum::inverted;
  const RunResult r = run_simulation(c);
  EXPECT_EQ(r.status, "taylor-flag");
  EXPECT_EQ(r.exit_code, exit_taylor_flag);
  EXPECT_GE(r.first_flag_step, 0);
  EXPECT_LE(r.first_flag_step, 10);
  EXPECT_LE(r.steps, r.first_flag_step + c.solver.taylor_grace_steps);
}

TEST(Run, IncompatibleDataAbortUnlessAllowed) {
  RunConfig c = small_run();
  c.data.h0_amplitude = 0.05;  // q0 = 0 on a curved Gamma where sigma H is required
  c.solver.mode = Mode::surface_tension;
  c.solver.sigma = 0.05;
  RunResult r = run_simulation(c);
  EXPECT_EQ(r.status, "aborted:incompatible-data");
  EXPECT_EQ(r.exit_code, exit_aborted);
  EXPECT_TRUE(r.traj.frames.empty());
  c.allow_incompatible = true;
  r = run_simulation(c);
  EXPECT_NE(r.exit_code, exit_aborted);
}

TEST(Run, OutputsAreDeterministic) {
  const RunConfig c = small_run();
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  write_run(run_simulation(c), a);
  write_run(run_simulation(c), b);
  int csv = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    if (e.path().extension() != ".csv") continue;
    ++csv;
    EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path().filename();
  }
  EXPECT_GE(csv, 3);
}

TEST(Run, EnergiesCsvHeaderIsFixed) {
  const RunResult r = run_simulation(small_run());
  const std::string csv = energies_csv(r);
  const std::string header = csv.substr(0, csv.find('\n'));
  std::string expect;
  for (const auto& c : energy_columns()) expect += (expect.empty() ? "" : ",") + c;
  EXPECT_EQ(header, expect);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(r.traj.frames.size()) + 1);
}

TEST(Run, ManifestListsEveryFile) {
  RunConfig c = small_run();
  const fs::path dir = scratch("manifest");
  const RunResult r = run_simulation(c);
  write_run(r, dir);
  const auto m = read_json(dir / "manifest.json");
  std::set<std::string> listed;
  for (const auto& a : m["artifacts"]) EXPECT_TRUE(listed.insert(a.get<std::string>()).second);
  std::set<std::string> present;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename() != "manifest.json") present.insert(e.path().filename().string());
  EXPECT_EQ(listed, present);
  EXPECT_TRUE(present.count("energies.svg"));
  EXPECT_TRUE(present.count("interface_t0.000000.csv"));
  EXPECT_TRUE(present.count("interface_t0.004000.csv"));
  for (const char* k : {"config", "version", "grid", "mode", "sigma", "kappa", "wall_seconds", "status", "exit_code"})
    EXPECT_TRUE(m.contains(k)) << k;
  EXPECT_EQ(m["status"], "completed");
  EXPECT_EQ(m["version"], kVersion);
}

TEST(Run, ManifestWrittenOnAbort) {
  RunConfig c = small_run();
  c.data.h0_amplitude = 0.05;  // q0 = 0 on a curved Gamma where sigma H is required
  c.solver.mode = Mode::surface_tension;
  c.solver.sigma = 0.05;
  const fs::path dir = scratch("abort");
  write_run(run_simulation(c), dir);
  const auto m = read_json(dir / "manifest.json");
  EXPECT_EQ(m["status"], "aborted:incompatible-data");
  EXPECT_EQ(m["exit_code"], exit_aborted);
  for (const auto& a : m["artifacts"]) EXPECT_TRUE(fs::exists(dir / a.get<std::string>()));
  EXPECT_FALSE(m["message"].get<std::string>().empty());
}

TEST(Sweep, LogLogSlope) {
  EXPECT_NEAR(loglog_slope({1, 2, 4, 8}, {3, 12, 48, 192}), 2.0, 1e-12);
  EXPECT_NEAR(loglog_slope({0, 1, 10}, {5, 1, 0.1}), -1.0, 1e-12);  // zero abscissa skipped
  EXPECT_TRUE(std::isnan(loglog_slope({1}, {1})));
}

TEST(Sweep, PointsAreOrderIndependent) {
  RunConfig base = small_run();
  base.solver.mode = Mode::kappa;
  std::vector<RunConfig> cfgs;
  for (double k : {0.2, 0.1, 0.05}) {
    RunConfig c = base;
    c.solver.kappa = k;
    cfgs.push_back(c);
  }
  const auto fwd = run_all(cfgs, 1);
  std::vector<RunConfig> rev(cfgs.rbegin(), cfgs.rend());
  const auto bwd = run_all(rev, 3);
  for (std::size_t k = 0; k < cfgs.size(); ++k) {
    EXPECT_EQ(fwd[k].status, "completed");
    EXPECT_EQ(energies_csv(fwd[k]), energies_csv(bwd[cfgs.size() - 1 - k]));
  }
}

TEST(Sweep, SigmaSweepReferenceAndManifests) {
  RunConfig base = small_run();
  base.sigma_ladder = {0.02, 0.01, 0.0};
  base.svg = false;
  const SweepResult s = sweep_sigma(base);
  ASSERT_EQ(s.points.size(), 3u);
  EXPECT_EQ(s.points.back().distance, 0.0);
  EXPECT_TRUE(s.same_horizon);
  EXPECT_TRUE(s.monotone);
  EXPECT_LT(s.points[1].distance, s.points[0].distance);
  EXPECT_EQ(s.points[0].run.config.solver.mode, Mode::surface_tension);
  EXPECT_EQ(s.points[2].run.config.solver.mode, Mode::classical);

  const fs::path dir = scratch("sweep");
  write_sweep(s, base, dir, 0.0);
  std::map<std::string, int> refs;
  std::vector<fs::path> manifests;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.path().filename() == "manifest.json") manifests.push_back(e.path());
  for (const auto& m : manifests) {
    const auto j = read_json(m);
    for (const auto& a : j["artifacts"])
      ++refs[fs::relative(m.parent_path() / a.get<std::string>(), dir).string()];
  }
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string rel = fs::relative(e.path(), dir).string();
    if (rel == "manifest.json") continue;
    EXPECT_EQ(refs[rel], 1) << rel;
  }
}

TEST(Sweep, LadderMustEndAtZero) {
  RunConfig base = small_run();
  base.sigma_ladder = {0.02, 0.01};
  EXPECT_EQ(kind_of([&] { sweep_sigma(base); }), ErrorKind::configuration);
}

TEST(Mms, ExactDataInsertedExactly) {
  Manufactured m;
  SolverConfig c;
  c.grid = Grid(32, 33);
  c.dt = 1e-4;
  c.t_end = 1e-4;
  double e0 = 1.0;
  mms_solve(m, c, &e0);
  EXPECT_LE(e0, 1e-14);
}

TEST(Mms, SourceOfSteadyFlatProfile) {
  // flat interface, steady q = y - y^2/2: source is -q_yy, velocity is -grad q
  Manufactured m;
  m.profile = Manufactured::Profile::quadratic;
  m.eps0 = m.eps1 = 0.0;
  m.amp1 = 0.0;
  m.c = 0.0;
  double v0, v1, s;
  m.fields(0.3, 0.4, 0.1, v0, v1, s);
  EXPECT_NEAR(s, 1.0, 1e-14);  // q_t - q_yy = 0 - (-1)
  EXPECT_NEAR(v0, 0.0, 1e-14);
  EXPECT_NEAR(v1, -(1.0 - 0.4), 1e-14);
}

TEST(Svg, SkipsNonFiniteAndNonPositiveOnLogAxis) {
  const std::string svg = line_plot_svg("t", {{"a", {0, 1, 2, 3}, {1, NAN, -1, 10}}}, true);
  EXPECT_NE(svg.find("<svg"), std::string::npos);
  EXPECT_NE(svg.find("</svg>"), std::string::npos);
  const auto p = svg.find("points=\"");
  const auto q = svg.find('"', p + 8);
  const std::string pts = svg.substr(p + 8, q - p - 8);
  EXPECT_EQ(std::count(pts.begin(), pts.end(), ','), 2);
}

#ifdef STEFAN_CLI_PATH
namespace {
int cli(const std::string& args) {
  const int rc = std::system((std::string(STEFAN_CLI_PATH) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}
}  // namespace

TEST(Cli, ExitCodes) {
  const fs::path dir = scratch("cli");
  const std::string small = " --override nx=32 --override ny=33 --override dt=1e-4 --override t_end=2e-3"
                            " --override snapshot_every=5 --override svg=false";
  EXPECT_EQ(cli("run --out " + (dir / "ok").string() + small), 0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "energies.csv"));
  EXPECT_EQ(cli("run --out " + (dir / "flag").string() + small + " --override datum=inverted"), 2);
  EXPECT_EQ(cli("run --out " + (dir / "abort").string() + small + " --override h0_amplitude=2"), 3);
  EXPECT_TRUE(fs::exists(dir / "abort" / "manifest.json"));
  EXPECT_EQ(cli("check-data --out " + (dir / "check").string() + small + " --override datum=inverted"), 2);
  EXPECT_EQ(cli("run --out " + (dir / "bad").string() + small + " --override bogus=1"), 4);
  EXPECT_EQ(read_json(dir / "bad" / "manifest.json")["exit_code"], 4);
  EXPECT_EQ(cli("run --out " + (dir / "bad2").string() + " --config /nonexistent.cfg"), 4);
  EXPECT_EQ(cli("run"), 4);
}
#endif
