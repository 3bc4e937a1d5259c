/// @file test_stepper.cpp
/// @brief Time stepping in the three modes, boundary conditions and the weak form.

#include <gtest/gtest.h>

#include <random>

#include "stefan/stepper.hpp"

using namespace stefan;

namespace {

SolverConfig small_config(Mode mode) {
  SolverConfig c;
  c.grid = Grid(32, 65);
  c.mode = mode;
  c.dt = 1e-4;
  c.t_end = 2e-3;
  if (mode == Mode::surface_tension) c.sigma = 0.01;
  return c;
}

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::usage;  // sentinel, not thrown in these tests
}

}  // namespace

TEST(SolverConfig, Validation) {
  SolverConfig c = small_config(Mode::classical);
  EXPECT_NO_THROW(c.validate());
  c.dt = 1e-3;  // above 0.5 * hy^2
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::configuration);
  c = small_config(Mode::classical);
  c.t_end = 2.5e-4;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::configuration);
  c = small_config(Mode::surface_tension);
  c.sigma = 0.0;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::configuration);
  c = small_config(Mode::kappa);
  c.kappa = 0.0;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::configuration);
  c.kappa = 0.3;
  EXPECT_EQ(kind_of([&] { c.validate(); }), ErrorKind::configuration);
  EXPECT_EQ(parse_mode(to_string(Mode::surface_tension)), Mode::surface_tension);
  EXPECT_THROW(parse_mode("fast"), Error);
  EXPECT_EQ(small_config(Mode::classical).steps(), 20);
}

TEST(Stepper, ZeroStateIsFixedPoint) {
  for (Mode m : {Mode::classical, Mode::kappa}) {
    SolverConfig c = small_config(m);
    Stepper st(c);
    SolverState s = st.initialize(Field(c.grid), BoundaryField(c.grid.nx()));
    for (int n = 0; n < 5; ++n) {
      s = st.advance(s);
      EXPECT_LE(s.q.max_abs(), 1e-12);
      EXPECT_LE(s.h.max_abs(), 1e-12);
    }
  }
}

TEST(Stepper, VelocityOfClassicalDatum) {
  // flat map, q in the slab is alpha y - alpha^2 y^2 / 2: v = (0, alpha^2 y - alpha)
  SolverConfig c = small_config(Mode::classical);
  DataSpec d;
  d.alpha = 1.2;
  auto data = build_data(d, c.grid);
  Stepper st(c);
  SolverState s = st.initialize(data.q0, data.h0);
  for (int j = 0; j < 16; ++j) {  // y < eps_slab
    const double y = c.grid.y(j);
    EXPECT_NEAR(s.v[1](3, j), 1.44 * y - 1.2, 1e-12);
    EXPECT_NEAR(s.v[0](3, j), 0.0, 1e-14);
  }
  // the height rate equals J q_y on a flat interface
  for (int i = 0; i < c.grid.nx(); ++i) EXPECT_NEAR(s.h_t[i], 1.2, 1e-12);
}

TEST(Stepper, XIndependentDataStayXIndependent) {
  SolverConfig c = small_config(Mode::classical);
  auto data = build_data(DataSpec{}, c.grid);
  Stepper st(c);
  SolverState s = st.initialize(data.q0, data.h0);
  for (long n = 0; n < c.steps(); ++n) s = st.advance(s);
  EXPECT_LE(s.h.max() - s.h.min(), 1e-13);
  EXPECT_GT(s.h.min(), 0.0);  // the domain shifts upward at rate ~ alpha
  EXPECT_NEAR(s.h[0], 2e-3, 2e-4);
  EXPECT_LE(trace(s.q).max_abs(), 1e-15);
  EXPECT_LE(top_dy(s.q).max_abs(), 1e-11);
}

TEST(Stepper, TopFluxVanishesOnCurvedRun) {
  SolverConfig c = small_config(Mode::classical);
  DataSpec d;
  d.h0_amplitude = 0.05;
  auto data = build_data(d, c.grid);
  Stepper st(c);
  SolverState s = st.initialize(data.q0, data.h0);
  for (long n = 0; n < c.steps(); ++n) s = st.advance(s);
  EXPECT_LE(top_dy(s.q).max_abs(), 1e-11);
  EXPECT_LE(trace(s.q).max_abs(), 1e-15);
  EXPECT_GT(s.margin, 0.5);
  EXPECT_FALSE(s.taylor_flagged);
}

TEST(Stepper, InvertedDatumIsFlagged) {
  SolverConfig c = small_config(Mode::classical);
  DataSpec d;
  d.datum = Datum::inverted;
  auto data = build_data(d, c.grid);
  Stepper st(c);
  SolverState s = st.initialize(data.q0, data.h0);
  EXPECT_TRUE(s.taylor_flagged);
  EXPECT_LT(s.margin, 0.0);
  s = st.advance(s);
  EXPECT_EQ(s.flagged_steps, 2);
}

TEST(Stepper, SurfaceTensionTrace) {
  SolverConfig c = small_config(Mode::surface_tension);
  DataSpec d;
  d.h0_amplitude = 0.05;
  auto data = build_data(d, c.grid);
  Stepper st(c);
  SolverState s = st.initialize(data.q0, data.h0);
  for (int n = 0; n < 3; ++n) s = st.advance(s);
  BoundaryField H = mean_curvature(s.h);
  EXPECT_LE((trace(s.q) - c.sigma * H).max_abs(), 1e-14);
  EXPECT_GT(trace(s.q).max_abs(), 1e-4);
}

TEST(Stepper, GraphConditionAbort) {
  SolverConfig c = small_config(Mode::classical);
  Stepper st(c);
  auto h = BoundaryField::from_function(c.grid.nx(), [](double x) { return 0.9 * std::cos(x); });
  EXPECT_EQ(kind_of([&] { st.initialize(Field(c.grid), h); }), ErrorKind::invalid_geometry);
  EXPECT_EQ(kind_of([&] { Stepper(c).initialize(Field(Grid(32, 33)), BoundaryField(32)); }), ErrorKind::configuration);
}

TEST(Stepper, KappaRobinCondition) {
  SolverConfig c = small_config(Mode::kappa);
  c.kappa = 0.1;
  DataSpec d;
  d.h0_amplitude = 0.03;
  auto data = build_data(d, c.grid);
  KappaData kd = build_Q0_kappa(data.q0, data.h0, c.kappa);
  Stepper st(c);
  const SolverState s0 = st.initialize(kd.Q, data.h0, &data.q0);
  ASSERT_TRUE(s0.kforce);
  SolverState s = s0, prev = s0;
  for (int n = 0; n < 5; ++n) {
    prev = s;
    s = st.advance(s);
  }
  const MetricBundle& b = *s.bundle;
  BoundaryField beta = s.kforce->beta.at(s.t);
  const double k2 = c.kappa * c.kappa;
  const int nx = c.grid.nx();
  BoundaryField cc(nx);
  double cbar = 0;
  for (int i = 0; i < nx; ++i) {
    cc[i] = b.g[i] * b.g[i] / b.J(i, 0);
    cbar += cc[i] / nx;
  }
  // discrete Robin row: mean coefficient implicit, remainder lagged one step
  BoundaryField qy = bottom_dy(s.q), qy_old = bottom_dy(prev.q);
  Field qx_old = tangential_derivative(prev.q, 1);
  BoundaryField ht = height_rate(s.v, b);
  double row = 0, defect = 0;
  for (int i = 0; i < nx; ++i) {
    const double lhs = s.q(i, 0) - k2 * (cbar * qy[i] + (cc[i] - cbar) * qy_old[i] - b.hx[i] * qx_old(i, 0));
    row = std::max(row, std::abs(lhs - k2 * beta[i]));
    // continuum form q - kappa^2 J v.Avert = kappa^2 beta
    defect = std::max(defect, std::abs(s.q(i, 0) - k2 * ht[i] - k2 * beta[i]));
  }
  EXPECT_LE(row, 1e-12);
  EXPECT_LE(defect, 1e-2 * k2 * beta.max_abs());
  EXPECT_GT(trace(s.q).max_abs(), 0.0);
  // beta starts at minus the height rate, so the trace starts at zero
  EXPECT_LE((s.kforce->beta.b0 + s0.h_t).max_abs(), 1e-12);
  // alpha vanishes where the geometry is unsmoothed, so it is zero on flat data
  Stepper flat(c);
  auto fd = build_data(DataSpec{}, c.grid);
  SolverState f = flat.initialize(build_Q0_kappa(fd.q0, fd.h0, c.kappa).Q, fd.h0, &fd.q0);
  EXPECT_LE(f.kforce->alpha.max_abs(), 1e-15);
}

TEST(Stepper, FlowDerivativesMatchTrajectory) {
  SolverConfig c = small_config(Mode::classical);
  c.dt = 2e-5;
  c.t_end = 2e-4;
  DataSpec d;
  d.h0_amplitude = 0.05;
  auto data = build_data(d, c.grid);
  Stepper st(c);
  SolverState s0 = st.initialize(data.q0, data.h0);
  auto fdv = st.flow_derivatives(s0.q, s0.h, 0.0, nullptr);
  EXPECT_LE((fdv.h_t - s0.h_t).max_abs(), 1e-12);
  std::vector<BoundaryField> hs{s0.h};
  SolverState s = s0;
  for (int n = 0; n < 4; ++n) {
    s = st.advance(s);
    hs.push_back(s.h);
  }
  // second difference of the discrete trajectory approximates h_tt
  BoundaryField htt = (1.0 / (c.dt * c.dt)) * (hs[2] - 2.0 * hs[1] + hs[0]);
  const double scale = fdv.h_tt.max_abs();
  EXPECT_GT(scale, 0.0);
  EXPECT_LE((htt - fdv.h_tt).max_abs(), 0.2 * scale);
}

TEST(WeakResidual, ZeroStateAndErrors) {
  SolverConfig c = small_config(Mode::kappa);
  Stepper st(c);
  SolverState s = st.initialize(Field(c.grid), BoundaryField(c.grid.nx()));
  EXPECT_EQ(kind_of([&] { weak_residual(s, c); }), ErrorKind::needs_more_steps);
  s = st.advance(st.advance(s));
  EXPECT_LE(weak_residual(s, c), 1e-12);
  SolverConfig cc = small_config(Mode::classical);
  EXPECT_EQ(kind_of([&] { weak_residual(s, cc); }), ErrorKind::usage);
}

TEST(WeakResidual, DetectsPerturbation) {
  SolverConfig c = small_config(Mode::kappa);
  c.kappa = 0.1;
  DataSpec d;
  d.h0_amplitude = 0.03;
  auto data = build_data(d, c.grid);
  Stepper st(c);
  SolverState s = st.initialize(build_Q0_kappa(data.q0, data.h0, c.kappa).Q, data.h0, &data.q0);
  for (int n = 0; n < 4; ++n) s = st.advance(s);
  const double clean = weak_residual(s, c);
  std::mt19937 rng(2);
  std::normal_distribution<double> N;
  SolverState p = s;
  const double amp = 0.01 * s.q.max_abs();
  for (auto& x : p.q.data()) x += amp * N(rng);
  p.q_hist = s.q_hist;
  p.q_hist.replace_last(p.q);
  const double noisy = weak_residual(p, c);
  EXPECT_GE(noisy, 10.0 * clean);
}
