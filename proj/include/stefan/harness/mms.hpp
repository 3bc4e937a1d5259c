#pragma once

#include "run.hpp"

namespace stefan::harness {

/// Manufactured classical solution
///   h* = eps(t) cos x,  Phi* = eps(t) cos x sinh(1-y)/sinh 1,
///   q* = A(t) (1 + c cos x) Y(y),  Y(0) = 0, Y'(1) = 0,
/// with the interior, height and Dirichlet sources computed analytically.
struct Manufactured {
  enum class Profile { sine, quadratic };
  Profile profile = Profile::sine;
  double eps0 = 0.02, eps1 = 0.01;  // eps(t) = eps0 + eps1 sin(w t)
  double amp1 = 0.3;                 // A(t) = 1 + amp1 sin(w t)
  double w = 10.0;
  double c = 0.2;

  double eps(double t) const { return eps0 + eps1 * std::sin(w * t); }
  double deps(double t) const { return eps1 * w * std::cos(w * t); }
  double A(double t) const { return 1.0 + amp1 * std::sin(w * t); }
  double dA(double t) const { return amp1 * w * std::cos(w * t); }

  void Y(double y, double& f, double& f1, double& f2) const {
    if (profile == Profile::sine) {
      const double k = 0.5 * std::numbers::pi;
      f = std::sin(k * y), f1 = k * std::cos(k * y), f2 = -k * k * std::sin(k * y);
    } else {
      f = y - 0.5 * y * y, f1 = 1.0 - y, f2 = -1.0;
    }
  }

  double q(double x, double y, double t) const {
    double f, f1, f2;
    Y(y, f, f1, f2);
    return A(t) * (1.0 + c * std::cos(x)) * f;
  }

  /// Velocity components and the interior source at (x, y, t).
  void fields(double x, double y, double t, double& v0, double& v1, double& src) const {
    const double sh = std::sinh(1.0), S = std::sinh(1.0 - y) / sh, S1 = -std::cosh(1.0 - y) / sh;
    const double e = eps(t), cx = std::cos(x), sx = std::sin(x);
    const double px = -e * sx * S, py = e * cx * S1, pxx = -e * cx * S, pxy = -e * sx * S1, pyy = e * cx * S;
    const double pt = deps(t) * cx * S;
    const double J = 1.0 + py;
    const double a10 = -px / J, a11 = 1.0 / J;
    const double a10x = -pxx / J + px * pxy / (J * J), a10y = -pxy / J + px * pyy / (J * J), a11y = -pyy / (J * J);
    double f, f1, f2;
    Y(y, f, f1, f2);
    const double a = A(t), X = 1.0 + c * cx, X1 = -c * sx, X2 = -c * cx;
    const double q1 = a * X1 * f, q2 = a * X * f1, q11 = a * X2 * f, q12 = a * X1 * f1, q22 = a * X * f2;
    const double lap = q11 + 2 * a10 * q12 + (a10 * a10 + a11 * a11) * q22 + (a10x + a10 * a10y + a11 * a11y) * q2;
    v0 = -(q1 + a10 * q2);
    v1 = -a11 * q2;
    src = dA(t) * X * f - lap + v1 * pt;
  }

  Field q_field(const Grid& g, double t) const {
    return Field::from_function(g, [&](double x, double y) { return q(x, y, t); });
  }
  BoundaryField h_field(int nx, double t) const {
    return BoundaryField::from_function(nx, [&](double x) { return eps(t) * std::cos(x); });
  }

  Forcing forcing(const Grid& g) const {
    Forcing f;
    f.interior = [this, g](double t) {
      return Field::from_function(g, [&](double x, double y) {
        double v0, v1, s;
        fields(x, y, t, v0, v1, s);
        return s;
      });
    };
    f.height = [this, g](double t) {
      return BoundaryField::from_function(g.nx(), [&](double x) {
        double v0, v1, s;
        fields(x, 0.0, t, v0, v1, s);
        const double hx = -eps(t) * std::sin(x);
        return deps(t) * std::cos(x) - (v0 * hx - v1);
      });
    };
    f.dirichlet = [this, g](double t) {
      return BoundaryField::from_function(g.nx(), [&](double x) { return q(x, 0.0, t); });
    };
    return f;
  }
};

struct MmsRow {
  std::string study;  // "spatial" or "temporal"
  int ny = 0;
  double dt = 0.0;
  long steps = 0;
  double error_q = 0.0, error_h = 0.0, error = 0.0;
  double ratio = std::numeric_limits<double>::quiet_NaN();  // previous error / this error
};

struct MmsTable {
  std::vector<MmsRow> rows;
  double initial_error = 0.0;
  double spatial_order = 0.0;   // log2 of the smallest spatial ratio
  double temporal_order = 0.0;  // log2 of the smallest temporal ratio
  bool spatial_ok = false;      // every spatial ratio >= 3.6
  bool temporal_ok = false;     // every temporal ratio >= 1.8
  bool passed() const { return spatial_ok && temporal_ok; }
};

/// Advances the manufactured problem and measures max errors in q and h at t_end.
inline MmsRow mms_solve(const Manufactured& m, const SolverConfig& cfg, double* initial_error = nullptr) {
  const Grid& g = cfg.grid;
  Stepper st(cfg, m.forcing(g));
  SolverState s = st.initialize(m.q_field(g, 0.0), m.h_field(g.nx(), 0.0));
  if (initial_error)
    *initial_error = (s.q - m.q_field(g, 0.0)).max_abs() + (s.h - m.h_field(g.nx(), 0.0)).max_abs();
  for (long n = 0; n < cfg.steps(); ++n) s = st.advance(s);
  MmsRow r;
  r.ny = g.ny();
  r.dt = cfg.dt;
  r.steps = cfg.steps();
  r.error_q = (s.q - m.q_field(g, s.t)).max_abs();
  r.error_h = (s.h - m.h_field(g.nx(), s.t)).max_abs();
  r.error = r.error_q + r.error_h;
  return r;
}

/// Spatial study: sine profile, ny in {33, 65, 129} with dt = hy^2 / 4 to t = 1/64.
/// Temporal study: quadratic profile (exact under the y stencils), ny = 65,
/// dt in {2e-3, 1e-3, 5e-4} to t = 0.02.
inline MmsTable mms_convergence(const RunConfig& base) {
  MmsTable tab;
  const int nx = base.solver.grid.nx();
  Manufactured sp;
  sp.profile = Manufactured::Profile::sine;
  for (int ny : {33, 65, 129}) {
    SolverConfig c;
    c.grid = Grid(nx, ny);
    c.mode = Mode::classical;
    c.dt = 0.25 * c.grid.hy() * c.grid.hy();
    c.t_end = 1.0 / 64.0;
    MmsRow r = mms_solve(sp, c, ny == 33 ? &tab.initial_error : nullptr);
    r.study = "spatial";
    tab.rows.push_back(r);
  }
  Manufactured tm;
  tm.profile = Manufactured::Profile::quadratic;
  for (double dt : {2e-3, 1e-3, 5e-4}) {
    SolverConfig c;
    c.grid = Grid(nx, 65);
    c.mode = Mode::classical;
    c.dt = dt;
    c.cfl = 1e3;
    c.t_end = 0.02;
    MmsRow r = mms_solve(tm, c);
    r.study = "temporal";
    tab.rows.push_back(r);
  }
  double smin = INFINITY, tmin = INFINITY;
  for (std::size_t k = 1; k < tab.rows.size(); ++k) {
    if (tab.rows[k].study != tab.rows[k - 1].study) continue;
    tab.rows[k].ratio = tab.rows[k - 1].error / tab.rows[k].error;
    (tab.rows[k].study == "spatial" ? smin : tmin) = std::min(tab.rows[k].study == "spatial" ? smin : tmin,
                                                              tab.rows[k].ratio);
  }
  tab.spatial_order = std::log2(smin);
  tab.temporal_order = std::log2(tmin);
  tab.spatial_ok = smin >= 3.6;
  tab.temporal_ok = tmin >= 1.8;
  return tab;
}

inline std::string mms_csv(const MmsTable& t) {
  std::string out = "study,ny,dt,steps,error_q,error_h,error,ratio\n";
  char buf[256];
  for (const auto& r : t.rows) {
    std::snprintf(buf, sizeof buf, "%s,%d,%.17g,%ld,%.17g,%.17g,%.17g,%.17g\n", r.study.c_str(), r.ny, r.dt, r.steps,
                  r.error_q, r.error_h, r.error, r.ratio);
    out += buf;
  }
  return out;
}

}  // namespace stefan::harness
