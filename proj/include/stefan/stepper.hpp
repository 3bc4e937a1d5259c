#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "history.hpp"
#include "initdata.hpp"

namespace stefan {

enum class Mode { classical, surface_tension, kappa };

inline Mode parse_mode(const std::string& s) {
  if (s == "classical") return Mode::classical;
  if (s == "surface_tension") return Mode::surface_tension;
  if (s == "kappa") return Mode::kappa;
  throw Error(ErrorKind::configuration, "unknown mode '" + s + "'");
}

inline const char* to_string(Mode m) {
  switch (m) {
    case Mode::classical: return "classical";
    case Mode::surface_tension: return "surface_tension";
    case Mode::kappa: return "kappa";
  }
  return "?";
}

struct SolverConfig {
  Grid grid{64, 129};
  Mode mode = Mode::classical;
  double sigma = 0.0;
  double kappa = 0.1;
  double dt = 2.5e-5;
  double t_end = 0.05;
  double cfl = 0.5;  // dt <= cfl * min(hx, hy)^2
  double elliptic_tol = 1e-10;
  int elliptic_max_iter = 200;
  double taylor_delta = 0.0;  // flag when min q_y on Gamma <= taylor_delta
  double graph_bound = 0.5;
  int taylor_grace_steps = 10;

  void validate() const {
    if (!(dt > 0.0) || !(t_end > 0.0)) throw Error(ErrorKind::configuration, "dt and t_end must be positive");
    const double h = std::min(grid.hx(), grid.hy());
    if (dt > cfl * h * h * (1.0 + 1e-12)) throw Error(ErrorKind::configuration, "dt exceeds cfl * min(hx,hy)^2");
    const double n = t_end / dt;
    if (std::abs(n - std::round(n)) > 1e-6 * n) throw Error(ErrorKind::configuration, "t_end must be a multiple of dt");
    if (mode == Mode::surface_tension && !(sigma > 0.0))
      throw Error(ErrorKind::configuration, "surface_tension mode needs sigma > 0");
    if (mode == Mode::kappa && (!(kappa > 0.0) || kappa > 0.2))
      throw Error(ErrorKind::configuration, "kappa mode needs 0 < kappa <= 0.2");
    if (sigma < 0.0) throw Error(ErrorKind::configuration, "sigma must be >= 0");
  }
  long steps() const { return std::lround(t_end / dt); }
};

/// Optional manufactured sources: q_t gets +interior(t), h_t gets +height(t),
/// and the Dirichlet value on Gamma (classical mode) is dirichlet(t).
struct Forcing {
  std::function<Field(double)> interior;
  std::function<BoundaryField(double)> height;
  std::function<BoundaryField(double)> dirichlet;
};

/// beta(t) = b0 + t b1 + t^2/2 b2 on Gamma.
struct BetaPolynomial {
  BoundaryField b0, b1, b2;
  BoundaryField at(double t) const {
    BoundaryField out = b0;
    out.add_scaled(t, b1);
    out.add_scaled(0.5 * t * t, b2);
    return out;
  }
};

struct KappaForcing {
  Field alpha;
  BetaPolynomial beta;
};

struct SolverState {
  double t = 0.0;
  long step = 0;
  Field q;
  BoundaryField h;
  BoundaryField h_geom;  // h, or Lambda Lambda h in kappa mode
  std::shared_ptr<const MetricBundle> bundle;
  VectorField v;
  BoundaryField h_t;  // height-law rate at this state
  Field phi_t;        // Psi_t used to reach this state
  std::shared_ptr<const KappaForcing> kforce;
  History<Field> q_hist{5};
  double margin = 0.0;
  bool taylor_flagged = false;
  int flagged_steps = 0;
};

/// h_t = J v . Avert on Gamma (= g v . n).
inline BoundaryField height_rate(const VectorField& v, const MetricBundle& b) {
  BoundaryField out(b.grid().nx());
  for (int i = 0; i < b.grid().nx(); ++i) out[i] = v[0](i, 0) * b.hx[i] - v[1](i, 0);
  return out;
}

/// |dPsi|^2 J^-2 (q0_y)^2 over Omega for the given map.
inline Field squared_flux_density(const Field& q0_y, const MetricBundle& b) {
  Field out(q0_y.grid());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const double p = b.map.phi_x[k], J = b.J[k];
    out[k] = (1.0 + p * p) / (J * J) * q0_y[k] * q0_y[k];
  }
  return out;
}

class Stepper {
 public:
  explicit Stepper(SolverConfig cfg, Forcing forcing = {}) : cfg_(std::move(cfg)), forcing_(std::move(forcing)) {
    cfg_.validate();
  }

  const SolverConfig& config() const { return cfg_; }

  BoundaryField geometry_height(const BoundaryField& h) const {
    return cfg_.mode == Mode::kappa ? smooth_twice(h, cfg_.kappa) : h;
  }

  std::shared_ptr<const MetricBundle> make_bundle(const BoundaryField& hg) const {
    return std::make_shared<const MetricBundle>(metric_bundle(harmonic_extend(hg, cfg_.grid, cfg_.graph_bound)));
  }

  /// State at t = 0. In kappa mode q0 is the regularized datum and q0_raw/h0
  /// the unregularized pair used for the alpha forcing; beta is bootstrapped.
  SolverState initialize(const Field& q0, const BoundaryField& h0, const Field* q0_raw = nullptr) const {
    if (!(q0.grid() == cfg_.grid)) throw Error(ErrorKind::configuration, "datum grid differs from solver grid");
    SolverState s;
    s.q = q0;
    s.h = h0;
    s.h_geom = geometry_height(h0);
    s.bundle = make_bundle(s.h_geom);
    s.v = compute_velocity(s.q, *s.bundle);
    s.phi_t = Field(cfg_.grid);
    if (cfg_.mode == Mode::kappa) s.kforce = build_kappa_forcing(q0_raw ? *q0_raw : q0, h0, s);
    s.h_t = rate_h(s.v, *s.bundle, 0.0);
    s.q_hist.push(0.0, s.q);
    update_margin(s);
    return s;
  }

  SolverState advance(const SolverState& s) const { return advance_impl(s, cfg_.dt); }

  struct Rates {
    Field q_t;
    BoundaryField h_t;
    VectorField v;
  };

  /// Right-hand sides of the continuous system at (q, h, t).
  Rates rates(const Field& q, const BoundaryField& h, double t, const KappaForcing* kf) const {
    auto b = make_bundle(geometry_height(h));
    Rates r;
    r.v = compute_velocity(q, *b);
    r.h_t = rate_h(r.v, *b, t);
    Field phi_t = extend_displacement(geometry_height(r.h_t), cfg_.grid).phi;
    r.q_t = transformed_laplacian(q, *b) - advection_term(r.v, phi_t);
    if (kf) r.q_t += kf->alpha;
    if (forcing_.interior) r.q_t += forcing_.interior(t);
    const int nx = cfg_.grid.nx();
    if (cfg_.mode == Mode::classical) {
      BoundaryField d(nx);
      if (forcing_.dirichlet) {
        const double e = 1e-5;
        d = (1.0 / (2 * e)) * (forcing_.dirichlet(t + e) - forcing_.dirichlet(t - e));
      }
      for (int i = 0; i < nx; ++i) r.q_t(i, 0) = d[i];
    } else if (cfg_.mode == Mode::surface_tension) {
      const double e = 1e-6;
      BoundaryField hp = h, hm = h;
      hp.add_scaled(e, r.h_t);
      hm.add_scaled(-e, r.h_t);
      BoundaryField d = (cfg_.sigma / (2 * e)) * (mean_curvature(hp) - mean_curvature(hm));
      for (int i = 0; i < nx; ++i) r.q_t(i, 0) = d[i];
    }
    return r;
  }

  /// Time derivatives at a state by substituting the equations; second and
  /// third orders differentiate the relations along the flow.
  struct FlowDerivatives {
    Field q_t, q_tt;
    BoundaryField h_t, h_tt, h_ttt;
    VectorField v, v_t, v_tt;
  };

  FlowDerivatives flow_derivatives(const Field& q, const BoundaryField& h, double t, const KappaForcing* kf,
                                   double delta = 2e-4) const {
    struct First {
      Field q_t, q_tt;
      BoundaryField h_t, h_tt;
      VectorField v, v_t;
    };
    auto first = [&](const Field& qq, const BoundaryField& hh, double tt) {
      Rates r0 = rates(qq, hh, tt, kf);
      Field qp = qq, qm = qq;
      qp.add_scaled(delta, r0.q_t);
      qm.add_scaled(-delta, r0.q_t);
      BoundaryField hp = hh, hm = hh;
      hp.add_scaled(delta, r0.h_t);
      hm.add_scaled(-delta, r0.h_t);
      Rates rp = rates(qp, hp, tt + delta, kf), rm = rates(qm, hm, tt - delta, kf);
      const double c = 1.0 / (2 * delta);
      First f{r0.q_t, c * (rp.q_t - rm.q_t), r0.h_t, c * (rp.h_t - rm.h_t), r0.v, c * (rp.v - rm.v)};
      return f;
    };
    First f0 = first(q, h, t);
    Field qp = q, qm = q;
    qp.add_scaled(delta, f0.q_t);
    qm.add_scaled(-delta, f0.q_t);
    BoundaryField hp = h, hm = h;
    hp.add_scaled(delta, f0.h_t);
    hm.add_scaled(-delta, f0.h_t);
    First fp = first(qp, hp, t + delta), fm = first(qm, hm, t - delta);
    const double c = 1.0 / (2 * delta);
    return {f0.q_t, f0.q_tt, f0.h_t, f0.h_tt, c * (fp.h_tt - fm.h_tt), f0.v, f0.v_t, c * (fp.v_t - fm.v_t)};
  }

 private:
  BoundaryField rate_h(const VectorField& v, const MetricBundle& b, double t) const {
    BoundaryField r = height_rate(v, b);
    if (forcing_.height) r += forcing_.height(t);
    return r;
  }

  void update_margin(SolverState& s) const {
    s.margin = taylor_margin(s.q);
    if (!std::isfinite(s.margin)) throw Error(ErrorKind::numerical, "non-finite temperature");
    // the zero state is a fixed point with a motionless interface; the sign condition is vacuous there
    if (s.margin <= cfg_.taylor_delta && s.q.max_abs() > 0.0) {
      s.taylor_flagged = true;
      ++s.flagged_steps;
    }
  }

  std::shared_ptr<const KappaForcing> build_kappa_forcing(const Field& q_raw, const BoundaryField& h0,
                                                          const SolverState& s) const {
    auto kf = std::make_shared<KappaForcing>();
    MetricBundle b0 = metric_bundle(harmonic_extend(h0, cfg_.grid, cfg_.graph_bound));
    Field qy = vertical_derivative(q_raw, 1);
    kf->alpha = squared_flux_density(qy, b0) - squared_flux_density(qy, *s.bundle);
    kf->beta = bootstrap_beta(s, kf->alpha);
    return kf;
  }

  /// beta = -J v . Avert on Gamma (v against the cofactor row J A^2) and its first
  /// two time derivatives at t = 0, by centered differences along the flow of the
  /// substituted equations.
  BetaPolynomial bootstrap_beta(const SolverState& s0, const Field& alpha, double delta = 2e-4) const {
    KappaForcing pre;
    pre.alpha = alpha;
    auto va = [&](const Field& q, const BoundaryField& h) {
      auto b = make_bundle(geometry_height(h));
      return -1.0 * height_rate(compute_velocity(q, *b), *b);
    };
    const double c = 1.0 / (2 * delta);
    auto shifted = [&](const Field& q, const BoundaryField& h, double t, double e) {
      Rates r = rates(q, h, t, &pre);
      Field qs = q;
      qs.add_scaled(e, r.q_t);
      BoundaryField hs = h;
      hs.add_scaled(e, r.h_t);
      return std::pair{std::move(qs), std::move(hs)};
    };
    auto rate = [&](const Field& q, const BoundaryField& h, double t) {
      auto [qp, hp] = shifted(q, h, t, delta);
      auto [qm, hm] = shifted(q, h, t, -delta);
      return c * (va(qp, hp) - va(qm, hm));
    };
    BetaPolynomial b;
    b.b0 = va(s0.q, s0.h);
    b.b1 = rate(s0.q, s0.h, 0.0);
    auto [qp, hp] = shifted(s0.q, s0.h, 0.0, delta);
    auto [qm, hm] = shifted(s0.q, s0.h, 0.0, -delta);
    b.b2 = c * (rate(qp, hp, delta) - rate(qm, hm, -delta));
    return b;
  }

  SolverState advance_impl(const SolverState& s, double dt) const {
    const Grid& g = cfg_.grid;
    const int nx = g.nx();
    SolverState n;
    n.t = s.t + dt;
    n.step = s.step + 1;
    n.kforce = s.kforce;
    n.q_hist = s.q_hist;
    n.taylor_flagged = s.taylor_flagged;
    n.flagged_steps = s.flagged_steps;

    n.h = s.h;
    n.h.add_scaled(dt, s.h_t);
    if (!n.h.finite()) throw Error(ErrorKind::numerical, "non-finite interface");
    n.h_geom = geometry_height(n.h);
    n.bundle = make_bundle(n.h_geom);
    const MetricBundle& b = *n.bundle;
    n.phi_t = extend_displacement(geometry_height(s.h_t), g).phi;

    VectorField v_old = compute_velocity(s.q, b);
    Field expl = transformed_laplacian(s.q, b) - flat_laplacian(s.q) - advection_term(v_old, n.phi_t);
    if (n.kforce) expl += n.kforce->alpha;
    if (forcing_.interior) expl += forcing_.interior(n.t);
    Field rhs = s.q;
    rhs.add_scaled(dt, expl);

    BoundaryRow bottom = BoundaryRow::dirichlet();
    BoundaryField bval(nx);
    if (cfg_.mode == Mode::kappa) {
      // q - kappa^2 J v.Avert = kappa^2 beta with J v.Avert = -h_x q_x + c q_y, c = g^2/J;
      // the mean of c is implicit, the rest lagged
      const double k2 = cfg_.kappa * cfg_.kappa;
      BoundaryField c(nx);
      for (int i = 0; i < nx; ++i) c[i] = b.g[i] * b.g[i] / b.J(i, 0);
      double cbar = 0.0;
      for (double x : c.data()) cbar += x;
      cbar /= nx;
      Field qx = tangential_derivative(s.q, 1);
      BoundaryField qy = bottom_dy(s.q), beta = n.kforce->beta.at(n.t);
      for (int i = 0; i < nx; ++i) bval[i] = k2 * (beta[i] - b.hx[i] * qx(i, 0) + (c[i] - cbar) * qy[i]);
      bottom = BoundaryRow::robin_bottom(-k2 * cbar, g.hy());
    } else if (cfg_.mode == Mode::surface_tension) {
      bval = cfg_.sigma * mean_curvature(n.h);
      if (forcing_.dirichlet) bval += forcing_.dirichlet(n.t);
    } else if (forcing_.dirichlet) {
      bval = forcing_.dirichlet(n.t);
    }

    n.q = solve_modal(rhs, bval, BoundaryField(nx), dt, [&](int k) { return 1.0 + dt * double(k) * k; }, bottom,
                      BoundaryRow::neumann_top(g.hy()));
    n.v = compute_velocity(n.q, b);
    n.h_t = rate_h(n.v, b, n.t);
    n.q_hist.push(n.t, n.q);
    update_margin(n);
    return n;
  }

  SolverConfig cfg_;
  Forcing forcing_;
};

inline SolverState advance(const SolverState& s, const Stepper& stepper) { return stepper.advance(s); }

/// Normalized defect of the weak form of the kappa system,
///   int q_t phi J + int (A grad q).(A grad phi) J + kappa^-2 int_Gamma q phi
///   - int_Gamma beta phi - int (-v.w + alpha) phi J,
/// maximized over n_test trigonometric-times-polynomial test functions and divided by
/// the largest sum of term magnitudes over the same set.
inline double weak_residual(const SolverState& s, const SolverConfig& cfg, int n_test = 12) {
  if (cfg.mode != Mode::kappa || !s.kforce) throw Error(ErrorKind::usage, "weak residual needs a kappa-mode state");
  if (s.q_hist.size() < 3) throw Error(ErrorKind::needs_more_steps, "weak residual needs three stored steps");
  const Grid& g = s.q.grid();
  const MetricBundle& b = *s.bundle;
  const std::size_t last = s.q_hist.size() - 1;
  Field q_t = s.q_hist.derivative(1, last, [](const Field& f) { return f; });
  Field src = s.kforce->alpha - advection_term(s.v, s.phi_t);
  BoundaryField beta = s.kforce->beta.at(s.t);
  const double k2inv = 1.0 / (cfg.kappa * cfg.kappa);
  Field qx = tangential_derivative(s.q, 1), qy = vertical_derivative(s.q, 1);
  double worst = 0.0, largest = 0.0;
  for (int m = 0; m < n_test; ++m) {
    const int kx = m % 3, p = (m / 3) % 4, odd = (m / 12) % 2;
    auto phi_f = [&](double x, double y) { return (odd ? std::sin(kx * x + 0.3) : std::cos(kx * x)) * std::pow(y, p); };
    Field phi = Field::from_function(g, phi_f);
    Field px = Field::from_function(g, [&](double x, double y) {
      return kx * (odd ? std::cos(kx * x + 0.3) : -std::sin(kx * x)) * std::pow(y, p);
    });
    Field py = Field::from_function(g, [&](double x, double y) {
      return p == 0 ? 0.0 : (odd ? std::sin(kx * x + 0.3) : std::cos(kx * x)) * p * std::pow(y, p - 1);
    });
    Field t1(g), t2(g), t4(g);
    for (std::size_t k = 0; k < t1.size(); ++k) {
      const double J = b.J[k];
      const double gq0 = qx[k] + b.a10[k] * qy[k], gq1 = b.a11[k] * qy[k];
      const double gp0 = px[k] + b.a10[k] * py[k], gp1 = b.a11[k] * py[k];
      t1[k] = q_t[k] * phi[k] * J;
      t2[k] = (gq0 * gp0 + gq1 * gp1) * J;
      t4[k] = src[k] * phi[k] * J;
    }
    BoundaryField t3(g.nx()), t5(g.nx());
    for (int i = 0; i < g.nx(); ++i) {
      t3[i] = k2inv * s.q(i, 0) * phi(i, 0);
      t5[i] = beta[i] * phi(i, 0);
    }
    const double I1 = integrate(t1), I2 = integrate(t2), I3 = integrate(t3), I4 = integrate(t4), I5 = integrate(t5);
    const double scale = std::abs(I1) + std::abs(I2) + std::abs(I3) + std::abs(I4) + std::abs(I5);
    worst = std::max(worst, std::abs(I1 + I2 + I3 - I5 - I4));
    largest = std::max(largest, scale);
  }
  return largest > 0.0 ? worst / largest : 0.0;
}

}  // namespace stefan
