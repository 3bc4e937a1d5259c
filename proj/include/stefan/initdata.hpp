#pragma once

#include <array>
#include <string>

#include "modal_solve.hpp"
#include "mollifier.hpp"
#include "quadrature.hpp"

namespace stefan {

enum class Datum { classical, sigma, inverted, zero };

inline Datum parse_datum(const std::string& s) {
  if (s == "classical") return Datum::classical;
  if (s == "sigma") return Datum::sigma;
  if (s == "inverted") return Datum::inverted;
  if (s == "zero") return Datum::zero;
  throw Error(ErrorKind::configuration, "unknown datum '" + s + "'");
}

inline const char* to_string(Datum d) {
  switch (d) {
    case Datum::classical: return "classical";
    case Datum::sigma: return "sigma";
    case Datum::inverted: return "inverted";
    case Datum::zero: return "zero";
  }
  return "?";
}

struct DataSpec {
  Datum datum = Datum::classical;
  double alpha = 1.0;       // Taylor margin of the classical datum
  double eps_slab = 0.25;   // q0 is the exact quadratic on [0, eps_slab]
  double taper_end = 0.75;  // q0 is constant on [taper_end, 1]
  double sigma = 0.0;
  double b_amplitude = 1.0;  // sigma-family profile b(x) = b_amplitude cos(b_mode x)
  int b_mode = 1;
  double h0_amplitude = 0.0;  // h0 = h0_amplitude cos(h0_mode x)
  int h0_mode = 1;

  void validate() const {
    if (!(alpha > 0.0)) throw Error(ErrorKind::configuration, "alpha must be positive");
    if (!(eps_slab > 0.0) || !(taper_end > eps_slab) || !(taper_end < 1.0))
      throw Error(ErrorKind::configuration, "need 0 < eps_slab < taper_end < 1");
    if (alpha * eps_slab >= 1.0)
      throw Error(ErrorKind::configuration, "blend produces q0_y <= 0 inside the slab (alpha*eps_slab >= 1)");
    if (sigma < 0.0) throw Error(ErrorKind::configuration, "sigma must be >= 0");
  }
};

/// Smooth cutoff: 1 on [0, a], 0 on [b, 1], C-infinity in between.
class Cutoff {
 public:
  Cutoff(double a, double b) : a_(a), b_(b) {}
  double operator()(double y) const {
    if (y <= a_) return 1.0;
    if (y >= b_) return 0.0;
    const double t = (y - a_) / (b_ - a_);
    const double p = psi(1.0 - t), q = psi(t);
    return p / (p + q);
  }

 private:
  static double psi(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
  double a_, b_;
};

/// Slab profiles Y1(y) = int_0^y chi and Y2(y) = int_0^y s chi(s) ds; the
/// classical datum is a Y1 + c Y2, which is a y + c y^2/2 on the slab.
class ClassicalProfile {
 public:
  explicit ClassicalProfile(const DataSpec& s) : eps_(s.eps_slab), end_(s.taper_end), chi_(s.eps_slab, s.taper_end) {
    s.validate();
    plateau_ = {moment(end_, 0), moment(end_, 1)};
    have_plateau_ = true;
  }

  /// int_0^y s^p chi(s) ds for p = 0, 1.
  double moment(double y, int p) const {
    const double e = std::min(y, eps_);
    double v = p == 0 ? e : 0.5 * e * e;
    if (y <= eps_) return v;
    if (y >= end_ && have_plateau_) return plateau_[p];
    const double top = std::min(y, end_);
    // composite rule on sub-intervals of width <= 1/64
    const int pieces = std::max(1, static_cast<int>(std::ceil((top - eps_) * 64)));
    const double w = (top - eps_) / pieces;
    for (int k = 0; k < pieces; ++k)
      v += integrate_gl([&](double s) { return (p == 0 ? 1.0 : s) * chi_(s); }, eps_ + k * w, eps_ + (k + 1) * w, 24);
    return v;
  }

  /// The flat-interface datum a y - a^2 y^2 / 2 on the slab.
  double value(double y, double a) const { return a * moment(y, 0) - a * a * moment(y, 1); }
  const Cutoff& cutoff() const { return chi_; }

 private:
  double eps_, end_;
  Cutoff chi_;
  std::array<double, 2> plateau_{};
  bool have_plateau_ = false;
};

struct InitialData {
  Field q0;
  BoundaryField h0;
};

inline BoundaryField initial_height(const DataSpec& s, const Grid& g) {
  return BoundaryField::from_function(g.nx(), [&](double x) { return s.h0_amplitude * std::cos(s.h0_mode * x); });
}

/// Classical datum with slope a = +-alpha on Gamma. On a flat interface the
/// y^2 coefficient is -a^2; on a curved one it is chosen pointwise so that
/// Delta_Psi q0 + J^-2 g^2 (q0_y)^2 = 0 on Gamma.
inline Field classical_field(const DataSpec& s, const Grid& g, const BoundaryField& h0, double a) {
  ClassicalProfile p(s);
  BoundaryField c(g.nx(), -a * a);
  if (h0.max_abs() > 0.0) {
    MetricBundle b = metric_bundle(h0, g);
    for (int i = 0; i < g.nx(); ++i) {
      const double a10 = b.a10(i, 0), a11 = b.a11(i, 0);
      const double lower = b.a10_x(i, 0) + a10 * b.a10_y(i, 0) + a11 * b.a11_y(i, 0);
      c[i] = -a * a - lower * a / (a10 * a10 + a11 * a11);
    }
  }
  Field q(g);
  for (int j = 0; j < g.ny(); ++j) {
    const double y = g.y(j), m0 = p.moment(y, 0), m1 = p.moment(y, 1);
    for (int i = 0; i < g.nx(); ++i) q(i, j) = a * m0 + c[i] * m1;
  }
  return q;
}

inline InitialData build_classical_data(const DataSpec& s, const Grid& g) {
  s.validate();
  BoundaryField h0 = initial_height(s, g);
  return {classical_field(s, g, h0, s.alpha), h0};
}

/// q0^sigma = q0 + sigma b(x) y^3 chi(y) with a flat interface.
inline InitialData build_sigma_data(const DataSpec& s, const Grid& g) {
  s.validate();
  Field q = classical_field(s, g, BoundaryField(g.nx()), s.alpha);
  Cutoff chi(s.eps_slab, s.taper_end);
  for (int j = 0; j < g.ny(); ++j) {
    const double y = g.y(j), m = y * y * y * chi(y);
    for (int i = 0; i < g.nx(); ++i) q(i, j) += s.sigma * s.b_amplitude * std::cos(s.b_mode * g.x(i)) * m;
  }
  return {std::move(q), BoundaryField(g.nx())};
}

inline InitialData build_data(const DataSpec& s, const Grid& g) {
  switch (s.datum) {
    case Datum::classical: return build_classical_data(s, g);
    case Datum::sigma: return build_sigma_data(s, g);
    case Datum::inverted: {
      // slope -alpha on Gamma, still compatible
      s.validate();
      BoundaryField h0 = initial_height(s, g);
      return {classical_field(s, g, h0, -s.alpha), h0};
    }
    case Datum::zero: return {Field(g), initial_height(s, g)};
  }
  throw Error(ErrorKind::configuration, "unknown datum");
}

inline double taylor_margin(const Field& q) { return bottom_dy(q).min(); }

struct CompatReport {
  double r_dirichlet = 0.0;        // q0 - sigma H on Gamma
  double r_second = 0.0;           // Delta_Psi q0 + J^-2 g^2 q0_y^2 - sigma C on Gamma
  double r_second_unsquared = 0.0; // same with q0_y to the first power
  double r_flat_sigma = 0.0;       // q_yy + q_y^2 - sigma q_yxx on Gamma (flat interface only)
  double taylor_margin = 0.0;
  double neumann_top = 0.0;
  bool flat = true;

  /// Trace conditions only; the Taylor sign is judged separately.
  bool consistent(double tol = 1e-6) const { return r_dirichlet <= tol && r_second <= tol && neumann_top <= tol; }
  bool passes(double tol = 1e-6) const { return consistent(tol) && taylor_margin > 0.0; }
};

/// The higher-order compatibility functional for sigma > 0.
inline BoundaryField compat_C(const Field& q, const MetricBundle& b) {
  const int nx = q.grid().nx();
  Field q1 = tangential_derivative(q, 1);
  BoundaryField q2 = bottom_dy4(q);
  BoundaryField gN(nx), q0 = trace(q);
  for (int i = 0; i < nx; ++i) {
    const double g0 = q1(i, 0) + b.a10(i, 0) * q2[i], g1 = b.a11(i, 0) * q2[i];
    gN[i] = b.g[i] * (g0 * b.n1[i] + g1 * b.n2[i]);
  }
  BoundaryField d1 = tangential_derivative(gN, 1), d2 = tangential_derivative(gN, 2);
  BoundaryField H = mean_curvature(b.map.h), dH = tangential_derivative(H, 1);
  BoundaryField out(nx);
  for (int i = 0; i < nx; ++i) {
    const double g = b.g[i];
    out[i] = -(d2[i] / (g * g * g) + 3.0 * q0[i] / (g * g) * d1[i] * b.hx[i]) - dH[i] * g * b.n1[i] * b.a11(i, 0) * q2[i];
  }
  return out;
}

inline CompatReport compat_residuals(const Field& q0, const BoundaryField& h0, double sigma) {
  MetricBundle b = metric_bundle(h0, q0.grid());
  const int nx = q0.grid().nx();
  CompatReport r;
  r.flat = h0.max_abs() == 0.0;
  BoundaryField H = mean_curvature(h0), q2 = bottom_dy4(q0);
  BoundaryField lap = trace(transformed_laplacian(q0, b));
  BoundaryField C = sigma > 0.0 ? compat_C(q0, b) : BoundaryField(nx);
  for (int i = 0; i < nx; ++i) {
    const double J = b.J(i, 0), g = b.g[i];
    r.r_dirichlet = std::max(r.r_dirichlet, std::abs(q0(i, 0) - sigma * H[i]));
    const double w = g * g / (J * J);
    r.r_second = std::max(r.r_second, std::abs(lap[i] + w * q2[i] * q2[i] - sigma * C[i]));
    r.r_second_unsquared = std::max(r.r_second_unsquared, std::abs(lap[i] + w * q2[i] - sigma * C[i]));
  }
  if (r.flat) {
    Field q22 = vertical_derivative(q0, 2);
    BoundaryField q211 = tangential_derivative(q2, 2);
    for (int i = 0; i < nx; ++i)
      r.r_flat_sigma = std::max(r.r_flat_sigma, std::abs(q22(i, 0) + q2[i] * q2[i] - sigma * q211[i]));
  }
  r.taylor_margin = taylor_margin(q0);
  r.neumann_top = top_dy(q0).max_abs();
  return r;
}

struct KappaData {
  Field Q;                  // regularized initial temperature
  Field R;                  // Delta_{Psi0^kappa} Q
  BoundaryField R_gamma;    // -J0^-2 g0^2 (q0_y)^2 on Gamma
  double trace_dirichlet = 0.0;
  double trace_second = 0.0;
  double taylor_margin = 0.0;
  int iterations = 0;
};

/// Q0^kappa: Delta_{Psi_k} R = eta_kappa * E(Delta_Psi0 Delta_Psi0 q0), R = R_gamma on Gamma,
/// then Delta_{Psi_k} Q = R, Q = 0 on Gamma; Neumann at y = 1 for both.
inline KappaData build_Q0_kappa(const Field& q0, const BoundaryField& h0, double kappa, double tol = 1e-10,
                                int max_iter = 200) {
  const Grid& g = q0.grid();
  MetricBundle b0 = metric_bundle(h0, g);
  MetricBundle bk = metric_bundle(smooth_twice(h0, kappa), g);
  Field f = transformed_laplacian(transformed_laplacian(q0, b0), b0);
  Field fk = smooth_2d(f, kappa);
  KappaData out;
  out.R_gamma = BoundaryField(g.nx());
  BoundaryField q2 = bottom_dy4(q0);
  for (int i = 0; i < g.nx(); ++i) {
    const double J = b0.J(i, 0), gg = b0.g[i];
    out.R_gamma[i] = -gg * gg / (J * J) * q2[i] * q2[i];
  }
  EllipticStats s1, s2;
  out.R = solve_transformed_poisson(bk, fk, out.R_gamma, tol, max_iter, &s1);
  out.Q = solve_transformed_poisson(bk, out.R, BoundaryField(g.nx()), tol, max_iter, &s2);
  out.iterations = s1.iterations + s2.iterations;
  out.trace_dirichlet = trace(out.Q).max_abs();
  out.trace_second = (trace(transformed_laplacian(out.Q, bk)) - out.R_gamma).max_abs();
  out.taylor_margin = taylor_margin(out.Q);
  return out;
}

}  // namespace stefan
