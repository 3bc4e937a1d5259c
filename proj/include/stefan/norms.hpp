#pragma once

#include "derivatives.hpp"

namespace stefan {

/// Trapezoid weights in y (sum to 1).
inline std::vector<double> trapezoid_weights(int ny) {
  std::vector<double> w(ny, 1.0 / (ny - 1));
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

/// |phi|_s = ( sum_k (1+k^2)^s |c_k|^2 )^{1/2}.
inline double boundary_norm(const BoundaryField& phi, double s) {
  const int nx = phi.nx();
  auto c = forward(phi);
  double acc = 0.0;
  for (int k = 0; k <= nx / 2; ++k)
    acc += parseval_weight(k, nx) * std::pow(1.0 + double(k) * k, s) * std::norm(c[k]);
  return std::sqrt(acc);
}

/// sum_{a<=amax} |d^a phi|_0^2.
inline double boundary_tangential_sq(const BoundaryField& phi, int amax) {
  const int nx = phi.nx();
  auto c = forward(phi);
  double acc = 0.0;
  for (int k = 0; k <= nx / 2; ++k) {
    double w = 0.0;
    for (int a = 0; a <= amax; ++a) w += std::norm(derivative_symbol(k, a, nx));
    acc += parseval_weight(k, nx) * w * std::norm(c[k]);
  }
  return acc;
}

/// int_Omega f dx dy (exact mean in x, trapezoid in y).
inline double integrate(const Field& f) {
  const Grid& g = f.grid();
  auto w = trapezoid_weights(g.ny());
  double acc = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    double r = 0.0;
    for (double v : f.row(j)) r += v;
    acc += w[j] * r;
  }
  return acc * g.hx();
}

inline double integrate(const BoundaryField& b) {
  double acc = 0.0;
  for (double v : b.data()) acc += v;
  return acc * two_pi / b.nx();
}

namespace detail {

/// sum_{a<=amax} int |d^a f|^2 over Omega.
inline double tangential_sq(const Field& f, int amax) {
  const Grid& g = f.grid();
  const int nx = g.nx();
  Spectrum s = forward(f);
  auto w = trapezoid_weights(g.ny());
  std::vector<double> kw(nx / 2 + 1, 0.0);
  for (int k = 0; k <= nx / 2; ++k) {
    for (int a = 0; a <= amax; ++a) kw[k] += std::norm(derivative_symbol(k, a, nx));
    kw[k] *= parseval_weight(k, nx);
  }
  double acc = 0.0;
  for (int j = 0; j < g.ny(); ++j) {
    double r = 0.0;
    for (int k = 0; k <= nx / 2; ++k) r += kw[k] * std::norm(s(k, j));
    acc += w[j] * r;
  }
  return two_pi * acc;
}

}  // namespace detail

/// sum_{a<=amax} ||d^a f||^2_{L2(Omega)}.
inline double interior_tangential_sq(const Field& f, int amax) { return detail::tangential_sq(f, amax); }

/// ||f||_s^2 = sum_{a+b<=s} ||d^a d_y^b f||^2, s <= 5.
inline double interior_norm_sq(const Field& f, int s) {
  if (s < 0 || s > 5) throw Error(ErrorKind::unsupported, "interior norm order must be 0..5");
  double acc = 0.0;
  for (int b = 0; b <= s; ++b) acc += detail::tangential_sq(vertical_derivative_composed(f, b), s - b);
  return acc;
}

inline double interior_norm(const Field& f, int s) { return std::sqrt(interior_norm_sq(f, s)); }

inline double vector_tangential_sq(const VectorField& v, int amax) {
  return detail::tangential_sq(v[0], amax) + detail::tangential_sq(v[1], amax);
}

inline double vector_norm_sq(const VectorField& v, int s) {
  return interior_norm_sq(v[0], s) + interior_norm_sq(v[1], s);
}

}  // namespace stefan
