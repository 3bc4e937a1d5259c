#pragma once

#include "fourier.hpp"

namespace stefan {

/// Spectral x-derivative of order a.
inline Field tangential_derivative(const Field& f, int a) {
  const int nx = f.grid().nx();
  if (a < 0) throw Error(ErrorKind::usage, "negative derivative order");
  if (a == 0) return f;
  if (a > nx / 2 - 2) throw Error(ErrorKind::resolution, "tangential order exceeds nx/2-2");
  return apply_multiplier(f, [&](int k) { return derivative_symbol(k, a, nx); });
}

inline BoundaryField tangential_derivative(const BoundaryField& b, int a) {
  const int nx = b.nx();
  if (a < 0) throw Error(ErrorKind::usage, "negative derivative order");
  if (a == 0) return b;
  if (a > nx / 2 - 2) throw Error(ErrorKind::resolution, "tangential order exceeds nx/2-2");
  return apply_multiplier(b, [&](int k) { return derivative_symbol(k, a, nx); });
}

namespace detail {

inline Field dy1(const Field& f) {
  const Grid& g = f.grid();
  const int nx = g.nx(), N = g.ny();
  const double c = 1.0 / (2.0 * g.hy());
  Field out(g);
  for (int i = 0; i < nx; ++i) {
    out(i, 0) = c * (-3.0 * f(i, 0) + 4.0 * f(i, 1) - f(i, 2));
    out(i, N - 1) = c * (3.0 * f(i, N - 1) - 4.0 * f(i, N - 2) + f(i, N - 3));
  }
  for (int j = 1; j < N - 1; ++j)
    for (int i = 0; i < nx; ++i) out(i, j) = c * (f(i, j + 1) - f(i, j - 1));
  return out;
}

inline Field dy2(const Field& f) {
  const Grid& g = f.grid();
  const int nx = g.nx(), N = g.ny();
  const double c = 1.0 / (g.hy() * g.hy());
  Field out(g);
  for (int i = 0; i < nx; ++i) {
    out(i, 0) = c * (2.0 * f(i, 0) - 5.0 * f(i, 1) + 4.0 * f(i, 2) - f(i, 3));
    out(i, N - 1) = c * (2.0 * f(i, N - 1) - 5.0 * f(i, N - 2) + 4.0 * f(i, N - 3) - f(i, N - 4));
  }
  for (int j = 1; j < N - 1; ++j)
    for (int i = 0; i < nx; ++i) out(i, j) = c * (f(i, j + 1) - 2.0 * f(i, j) + f(i, j - 1));
  return out;
}

}  // namespace detail

/// Second-order finite-difference y-derivative, b in {1, 2}; one-sided at both ends.
inline Field vertical_derivative(const Field& f, int b) {
  if (f.grid().ny() < 4) throw Error(ErrorKind::configuration, "ny too small for stencil");
  if (b == 1) return detail::dy1(f);
  if (b == 2) return detail::dy2(f);
  throw Error(ErrorKind::usage, "vertical_derivative supports b in {1,2}");
}

/// y-derivative of any order 0..5 composed from the second-order stencils.
/// Orders above 3 are low-confidence (errors compound at the ends).
inline Field vertical_derivative_composed(const Field& f, int b) {
  switch (b) {
    case 0: return f;
    case 1: return detail::dy1(f);
    case 2: return detail::dy2(f);
    case 3: return detail::dy1(detail::dy2(f));
    case 4: return detail::dy2(detail::dy2(f));
    case 5: return detail::dy1(detail::dy2(detail::dy2(f)));
    default: throw Error(ErrorKind::unsupported, "y-derivative order above 5");
  }
}

/// One-sided y-derivative at the bottom layer only (Gamma).
inline BoundaryField bottom_dy(const Field& f) {
  const Grid& g = f.grid();
  BoundaryField out(g.nx());
  const double c = 1.0 / (2.0 * g.hy());
  for (int i = 0; i < g.nx(); ++i) out[i] = c * (-3.0 * f(i, 0) + 4.0 * f(i, 1) - f(i, 2));
  return out;
}

/// Four-point one-sided q_y on Gamma, exact on cubics in y.
inline BoundaryField bottom_dy4(const Field& f) {
  const Grid& g = f.grid();
  BoundaryField out(g.nx());
  const double c = 1.0 / (6.0 * g.hy());
  for (int i = 0; i < g.nx(); ++i) out[i] = c * (-11.0 * f(i, 0) + 18.0 * f(i, 1) - 9.0 * f(i, 2) + 2.0 * f(i, 3));
  return out;
}

inline BoundaryField top_dy(const Field& f) {
  const Grid& g = f.grid();
  const int N = g.ny();
  BoundaryField out(g.nx());
  const double c = 1.0 / (2.0 * g.hy());
  for (int i = 0; i < g.nx(); ++i) out[i] = c * (3.0 * f(i, N - 1) - 4.0 * f(i, N - 2) + f(i, N - 3));
  return out;
}

struct Gradient2 {
  Field d1, d2, d11, d12, d22;
};

/// First and second derivatives of a scalar field in one pass.
inline Gradient2 derivatives_to_second(const Field& f) {
  const int nx = f.grid().nx();
  Spectrum s = forward(f);
  Spectrum s1 = s, s11 = s;
  for (int j = 0; j < s.ny; ++j)
    for (int k = 0; k < s.ncoef(); ++k) {
      s1(k, j) *= derivative_symbol(k, 1, nx);
      s11(k, j) *= derivative_symbol(k, 2, nx);
    }
  Gradient2 out;
  out.d1 = inverse(s1, f.grid());
  out.d11 = inverse(s11, f.grid());
  out.d2 = detail::dy1(f);
  out.d22 = detail::dy2(f);
  out.d12 = detail::dy1(out.d1);
  return out;
}

}  // namespace stefan
