#pragma once

#include "norms.hpp"

namespace stefan {

/// Psi = Id + Phi with Phi^1 = 0 and Phi^2 the harmonic extension of h that
/// vanishes on y = 1. Derivatives of Phi^2 are exact per Fourier mode.
struct HarmonicMap {
  BoundaryField h;
  Field phi, phi_x, phi_y, phi_xx, phi_xy, phi_yy;

  const Grid& grid() const { return phi.grid(); }

  /// Components of Psi = (x, y + Phi^2).
  VectorField psi() const {
    const Grid& g = grid();
    VectorField out(g);
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        out[0](i, j) = g.x(i);
        out[1](i, j) = g.y(j) + phi(i, j);
      }
    return out;
  }
};

namespace detail {

/// sinh(k(1-y))/sinh(k) and its first y-derivative, stable for large k.
inline void extension_profile(int k, double y, double& s, double& ds) {
  if (k == 0) {
    s = 1.0 - y;
    ds = -1.0;
    return;
  }
  const double kk = k;
  const double e2 = std::exp(-2.0 * kk);
  const double a = std::exp(-kk * y), b = std::exp(-kk * (2.0 - y));
  s = (a - b) / (1.0 - e2);
  ds = -kk * (a + b) / (1.0 - e2);
}

}  // namespace detail

/// Linear harmonic extension without the graph check; used for rates such as h_t.
inline HarmonicMap extend_displacement(const BoundaryField& h, const Grid& g) {
  if (h.nx() != g.nx()) throw Error(ErrorKind::usage, "boundary/grid size mismatch");
  const int nx = g.nx(), nc = nx / 2 + 1;
  auto hc = forward(h);
  Spectrum s0{nx, g.ny(), std::vector<cplx>(static_cast<std::size_t>(g.ny()) * nc)};
  Spectrum sx = s0, sy = s0, sxx = s0, sxy = s0, syy = s0;
  for (int j = 0; j < g.ny(); ++j)
    for (int k = 0; k < nc; ++k) {
      double p, dp;
      detail::extension_profile(k, g.y(j), p, dp);
      const cplx d1 = derivative_symbol(k, 1, nx), d2 = derivative_symbol(k, 2, nx);
      s0(k, j) = hc[k] * p;
      sy(k, j) = hc[k] * dp;
      syy(k, j) = hc[k] * (double(k) * k * p);
      sx(k, j) = d1 * s0(k, j);
      sxx(k, j) = d2 * s0(k, j);
      sxy(k, j) = d1 * sy(k, j);
    }
  HarmonicMap m{h,
                inverse(s0, g),
                inverse(sx, g),
                inverse(sy, g),
                inverse(sxx, g),
                inverse(sxy, g),
                inverse(syy, g)};
  for (int i = 0; i < nx; ++i) {
    m.phi(i, 0) = h[i];
    m.phi(i, g.ny() - 1) = 0.0;
  }
  return m;
}

/// max |dh|^2 on Gamma.
inline double graph_slope_sq(const BoundaryField& h) {
  double m = tangential_derivative(h, 1).max_abs();
  return m * m;
}

/// Harmonic extension of a graph satisfying |dh|^2 <= bound.
inline HarmonicMap harmonic_extend(const BoundaryField& h, const Grid& g, double bound = 0.5) {
  if (!h.finite()) throw Error(ErrorKind::invalid_geometry, "non-finite height");
  if (graph_slope_sq(h) > bound) throw Error(ErrorKind::invalid_geometry, "graph condition |dh|^2 <= 1/2 violated");
  return extend_displacement(h, g);
}

/// Pull-back quantities of Psi. Index convention: a[k][i] = A^k_i, so
/// (grad_Psi q)_i = sum_k a[k][i] q_{,k}.
struct MetricBundle {
  HarmonicMap map;
  Field J;
  Field a10, a11;                         // a[1][0] = -Phi_x/J, a[1][1] = 1/J
  Field a10_x, a10_y, a11_x, a11_y;       // exact derivatives from the modal map
  BoundaryField hx, g;                    // dh and sqrt(1+dh^2)
  BoundaryField n1, n2, tau1, tau2;       // unit normal and tangent on Gamma
  VectorField avert;                      // J^{-1}(Phi_x, -1)

  const Grid& grid() const { return J.grid(); }

  /// Entry A^k_i as a field.
  Field A(int k, int i) const {
    if (k == 0) return Field(grid(), i == 0 ? 1.0 : 0.0);
    return i == 0 ? a10 : a11;
  }
};

inline MetricBundle metric_bundle(const HarmonicMap& m) {
  const Grid& grid = m.grid();
  MetricBundle b{m, Field(grid), Field(grid), Field(grid), Field(grid), Field(grid), Field(grid), Field(grid),
                 BoundaryField(grid.nx()), BoundaryField(grid.nx()), BoundaryField(grid.nx()),
                 BoundaryField(grid.nx()), BoundaryField(grid.nx()), BoundaryField(grid.nx()), VectorField(grid)};
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double J = 1.0 + m.phi_y[k];
    if (!(J > 0.0)) throw Error(ErrorKind::degenerate_map, "Jacobian J <= 0");
    const double Jx = m.phi_xy[k], Jy = m.phi_yy[k], p1 = m.phi_x[k];
    b.J[k] = J;
    b.a10[k] = -p1 / J;
    b.a11[k] = 1.0 / J;
    b.a10_x[k] = -m.phi_xx[k] / J + p1 * Jx / (J * J);
    b.a10_y[k] = -m.phi_xy[k] / J + p1 * Jy / (J * J);
    b.a11_x[k] = -Jx / (J * J);
    b.a11_y[k] = -Jy / (J * J);
    b.avert[0][k] = p1 / J;
    b.avert[1][k] = -1.0 / J;
  }
  for (int i = 0; i < grid.nx(); ++i) {
    const double hx = m.phi_x(i, 0);
    const double g = std::sqrt(1.0 + hx * hx);
    b.hx[i] = hx;
    b.g[i] = g;
    b.n1[i] = hx / g;
    b.n2[i] = -1.0 / g;
    b.tau1[i] = 1.0 / g;
    b.tau2[i] = hx / g;
    // n must also equal J g^{-1} A^T N with N = (0,-1)
    const double J = b.J(i, 0);
    const double c1 = -J / g * b.a10(i, 0), c2 = -J / g * b.a11(i, 0);
    if (std::abs(c1 - b.n1[i]) + std::abs(c2 - b.n2[i]) > 1e-8)
      throw Error(ErrorKind::numerical, "normal identities disagree");
  }
  return b;
}

inline MetricBundle metric_bundle(const BoundaryField& h, const Grid& g, double bound = 0.5) {
  return metric_bundle(harmonic_extend(h, g, bound));
}

/// Mean curvature -h''/(1+h'^2)^{3/2} of the graph.
inline BoundaryField mean_curvature(const BoundaryField& h) {
  BoundaryField h1 = tangential_derivative(h, 1), h2 = tangential_derivative(h, 2);
  BoundaryField out(h.nx());
  for (int i = 0; i < h.nx(); ++i) out[i] = -h2[i] / std::pow(1.0 + h1[i] * h1[i], 1.5);
  return out;
}

}  // namespace stefan
