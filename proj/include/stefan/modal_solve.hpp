#pragma once

#include <array>

#include "operators.hpp"

namespace stefan {

/// Three-point boundary row: c[0] u_end + c[1] u_next + c[2] u_next2 = value.
struct BoundaryRow {
  std::array<double, 3> c;

  static BoundaryRow dirichlet() { return {{1.0, 0.0, 0.0}}; }
  /// One-sided second-order flux u_y at the top, written from the end inward.
  static BoundaryRow neumann_top(double hy) { return {{3.0 / (2 * hy), -4.0 / (2 * hy), 1.0 / (2 * hy)}}; }
  /// u + beta u_y = value at y = 0 with one-sided u_y.
  static BoundaryRow robin_bottom(double beta, double hy) {
    return {{1.0 - 3.0 * beta / (2 * hy), 4.0 * beta / (2 * hy), -beta / (2 * hy)}};
  }
};

namespace detail {

/// Solves lambda u_j - mu (u_{j+1} - 2u_j + u_{j-1})/h^2 = r_j for j = 1..N-2 with
/// boundary rows at j = 0 and j = N-1 (r[0], r[N-1] carry the boundary values).
inline void solve_mode(double lambda, double mu, double hy, const BoundaryRow& bot, const BoundaryRow& top,
                       std::vector<cplx>& r) {
  const int N = static_cast<int>(r.size());
  const double l = -mu / (hy * hy), d = lambda + 2.0 * mu / (hy * hy), u = l;
  std::vector<double> lo(N, l), di(N, d), up(N, u);
  // bottom row, eliminate the u_2 coefficient with row 1
  {
    const double f = bot.c[2] / u;
    di[0] = bot.c[0] - f * l;
    up[0] = bot.c[1] - f * d;
    r[0] -= f * r[1];
    lo[0] = 0.0;
  }
  {
    const double f = top.c[2] / l;
    di[N - 1] = top.c[0] - f * u;
    lo[N - 1] = top.c[1] - f * d;
    r[N - 1] -= f * r[N - 2];
    up[N - 1] = 0.0;
  }
  // Thomas
  std::vector<double> cp(N);
  std::vector<cplx> rp(N);
  cp[0] = up[0] / di[0];
  rp[0] = r[0] / di[0];
  for (int j = 1; j < N; ++j) {
    const double m = di[j] - lo[j] * cp[j - 1];
    if (m == 0.0) throw Error(ErrorKind::numerical, "singular modal system");
    cp[j] = up[j] / m;
    rp[j] = (r[j] - lo[j] * rp[j - 1]) / m;
  }
  r[N - 1] = rp[N - 1];
  for (int j = N - 2; j >= 0; --j) r[j] = rp[j] - cp[j] * r[j + 1];
}

}  // namespace detail

/// Per-Fourier-mode solve of lambda(k) u - mu u_yy (with -mu d_x^2 folded into
/// lambda by the caller) subject to boundary rows. rhs rows 0 and N-1 are
/// replaced by the boundary values.
template <class Lambda>
Field solve_modal(const Field& rhs, const BoundaryField& bottom_value, const BoundaryField& top_value, double mu,
                  Lambda&& lambda, const BoundaryRow& bot, const BoundaryRow& top) {
  const Grid& g = rhs.grid();
  const int N = g.ny();
  Spectrum s = forward(rhs);
  auto bv = forward(bottom_value), tv = forward(top_value);
  std::vector<cplx> col(N);
  for (int k = 0; k < s.ncoef(); ++k) {
    for (int j = 0; j < N; ++j) col[j] = s(k, j);
    col[0] = bv[k];
    col[N - 1] = tv[k];
    detail::solve_mode(lambda(k), mu, g.hy(), bot, top, col);
    for (int j = 0; j < N; ++j) s(k, j) = col[j];
  }
  return inverse(s, g);
}

/// Delta u = f with u = d on Gamma and u_y = 0 on y = 1 (flat operator).
inline Field solve_flat_poisson(const Field& f, const BoundaryField& d) {
  const Grid& g = f.grid();
  return solve_modal(-1.0 * f, d, BoundaryField(g.nx()), 1.0, [](int k) { return double(k) * k; },
                     BoundaryRow::dirichlet(), BoundaryRow::neumann_top(g.hy()));
}

struct EllipticStats {
  int iterations = 0;
  double last_update = 0.0;
};

/// Delta_Psi u = f with u = d on Gamma, u_y = 0 on y = 1, by fixed-point
/// iteration around the flat Laplacian.
inline Field solve_transformed_poisson(const MetricBundle& b, const Field& f, const BoundaryField& d,
                                       double tol = 1e-10, int max_iter = 200, EllipticStats* stats = nullptr) {
  Field u = solve_flat_poisson(f, d);
  for (int it = 1; it <= max_iter; ++it) {
    Field defect = transformed_laplacian(u, b) - flat_laplacian(u);
    Field next = solve_flat_poisson(f - defect, d);
    const double change = (next - u).max_abs();
    const double scale = std::max(1.0, next.max_abs());
    u = std::move(next);
    if (!std::isfinite(change)) break;
    if (change <= tol * scale) {
      if (stats) *stats = {it, change};
      return u;
    }
    if (stats) *stats = {it, change};
  }
  throw Error(ErrorKind::numerical, "transformed Poisson iteration did not converge");
}

}  // namespace stefan
