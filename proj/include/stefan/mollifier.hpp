#pragma once

#include <algorithm>
#include <mutex>

#include "norms.hpp"
#include "quadrature.hpp"

namespace stefan {

/// Unnormalized bump exp(-1/(1-r^2)) on |r| < 1.
inline double bump(double r2) { return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0; }

/// One-dimensional kernel rho = c exp(-1/(1-x^2)) with unit mass, and its
/// scaled Fourier multiplier int rho_kappa(s) cos(k s) ds.
class Kernel1D {
 public:
  static constexpr int samples = 4096;

  static const Kernel1D& get() {
    static const Kernel1D k;
    return k;
  }

  double normalization() const { return c_; }
  double operator()(double x) const { return c_ * bump(x * x); }

  /// Multiplier for mode k of the periodic convolution with rho_kappa.
  double multiplier(int k, double kappa) const {
    if (k == 0) return 1.0;
    double acc = 0.0;
    for (std::size_t m = 0; m < z_.size(); ++m) acc += w_[m] * std::cos(k * kappa * z_[m]);
    return acc;
  }

 private:
  Kernel1D() {
    // trapezoid on [-1,1]; the integrand is flat to all orders at the ends
    const double h = 2.0 / samples;
    double mass = 0.0;
    for (int m = 1; m < samples; ++m) {
      const double z = -1.0 + h * m;
      z_.push_back(z);
      w_.push_back(h * bump(z * z));
      mass += w_.back();
    }
    for (auto& w : w_) w /= mass;
    c_ = 1.0 / mass;
  }

  double c_ = 0.0;
  std::vector<double> z_, w_;
};

/// Lambda_kappa: horizontal convolution with rho_kappa, applied per Fourier mode.
inline BoundaryField smooth_horizontal(const BoundaryField& f, double kappa) {
  if (!(kappa > 0.0) || kappa >= std::numbers::pi) throw Error(ErrorKind::configuration, "kappa must lie in (0, pi)");
  const auto& K = Kernel1D::get();
  return apply_multiplier(f, [&](int k) { return cplx(K.multiplier(k, kappa)); });
}

inline Field smooth_horizontal(const Field& f, double kappa) {
  if (!(kappa > 0.0) || kappa >= std::numbers::pi) throw Error(ErrorKind::configuration, "kappa must lie in (0, pi)");
  const auto& K = Kernel1D::get();
  std::vector<double> m(f.grid().nx() / 2 + 1);
  for (int k = 0; k < static_cast<int>(m.size()); ++k) m[k] = K.multiplier(k, kappa);
  return apply_multiplier(f, [&](int k) { return cplx(m[k]); });
}

/// Lambda_kappa Lambda_kappa h.
inline BoundaryField smooth_twice(const BoundaryField& f, double kappa) {
  const auto& K = Kernel1D::get();
  if (!(kappa > 0.0) || kappa >= std::numbers::pi) throw Error(ErrorKind::configuration, "kappa must lie in (0, pi)");
  return apply_multiplier(f, [&](int k) {
    const double m = K.multiplier(k, kappa);
    return cplx(m * m);
  });
}

namespace detail {

/// Hat-basis convolution weights w[k][d], d = 0..D, of the 2-D kernel
/// eta_kappa restricted to x-mode k, on a uniform y-grid of spacing hy.
struct SmoothingStencil {
  int D = 0;
  std::vector<std::vector<double>> w;
};

inline SmoothingStencil build_smoothing_stencil(int nx, double hy, double kappa) {
  const int nc = nx / 2 + 1;
  SmoothingStencil st;
  st.D = static_cast<int>(std::ceil(kappa / hy)) + 1;
  st.w.assign(nc, std::vector<double>(st.D + 1, 0.0));
  const auto outer = gauss_legendre(24);
  const auto inner = gauss_legendre(48);
  // K_k(s) = kappa^{-1} int eta(zeta, s/kappa) cos(k kappa zeta) d zeta over |zeta| < sqrt(1-sigma^2)
  auto marginal = [&](double s, std::vector<double>& out) {
    std::fill(out.begin(), out.end(), 0.0);
    const double sig = std::abs(s) / kappa;
    if (sig >= 1.0) return;
    const double L = std::sqrt(1.0 - sig * sig);
    for (std::size_t q = 0; q < inner.x.size(); ++q) {
      const double zeta = 0.5 * L * (inner.x[q] + 1.0);  // [0, L], even integrand
      const double e = bump(zeta * zeta + sig * sig) * inner.w[q] * L / kappa;
      for (int k = 0; k < nc; ++k) out[k] += e * std::cos(k * kappa * zeta);
    }
  };
  std::vector<double> Kk(nc);
  for (int d = 0; d <= st.D; ++d)
    for (int side = 0; side < 2; ++side)
      for (std::size_t q = 0; q < outer.x.size(); ++q) {
        const double u = 0.5 * hy * (outer.x[q] + 1.0) * (side == 0 ? 1.0 : -1.0);
        const double hat = 1.0 - std::abs(u) / hy;
        marginal(d * hy + u, Kk);
        for (int k = 0; k < nc; ++k) st.w[k][d] += 0.5 * hy * outer.w[q] * hat * Kk[k];
      }
  double mass = st.w[0][0];
  for (int d = 1; d <= st.D; ++d) mass += 2.0 * st.w[0][d];
  for (auto& wk : st.w)
    for (auto& x : wk) x /= mass;
  return st;
}

}  // namespace detail

namespace detail {

/// Degree-5 Lagrange interpolation of a layer at fractional row position p.
inline cplx interpolate_row(const Spectrum& s, int k, double p) {
  const int N = s.ny;
  const int r = static_cast<int>(std::floor(p));
  if (r == p) return s(k, r);
  const int lo = std::clamp(r - 2, 0, N - 6);
  cplx acc = 0.0;
  for (int a = lo; a < lo + 6; ++a) {
    double l = 1.0;
    for (int b = lo; b < lo + 6; ++b)
      if (b != a) l *= (p - b) / double(a - b);
    acc += l * s(k, a);
  }
  return acc;
}

}  // namespace detail

/// eta_kappa * E(f): isotropic 2-D mollification after a C^2 reflection
/// f(-y) = 16f(y/4) - 20f(y/2) + 5f(y) across y = 0 (and the mirror rule at y = 1).
/// The reflected value at depth s only uses f on [0, s].
inline Field smooth_2d(const Field& f, double kappa) {
  const Grid& g = f.grid();
  if (!(kappa > 0.0) || kappa > 0.2) throw Error(ErrorKind::configuration, "smooth_2d needs 0 < kappa <= 0.2");
  const auto st = detail::build_smoothing_stencil(g.nx(), g.hy(), kappa);
  const int N = g.ny(), D = st.D;
  if (D > N - 6) throw Error(ErrorKind::resolution, "grid too coarse for reflection collar");
  Spectrum s = forward(f);
  Spectrum out = s;
  std::vector<cplx> ext(N + 2 * D);
  for (int k = 0; k < s.ncoef(); ++k) {
    for (int j = 0; j < N; ++j) ext[j + D] = s(k, j);
    for (int m = 1; m <= D; ++m) {
      ext[D - m] = 16.0 * detail::interpolate_row(s, k, 0.25 * m) - 20.0 * detail::interpolate_row(s, k, 0.5 * m) +
                   5.0 * s(k, m);
      ext[D + N - 1 + m] = 16.0 * detail::interpolate_row(s, k, N - 1 - 0.25 * m) -
                           20.0 * detail::interpolate_row(s, k, N - 1 - 0.5 * m) + 5.0 * s(k, N - 1 - m);
    }
    const auto& w = st.w[k];
    for (int j = 0; j < N; ++j) {
      cplx acc = w[0] * ext[j + D];
      for (int d = 1; d <= D; ++d) acc += w[d] * (ext[j + D + d] + ext[j + D - d]);
      out(k, j) = acc;
    }
  }
  return inverse(out, g);
}

/// |Lambda(F dG) - F Lambda(dG)|_0 / (||F||_{W^{1,inf}} |G|_0); 0 when G = 0.
inline double commutator_defect(const BoundaryField& F, const BoundaryField& G, double kappa) {
  const double g0 = boundary_norm(G, 0.0);
  if (g0 == 0.0) return 0.0;
  BoundaryField dG = tangential_derivative(G, 1);
  BoundaryField lhs = smooth_horizontal(F * dG, kappa) - F * smooth_horizontal(dG, kappa);
  const double fw = std::max(F.max_abs(), tangential_derivative(F, 1).max_abs());
  if (fw == 0.0) return 0.0;
  return boundary_norm(lhs, 0.0) / (fw * g0);
}

}  // namespace stefan
