#pragma once

#include "geometry.hpp"

namespace stefan {

/// v = -grad_Psi q.
inline VectorField compute_velocity(const Field& q, const MetricBundle& b) {
  Field q1 = tangential_derivative(q, 1), q2 = vertical_derivative(q, 1);
  VectorField v(q.grid());
  for (std::size_t k = 0; k < q.size(); ++k) {
    v[0][k] = -(q1[k] + b.a10[k] * q2[k]);
    v[1][k] = -b.a11[k] * q2[k];
  }
  return v;
}

inline Field flat_laplacian(const Field& q) {
  return tangential_derivative(q, 2) + vertical_derivative(q, 2);
}

/// Delta_Psi q in non-divergence form:
/// q_11 + 2 a10 q_12 + (a10^2 + a11^2) q_22 + (d_x a10 + a10 d_y a10 + a11 d_y a11) q_2.
inline Field transformed_laplacian(const Field& q, const MetricBundle& b) {
  Gradient2 d = derivatives_to_second(q);
  Field out(q.grid());
  for (std::size_t k = 0; k < q.size(); ++k) {
    const double a10 = b.a10[k], a11 = b.a11[k];
    const double c1 = b.a10_x[k] + a10 * b.a10_y[k] + a11 * b.a11_y[k];
    out[k] = d.d11[k] + 2.0 * a10 * d.d12[k] + (a10 * a10 + a11 * a11) * d.d22[k] + c1 * d.d2[k];
  }
  return out;
}

/// curl_Psi v = eps_ji A^s_j v^i_{,s}.
inline Field curl_psi(const VectorField& v, const MetricBundle& b) {
  Field v0y = vertical_derivative(v[0], 1), v1x = tangential_derivative(v[1], 1), v1y = vertical_derivative(v[1], 1);
  Field out(v.grid());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = b.a11[k] * v0y[k] - v1x[k] - b.a10[k] * v1y[k];
  return out;
}

/// v . w for w = Psi_t = (0, Phi_t).
inline Field advection_term(const VectorField& v, const Field& phi_t) { return v[1] * phi_t; }

}  // namespace stefan
