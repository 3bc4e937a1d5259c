/// @file test_mollifier.cpp
/// @brief Horizontal and isotropic mollification, commutator estimate.

#include <gtest/gtest.h>

#include <random>

#include "stefan/mollifier.hpp"

using namespace stefan;

namespace {

// independent Gauss-Legendre transform of the 1-D kernel
double rho_hat(int k, double kappa) {
  auto b = [](double z) { return bump(z * z); };
  double mass = 0, val = 0;
  for (int p = 0; p < 64; ++p) {
    const double a = -1 + 2.0 * p / 64, c = a + 2.0 / 64;
    mass += integrate_gl(b, a, c, 16);
    val += integrate_gl([&](double z) { return b(z) * std::cos(k * kappa * z); }, a, c, 16);
  }
  return val / mass;
}

}  // namespace

TEST(Mollifier, KernelHasUnitMass) {
  const auto& K = Kernel1D::get();
  const double m = integrate_gl([&](double z) { return K(z); }, -1, 1, 200);
  EXPECT_NEAR(m, 1.0, 1e-6);
  EXPECT_DOUBLE_EQ(K.multiplier(0, 0.3), 1.0);
}

TEST(Mollifier, ConstantsPreserved) {
  BoundaryField c(64, 3.7);
  for (double k : {0.4, 0.1, 0.01}) EXPECT_LE((smooth_horizontal(c, k) - c).max_abs(), 1e-10);
  Grid g(32, 65);
  Field f(g, -2.0);
  EXPECT_LE((smooth_2d(f, 0.1) - f).max_abs(), 1e-10);
}

TEST(Mollifier, CommutesWithTangentialDerivative) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> U(-1, 1);
  std::vector<double> a(10);
  for (auto& x : a) x = U(rng);
  auto f = BoundaryField::from_function(64, [&](double x) {
    double s = 0;
    for (int k = 0; k < 10; ++k) s += a[k] * std::cos(k * x + k);
    return s;
  });
  BoundaryField l = tangential_derivative(smooth_horizontal(f, 0.2), 1);
  BoundaryField r = smooth_horizontal(tangential_derivative(f, 1), 0.2);
  EXPECT_LE((l - r).max_abs(), 1e-9);
}

TEST(Mollifier, ContractsL2) {
  std::mt19937 rng(5);
  std::normal_distribution<double> N;
  BoundaryField f(64);
  for (auto& x : f.data()) x = N(rng);
  for (double k : {0.05, 0.2, 1.0}) EXPECT_LE(boundary_norm(smooth_horizontal(f, k), 0), boundary_norm(f, 0) + 1e-14);
}

TEST(Mollifier, MultiplierMatchesIndependentQuadrature) {
  for (int k : {1, 3, 7, 20})
    for (double kap : {0.05, 0.2, 0.6}) EXPECT_NEAR(Kernel1D::get().multiplier(k, kap), rho_hat(k, kap), 1e-10);
}

TEST(Mollifier, DoubleSmoothingIsSquaredConvolution) {
  auto f = BoundaryField::from_function(64, [](double x) { return std::cos(3 * x) + 0.5 * std::sin(5 * x); });
  BoundaryField twice = smooth_twice(f, 0.3), seq = smooth_horizontal(smooth_horizontal(f, 0.3), 0.3);
  auto exact = BoundaryField::from_function(64, [](double x) {
    const double a = rho_hat(3, 0.3), b = rho_hat(5, 0.3);
    return a * a * std::cos(3 * x) + 0.5 * b * b * std::sin(5 * x);
  });
  EXPECT_LE((twice - exact).max_abs(), 1e-10);
  EXPECT_LE((seq - exact).max_abs(), 1e-10);
}

TEST(Mollifier, RejectsOversizedKappa) {
  BoundaryField f(32, 1.0);
  EXPECT_THROW(smooth_horizontal(f, 4.0), Error);
  Grid g(32, 65);
  try {
    smooth_2d(Field(g), 0.3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::configuration);
  }
}

TEST(Smooth2D, YIndependentFieldUsesMarginalKernel) {
  // for f = sin x the result is sin x times int eta_kappa(r, s) cos r dr ds
  const double kappa = 0.1;
  double mass = 0, val = 0;
  for (int p = 0; p < 32; ++p) {
    const double a = p / 32.0, b = (p + 1) / 32.0;
    mass += integrate_gl([](double r) { return bump(r * r) * r * two_pi; }, a, b, 16);
    // angular average of cos(kappa r cos t) is J0(kappa r)
    val += integrate_gl([&](double r) { return bump(r * r) * r * two_pi * std::cyl_bessel_j(0.0, kappa * r); }, a, b, 16);
  }
  const double factor = val / mass;
  Grid g(32, 129);
  Field f = Field::from_function(g, [](double x, double) { return std::sin(x); });
  Field s = smooth_2d(f, kappa);
  for (int j = 0; j < g.ny(); j += 8)
    for (int i = 0; i < g.nx(); i += 5) EXPECT_NEAR(s(i, j), factor * std::sin(g.x(i)), 1e-6);
}

TEST(Smooth2D, ReflectionKeepsQuadraticsNearBoundary) {
  // the C^2 reflection reproduces quadratics exactly, so smoothing is a
  // bounded perturbation of order kappa^2 f''
  Grid g(32, 129);
  Field f = Field::from_function(g, [](double, double y) { return y * y; });
  Field s = smooth_2d(f, 0.05);
  EXPECT_LE((s - f).max_abs(), 0.05 * 0.05);
}

TEST(Smooth2D, ConvergesMonotonicallyAsKappaShrinks) {
  Grid g(64, 129);
  Field f = Field::from_function(g, [](double x, double y) { return std::sin(2 * x) * std::exp(y) + y * y * y; });
  double prev = 1e300;
  for (double k : {0.2, 0.1, 0.05, 0.025}) {
    const double e = interior_norm(smooth_2d(f, k) - f, 0);
    EXPECT_LT(e, prev) << k;
    prev = e;
  }
}

TEST(Commutator, VanishesForConstantF) {
  BoundaryField F(64, 2.5);
  auto G = BoundaryField::from_function(64, [](double x) { return std::cos(5 * x) + std::sin(2 * x); });
  for (double k : {0.4, 0.1}) EXPECT_LE(commutator_defect(F, G, k), 1e-10);
}

TEST(Commutator, FrozenValueAndDecay) {
  auto F = BoundaryField::from_function(64, [](double x) { return std::sin(x); });
  auto G = BoundaryField::from_function(64, [](double x) { return std::cos(5 * x); });
  EXPECT_NEAR(commutator_defect(F, G, 0.1), 0.027677245513928757, 1e-8);
  EXPECT_NEAR(commutator_defect(F, G, 0.4), 0.35316580553804666, 1e-8);
  EXPECT_EQ(commutator_defect(F, BoundaryField(64), 0.1), 0.0);
  double prev = 1e9;
  for (double k : {0.4, 0.2, 0.1, 0.05}) {
    const double d = commutator_defect(F, G, k);
    EXPECT_LT(d, prev);
    prev = d;
  }
}
