#pragma once

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

namespace stefan {

struct GaussRule {
  std::vector<double> x, w;  // on [-1, 1]
};

/// n-point Gauss-Legendre rule (Newton on std::legendre), cached.
inline const GaussRule& gauss_legendre(int n) {
  static std::mutex mutex;
  static std::map<int, GaussRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it2 = 0; it2 < 100; ++it2) {
      const double p = std::legendre(n, x), pm = std::legendre(n - 1, x);
      dp = n * (x * p - pm) / (x * x - 1.0);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double p = std::legendre(n, x), pm = std::legendre(n - 1, x);
    dp = n * (x * p - pm) / (x * x - 1.0);
    r.x[i] = x;
    r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return cache.emplace(n, std::move(r)).first->second;
}

/// int_a^b f by an n-point rule.
template <class F>
double integrate_gl(F&& f, double a, double b, int n = 20) {
  const auto& r = gauss_legendre(n);
  const double c = 0.5 * (b - a), m = 0.5 * (b + a);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) acc += r.w[i] * f(m + c * r.x[i]);
  return c * acc;
}

}  // namespace stefan
