#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

#include "error.hpp"

namespace stefan {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Periodic-in-x, bounded-in-y tensor grid on [0, 2pi) x [0, 1].
/// x has nx samples (spectral), y has ny nodes including both ends.
class Grid {
 public:
  Grid() : Grid(16, 17) {}
  Grid(int nx, int ny) : nx_(nx), ny_(ny) {
    if (nx < 16 || nx % 2 != 0)
      throw Error(ErrorKind::configuration, "nx must be even and >= 16");
    if (ny < 17) throw Error(ErrorKind::configuration, "ny must be >= 17");
  }

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return static_cast<std::size_t>(nx_) * ny_; }
  double hx() const { return two_pi / nx_; }
  double hy() const { return 1.0 / (ny_ - 1); }
  double x(int i) const { return hx() * i; }
  double y(int j) const { return hy() * j; }

  bool operator==(const Grid&) const = default;

 private:
  int nx_;
  int ny_;
};

template <class Derived>
class SampleArray {
 public:
  std::vector<double>& data() { return v_; }
  const std::vector<double>& data() const { return v_; }
  std::size_t size() const { return v_.size(); }
  double& operator[](std::size_t k) { return v_[k]; }
  double operator[](std::size_t k) const { return v_[k]; }

  Derived& operator+=(const Derived& o) {
    check(o);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += o.v_[k];
    return self();
  }
  Derived& operator-=(const Derived& o) {
    check(o);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] -= o.v_[k];
    return self();
  }
  Derived& operator*=(double s) {
    for (auto& x : v_) x *= s;
    return self();
  }
  /// Pointwise product.
  Derived& operator*=(const Derived& o) {
    check(o);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] *= o.v_[k];
    return self();
  }
  Derived& add_scaled(double s, const Derived& o) {
    check(o);
    for (std::size_t k = 0; k < v_.size(); ++k) v_[k] += s * o.v_[k];
    return self();
  }
  friend Derived operator+(Derived a, const Derived& b) { return a += b; }
  friend Derived operator-(Derived a, const Derived& b) { return a -= b; }
  friend Derived operator*(double s, Derived a) { return a *= s; }
  friend Derived operator*(Derived a, double s) { return a *= s; }
  friend Derived operator*(Derived a, const Derived& b) { return a *= b; }

  double max_abs() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::abs(x));
    return m;
  }
  double min() const {
    double m = v_.empty() ? 0.0 : v_[0];
    for (double x : v_) m = std::min(m, x);
    return m;
  }
  double max() const {
    double m = v_.empty() ? 0.0 : v_[0];
    for (double x : v_) m = std::max(m, x);
    return m;
  }
  bool finite() const {
    for (double x : v_)
      if (!std::isfinite(x)) return false;
    return true;
  }

  template <class F>
  Derived map(F&& f) const {
    Derived out = self();
    for (auto& x : out.v_) x = f(x);
    return out;
  }

 protected:
  std::vector<double> v_;

 private:
  Derived& self() { return static_cast<Derived&>(*this); }
  const Derived& self() const { return static_cast<const Derived&>(*this); }
  void check(const Derived& o) const {
    if (o.v_.size() != v_.size()) throw Error(ErrorKind::usage, "sample array size mismatch");
  }
};

/// Scalar samples on the interior grid, stored layer by layer: index j*nx + i.
class Field : public SampleArray<Field> {
 public:
  Field() : Field(Grid{}) {}
  explicit Field(const Grid& g, double fill = 0.0) : grid_(g) { v_.assign(g.size(), fill); }

  template <class F>
  static Field from_function(const Grid& g, F&& f) {
    Field out(g);
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) out(i, j) = f(g.x(i), g.y(j));
    return out;
  }

  const Grid& grid() const { return grid_; }
  double& operator()(int i, int j) { return v_[static_cast<std::size_t>(j) * grid_.nx() + i]; }
  double operator()(int i, int j) const { return v_[static_cast<std::size_t>(j) * grid_.nx() + i]; }
  std::span<double> row(int j) {
    return {v_.data() + static_cast<std::size_t>(j) * grid_.nx(), static_cast<std::size_t>(grid_.nx())};
  }
  std::span<const double> row(int j) const {
    return {v_.data() + static_cast<std::size_t>(j) * grid_.nx(), static_cast<std::size_t>(grid_.nx())};
  }

 private:
  Grid grid_;
};

/// Samples of a function of x on Gamma (or any single layer).
class BoundaryField : public SampleArray<BoundaryField> {
 public:
  BoundaryField() : BoundaryField(16) {}
  explicit BoundaryField(int nx, double fill = 0.0) : nx_(nx) { v_.assign(nx, fill); }

  template <class F>
  static BoundaryField from_function(int nx, F&& f) {
    BoundaryField out(nx);
    for (int i = 0; i < nx; ++i) out[i] = f(two_pi * i / nx);
    return out;
  }

  int nx() const { return nx_; }
  double& operator()(int i) { return v_[i]; }
  double operator()(int i) const { return v_[i]; }

 private:
  int nx_;
};

struct VectorField {
  std::array<Field, 2> c;

  VectorField() = default;
  explicit VectorField(const Grid& g) : c{Field(g), Field(g)} {}
  VectorField(Field a, Field b) : c{std::move(a), std::move(b)} {}

  Field& operator[](int k) { return c[k]; }
  const Field& operator[](int k) const { return c[k]; }
  const Grid& grid() const { return c[0].grid(); }

  VectorField& operator+=(const VectorField& o) {
    c[0] += o.c[0];
    c[1] += o.c[1];
    return *this;
  }
  VectorField& operator-=(const VectorField& o) {
    c[0] -= o.c[0];
    c[1] -= o.c[1];
    return *this;
  }
  VectorField& operator*=(double s) {
    c[0] *= s;
    c[1] *= s;
    return *this;
  }
  VectorField& add_scaled(double s, const VectorField& o) {
    c[0].add_scaled(s, o.c[0]);
    c[1].add_scaled(s, o.c[1]);
    return *this;
  }
  friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
  friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
  friend VectorField operator*(double s, VectorField a) { return a *= s; }
};

inline BoundaryField layer(const Field& f, int j) {
  BoundaryField out(f.grid().nx());
  auto r = f.row(j);
  for (int i = 0; i < f.grid().nx(); ++i) out[i] = r[i];
  return out;
}

inline BoundaryField trace(const Field& f) { return layer(f, 0); }

/// Constant-in-y lift of a boundary field.
inline Field broadcast(const Grid& g, const BoundaryField& b) {
  Field out(g);
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) out(i, j) = b[i];
  return out;
}

inline double dot_sum(const VectorField& a, const VectorField& b, std::size_t k) {
  return a[0][k] * b[0][k] + a[1][k] * b[1][k];
}

}  // namespace stefan
