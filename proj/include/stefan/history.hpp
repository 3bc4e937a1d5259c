#pragma once

#include <deque>
#include <vector>

#include "error.hpp"

namespace stefan {

/// Second-order finite-difference estimate of d^b/dt^b at sample `index` of
/// equally spaced samples. Centered in the interior, one-sided at the ends.
/// T needs copy, +=, *= (double).
template <class T>
T fd_time_derivative(const std::vector<const T*>& s, double dt, std::size_t index, int b) {
  const std::size_t n = s.size();
  if (b < 1 || b > 2) throw Error(ErrorKind::usage, "time derivative order must be 1 or 2");
  if (n < 3 || (b == 2 && n < 4)) throw Error(ErrorKind::needs_more_steps, "too few samples");
  if (index >= n) throw Error(ErrorKind::usage, "sample index out of range");
  auto comb = [&](std::initializer_list<std::pair<std::size_t, double>> terms, double scale) {
    auto it = terms.begin();
    T out = *s[it->first];
    out *= it->second;
    for (++it; it != terms.end(); ++it) {
      T t = *s[it->first];
      t *= it->second;
      out += t;
    }
    out *= scale;
    return out;
  };
  const std::size_t i = index;
  if (b == 1) {
    const double c = 1.0 / (2.0 * dt);
    if (i == 0) return comb({{0, -3.0}, {1, 4.0}, {2, -1.0}}, c);
    if (i == n - 1) return comb({{n - 1, 3.0}, {n - 2, -4.0}, {n - 3, 1.0}}, c);
    return comb({{i + 1, 1.0}, {i - 1, -1.0}}, c);
  }
  const double c = 1.0 / (dt * dt);
  if (i == 0) return comb({{0, 2.0}, {1, -5.0}, {2, 4.0}, {3, -1.0}}, c);
  if (i == n - 1) return comb({{n - 1, 2.0}, {n - 2, -5.0}, {n - 3, 4.0}, {n - 4, -1.0}}, c);
  return comb({{i + 1, 1.0}, {i, -2.0}, {i - 1, 1.0}}, c);
}

/// Fixed-depth ring of time-stamped samples, oldest first.
template <class T>
class History {
 public:
  explicit History(std::size_t depth = 5) : depth_(depth) {
    if (depth < 3) throw Error(ErrorKind::usage, "history depth must be >= 3");
  }

  void push(double t, T value) {
    if (!times_.empty() && !(t > times_.back()))
      throw Error(ErrorKind::usage, "history times must increase");
    times_.push_back(t);
    values_.push_back(std::move(value));
    if (times_.size() > depth_) {
      times_.pop_front();
      values_.pop_front();
    }
  }

  std::size_t size() const { return times_.size(); }
  std::size_t depth() const { return depth_; }
  double time(std::size_t i) const { return times_.at(i); }
  const T& at(std::size_t i) const { return values_.at(i); }
  const T& latest() const { return values_.back(); }
  void replace_last(T value) {
    if (values_.empty()) throw Error(ErrorKind::usage, "empty history");
    values_.back() = std::move(value);
  }
  void clear() {
    times_.clear();
    values_.clear();
  }

  /// d^b/dt^b of the quantity extracted by `get` at sample `index`.
  template <class Get>
  auto derivative(int b, std::size_t index, Get&& get) const {
    using V = std::decay_t<decltype(get(values_.front()))>;
    if (size() < static_cast<std::size_t>(2 * b + 1))
      throw Error(ErrorKind::needs_more_steps, "history depth below 2b+1");
    const double dt = times_[1] - times_[0];
    for (std::size_t k = 1; k < size(); ++k)
      if (std::abs((times_[k] - times_[k - 1]) - dt) > 1e-9 * std::max(1.0, std::abs(dt)))
        throw Error(ErrorKind::usage, "history samples are not equally spaced");
    std::vector<V> vals;
    vals.reserve(size());
    for (const auto& v : values_) vals.push_back(get(v));
    std::vector<const V*> ptrs;
    for (const auto& v : vals) ptrs.push_back(&v);
    return fd_time_derivative(ptrs, dt, index, b);
  }

 private:
  std::size_t depth_;
  std::deque<double> times_;
  std::deque<T> values_;
};

}  // namespace stefan
