#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "grid.hpp"

namespace stefan {

using cplx = std::complex<double>;

/// Real 1-D transform of length n. Coefficients follow
/// c_k = (1/2pi) int f e^{-ikx} dx, i.e. the DFT divided by n, for k = 0..n/2.
/// Plans are created once per length and executed through the new-array API,
/// which is safe to call concurrently.
class RealFft {
 public:
  static const RealFft& get(int n) {
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<RealFft>> cache;
    std::lock_guard<std::mutex> lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot.reset(new RealFft(n));
    return *slot;
  }

  int n() const { return n_; }
  int ncoef() const { return n_ / 2 + 1; }

  void forward(const double* in, cplx* out) const {
    std::vector<double> buf(in, in + n_);
    fftw_execute_dft_r2c(fwd_, buf.data(), reinterpret_cast<fftw_complex*>(out));
    const double s = 1.0 / n_;
    for (int k = 0; k < ncoef(); ++k) out[k] *= s;
  }

  void inverse(const cplx* in, double* out) const {
    std::vector<cplx> buf(in, in + ncoef());
    buf[0].imag(0.0);
    buf[n_ / 2].imag(0.0);
    fftw_execute_dft_c2r(inv_, reinterpret_cast<fftw_complex*>(buf.data()), out);
  }

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

 private:
  explicit RealFft(int n) : n_(n) {
    std::vector<double> r(n);
    std::vector<cplx> c(n / 2 + 1);
    auto* cp = reinterpret_cast<fftw_complex*>(c.data());
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fwd_ = fftw_plan_dft_r2c_1d(n, r.data(), cp, flags);
    inv_ = fftw_plan_dft_c2r_1d(n, cp, r.data(), flags | FFTW_DESTROY_INPUT);
  }

  int n_;
  fftw_plan fwd_{};
  fftw_plan inv_{};
};

/// Spectrum of every y-layer of a field: ny rows of nx/2+1 coefficients.
struct Spectrum {
  int nx = 0;
  int ny = 0;
  std::vector<cplx> c;

  int ncoef() const { return nx / 2 + 1; }
  cplx& operator()(int k, int j) { return c[static_cast<std::size_t>(j) * ncoef() + k]; }
  cplx operator()(int k, int j) const { return c[static_cast<std::size_t>(j) * ncoef() + k]; }
};

inline Spectrum forward(const Field& f) {
  const Grid& g = f.grid();
  const auto& fft = RealFft::get(g.nx());
  Spectrum s{g.nx(), g.ny(), std::vector<cplx>(static_cast<std::size_t>(g.ny()) * (g.nx() / 2 + 1))};
  for (int j = 0; j < g.ny(); ++j) fft.forward(f.row(j).data(), &s(0, j));
  return s;
}

inline Field inverse(const Spectrum& s, const Grid& g) {
  Field out(g);
  const auto& fft = RealFft::get(g.nx());
  for (int j = 0; j < g.ny(); ++j) fft.inverse(s.c.data() + static_cast<std::size_t>(j) * s.ncoef(), out.row(j).data());
  return out;
}

inline std::vector<cplx> forward(const BoundaryField& b) {
  const auto& fft = RealFft::get(b.nx());
  std::vector<cplx> c(b.nx() / 2 + 1);
  fft.forward(b.data().data(), c.data());
  return c;
}

inline BoundaryField inverse(const std::vector<cplx>& c, int nx) {
  BoundaryField out(nx);
  RealFft::get(nx).inverse(c.data(), out.data().data());
  return out;
}

/// Multiplier (ik)^a with the Nyquist mode dropped for odd a.
inline cplx derivative_symbol(int k, int a, int nx) {
  if (a == 0) return 1.0;
  if (k == nx / 2 && a % 2 == 1) return 0.0;
  return std::pow(cplx(0.0, static_cast<double>(k)), a);
}

/// Applies a real-even-per-mode multiplier m(k) to every layer.
template <class M>
Field apply_multiplier(const Field& f, M&& m) {
  Spectrum s = forward(f);
  for (int j = 0; j < s.ny; ++j)
    for (int k = 0; k < s.ncoef(); ++k) s(k, j) *= m(k);
  return inverse(s, f.grid());
}

template <class M>
BoundaryField apply_multiplier(const BoundaryField& b, M&& m) {
  auto c = forward(b);
  for (int k = 0; k < static_cast<int>(c.size()); ++k) c[k] *= m(k);
  return inverse(c, b.nx());
}

/// Weight of coefficient k in Parseval sums over the full spectrum -n/2+1..n/2.
inline double parseval_weight(int k, int nx) { return (k == 0 || k == nx / 2) ? 1.0 : 2.0; }

}  // namespace stefan
