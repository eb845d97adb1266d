#ifndef WEBSTER_SPECTRAL_HPP
#define WEBSTER_SPECTRAL_HPP

// Real-data FFTs on periodic grids of [0, 2*pi) and the spectral operators
// built on them. Plans are cached per size behind a mutex; execution uses the
// new-array interface and is safe from concurrent threads.

#include <webster/error.hpp>
#include <webster/numerics.hpp>

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

namespace webster::spectral {

using cplx = std::complex<double>;
using Spectrum = std::vector<cplx>;

class Fft {
 public:
  static const Fft& get(std::size_t n) {
    static std::mutex mutex;
    static std::map<std::size_t, std::unique_ptr<Fft>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[n];
    if (!slot) slot.reset(new Fft(n));
    return *slot;
  }

  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;
  ~Fft() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
  }

  std::size_t size() const noexcept { return n_; }
  std::size_t bins() const noexcept { return n_ / 2 + 1; }

  /// Unnormalized forward transform, half spectrum of n/2+1 bins.
  Spectrum forward(std::span<const double> in) const {
    std::vector<double> work(in.begin(), in.end());
    Spectrum out(bins());
    fftw_execute_dft_r2c(forward_, work.data(),
                         reinterpret_cast<fftw_complex*>(out.data()));
    return out;
  }

  /// Inverse transform normalized by 1/n.
  std::vector<double> inverse(std::span<const cplx> in) const {
    Spectrum work(in.begin(), in.end());
    std::vector<double> out(n_);
    fftw_execute_dft_c2r(inverse_, reinterpret_cast<fftw_complex*>(work.data()),
                         out.data());
    const double scale = 1.0 / static_cast<double>(n_);
    for (double& v : out) v *= scale;
    return out;
  }

 private:
  explicit Fft(std::size_t n) : n_(n) {
    std::vector<double> r(n);
    Spectrum c(n / 2 + 1);
    const int size = static_cast<int>(n);
    auto* cp = reinterpret_cast<fftw_complex*>(c.data());
    forward_ = fftw_plan_dft_r2c_1d(size, r.data(), cp,
                                    FFTW_ESTIMATE | FFTW_UNALIGNED);
    inverse_ = fftw_plan_dft_c2r_1d(
        size, cp, r.data(), FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_DESTROY_INPUT);
  }

  std::size_t n_;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

inline Spectrum forward(std::span<const double> f) {
  return Fft::get(f.size()).forward(f);
}

inline std::vector<double> inverse(std::span<const cplx> s, std::size_t n) {
  return Fft::get(n).inverse(s);
}

/// Sample points i * 2*pi / n.
inline std::vector<double> periodic_points(std::size_t n) {
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = num::kTwoPi * static_cast<double>(i) / static_cast<double>(n);
  return t;
}

/// d^order f / dtau^order for periodic samples. The Nyquist bin is dropped
/// for odd orders so the result stays real.
inline std::vector<double> derivative(std::span<const double> f, int order) {
  const std::size_t n = f.size();
  Spectrum s = forward(f);
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double k = static_cast<double>(j);
    cplx factor = std::pow(cplx(0.0, k), order);
    if (order % 2 == 1 && 2 * j == n) factor = 0.0;
    s[j] *= factor;
  }
  return inverse(s, n);
}

/// Multiplies a half spectrum by the heat semigroup exp(-k^2 * diffusion).
inline void propagate(Spectrum& s, double diffusion) {
  for (std::size_t j = 0; j < s.size(); ++j) {
    const double k = static_cast<double>(j);
    s[j] *= std::exp(-k * k * diffusion);
  }
}

/// Trigonometric interpolation of n periodic samples onto m points.
inline std::vector<double> resample(std::span<const double> f, std::size_t m) {
  const std::size_t n = f.size();
  if (m == n) return {f.begin(), f.end()};
  Spectrum s = forward(f);
  Spectrum t(m / 2 + 1, cplx(0.0));
  const std::size_t keep = std::min(s.size(), t.size());
  const double scale = static_cast<double>(m) / static_cast<double>(n);
  for (std::size_t j = 0; j < keep; ++j) t[j] = s[j] * scale;
  // A Nyquist bin of the source carries cos only; split it when upsampling,
  // fold the conjugate pair when it lands on the target's Nyquist bin.
  if (n % 2 == 0 && m > n) t[n / 2] *= 0.5;
  if (m % 2 == 0 && m < n) t[m / 2] = cplx(2.0 * t[m / 2].real(), 0.0);
  return inverse(t, m);
}

}  // namespace webster::spectral

#endif  // WEBSTER_SPECTRAL_HPP
