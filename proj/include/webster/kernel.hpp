#ifndef WEBSTER_KERNEL_HPP
#define WEBSTER_KERNEL_HPP

// The heat kernel G(x, tau) = exp(-tau^2 / 4 nu x) / sqrt(4 pi nu x) and the
// functional K(a, x, tau) = G * exp(a W / nu) with its a-derivatives. Periodic
// data are convolved spectrally with the exact kernel spectrum
// exp(-nu k^2 x); harmonic data also have the modified-Bessel series.

#include <webster/error.hpp>
#include <webster/numerics.hpp>
#include <webster/params.hpp>
#include <webster/spectral.hpp>
#include <webster/table_io.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace webster {

/// Uniform tau samples: periodic on [0, 2 pi) or a closed finite window.
class TauGrid {
 public:
  static TauGrid periodic(std::size_t n) {
    if (n < 16 || !num::is_power_of_two(n))
      throw ConfigError("periodic tau grid needs N >= 16, a power of two");
    return TauGrid(true, 0.0, num::kTwoPi, n);
  }

  static TauGrid window(double lo, double hi, std::size_t n) {
    if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
      throw ConfigError("tau window needs lo < hi");
    if (n < 2) throw ConfigError("tau window needs at least 2 samples");
    return TauGrid(false, lo, hi, n);
  }

  bool is_periodic() const noexcept { return periodic_; }
  std::size_t size() const noexcept { return n_; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double spacing() const noexcept { return h_; }
  double operator[](std::size_t i) const noexcept {
    return lo_ + h_ * static_cast<double>(i);
  }
  std::vector<double> points() const {
    if (periodic_) return spectral::periodic_points(n_);
    std::vector<double> t(n_);
    for (std::size_t i = 0; i < n_; ++i) t[i] = (*this)[i];
    t.back() = hi_;
    return t;
  }

 private:
  TauGrid(bool periodic, double lo, double hi, std::size_t n)
      : periodic_(periodic), lo_(lo), hi_(hi), n_(n),
        h_((hi - lo) / static_cast<double>(periodic ? n : n - 1)) {}

  bool periodic_;
  double lo_, hi_;
  std::size_t n_;
  double h_;
};

/// Boundary data q(0, tau) = W(tau).
class InitialCondition {
 public:
  enum class Kind { kHarmonic, kTabulated, kCallable };

  /// W = cos(tau).
  static InitialCondition harmonic() { return InitialCondition(Kind::kHarmonic); }

  /// Uniform periodic samples. `tau` is either i * 2pi / n or i * 2pi / (n-1);
  /// in the closed form the last sample repeats the first and is dropped.
  static InitialCondition tabulated(const std::vector<double>& tau,
                                    const std::vector<double>& w) {
    if (tau.size() != w.size())
      throw ConfigError("initial condition columns differ in length");
    if (tau.size() < 4) throw ConfigError("initial condition needs >= 4 samples");
    const std::size_t n = tau.size();
    const bool closed = std::abs(tau.back() - num::kTwoPi) < 1e-9;
    const double h = num::kTwoPi / static_cast<double>(closed ? n - 1 : n);
    for (std::size_t i = 0; i < n; ++i) {
      if (std::abs(tau[i] - h * static_cast<double>(i)) > 1e-9 * (1.0 + tau[i]))
        throw ConfigError("initial condition tau must be uniform on [0, 2pi)");
    }
    double scale = 0.0, jump = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      scale = std::max(scale, std::abs(w[i]));
      if (i > 0) jump = std::max(jump, std::abs(w[i] - w[i - 1]));
    }
    std::vector<double> samples(w.begin(), w.end());
    if (closed) {
      if (std::abs(w.back() - w.front()) > 1e-9 * std::max(scale, 1.0))
        throw ConfigError("initial condition is not periodic: W(2pi) != W(0)");
      samples.pop_back();
    } else if (std::abs(w.back() - w.front()) > 2.0 * jump + 1e-12 * scale) {
      throw ConfigError("initial condition is not periodic: wrap-around jump");
    }
    InitialCondition ic(Kind::kTabulated);
    ic.samples_ = std::make_shared<const std::vector<double>>(std::move(samples));
    ic.coeffs_ = std::make_shared<const spectral::Spectrum>(
        spectral::forward(*ic.samples_));
    return ic;
  }

  /// Any periodic function of tau with period 2 pi.
  static InitialCondition periodic(std::function<double(double)> w) {
    InitialCondition ic(Kind::kCallable);
    ic.fn_ = std::move(w);
    return ic;
  }

  /// Non-periodic data vanishing outside [support_lo, support_hi].
  static InitialCondition nonperiodic(std::function<double(double)> w,
                                      double support_lo, double support_hi) {
    if (!(support_hi > support_lo))
      throw ConfigError("initial condition support needs lo < hi");
    InitialCondition ic(Kind::kCallable);
    ic.fn_ = std::move(w);
    ic.support_ = {support_lo, support_hi};
    return ic;
  }

  Kind kind() const noexcept { return kind_; }
  bool is_periodic() const noexcept { return !support_.has_value(); }
  double support_lo() const { return support_.value().first; }
  double support_hi() const { return support_.value().second; }

  /// Pointwise value; tabulated data use their trigonometric interpolant.
  double operator()(double tau) const {
    switch (kind_) {
      case Kind::kHarmonic:
        return std::cos(tau);
      case Kind::kCallable:
        if (support_ && (tau < support_->first || tau > support_->second))
          return 0.0;
        return fn_(tau);
      case Kind::kTabulated:
        break;
    }
    const auto& c = *coeffs_;
    const std::size_t n = samples_->size();
    double sum = c[0].real();
    for (std::size_t k = 1; k < c.size(); ++k) {
      const double w = (2 * k == n) ? 1.0 : 2.0;
      const double kt = static_cast<double>(k) * tau;
      sum += w * (c[k].real() * std::cos(kt) - c[k].imag() * std::sin(kt));
    }
    return sum / static_cast<double>(n);
  }

  /// Callable data evaluated without the support cut-off.
  double unrestricted(double tau) const {
    return kind_ == Kind::kCallable ? fn_(tau) : (*this)(tau);
  }

  /// Values on the n-point periodic grid.
  std::vector<double> sample(std::size_t n) const {
    if (!is_periodic())
      throw ConfigError("non-periodic initial condition has no periodic samples");
    if (kind_ == Kind::kTabulated) return spectral::resample(*samples_, n);
    std::vector<double> out(n);
    const auto t = spectral::periodic_points(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = (*this)(t[i]);
    return out;
  }

  /// Samples as given, before any interpolation (tabulated only).
  const std::vector<double>& raw_samples() const { return *samples_; }

 private:
  explicit InitialCondition(Kind kind) : kind_(kind) {}

  Kind kind_;
  std::shared_ptr<const std::vector<double>> samples_;
  std::shared_ptr<const spectral::Spectrum> coeffs_;
  std::function<double(double)> fn_;
  std::optional<std::pair<double, double>> support_;
};

/// Reads columns `tau` and `W` (or the first two columns without a header);
/// `column` selects another named column, e.g. a field from a station CSV.
inline InitialCondition read_initial_condition(const std::string& path,
                                               const std::string& column = "W") {
  const auto t = io::read_table(path);
  std::size_t col = 1;
  if (!t.names.empty()) {
    bool found = false;
    for (std::size_t i = 0; i < t.names.size(); ++i)
      if (t.names[i] == column) col = i, found = true;
    if (!found && column != "W")
      throw ConfigError(path + ": no column named '" + column + "'");
  }
  return InitialCondition::tabulated(t.values(t.column("tau", 0)), t.values(col));
}

/// K and its a-derivatives at one station x.
struct KernelField {
  double x = 0.0;
  double a = 0.0;
  double nu = 1.0;
  std::vector<double> tau;
  std::vector<double> K;     // G * exp(aW/nu)
  std::vector<double> km1;   // G * expm1(aW/nu), i.e. K - 1 without cancellation
  std::vector<double> K_a;   // G * (W/nu) exp(aW/nu)
  std::vector<double> K_aa;  // G * (W/nu)^2 exp(aW/nu)
};

inline double heat_kernel(double x, double tau, double nu) {
  if (!(x > 0.0)) throw DomainError("heat kernel needs x > 0");
  if (!(nu > 0.0)) throw DomainError("heat kernel needs nu > 0");
  return std::exp(-tau * tau / (4.0 * nu * x)) / std::sqrt(4.0 * num::kPi * nu * x);
}

/// Every stride-th sample of a periodic array.
inline std::vector<double> subsample(const std::vector<double>& f, std::size_t n) {
  if (n == 0 || f.size() % n != 0)
    throw ConfigError("grid size does not divide the working grid");
  const std::size_t stride = f.size() / n;
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = f[i * stride];
  return out;
}

/// Spectral K for periodic data. The working grid starts at
/// max(min_size, 256) and doubles until the top band of retained modes of
/// exp(aW/nu) and its W-weighted variants falls below 1e-12 of the peak.
class SpectralKernel {
 public:
  static constexpr std::size_t kMaxSize = std::size_t{1} << 17;

  SpectralKernel(const InitialCondition& ic, PhysParams p, std::size_t min_size = 256)
      : params_(p), ic_(ic) {
    p.validate();
    if (!ic.is_periodic())
      throw ConfigError("spectral kernel needs periodic initial data");
    std::size_t n = std::max<std::size_t>(min_size, 256);
    if (!num::is_power_of_two(n)) throw ConfigError("grid size must be a power of two");
    for (;; n *= 2) {
      if (n > kMaxSize)
        throw ResolutionError("exp(aW/nu) not resolved on " +
                              std::to_string(kMaxSize) + " points");
      build(ic, n);
      if (resolved(e_) && resolved(ea_) && resolved(eaa_)) break;
    }
  }

  std::size_t size() const noexcept { return w_.size(); }
  const std::vector<double>& W() const noexcept { return w_; }
  const PhysParams& params() const noexcept { return params_; }

  /// Field on the working grid.
  KernelField field(double x) const {
    if (!(x >= 0.0)) throw DomainError("kernel station x must be >= 0");
    KernelField f;
    f.x = x;
    f.a = params_.a;
    f.nu = params_.nu;
    f.tau = spectral::periodic_points(size());
    if (x == 0.0) {
      const double a = params_.a, nu = params_.nu;
      for (double w : w_) {
        const double e = std::exp(a * w / nu);
        f.K.push_back(e);
        f.km1.push_back(std::expm1(a * w / nu));
        f.K_a.push_back(w / nu * e);
        f.K_aa.push_back(w * w / (nu * nu) * e);
      }
      return f;
    }
    const double diffusion = params_.nu * x;
    f.K = apply(e_, diffusion);
    f.km1 = apply(em1_, diffusion);
    f.K_a = apply(ea_, diffusion);
    f.K_aa = apply(eaa_, diffusion);
    // FFT rounding is absolute, relative to the peak; small values of K are
    // recomputed on the real line so they keep full relative accuracy.
    double peak = 0.0;
    for (double k : f.K) peak = std::max(peak, k);
    for (std::size_t i = 0; i < f.K.size(); ++i) {
      if (f.K[i] < 1e-6 * peak) {
        f.K[i] = direct(x, f.tau[i]);
        f.km1[i] = f.K[i] - 1.0;
      }
    }
    return f;
  }

  /// K(x, tau) by adaptive quadrature over tau +- 40 sigma.
  double direct(double x, double tau) const {
    const double a = params_.a, nu = params_.nu;
    const double reach = 40.0 * std::sqrt(2.0 * nu * x);
    auto f = [&](double xi) {
      return std::exp(a * ic_(xi) / nu) * heat_kernel(x, tau - xi, nu);
    };
    return num::integrate(f, tau - reach, tau + reach, 1e-12).value;
  }

  /// Field subsampled onto a coarser periodic grid.
  KernelField field(double x, const TauGrid& grid) const {
    if (!grid.is_periodic()) throw ConfigError("spectral kernel needs a periodic grid");
    KernelField f = field(x);
    const std::size_t n = grid.size();
    f.tau = grid.points();
    f.K = subsample(f.K, n);
    f.km1 = subsample(f.km1, n);
    f.K_a = subsample(f.K_a, n);
    f.K_aa = subsample(f.K_aa, n);
    return f;
  }

 private:
  void build(const InitialCondition& ic, std::size_t n) {
    w_ = ic.sample(n);
    const double a = params_.a, nu = params_.nu;
    std::vector<double> e(n), em1(n), ea(n), eaa(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double s = w_[i] / nu;
      e[i] = std::exp(a * s);
      em1[i] = std::expm1(a * s);
      ea[i] = s * e[i];
      eaa[i] = s * s * e[i];
    }
    e_ = spectral::forward(e);
    em1_ = spectral::forward(em1);
    ea_ = spectral::forward(ea);
    eaa_ = spectral::forward(eaa);
  }

  static bool resolved(const spectral::Spectrum& s) {
    double peak = 0.0;
    for (const auto& c : s) peak = std::max(peak, std::abs(c));
    if (peak == 0.0) return true;
    const std::size_t top = s.size() - 1;
    for (std::size_t k = top - top / 4; k <= top; ++k)
      if (std::abs(s[k]) > 1e-12 * peak) return false;
    return true;
  }

  std::vector<double> apply(spectral::Spectrum s, double diffusion) const {
    spectral::propagate(s, diffusion);
    return spectral::inverse(s, size());
  }

  PhysParams params_;
  InitialCondition ic_;
  std::vector<double> w_;
  spectral::Spectrum e_, em1_, ea_, eaa_;
};

namespace detail {

/// Direct convolution on the real line for data supported on [lo, hi].
inline KernelField kernel_nonperiodic(double a, double x, const InitialCondition& ic,
                                      double nu, const TauGrid& grid) {
  KernelField f;
  f.x = x;
  f.a = a;
  f.nu = nu;
  f.tau = grid.points();
  const double lo = ic.support_lo(), hi = ic.support_hi();
  auto em1 = [&](double xi) { return std::expm1(a * ic(xi) / nu); };
  if (x == 0.0) {
    for (double t : f.tau) {
      const double s = ic(t) / nu, e = std::exp(a * s);
      f.K.push_back(e);
      f.km1.push_back(em1(t));
      f.K_a.push_back(s * e);
      f.K_aa.push_back(s * s * e);
    }
    return f;
  }
  const double sigma = std::sqrt(2.0 * nu * x);
  const double reach = std::max(40.0 * sigma, hi - lo);
  // Data must vanish beyond the declared support.
  auto leak = [&](double xi) {
    const double s = ic.unrestricted(xi) / nu;
    return std::abs(std::expm1(a * s)) + std::abs(s);
  };
  const double outside = num::integrate(leak, lo - reach, lo, 1e-8, 1e-14).value +
                         num::integrate(leak, hi, hi + reach, 1e-8, 1e-14).value;
  if (outside > 1e-10)
    throw TruncationError("initial data carry mass " + std::to_string(outside) +
                          " outside the declared window");
  for (double t : f.tau) {
    const double from = std::max(lo, t - 40.0 * sigma);
    const double to = std::min(hi, t + 40.0 * sigma);
    double k = 0.0, ka = 0.0, kaa = 0.0;
    if (from < to) {
      auto g = [&](double xi) { return heat_kernel(x, t - xi, nu); };
      k = num::integrate([&](double xi) { return em1(xi) * g(xi); }, from, to,
                         1e-12, 1e-300).value;
      ka = num::integrate(
               [&](double xi) {
                 const double s = ic(xi) / nu;
                 return s * std::exp(a * s) * g(xi);
               },
               from, to, 1e-12, 1e-300)
               .value;
      kaa = num::integrate(
                [&](double xi) {
                  const double s = ic(xi) / nu;
                  return s * s * std::exp(a * s) * g(xi);
                },
                from, to, 1e-12, 1e-300)
                .value;
    }
    f.km1.push_back(k);
    f.K.push_back(1.0 + k);
    f.K_a.push_back(ka);
    f.K_aa.push_back(kaa);
  }
  return f;
}

}  // namespace detail

/// K, K_a, K_aa at station x on `grid`. Periodic data are convolved with the
/// wrapped Gaussian through its exact spectrum; non-periodic data by adaptive
/// quadrature over a +-40 sigma window.
inline KernelField K_quadrature(double a, double x, const InitialCondition& ic,
                                double nu, const TauGrid& grid) {
  PhysParams{a, nu}.validate();
  if (!(x >= 0.0)) throw DomainError("kernel station x must be >= 0");
  if (!ic.is_periodic()) {
    if (grid.is_periodic()) throw ConfigError("non-periodic data need a window grid");
    return detail::kernel_nonperiodic(a, x, ic, nu, grid);
  }
  if (!grid.is_periodic()) throw ConfigError("periodic data need a periodic grid");
  return SpectralKernel(ic, {a, nu}, grid.size()).field(x, grid);
}

namespace detail {

/// Ascending series sum_m (z/2)^(2m+k) / (m! (m+k)!), skipping the first
/// `skip` terms (skip = 1 with k = 0 gives I0 - 1 without cancellation).
inline double bessel_series(int k, double z, int skip = 0) {
  if (z == 0.0) return (k == 0 && skip == 0) ? 1.0 : 0.0;
  const double q = 0.25 * z * z;
  double term = std::exp(k * std::log(0.5 * z) - std::lgamma(k + 1.0));
  double sum = 0.0;
  for (int m = 0; m < 500; ++m) {
    if (m >= skip) sum += term;
    term *= q / ((m + 1.0) * (m + 1.0 + k));
    if (m >= skip && term < 1e-17 * sum) break;
  }
  return sum;
}

}  // namespace detail

/// I_0(z) .. I_kmax(z). Power series for z <= 15, otherwise downward Miller
/// recurrence normalized by I_0 + 2 sum I_k = e^z.
inline std::vector<double> bessel_I_all(int kmax, double z) {
  if (kmax < 0 || !(z >= 0.0)) throw DomainError("bessel_I needs k >= 0, z >= 0");
  std::vector<double> out(static_cast<std::size_t>(kmax) + 1);
  if (z <= 15.0) {
    for (int k = 0; k <= kmax; ++k) out[k] = detail::bessel_series(k, z);
    return out;
  }
  if (z > 700.0) throw RangeError("bessel_I overflows for z > 700");
  const int start = kmax + 30 + static_cast<int>(std::ceil(std::sqrt(160.0 * z)));
  double next = 0.0, cur = 1.0, sum = 0.0;
  for (int n = start; n >= 1; --n) {
    const double prev = next + (2.0 * n / z) * cur;  // f_{n-1}
    if (n <= kmax) out[n] = cur;
    sum += 2.0 * cur;
    next = cur;
    cur = prev;
    if (cur > 1e250) {
      for (int k = n; k <= kmax; ++k) out[k] *= 1e-250;
      next *= 1e-250;
      cur *= 1e-250;
      sum *= 1e-250;
    }
  }
  out[0] = cur;
  sum += cur;
  const double scale = std::exp(z) / sum;
  for (double& v : out) v *= scale;
  return out;
}

inline double bessel_I(int k, double z) { return bessel_I_all(k, z).back(); }

/// K, K_a, K_aa for W = cos(tau) from the modified-Bessel series
///   K = I_0(a/nu) + 2 sum_k I_k(a/nu) cos(k tau) exp(-nu k^2 x).
/// kmax < 0 picks the smallest order meeting the tail bound
/// I_{kmax+1} < 1e-14 I_0; an explicit kmax that misses it throws.
inline KernelField K_series(double a, double x, double nu, const TauGrid& grid,
                            int kmax = -1) {
  PhysParams{a, nu}.validate();
  if (!(x >= 0.0)) throw DomainError("kernel station x must be >= 0");
  const double z = a / nu;
  const int probe = std::max(kmax, 0) + 64 + static_cast<int>(4.0 * z);
  const auto scan = bessel_I_all(probe, z);
  int needed = 0;
  while (needed + 1 <= probe && !(scan[needed + 1] < 1e-14 * scan[0])) ++needed;
  if (kmax < 0) {
    kmax = needed;
  } else if (kmax < needed) {
    throw TailBoundError(needed, "Bessel series tail bound needs kmax >= " +
                                     std::to_string(needed));
  }
  const auto I = bessel_I_all(kmax + 2, z);
  auto at = [&](int k) { return I[static_cast<std::size_t>(std::abs(k))]; };
  KernelField f;
  f.x = x;
  f.a = a;
  f.nu = nu;
  f.tau = grid.points();
  const double i0m1 = z <= 15.0 ? detail::bessel_series(0, z, 1) : I[0] - 1.0;
  for (double t : f.tau) {
    double k0 = 0.0, k1 = 0.0, k2 = 0.0;
    for (int k = kmax; k >= 1; --k) {
      const double c = 2.0 * std::cos(k * t) * std::exp(-nu * k * k * x);
      k0 += at(k) * c;
      k1 += 0.5 * (at(k - 1) + at(k + 1)) * c;
      k2 += 0.25 * (at(k - 2) + 2.0 * at(k) + at(k + 2)) * c;
    }
    f.km1.push_back(i0m1 + k0);
    f.K.push_back(I[0] + k0);
    f.K_a.push_back((I[1] + k1) / nu);
    f.K_aa.push_back((0.5 * (I[0] + I[2]) + k2) / (nu * nu));
  }
  return f;
}

}  // namespace webster

#endif  // WEBSTER_KERNEL_HPP
