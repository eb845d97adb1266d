#ifndef WEBSTER_INVARIANT_HPP
#define WEBSTER_INVARIANT_HPP

// Exact group-invariant solutions of the MGWE
//   q_zeta = a q_tau^2 + mu(zeta) q_tautau,   mu = nu e^d,  d' = M / b,
// for b(zeta) = beta0 + beta1 zeta + beta2 zeta^2:
//   q = e^d W(lambda) - (beta2 / 2a) [zeta tau^2 / (2b) + nu e^d H(zeta)],
//   lambda = tau e^{-d/2} / sqrt(b),
//   H(zeta) = int_0^zeta dz' e^{-d(z')} / b(z') int_0^z' dz'' e^{d(z'')},
// where W solves the factor ODE
//   nu W'' + a W'^2 + (M + beta1)(lambda/2) W' - M W + (beta0 beta2 / 4a) lambda^2 = 0.
// For beta2 = 0, beta1 = -M the ODE has the first integral W'^2 = y(W),
//   y(W) = C0 exp(-2aW/nu) + (M/a) W - M nu / (2a^2).

#include <webster/error.hpp>
#include <webster/kernel.hpp>
#include <webster/numerics.hpp>
#include <webster/params.hpp>
#include <webster/profiles.hpp>

#include <boost/math/interpolators/cubic_hermite.hpp>
#include <boost/math/interpolators/quintic_hermite.hpp>
#include <boost/numeric/odeint.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace webster {

struct InvariantConfig {
  BetaParams betas;
  PhysParams phys;
  double W0 = 0.0;   // W(0)
  double dW0 = 0.0;  // W'(0)

  void validate() const {
    phys.validate();
    if (!(phys.a > 0.0)) throw ConfigError("invariant solutions need a > 0");
  }
};

struct Similarity {
  double lambda;
  double d;
};

/// lambda and d at (zeta, tau).
inline Similarity similarity_vars(const BetaParams& betas, double zeta, double tau) {
  const double b = betas.b(zeta);
  if (!(b > 0.0)) {
    throw SingularProfileError("b(zeta) = " + std::to_string(b) +
                               " <= 0 at zeta=" + std::to_string(zeta));
  }
  const double d = d_of_zeta(betas, zeta);
  return {tau * std::exp(-0.5 * d) / std::sqrt(b), d};
}

/// Left side of the factor ODE.
inline double factor_ode_residual(const InvariantConfig& c, double lambda, double w,
                                  double dw, double d2w) {
  const auto& bt = c.betas;
  const double a = c.phys.a;
  return c.phys.nu * d2w + a * dw * dw + (bt.M + bt.beta1) * 0.5 * lambda * dw -
         bt.M * w + bt.beta0 * bt.beta2 / (4.0 * a) * lambda * lambda;
}

/// W(lambda) from the factor ODE, dense on [lo, hi] via quintic Hermite
/// interpolation of the accepted steps.
class FactorTable {
 public:
  FactorTable(std::vector<double> lam, std::vector<double> w, std::vector<double> dw,
              std::vector<double> d2w)
      : lo_(lam.front()),
        hi_(lam.back()),
        nodes_(lam.size()),
        interp_(std::move(lam), std::move(w), std::move(dw), std::move(d2w)) {}

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  std::size_t nodes() const noexcept { return nodes_; }
  bool covers(double lambda) const noexcept { return lambda >= lo_ && lambda <= hi_; }

  double operator()(double lambda) const { return interp_(checked(lambda)); }
  double prime(double lambda) const { return interp_.prime(checked(lambda)); }
  double double_prime(double lambda) const {
    return interp_.double_prime(checked(lambda));
  }

 private:
  double checked(double lambda) const {
    if (!covers(lambda)) {
      throw ExtentError("lambda=" + std::to_string(lambda) + " outside W table [" +
                        std::to_string(lo_) + ", " + std::to_string(hi_) + "]");
    }
    return lambda;
  }

  double lo_, hi_;
  std::size_t nodes_;
  boost::math::interpolators::quintic_hermite<std::vector<double>> interp_;
};

namespace detail {

struct FactorBranch {
  std::vector<double> lam, w, dw;
};

// March from 0 to L > 0. The ODE is invariant under lambda -> -lambda, so the
// negative side is the same march with W'(0) negated.
inline FactorBranch march_factor(const InvariantConfig& c, double L, double w0, double dw0,
                                 double sign, double max_dt) {
  namespace ode = boost::numeric::odeint;
  using State = std::array<double, 2>;
  const auto& bt = c.betas;
  const double a = c.phys.a, nu = c.phys.nu;
  auto rhs = [&](const State& y, State& dy, double l) {
    dy[0] = y[1];
    dy[1] = -(a * y[1] * y[1] + (bt.M + bt.beta1) * 0.5 * l * y[1] - bt.M * y[0] +
              bt.beta0 * bt.beta2 / (4.0 * a) * l * l) /
            nu;
  };
  auto stepper = ode::make_controlled(1e-10, 1e-10, max_dt, ode::runge_kutta_dopri5<State>());
  FactorBranch out;
  State y{w0, dw0};
  double t = 0.0, dt = std::min(1e-3, max_dt);
  out.lam.push_back(0.0);
  out.w.push_back(y[0]);
  out.dw.push_back(y[1]);
  std::size_t guard = 0;
  while (L - t > 1e-12 * L) {
    if (++guard > 2000000) throw NumericError("factor ODE step budget exhausted", dt);
    if (t + dt > L) dt = L - t;
    if (stepper.try_step(rhs, y, t, dt) == ode::fail) {
      if (dt < 1e-12 * std::max(1.0, L)) {
        throw FiniteEscapeError(sign * t, "factor ODE step collapsed at lambda=" +
                                              std::to_string(sign * t) +
                                              " (finite escape)");
      }
      continue;
    }
    if (!std::isfinite(y[0]) || !std::isfinite(y[1]) || std::abs(y[0]) > 1e8 ||
        std::abs(y[1]) > 1e8) {
      throw FiniteEscapeError(sign * t, "factor ODE solution escapes near lambda=" +
                                            std::to_string(sign * t));
    }
    out.lam.push_back(t);
    out.w.push_back(y[0]);
    out.dw.push_back(y[1]);
  }
  return out;
}

}  // namespace detail

/// Integrate the factor ODE from lambda = 0 (data W0, W0') over [lo, hi],
/// lo <= 0 <= hi, with Dormand-Prince 5(4) at tolerance 1e-10. The dense
/// table is checked against the ODE at every interval midpoint; the maximum
/// step is halved until that residual is <= 1e-8.
inline FactorTable integrate_factor_ode(const InvariantConfig& c, double lo, double hi) {
  c.validate();
  if (!(lo <= 0.0 && hi >= 0.0 && hi > lo) || !std::isfinite(lo) || !std::isfinite(hi))
    throw ConfigError("factor ODE range must contain 0 and be finite");
  const double span = hi - lo;
  const double nu = c.phys.nu;
  auto second = [&](double l, double w, double dw) {
    return -(factor_ode_residual(c, l, w, dw, 0.0)) / nu;
  };
  double worst = 0.0;
  for (double max_dt = span / 32.0; max_dt > span * 1e-6; max_dt *= 0.5) {
    detail::FactorBranch neg, pos;
    if (lo < 0.0) neg = detail::march_factor(c, -lo, c.W0, -c.dW0, -1.0, max_dt);
    if (hi > 0.0) pos = detail::march_factor(c, hi, c.W0, c.dW0, 1.0, max_dt);
    std::vector<double> lam, w, dw, d2w;
    for (std::size_t i = neg.lam.size(); i-- > 1;) {
      lam.push_back(-neg.lam[i]);
      w.push_back(neg.w[i]);
      dw.push_back(-neg.dw[i]);
    }
    if (pos.lam.empty()) {
      lam.push_back(0.0);
      w.push_back(c.W0);
      dw.push_back(c.dW0);
    }
    lam.insert(lam.end(), pos.lam.begin(), pos.lam.end());
    w.insert(w.end(), pos.w.begin(), pos.w.end());
    dw.insert(dw.end(), pos.dw.begin(), pos.dw.end());
    for (std::size_t i = 0; i < lam.size(); ++i) d2w.push_back(second(lam[i], w[i], dw[i]));
    std::vector<double> mids;
    for (std::size_t i = 0; i + 1 < lam.size(); ++i) mids.push_back(0.5 * (lam[i] + lam[i + 1]));
    FactorTable table(std::move(lam), std::move(w), std::move(dw), std::move(d2w));
    worst = 0.0;
    for (double m : mids) {
      worst = std::max(worst, std::abs(factor_ode_residual(
                                  c, m, table(m), table.prime(m), table.double_prime(m))));
    }
    if (worst <= 1e-8) return table;
  }
  throw NumericError("factor ODE dense output misses the 1e-8 residual", worst);
}

/// y(W) = C0 exp(-2aW/nu) + (M/a) W - M nu / (2a^2), the squared slope on the
/// first integral of the exponential-channel factor ODE.
struct Radicand {
  double C0, M, a, nu;

  double operator()(double w) const {
    return C0 * std::exp(-2.0 * a * w / nu) + (M / a) * w - M * nu / (2.0 * a * a);
  }
  double slope(double w) const {
    return -2.0 * a / nu * C0 * std::exp(-2.0 * a * w / nu) + M / a;
  }
  /// y(w0 + delta) - y(w0) without cancellation.
  double increment(double w0, double delta) const {
    return C0 * std::exp(-2.0 * a * w0 / nu) * std::expm1(-2.0 * a * delta / nu) +
           (M / a) * delta;
  }
  double scale(double w) const {
    return std::abs(C0 * std::exp(-2.0 * a * w / nu)) + std::abs(M / a * w) +
           std::abs(M * nu / (2.0 * a * a));
  }
};

struct LambdaOfW {
  std::vector<double> W;
  std::vector<double> lambda;
};

/// lambda(W) = C1 + int_{W_lo}^{W} dW' / sqrt(y(W')) on n equally spaced W.
/// An endpoint where y vanishes is treated by W = W_t +- t^2, which turns
/// the inverse square root into a smooth integrand.
inline LambdaOfW example1_integral(double M, const PhysParams& p, double C0, double C1,
                                   double W_lo, double W_hi, std::size_t n = 257) {
  p.validate();
  if (!(p.a > 0.0)) throw ConfigError("integral form needs a > 0");
  if (!(W_hi > W_lo) || n < 2) throw ConfigError("integral form needs W_lo < W_hi, n >= 2");
  const Radicand y{C0, M, p.a, p.nu};
  const double tiny = 1e-12;
  const bool root_lo = std::abs(y(W_lo)) <= tiny * y.scale(W_lo);
  const bool root_hi = std::abs(y(W_hi)) <= tiny * y.scale(W_hi);
  for (std::size_t i = 1; i < 64; ++i) {
    const double w = W_lo + (W_hi - W_lo) * static_cast<double>(i) / 64.0;
    if (!(y(w) > 0.0))
      throw ConfigError("radicand is not positive at W=" + std::to_string(w));
  }
  if ((!root_lo && !(y(W_lo) > 0.0)) || (!root_hi && !(y(W_hi) > 0.0)))
    throw ConfigError("radicand is negative at an end of the W range");
  const double y_lo = root_lo ? 0.0 : y(W_lo);
  const double y_hi = root_hi ? 0.0 : y(W_hi);
  const double mid = 0.5 * (W_lo + W_hi);
  // int_{W_lo}^{w}, w <= mid
  auto lower = [&](double w) {
    if (!root_lo) {
      return num::integrate([&](double v) { return 1.0 / std::sqrt(y(v)); }, W_lo, w, 1e-13)
          .value;
    }
    auto f = [&](double t) {
      const double r = y_lo + y.increment(W_lo, t * t);
      return t == 0.0 ? 2.0 / std::sqrt(y.slope(W_lo)) : 2.0 * t / std::sqrt(r);
    };
    return num::integrate(f, 0.0, std::sqrt(w - W_lo), 1e-13).value;
  };
  // int_{w}^{W_hi}, w >= mid
  auto upper = [&](double w) {
    if (!root_hi) {
      return num::integrate([&](double v) { return 1.0 / std::sqrt(y(v)); }, w, W_hi, 1e-13)
          .value;
    }
    auto f = [&](double t) {
      const double r = y_hi + y.increment(W_hi, -t * t);
      return t == 0.0 ? 2.0 / std::sqrt(-y.slope(W_hi)) : 2.0 * t / std::sqrt(r);
    };
    return num::integrate(f, 0.0, std::sqrt(W_hi - w), 1e-13).value;
  };
  const double at_mid = lower(mid);
  const double upper_mid = upper(mid);
  LambdaOfW out;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = i + 1 == n ? W_hi
                                : W_lo + (W_hi - W_lo) * static_cast<double>(i) /
                                             static_cast<double>(n - 1);
    const double s = w <= mid ? lower(w) : at_mid + (upper_mid - upper(w));
    out.W.push_back(w);
    out.lambda.push_back(C1 + s);
  }
  return out;
}

/// Bounded periodic W(lambda) of the exponential channel (beta2 = 0,
/// beta1 = -M) for M < 0, C0 < 0. W oscillates between the turning points
/// W1 < W2 of y; W(C1) = W1. Along one half period W = Wc - Delta cos(theta),
/// which removes both inverse-square-root endpoint singularities.
class PeriodicOrbit {
 public:
  PeriodicOrbit(double M, const PhysParams& p, double C0, double C1 = 0.0)
      : y_{C0, M, p.a, p.nu}, c1_(C1) {
    p.validate();
    if (!(p.a > 0.0)) throw ConfigError("periodic orbit needs a > 0");
    if (!(M < 0.0 && C0 < 0.0))
      throw ConfigError("bounded periodic orbit needs M < 0 and C0 < 0");
    // y is strictly concave; its maximum sits where y' = 0.
    const double top = -(p.nu / (2.0 * p.a)) * std::log(M * p.nu / (2.0 * p.a * p.a * C0));
    if (!(y_(top) > 0.0)) {
      throw ConfigError("radicand has no two real turning points (need C0 > M nu / 2a^2)");
    }
    auto bracket = [&](double dir) {
      double step = std::max(1.0, std::abs(top));
      while (y_(top + dir * step) > 0.0) step *= 2.0;
      return top + dir * step;
    };
    const double tol = 1e-15 * std::max(1.0, std::abs(top));
    w1_ = num::find_root(y_, bracket(-1.0), top, tol);
    w2_ = num::find_root(y_, top, bracket(1.0), tol);
    wc_ = 0.5 * (w1_ + w2_);
    delta_ = 0.5 * (w2_ - w1_);
    theta_.resize(kPanels + 1);
    cum_.assign(kPanels + 1, 0.0);
    for (std::size_t j = 0; j <= kPanels; ++j)
      theta_[j] = num::kPi * static_cast<double>(j) / static_cast<double>(kPanels);
    for (std::size_t j = 0; j < kPanels; ++j)
      cum_[j + 1] = cum_[j] + segment(theta_[j], theta_[j + 1]);
    period_ = 2.0 * cum_.back();
  }

  double W1() const noexcept { return w1_; }
  double W2() const noexcept { return w2_; }
  double period() const noexcept { return period_; }
  double C1() const noexcept { return c1_; }
  const Radicand& radicand() const noexcept { return y_; }

  bool covers(double) const noexcept { return true; }

  double operator()(double lambda) const { return wc_ - delta_ * std::cos(theta_of(lambda).first); }

  double prime(double lambda) const {
    const auto [theta, sign] = theta_of(lambda);
    return sign * std::sqrt(std::max(0.0, y_at(theta)));
  }

  double double_prime(double lambda) const { return 0.5 * y_.slope((*this)(lambda)); }

  /// lambda - C1 reached from W1 after angle theta in [0, pi].
  double lambda_at(double theta) const {
    const std::size_t j =
        std::min(kPanels - 1, static_cast<std::size_t>(theta / num::kPi * kPanels));
    return cum_[j] + segment(theta_[j], theta);
  }

 private:
  static constexpr std::size_t kPanels = 256;

  // y(Wc - Delta cos theta), measured from the nearer turning point.
  double y_at(double theta) const {
    if (theta <= 0.5 * num::kPi) {
      const double s = std::sin(0.5 * theta);
      return y_.increment(w1_, 2.0 * delta_ * s * s);
    }
    const double c = std::cos(0.5 * theta);
    return y_.increment(w2_, -2.0 * delta_ * c * c);
  }

  double segment(double from, double to) const {
    if (to <= from) return 0.0;
    auto g = [&](double t) { return delta_ * std::sin(t) / std::sqrt(y_at(t)); };
    return num::integrate(g, from, to, 1e-13).value;
  }

  // Angle on the half period and the sign of W' at lambda.
  std::pair<double, double> theta_of(double lambda) const {
    double s = std::fmod(lambda - c1_, period_);
    if (s > 0.5 * period_) s -= period_;
    if (s < -0.5 * period_) s += period_;
    const double sign = s < 0.0 ? -1.0 : 1.0;
    s = std::abs(s);
    if (s >= cum_.back()) return {num::kPi, sign};
    const std::size_t j = static_cast<std::size_t>(
        std::upper_bound(cum_.begin(), cum_.end(), s) - cum_.begin() - 1);
    if (s == cum_[j]) return {theta_[j], sign};
    auto f = [&](double t) { return cum_[j] + segment(theta_[j], t) - s; };
    return {num::find_root(f, theta_[j], theta_[j + 1], 1e-15), sign};
  }

  Radicand y_;
  double c1_;
  double w1_ = 0.0, w2_ = 0.0, wc_ = 0.0, delta_ = 0.0, period_ = 0.0;
  std::vector<double> theta_, cum_;
};

/// X(zeta) = int_0^zeta e^d and H(zeta) = int_0^zeta e^{-d}/b X on a
/// uniform mesh over [0, zeta_max]; H is interpolated by cubic Hermite with
/// its exact slope at the nodes.
class NestedIntegralCache {
 public:
  NestedIntegralCache(const BetaParams& betas, double zeta_max, std::size_t n = 512)
      : betas_(betas), zmax_(zeta_max) {
    if (!(zeta_max > 0.0) || n < 2) throw ConfigError("nested integral mesh needs zeta_max > 0");
    detail::require_regular(betas, 0.0, zeta_max);
    std::vector<double> z(n), x(n, 0.0), h(n, 0.0), dh(n);
    auto ed = [&](double s) { return std::exp(d_of_zeta(betas_, s)); };
    for (std::size_t j = 0; j < n; ++j)
      z[j] = j + 1 == n ? zeta_max : zeta_max * static_cast<double>(j) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
      x[j + 1] = x[j] + num::integrate(ed, z[j], z[j + 1], 1e-13).value;
      auto outer = [&](double s) {
        const double inner = x[j] + num::integrate(ed, z[j], s, 1e-13).value;
        return inner / (ed(s) * betas_.b(s));
      };
      h[j + 1] = h[j] + num::integrate(outer, z[j], z[j + 1], 1e-13).value;
    }
    for (std::size_t j = 0; j < n; ++j) dh[j] = x[j] / (ed(z[j]) * betas_.b(z[j]));
    std::vector<double> xs = z, xv = x, xd(n);
    for (std::size_t j = 0; j < n; ++j) xd[j] = ed(z[j]);
    X_.emplace(std::move(xs), std::move(xv), std::move(xd));
    H_.emplace(std::move(z), std::move(h), std::move(dh));
  }

  double zeta_max() const noexcept { return zmax_; }
  double X(double zeta) const { return (*X_)(checked(zeta)); }
  double H(double zeta) const { return (*H_)(checked(zeta)); }

 private:
  double checked(double zeta) const {
    if (zeta == 0.0) return 0.0;
    if (zeta < 0.0 || zeta > zmax_) {
      throw ExtentError("zeta=" + std::to_string(zeta) + " outside nested-integral mesh [0, " +
                        std::to_string(zmax_) + "]");
    }
    return zeta;
  }

  using Hermite = boost::math::interpolators::cubic_hermite<std::vector<double>>;
  BetaParams betas_;
  double zmax_;
  std::optional<Hermite> X_, H_;
};

/// mu(zeta) implied by the invariant solution: nu e^{d(zeta)}.
inline double invariant_mu(const InvariantConfig& c, double zeta) {
  return c.phys.nu * std::exp(d_of_zeta(c.betas, zeta));
}

/// q(zeta, tau) on the grid from a W table (FactorTable or PeriodicOrbit).
/// The nested integral is only needed, and only read, when beta2 != 0.
template <class Table>
std::vector<double> assemble_invariant_q(const InvariantConfig& c, double zeta,
                                         const TauGrid& grid, const Table& w,
                                         const NestedIntegralCache* cache = nullptr) {
  c.validate();
  const auto& bt = c.betas;
  const double a = c.phys.a, nu = c.phys.nu;
  const Similarity s0 = similarity_vars(bt, zeta, 0.0);
  const double ed = std::exp(s0.d);
  const double b = bt.b(zeta);
  const double scale = std::exp(-0.5 * s0.d) / std::sqrt(b);
  double h = 0.0;
  if (bt.beta2 != 0.0 && zeta != 0.0) {
    if (cache) {
      h = cache->H(zeta);
    } else {
      h = NestedIntegralCache(bt, zeta).H(zeta);
    }
  }
  std::vector<double> q(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double tau = grid[i];
    const double lambda = tau * scale;
    if (!w.covers(lambda)) {
      throw ExtentError("lambda=" + std::to_string(lambda) + " at zeta=" +
                        std::to_string(zeta) + ", tau=" + std::to_string(tau) +
                        " is outside the W table");
    }
    q[i] = ed * w(lambda);
    if (bt.beta2 != 0.0)
      q[i] -= bt.beta2 / (2.0 * a) * (zeta * tau * tau / (2.0 * b) + nu * ed * h);
  }
  return q;
}

}  // namespace webster

#endif  // WEBSTER_INVARIANT_HPP
