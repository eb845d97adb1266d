#ifndef WEBSTER_SOLVER_HPP
#define WEBSTER_SOLVER_HPP

// Pseudo-spectral march of
//   q-form: q_zeta = a q_tau^2 + mu(zeta) q_tautau
//   u-form: u_zeta = a u u_tau + mu(zeta) u_tautau,   u = 2 q_tau
// in zeta. Diffusion is removed by the integrating factor
// exp(-k^2 int mu dzeta) = exp(-nu k^2 (x(zeta_b) - x(zeta_a))); the quadratic
// term is advanced by adaptive Dormand-Prince 5(4) (Lawson form) with 2/3-rule
// dealiasing.

#include <webster/error.hpp>
#include <webster/kernel.hpp>
#include <webster/numerics.hpp>
#include <webster/params.hpp>
#include <webster/profiles.hpp>
#include <webster/spectral.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

namespace webster {

enum class Form { kQ, kU };

struct SolverConfig {
  std::size_t n = 256;
  double tol = 1e-8;
  std::vector<double> stations;    // increasing, first >= 0
  bool stations_in_zeta = false;   // stations given in x unless set
  Form form = Form::kQ;
  bool initial_is_u = false;       // u-form only: samples are u, not q
  std::size_t max_steps = 2'000'000;
};

struct SolverResult {
  std::vector<double> tau;
  std::vector<double> x, zeta;
  std::vector<std::vector<double>> fields;  // q or u per station
  std::size_t steps = 0;
  std::size_t rejected = 0;
  double tail = 0.0;  // largest relative amplitude in the top dealiased band
};

namespace detail {

using spectral::cplx;
using spectral::Spectrum;

// Dormand-Prince 5(4) tableau.
inline constexpr std::array<double, 7> kC{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double kA[7][6]{
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84}};
inline constexpr std::array<double, 7> kB5{35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192,
                                           -2187.0 / 6784, 11.0 / 84, 0.0};
inline constexpr std::array<double, 7> kB4{5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640,
                                           -92097.0 / 339200, 187.0 / 2100, 1.0 / 40};

class Marcher {
 public:
  Marcher(PhysParams p, const Profile& profile, std::size_t n, Form form)
      : p_(p), profile_(profile), n_(n), form_(form), bins_(n / 2 + 1) {
    cutoff_ = n / 3;
  }

  /// Quadratic term in spectral space, dealiased.
  Spectrum nonlinear(const Spectrum& v) const {
    Spectrum d(bins_);
    for (std::size_t k = 0; k < bins_; ++k)
      d[k] = k <= cutoff_ ? cplx(0.0, static_cast<double>(k)) * v[k] : cplx(0.0);
    auto g = spectral::inverse(d, n_);
    if (form_ == Form::kQ) {
      for (double& x : g) x = p_.a * x * x;  // a q_tau^2
      auto out = spectral::forward(g);
      for (std::size_t k = cutoff_ + 1; k < bins_; ++k) out[k] = 0.0;
      return out;
    }
    // (a/2) d/dtau (u^2): conservative, zero mean.
    Spectrum m(bins_);
    for (std::size_t k = 0; k < bins_; ++k) m[k] = k <= cutoff_ ? v[k] : cplx(0.0);
    auto u = spectral::inverse(m, n_);
    for (double& x : u) x = 0.5 * p_.a * x * x;
    auto out = spectral::forward(u);
    for (std::size_t k = 0; k < bins_; ++k)
      out[k] = k <= cutoff_ ? cplx(0.0, static_cast<double>(k)) * out[k] : cplx(0.0);
    return out;
  }

  /// exp(-nu k^2 (x_to - x_from)) applied in place.
  void decay(Spectrum& s, double x_from, double x_to) const {
    spectral::propagate(s, p_.nu * (x_to - x_from));
  }

  double x_of(double zeta) const { return profile_.x_of_zeta(zeta); }

  std::size_t cutoff() const { return cutoff_; }

 private:
  PhysParams p_;
  const Profile& profile_;
  std::size_t n_;
  Form form_;
  std::size_t bins_;
  std::size_t cutoff_;
};

}  // namespace detail

/// u = 2 q_tau.
inline std::vector<double> u_from_q(const std::vector<double>& q) {
  auto u = spectral::derivative(q, 1);
  for (double& v : u) v *= 2.0;
  return u;
}

/// Marches the initial data through the requested stations.
inline SolverResult solve(const InitialCondition& ic, const PhysParams& p,
                          const Profile& profile, const SolverConfig& cfg) {
  using detail::cplx;
  using detail::Spectrum;
  p.validate();
  if (cfg.n < 16 || !num::is_power_of_two(cfg.n))
    throw ConfigError("solver grid N must be a power of two >= 16");
  if (cfg.stations.empty()) throw ConfigError("solver needs at least one station");
  if (!(cfg.tol > 0.0)) throw ConfigError("solver tolerance must be > 0");
  if (!ic.is_periodic()) throw ConfigError("solver needs periodic initial data");
  for (std::size_t i = 0; i < cfg.stations.size(); ++i) {
    if (!(cfg.stations[i] >= 0.0) || (i > 0 && !(cfg.stations[i] > cfg.stations[i - 1])))
      throw ConfigError("solver stations must increase from >= 0");
  }

  const std::size_t n = cfg.n, bins = n / 2 + 1;
  detail::Marcher m(p, profile, n, cfg.form);
  SolverResult res;
  res.tau = spectral::periodic_points(n);
  for (double s : cfg.stations) {
    const double z = cfg.stations_in_zeta ? s : profile.zeta_of_x(s);
    res.zeta.push_back(z);
    res.x.push_back(cfg.stations_in_zeta ? profile.x_of_zeta(s) : s);
  }

  std::vector<double> init = ic.sample(n);
  if (cfg.form == Form::kU && !cfg.initial_is_u) init = u_from_q(init);
  Spectrum y = spectral::forward(init);

  double zeta = 0.0, x = 0.0;
  const double span = res.zeta.back();
  double h = std::max(span, 1e-3) * 1e-3;
  Spectrum k1 = m.nonlinear(y);
  std::array<Spectrum, 7> k;
  std::array<double, 7> xs{};

  auto record = [&](const Spectrum& s) {
    res.fields.push_back(spectral::inverse(s, n));
    double peak = 0.0, top = 0.0;
    for (std::size_t j = 0; j < bins; ++j) peak = std::max(peak, std::abs(s[j]));
    for (std::size_t j = m.cutoff() - m.cutoff() / 8; j <= m.cutoff(); ++j)
      top = std::max(top, std::abs(s[j]));
    if (peak > 0.0) res.tail = std::max(res.tail, top / peak);
  };

  for (double target : res.zeta) {
    while (zeta < target) {
      if (res.steps + res.rejected >= cfg.max_steps)
        throw ResolutionError("solver exceeded " + std::to_string(cfg.max_steps) +
                              " steps; increase N");
      double step = h;
      const bool last = zeta + step >= target;
      if (last) step = target - zeta;
      if (step < 1e-13 * std::max(1.0, span))
        throw ResolutionError("step size collapsed at zeta=" + std::to_string(zeta) +
                              "; increase N (currently " + std::to_string(n) + ")");
      // Stage positions in x for the integrating factor.
      for (int i = 0; i < 7; ++i)
        xs[i] = i == 0 ? x : m.x_of(i >= 5 ? zeta + step : zeta + detail::kC[i] * step);
      k[0] = k1;
      Spectrum stage;
      for (int i = 1; i < 7; ++i) {
        stage = y;
        m.decay(stage, xs[0], xs[i]);
        for (int j = 0; j < i; ++j) {
          if (detail::kA[i][j] == 0.0) continue;
          Spectrum t = k[j];
          m.decay(t, xs[j], xs[i]);
          for (std::size_t b = 0; b < bins; ++b) stage[b] += step * detail::kA[i][j] * t[b];
        }
        k[i] = m.nonlinear(stage);
      }
      // Stage 7 sits at the 5th-order solution (FSAL); the embedded
      // difference gives the error estimate.
      Spectrum err(bins, 0.0);
      for (int j = 0; j < 7; ++j) {
        const double c = detail::kB5[j] - detail::kB4[j];
        if (c == 0.0) continue;
        Spectrum t = k[j];
        m.decay(t, xs[j], xs[6]);
        for (std::size_t b = 0; b < bins; ++b) err[b] += step * c * t[b];
      }
      const auto e = spectral::inverse(err, n);
      const auto yn = spectral::inverse(stage, n);
      double emax = 0.0, scale = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        emax = std::max(emax, std::abs(e[b]));
        scale = std::max(scale, std::abs(yn[b]));
      }
      const double ratio = emax / (cfg.tol * std::max(scale, 1e-300));
      if (ratio <= 1.0) {
        y = std::move(stage);
        k1 = k[6];
        zeta = last ? target : zeta + step;
        x = xs[6];
        ++res.steps;
        const double grow = ratio == 0.0 ? 5.0 : std::min(5.0, 0.9 * std::pow(ratio, -0.2));
        // A step shortened to land on a station does not shrink the next one.
        h = last ? std::max(h, step * grow) : step * grow;
      } else {
        ++res.rejected;
        h = step * std::max(0.2, 0.9 * std::pow(ratio, -0.2));
      }
    }
    record(y);
  }
  return res;
}

/// tau-derivative rule for residual().
enum class TauDerivative { kSpectral, kCentral };

/// Max-norm of q_zeta - a q_tau^2 - mu q_tautau at the interior stations of
/// uniformly spaced snapshots: central differences in zeta, spectral or
/// second-order central differences in tau (the latter skips the two edge
/// samples of a non-periodic window).
inline double residual(const std::vector<double>& zeta,
                       const std::vector<std::vector<double>>& q, const TauGrid& grid,
                       const PhysParams& p, const std::function<double(double)>& mu_of_zeta,
                       TauDerivative mode = TauDerivative::kSpectral) {
  if (zeta.size() < 3 || q.size() != zeta.size())
    throw ConfigError("residual needs >= 3 stations with one field each");
  const double dz = zeta[1] - zeta[0];
  for (std::size_t i = 1; i < zeta.size(); ++i) {
    if (std::abs((zeta[i] - zeta[i - 1]) - dz) > 1e-9 * std::abs(dz) || !(dz > 0.0))
      throw ConfigError("residual needs uniformly spaced stations");
  }
  if (mode == TauDerivative::kSpectral && !grid.is_periodic())
    throw ConfigError("spectral tau derivatives need a periodic grid");
  const std::size_t n = grid.size();
  const double h = grid.spacing();
  double worst = 0.0;
  for (std::size_t s = 1; s + 1 < zeta.size(); ++s) {
    const auto& f = q[s];
    if (f.size() != n) throw ConfigError("field size differs from the grid");
    std::vector<double> d1, d2;
    std::size_t lo = 0, hi = n;
    if (mode == TauDerivative::kSpectral) {
      d1 = spectral::derivative(f, 1);
      d2 = spectral::derivative(f, 2);
    } else {
      d1.assign(n, 0.0);
      d2.assign(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t im, ip;
        if (grid.is_periodic()) {
          im = (i + n - 1) % n;
          ip = (i + 1) % n;
        } else {
          if (i == 0 || i + 1 == n) continue;
          im = i - 1;
          ip = i + 1;
        }
        d1[i] = (f[ip] - f[im]) / (2.0 * h);
        d2[i] = (f[ip] - 2.0 * f[i] + f[im]) / (h * h);
      }
      if (!grid.is_periodic()) lo = 1, hi = n - 1;
    }
    const double mu = mu_of_zeta(zeta[s]);
    for (std::size_t i = lo; i < hi; ++i) {
      const double dq = (q[s + 1][i] - q[s - 1][i]) / (2.0 * dz);
      worst = std::max(worst, std::abs(dq - p.a * d1[i] * d1[i] - mu * d2[i]));
    }
  }
  return worst;
}

inline double residual(const std::vector<double>& zeta,
                       const std::vector<std::vector<double>>& q, const TauGrid& grid,
                       const PhysParams& p, const Profile& profile,
                       TauDerivative mode = TauDerivative::kSpectral) {
  return residual(zeta, q, grid, p,
                  [&](double z) { return profile.mu_of_zeta(p.nu, z); }, mode);
}

/// p = u / sqrt(S(x)).
inline std::vector<double> p_from_u(const std::vector<double>& u, const Profile& profile,
                                    double x) {
  const double s = profile.sqrt_area(x);
  std::vector<double> out(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) out[i] = u[i] / s;
  return out;
}

}  // namespace webster

#endif  // WEBSTER_SOLVER_HPP
