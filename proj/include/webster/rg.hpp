#ifndef WEBSTER_RG_HPP
#define WEBSTER_RG_HPP

// Renormalization-group approximations in the marching coordinate x, with
// mu(x) = nu sqrt(S(x)):
//   q0  = (mu/a) ln Phi,                 Phi = 1 + (nu/mu)(K - 1)
//   q1  = (mu/a) ln[Phi - (nu/mu) I],
//         I = int_0^x dx' (mu'_x / mu') G(x - x') * [1 - K' + (mu'/nu) Phi' ln Phi']
//   qpt = nu K_a0 + (nu a / 2)[K_aa0 - (nu/mu) K_a0^2
//         - int_0^x dx' (nu mu'_x / mu'^2) G(x - x') * K_a0'^2]
// with K_a0 = G * (W/nu), K_aa0 = G * (W/nu)^2. Everything is evaluated on the
// kernel's working grid and subsampled onto the output grid.

#include <webster/error.hpp>
#include <webster/kernel.hpp>
#include <webster/numerics.hpp>
#include <webster/params.hpp>
#include <webster/profiles.hpp>
#include <webster/spectral.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <vector>

namespace webster {

/// What to do where a logarithm argument is non-positive.
enum class Breakdown { kThrow, kMask };

struct RGOptions {
  std::size_t panels = 64;        // initial Simpson panels of the x' integral
  std::size_t max_panels = 4096;
  double rel_tol = 1e-6;          // Richardson acceptance
  Breakdown breakdown = Breakdown::kThrow;
};

struct RGSolution {
  double x = 0.0;
  std::vector<double> tau;
  std::vector<double> q0, q1, qpt;  // q1, qpt empty unless requested
  std::vector<char> valid0, valid1;  // 0 where the log argument is <= 0
  std::size_t inner_breakdown_nodes = 0;
  std::size_t panels = 0;
  double inner_error = 0.0;  // Richardson estimate relative to max |I|
};

namespace detail {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// (mu/a) log1p(arg) with the breakdown policy applied to 1 + arg.
inline std::vector<double> log_field(double mu, double a, double x,
                                     const std::vector<double>& tau,
                                     const std::vector<double>& arg,
                                     Breakdown policy, std::vector<char>& valid) {
  std::vector<double> q(arg.size());
  valid.assign(arg.size(), 1);
  for (std::size_t i = 0; i < arg.size(); ++i) {
    if (!(1.0 + arg[i] > 0.0)) {
      if (policy == Breakdown::kThrow) throw BreakdownError(x, tau[i], 1.0 + arg[i]);
      valid[i] = 0;
      q[i] = kNaN;
      continue;
    }
    q[i] = mu / a * std::log1p(arg[i]);
  }
  return q;
}

}  // namespace detail

/// Zero-order solution from a kernel field. a = 0 gives the linear limit
/// nu K_a.
inline std::vector<double> q0(const PhysParams& p, const Profile& profile,
                              const KernelField& k,
                              Breakdown policy = Breakdown::kThrow,
                              std::vector<char>* valid = nullptr) {
  std::vector<char> v;
  std::vector<double> out;
  if (p.a == 0.0) {
    out.resize(k.K_a.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = p.nu * k.K_a[i];
    v.assign(out.size(), 1);
  } else {
    const double mu = profile.mu_of_x(p.nu, k.x);
    std::vector<double> arg(k.km1.size());
    for (std::size_t i = 0; i < arg.size(); ++i) arg[i] = p.nu / mu * k.km1[i];
    out = detail::log_field(mu, p.a, k.x, k.tau, arg, policy, v);
  }
  if (valid) *valid = std::move(v);
  return out;
}

/// RG solutions for one (params, profile, initial condition). Kernels are
/// built once and shared by every station; const methods are thread-safe.
class RGSolver {
 public:
  RGSolver(PhysParams p, Profile profile, const InitialCondition& ic,
           const TauGrid& grid, RGOptions opt = {})
      : params_(p), profile_(std::move(profile)), grid_(grid), opt_(opt) {
    p.validate();
    if (!grid.is_periodic()) throw ConfigError("RG solutions need a periodic grid");
    if (opt.panels < 2 || opt.panels % 2 != 0)
      throw ConfigError("x' quadrature needs an even number of panels >= 2");
    kernel_ = std::make_shared<const SpectralKernel>(ic, p, grid.size());
    linear_ = std::make_shared<const SpectralKernel>(ic, PhysParams{0.0, p.nu},
                                                     kernel_->size());
    if (linear_->size() != kernel_->size())
      kernel_ = std::make_shared<const SpectralKernel>(ic, p, linear_->size());
  }

  const PhysParams& params() const noexcept { return params_; }
  const Profile& profile() const noexcept { return profile_; }
  const TauGrid& grid() const noexcept { return grid_; }
  std::size_t working_size() const noexcept { return kernel_->size(); }

  /// q0 and, on request, q1 and qpt at station x.
  RGSolution solve(double x, bool first_order = true, bool perturbative = true) const {
    check_station(x);
    const std::size_t n = kernel_->size();
    const double a = params_.a, nu = params_.nu;
    const double mu = profile_.mu_of_x(nu, x);
    const auto tau = spectral::periodic_points(n);
    RGSolution sol;
    sol.x = x;
    sol.tau = grid_.points();

    const KernelField k = kernel_->field(x);
    sol.q0 = subsample(q0(params_, profile_, k, opt_.breakdown, &sol.valid0), grid_.size());
    sol.valid0 = subsample_flags(sol.valid0);

    if (first_order) {
      if (a == 0.0) {
        sol.q1 = sol.q0;
        sol.valid1 = sol.valid0;
      } else {
        Inner inner = bracket_integral(x);
        sol.inner_breakdown_nodes = inner.breakdown_nodes;
        sol.panels = inner.panels;
        sol.inner_error = inner.error;
        std::vector<double> arg(n);
        for (std::size_t i = 0; i < n; ++i)
          arg[i] = nu / mu * (k.km1[i] - inner.value[i]);
        std::vector<char> v;
        auto q = detail::log_field(mu, a, x, tau, arg, opt_.breakdown, v);
        sol.q1 = subsample(q, grid_.size());
        sol.valid1 = subsample_flags(v);
      }
    }

    if (perturbative) {
      const KernelField lin = linear_->field(x);
      Inner j = linear_integral(x);
      std::vector<double> q(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double ka = lin.K_a[i];
        q[i] = nu * ka + 0.5 * nu * a * (lin.K_aa[i] - nu / mu * ka * ka - j.value[i]);
      }
      sol.qpt = subsample(q, grid_.size());
    }
    return sol;
  }

 private:
  struct Inner {
    std::vector<double> value;
    std::size_t panels = 0;
    double error = 0.0;
    std::size_t breakdown_nodes = 0;
  };

  void check_station(double x) const {
    if (!(x >= 0.0)) throw DomainError("station x must be >= 0");
    if (x > profile_.x_max()) throw DomainError("station beyond the profile domain");
  }

  std::vector<char> subsample_flags(const std::vector<char>& v) const {
    const std::size_t stride = v.size() / grid_.size();
    std::vector<char> out(grid_.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i * stride];
    return out;
  }

  /// Bracket 1 - K' + (mu'/nu) Phi' ln Phi' with Phi' ln Phi' -> 0 where
  /// Phi' <= 0 (counted).
  Inner bracket_integral(double x) const {
    const double nu = params_.nu;
    return x_integral(x, [&](double xp, std::size_t& bad) {
      const KernelField k = kernel_->field(xp);
      const double mu = profile_.mu_of_x(nu, xp);
      const double r = nu / mu;
      std::vector<double> b(k.km1.size());
      for (std::size_t i = 0; i < b.size(); ++i) {
        const double e = r * k.km1[i];  // Phi - 1
        double phi_log_phi = 0.0;
        if (1.0 + e > 0.0) {
          phi_log_phi = (1.0 + e) * std::log1p(e);
        } else {
          ++bad;
        }
        b[i] = -k.km1[i] + phi_log_phi / r;
      }
      return b;
    });
  }

  /// (nu / mu') K_a0'^2, the a -> 0 limit of the bracket over a^2 / 2.
  Inner linear_integral(double x) const {
    const double nu = params_.nu;
    return x_integral(x, [&](double xp, std::size_t&) {
      const KernelField k = linear_->field(xp);
      const double r = nu / profile_.mu_of_x(nu, xp);
      std::vector<double> b(k.K_a.size());
      for (std::size_t i = 0; i < b.size(); ++i) b[i] = r * k.K_a[i] * k.K_a[i];
      return b;
    });
  }

  /// int_0^x dx' (mu'_x / mu') G(x - x') * f(x') on the graded map
  /// x' = x s^3 (10 - 15 s + 6 s^2), composite Simpson in s, panels doubled
  /// until the Richardson estimate falls below rel_tol.
  template <class F>
  Inner x_integral(double x, F&& f) const {
    const std::size_t n = kernel_->size();
    Inner out;
    out.value.assign(n, 0.0);
    if (x == 0.0 || profile_.is_uniform()) return out;
    const double nu = params_.nu;

    // Node spectra weighted by the Jacobian and mu'_x / mu', propagated to x.
    struct Node {
      spectral::Spectrum spectrum;
      std::size_t bad = 0;
    };
    auto node = [&](std::size_t i, std::size_t panels) {
      const double s = static_cast<double>(i) / static_cast<double>(panels);
      const double xp = std::min(x, x * s * s * s * (10.0 - 15.0 * s + 6.0 * s * s));
      const double jac = 30.0 * x * s * s * (1.0 - s) * (1.0 - s);
      Node out{spectral::Spectrum(n / 2 + 1, 0.0), 0};
      if (jac == 0.0) return out;
      const double weight = jac * profile_.dmu_dx(nu, xp) / profile_.mu_of_x(nu, xp);
      if (weight == 0.0) return out;
      out.spectrum = spectral::forward(f(xp, out.bad));
      spectral::propagate(out.spectrum, nu * (x - xp));
      for (auto& c : out.spectrum) c *= weight;
      return out;
    };
    std::vector<Node> nodes;
    auto simpson = [&] {
      const std::size_t panels = nodes.size() - 1;
      spectral::Spectrum acc(n / 2 + 1, 0.0);
      for (std::size_t i = 0; i <= panels; ++i) {
        const double w = num::simpson_weight(i, panels);
        for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w * nodes[i].spectrum[k];
      }
      return spectral::inverse(acc, n);
    };

    std::size_t panels = opt_.panels / 2;
    for (std::size_t i = 0; i <= panels; ++i) nodes.push_back(node(i, panels));
    auto coarse = simpson();
    for (;;) {
      std::vector<Node> refined;
      refined.reserve(2 * panels + 1);
      for (std::size_t i = 0; i <= panels; ++i) {
        refined.push_back(std::move(nodes[i]));
        if (i < panels) refined.push_back(node(2 * i + 1, 2 * panels));
      }
      nodes = std::move(refined);
      panels *= 2;
      auto fine = simpson();
      double scale = 0.0, diff = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        scale = std::max(scale, std::abs(fine[i]));
        diff = std::max(diff, std::abs(fine[i] - coarse[i]));
      }
      const double err = scale > 0.0 ? diff / 15.0 / scale : 0.0;
      if (err <= opt_.rel_tol) {
        for (std::size_t i = 0; i < n; ++i)
          out.value[i] = fine[i] + (fine[i] - coarse[i]) / 15.0;
        out.panels = panels;
        out.error = err;
        for (const auto& nd : nodes) out.breakdown_nodes += nd.bad;
        return out;
      }
      if (2 * panels > opt_.max_panels)
        throw NumericError("x' integral did not reach the Richardson tolerance", err);
      coarse = std::move(fine);
    }
  }

  PhysParams params_;
  Profile profile_;
  TauGrid grid_;
  RGOptions opt_;
  std::shared_ptr<const SpectralKernel> kernel_;
  std::shared_ptr<const SpectralKernel> linear_;
};

}  // namespace webster

#endif  // WEBSTER_RG_HPP
