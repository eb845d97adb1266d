#ifndef WEBSTER_PROFILES_HPP
#define WEBSTER_PROFILES_HPP

// Cross-section profile families S(x), the quadratic classifying family
// b(zeta) = beta0 + beta1*zeta + beta2*zeta^2 with its exponent
// d(zeta) = M * int_0^zeta dy / b(y), and the coordinate maps
//   zeta = int_0^x dx' / sqrt(S(x')),   mu = nu * sqrt(S(x)).
// A Profile is immutable once constructed; any lookup table it needs is built
// eagerly in the constructor.

#include <webster/error.hpp>
#include <webster/numerics.hpp>
#include <webster/table_io.hpp>

#include <boost/math/interpolators/pchip.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace webster {

struct BetaParams {
  double beta0 = 1.0;
  double beta1 = 0.0;
  double beta2 = 0.0;
  double M = 1.0;

  double b(double zeta) const noexcept {
    return beta0 + zeta * (beta1 + zeta * beta2);
  }
  double db(double zeta) const noexcept { return beta1 + 2.0 * beta2 * zeta; }
  double discriminant() const noexcept {
    return beta1 * beta1 - 4.0 * beta0 * beta2;
  }
};

namespace detail {

inline double sign_or_one(double v) { return v < 0.0 ? -1.0 : 1.0; }

/// Real roots of b, stable for small beta2.
inline std::vector<double> b_roots(const BetaParams& p) {
  if (p.beta2 == 0.0) {
    if (p.beta1 == 0.0) return {};
    return {-p.beta0 / p.beta1};
  }
  const double disc = p.discriminant();
  if (disc < 0.0) return {};
  const double s = std::sqrt(disc);
  const double q = -0.5 * (p.beta1 + sign_or_one(p.beta1) * s);
  if (q == 0.0) return {0.0};
  return {q / p.beta2, p.beta0 / q};
}

inline void require_regular(const BetaParams& p, double lo, double hi) {
  if (lo > hi) std::swap(lo, hi);
  for (double r : b_roots(p)) {
    if (r >= lo && r <= hi) {
      throw SingularProfileError("b(zeta) vanishes at zeta=" +
                                 std::to_string(r) + " inside [" +
                                 std::to_string(lo) + ", " +
                                 std::to_string(hi) + "]");
    }
  }
}

inline double d_by_quadrature(const BetaParams& p, double zeta) {
  auto f = [&](double y) { return p.M / p.b(y); };
  const double sgn = zeta < 0.0 ? -1.0 : 1.0;
  return sgn * num::integrate(f, std::min(0.0, zeta), std::max(0.0, zeta),
                              1e-12)
                   .value;
}

}  // namespace detail

/// d(zeta) = M * int_0^zeta dy / b(y) by the closed form matching the sign of
/// the discriminant; within 1e-12 (relative) of a case boundary the integral
/// is evaluated by quadrature instead.
inline double d_of_zeta(const BetaParams& p, double zeta) {
  detail::require_regular(p, 0.0, zeta);
  if (p.M == 0.0 || zeta == 0.0) return 0.0;
  const double b0 = p.beta0, b1 = p.beta1, b2 = p.beta2, M = p.M;
  if (b2 == 0.0) {
    if (b1 == 0.0) return M * zeta / b0;
    return (M / b1) * std::log1p(b1 * zeta / b0);
  }
  const double disc = p.discriminant();
  const double scale = b1 * b1 + 4.0 * std::abs(b0 * b2);
  if (disc == 0.0) {
    const double r = b1 / (2.0 * b2);
    return M * zeta / (b2 * r * (zeta + r));
  }
  if (std::abs(disc) <= 1e-12 * scale) return detail::d_by_quadrature(p, zeta);
  if (disc < 0.0) {
    const double s = std::sqrt(-disc);
    return (2.0 * M / s) *
           (std::atan((b1 + 2.0 * b2 * zeta) / s) - std::atan(b1 / s));
  }
  // Two real roots r1, r2 outside [0, zeta]:
  //   int_0^zeta dy/b = [log1p(-zeta/r1) - log1p(-zeta/r2)] / (b2 (r1 - r2)).
  const double s = std::sqrt(disc);
  const double sg = detail::sign_or_one(b1);
  const double q = -0.5 * (b1 + sg * s);
  const double r1 = q / b2;
  const double r2 = b0 / q;
  return M / (-sg * s) * (std::log1p(-zeta / r1) - std::log1p(-zeta / r2));
}

/// Profile variants. All are normalized so that S(0) = 1.
namespace shape {
struct Constant {};
/// S = exp(2*alpha*x), i.e. mu/nu = exp(alpha*x).
struct Exponential {
  double alpha = 0.0;
};
/// S = (1 + x/R)^2; R < 0 is the tapered pipe converging at x = |R|.
struct Spherical {
  double radius = 1.0;
};
/// Self-similar family for beta2 = 0:
///   S = (1 + (M+beta1) x / beta0)^(2M/(beta1+M)), or exp(2Mx/beta0) when
///   beta1 = -M.
struct PowerLaw {
  double beta0 = 1.0;
  double beta1 = 1.0;
  double M = 1.0;
};
/// General classifying family; S(x) is implicit through zeta.
struct BetaFamily {
  BetaParams betas;
  double zeta_max = 1.0;
};
struct Tabulated {
  std::vector<double> x;
  std::vector<double> area;
};
}  // namespace shape

struct ProfileSpec {
  std::variant<shape::Constant, shape::Exponential, shape::Spherical,
               shape::PowerLaw, shape::BetaFamily, shape::Tabulated>
      shape = shape::Constant{};
  /// Upper end of the declared x-domain (the lower end is 0).
  double x_max = std::numeric_limits<double>::infinity();
};

/// Cumulative integral F(s) = int_0^s density, tabulated at fixed nodes and
/// refined by adaptive quadrature inside a segment; inverted by bracketing.
class CumulativeMap {
 public:
  CumulativeMap() = default;
  CumulativeMap(std::function<double(double)> density, std::vector<double> nodes,
                double rel_tol = 1e-12)
      : density_(std::move(density)), nodes_(std::move(nodes)), tol_(rel_tol) {
    cum_.resize(nodes_.size(), 0.0);
    for (std::size_t i = 1; i < nodes_.size(); ++i) {
      if (!(nodes_[i] > nodes_[i - 1]))
        throw ConfigError("coordinate map nodes must be strictly increasing");
      cum_[i] = cum_[i - 1] + segment(nodes_[i - 1], nodes_[i]);
      if (!(cum_[i] > cum_[i - 1]))
        throw NumericError("coordinate map is not strictly increasing",
                           cum_[i] - cum_[i - 1]);
    }
  }

  double max_arg() const { return nodes_.back(); }
  double max_value() const { return cum_.back(); }

  double forward(double s) const {
    if (s < nodes_.front() || s > nodes_.back())
      throw DomainError("coordinate " + std::to_string(s) +
                        " outside tabulated range");
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), s);
    std::size_t i = it == nodes_.begin() ? 0 : std::size_t(it - nodes_.begin()) - 1;
    if (i + 1 == nodes_.size()) return cum_.back();
    return cum_[i] + segment(nodes_[i], s);
  }

  double inverse(double value) const {
    if (value < 0.0 || value > cum_.back())
      throw DomainError("mapped coordinate " + std::to_string(value) +
                        " outside tabulated range");
    auto it = std::upper_bound(cum_.begin(), cum_.end(), value);
    std::size_t i = it == cum_.begin() ? 0 : std::size_t(it - cum_.begin()) - 1;
    if (i + 1 == cum_.size()) return nodes_.back();
    if (value == cum_[i]) return nodes_[i];
    const double lo = nodes_[i], hi = nodes_[i + 1];
    auto f = [&](double s) { return cum_[i] + segment(lo, s) - value; };
    return num::find_root(f, lo, hi, 1e-14 * (1.0 + std::abs(hi)));
  }

 private:
  double segment(double a, double b) const {
    return num::integrate(density_, a, b, tol_).value;
  }

  std::function<double(double)> density_;
  std::vector<double> nodes_;
  std::vector<double> cum_;
  double tol_ = 1e-12;
};

class Profile {
 public:
  explicit Profile(ProfileSpec spec = {}) : spec_(std::move(spec)) {
    std::visit([this](const auto& s) { init(s); }, spec_.shape);
  }

  const ProfileSpec& spec() const noexcept { return spec_; }
  double x_max() const noexcept { return x_max_; }
  double zeta_max() const noexcept { return zeta_max_; }

  /// True when sqrt(S) is constant, so mu_x == 0 everywhere.
  bool is_uniform() const noexcept { return uniform_; }

  double area(double x) const {
    const double r = sqrt_area(x);
    return r * r;
  }

  double sqrt_area(double x) const {
    check_x(x);
    return std::visit([&](const auto& s) { return sqrt_area_impl(s, x); },
                      spec_.shape);
  }

  /// d sqrt(S) / dx.
  double dsqrt_area(double x) const {
    check_x(x);
    return std::visit([&](const auto& s) { return dsqrt_area_impl(s, x); },
                      spec_.shape);
  }

  double zeta_of_x(double x) const {
    check_x(x);
    return std::visit([&](const auto& s) { return zeta_impl(s, x); },
                      spec_.shape);
  }

  double x_of_zeta(double zeta) const {
    if (!(zeta >= 0.0) || zeta > zeta_max_)
      throw DomainError("zeta=" + std::to_string(zeta) +
                        " outside the profile domain");
    return std::visit([&](const auto& s) { return x_impl(s, zeta); },
                      spec_.shape);
  }

  double mu_of_x(double nu, double x) const { return nu * sqrt_area(x); }
  double dmu_dx(double nu, double x) const { return nu * dsqrt_area(x); }

  double mu_of_zeta(double nu, double zeta) const {
    if (const auto* bf = std::get_if<shape::BetaFamily>(&spec_.shape))
      return nu * std::exp(d_of_zeta(bf->betas, zeta));
    return nu * sqrt_area(x_of_zeta(zeta));
  }

 private:
  void check_x(double x) const {
    if (!(x >= 0.0) || x > x_max_)
      throw DomainError("x=" + std::to_string(x) +
                        " outside the declared profile domain [0, " +
                        std::to_string(x_max_) + "]");
  }

  void set_domain(double natural_max) {
    x_max_ = std::min(spec_.x_max, natural_max);
    if (!(x_max_ > 0.0)) throw ConfigError("profile domain is empty");
  }

  // Constant
  void init(const shape::Constant&) {
    set_domain(spec_.x_max);
    zeta_max_ = x_max_;
    uniform_ = true;
  }
  double sqrt_area_impl(const shape::Constant&, double) const { return 1.0; }
  double dsqrt_area_impl(const shape::Constant&, double) const { return 0.0; }
  double zeta_impl(const shape::Constant&, double x) const { return x; }
  double x_impl(const shape::Constant&, double z) const { return z; }

  // Exponential
  void init(const shape::Exponential& s) {
    set_domain(spec_.x_max);
    uniform_ = s.alpha == 0.0;
    zeta_max_ = zeta_impl(s, x_max_);
  }
  double sqrt_area_impl(const shape::Exponential& s, double x) const {
    return std::exp(s.alpha * x);
  }
  double dsqrt_area_impl(const shape::Exponential& s, double x) const {
    return s.alpha * std::exp(s.alpha * x);
  }
  double zeta_impl(const shape::Exponential& s, double x) const {
    if (s.alpha == 0.0) return x;
    return -std::expm1(-s.alpha * x) / s.alpha;
  }
  double x_impl(const shape::Exponential& s, double z) const {
    if (s.alpha == 0.0) return z;
    return -std::log1p(-s.alpha * z) / s.alpha;
  }

  // Spherical
  void init(const shape::Spherical& s) {
    if (s.radius == 0.0) throw ConfigError("spherical profile needs R != 0");
    if (s.radius < 0.0 && !(spec_.x_max < -s.radius))
      throw ConfigError(
          "tapered spherical pipe needs a declared x_max below the focus |R|");
    set_domain(spec_.x_max);
    zeta_max_ = zeta_impl(s, x_max_);
  }
  double sqrt_area_impl(const shape::Spherical& s, double x) const {
    return 1.0 + x / s.radius;
  }
  double dsqrt_area_impl(const shape::Spherical& s, double) const {
    return 1.0 / s.radius;
  }
  double zeta_impl(const shape::Spherical& s, double x) const {
    return s.radius * std::log1p(x / s.radius);
  }
  double x_impl(const shape::Spherical& s, double z) const {
    return s.radius * std::expm1(z / s.radius);
  }

  // PowerLaw: sqrt(S) = (1 + c x)^p, c = (M+beta1)/beta0, p = M/(beta1+M).
  void init(const shape::PowerLaw& s) {
    if (s.beta0 == 0.0) throw ConfigError("power-law profile needs beta0 != 0");
    uniform_ = s.M == 0.0;
    double natural = std::numeric_limits<double>::infinity();
    const double c = (s.M + s.beta1) / s.beta0;
    if (s.M + s.beta1 != 0.0 && c < 0.0) {
      natural = -1.0 / c;
      if (!(spec_.x_max < natural))
        throw ConfigError("power-law profile base vanishes at x=" +
                          std::to_string(natural) +
                          "; declare x_max below it");
    }
    set_domain(natural);
    zeta_max_ = zeta_impl(s, x_max_);
  }
  double sqrt_area_impl(const shape::PowerLaw& s, double x) const {
    if (s.M + s.beta1 == 0.0) return std::exp(s.M * x / s.beta0);
    const double base = 1.0 + (s.M + s.beta1) * x / s.beta0;
    if (!(base > 0.0))
      throw DomainError("power-law base 1+(M+beta1)x/beta0 <= 0 at x=" +
                        std::to_string(x));
    return std::pow(base, s.M / (s.beta1 + s.M));
  }
  double dsqrt_area_impl(const shape::PowerLaw& s, double x) const {
    if (s.M + s.beta1 == 0.0)
      return (s.M / s.beta0) * std::exp(s.M * x / s.beta0);
    const double c = (s.M + s.beta1) / s.beta0;
    const double p = s.M / (s.beta1 + s.M);
    return p * c * std::pow(1.0 + c * x, p - 1.0);
  }
  double zeta_impl(const shape::PowerLaw& s, double x) const {
    if (s.M + s.beta1 == 0.0) {
      const double alpha = s.M / s.beta0;
      return alpha == 0.0 ? x : -std::expm1(-alpha * x) / alpha;
    }
    const double c = (s.M + s.beta1) / s.beta0;
    const double p = s.M / (s.beta1 + s.M);
    const double l = std::log1p(c * x);
    if (p == 1.0) return l / c;
    return std::expm1((1.0 - p) * l) / (c * (1.0 - p));
  }
  double x_impl(const shape::PowerLaw& s, double z) const {
    if (s.M + s.beta1 == 0.0) {
      const double alpha = s.M / s.beta0;
      return alpha == 0.0 ? z : -std::log1p(-alpha * z) / alpha;
    }
    const double c = (s.M + s.beta1) / s.beta0;
    const double p = s.M / (s.beta1 + s.M);
    if (p == 1.0) return std::expm1(c * z) / c;
    return std::expm1(std::log1p(c * (1.0 - p) * z) / (1.0 - p)) / c;
  }

  // BetaFamily: x(zeta) = int_0^zeta exp(d), sqrt(S) = exp(d(zeta(x))).
  void init(const shape::BetaFamily& s) {
    if (!(s.zeta_max > 0.0))
      throw ConfigError("beta-family profile needs zeta_max > 0");
    if (s.betas.M == 0.0) throw ConfigError("beta-family profile needs M != 0");
    detail::require_regular(s.betas, 0.0, s.zeta_max);
    const BetaParams betas = s.betas;
    constexpr std::size_t kNodes = 257;
    std::vector<double> nodes(kNodes);
    for (std::size_t i = 0; i < kNodes; ++i)
      nodes[i] = s.zeta_max * static_cast<double>(i) / (kNodes - 1);
    map_ = std::make_shared<const CumulativeMap>(
        [betas](double z) { return std::exp(d_of_zeta(betas, z)); },
        std::move(nodes));
    zeta_max_ = s.zeta_max;
    set_domain(map_->max_value());
  }
  double sqrt_area_impl(const shape::BetaFamily& s, double x) const {
    return std::exp(d_of_zeta(s.betas, zeta_impl(s, x)));
  }
  double dsqrt_area_impl(const shape::BetaFamily& s, double x) const {
    // d sqrt(S)/dx = d'(zeta) exp(d) * dzeta/dx = M / b(zeta).
    return s.betas.M / s.betas.b(zeta_impl(s, x));
  }
  double zeta_impl(const shape::BetaFamily&, double x) const {
    return map_->inverse(x);
  }
  double x_impl(const shape::BetaFamily&, double z) const {
    return map_->forward(z);
  }

  // Tabulated: monotone cubic interpolation of S.
  void init(const shape::Tabulated& s) {
    if (s.x.size() != s.area.size())
      throw ConfigError("tabulated profile columns differ in length");
    if (s.x.size() < 4)
      throw ConfigError("tabulated profile needs at least 4 samples");
    for (std::size_t i = 1; i < s.x.size(); ++i)
      if (!(s.x[i] > s.x[i - 1]))
        throw ConfigError("tabulated profile x must be strictly increasing");
    for (double a : s.area)
      if (!(a > 0.0)) throw ConfigError("tabulated profile needs S > 0");
    if (s.x.front() != 0.0)
      throw ConfigError("tabulated profile must start at x = 0");
    if (std::abs(s.area.front() - 1.0) > 1e-9)
      throw ConfigError("tabulated profile must satisfy S(0) = 1");
    interp_ = std::make_shared<const boost::math::interpolators::pchip<
        std::vector<double>>>(std::vector<double>(s.x),
                              std::vector<double>(s.area));
    auto interp = interp_;
    for (double x : s.x)
      if (!((*interp)(x) > 0.0)) throw ConfigError("interpolated S <= 0");
    map_ = std::make_shared<const CumulativeMap>(
        [interp](double x) { return 1.0 / std::sqrt((*interp)(x)); },
        std::vector<double>(s.x));
    set_domain(s.x.back());
    zeta_max_ = map_->forward(x_max_);
  }
  double sqrt_area_impl(const shape::Tabulated&, double x) const {
    const double a = (*interp_)(x);
    if (!(a > 0.0))
      throw DomainError("interpolated S <= 0 at x=" + std::to_string(x));
    return std::sqrt(a);
  }
  double dsqrt_area_impl(const shape::Tabulated&, double x) const {
    return interp_->prime(x) / (2.0 * std::sqrt((*interp_)(x)));
  }
  double zeta_impl(const shape::Tabulated&, double x) const {
    return map_->forward(x);
  }
  double x_impl(const shape::Tabulated&, double z) const {
    return map_->inverse(z);
  }

  ProfileSpec spec_;
  double x_max_ = 0.0;
  double zeta_max_ = 0.0;
  bool uniform_ = false;
  std::shared_ptr<const CumulativeMap> map_;
  std::shared_ptr<const boost::math::interpolators::pchip<std::vector<double>>>
      interp_;
};

/// Reads a two-column `x S` table (whitespace or commas, `#` comments, an
/// optional header naming the columns `x` and `S`).
inline shape::Tabulated read_profile_table(const std::string& path) {
  const io::Table t = io::read_table(path);
  return {t.values(t.column("x", 0)), t.values(t.column("S", 1))};
}

struct BetaProfileRow {
  double area;
  double zeta;
  double x;
};

/// Parametric profile (S, zeta(S), x(S)) for the two explicitly integrable
/// sub-families: beta2 = 0 (closed forms) and beta1 = 0 with beta0*beta2 > 0
/// (zeta via tan, x by quadrature). Samples are geometric in S and include
/// both ends of the range.
inline std::vector<BetaProfileRow> beta_profile_table(const BetaParams& p,
                                                      double area_lo,
                                                      double area_hi,
                                                      std::size_t count) {
  if (!(area_lo > 0.0) || !(area_hi > area_lo) || count < 2)
    throw ConfigError("beta profile table needs 0 < S_lo < S_hi, count >= 2");
  if (p.M == 0.0) throw ConfigError("beta profile table needs M != 0");
  std::vector<double> areas(count);
  const double l0 = std::log(area_lo), l1 = std::log(area_hi);
  for (std::size_t i = 0; i < count; ++i)
    areas[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / (count - 1));

  std::vector<BetaProfileRow> rows;
  rows.reserve(count);
  if (p.beta2 == 0.0) {
    if (p.beta0 == 0.0) throw ConfigError("beta0 must be nonzero");
    for (double S : areas) {
      const double lnS = std::log(S);
      const double zeta =
          p.beta1 == 0.0 ? p.beta0 * lnS / (2.0 * p.M)
                         : p.beta0 * std::expm1(p.beta1 * lnS / (2.0 * p.M)) / p.beta1;
      const double k = p.beta1 + p.M;
      const double x = k == 0.0 ? p.beta0 * lnS / (2.0 * p.M)
                                : p.beta0 * std::expm1(k * lnS / (2.0 * p.M)) / k;
      detail::require_regular(p, 0.0, zeta);
      rows.push_back({S, zeta, x});
    }
    return rows;
  }
  if (p.beta1 != 0.0)
    throw ConfigError(
        "parametric table is defined for beta2 = 0 or beta1 = 0 only");
  if (!(p.beta0 * p.beta2 > 0.0))
    throw ConfigError("beta1 = 0 branch needs beta0 * beta2 > 0");
  const double w = std::sqrt(p.beta0 * p.beta2) / (2.0 * p.M);
  const double ratio = std::sqrt(p.beta0 / p.beta2);
  for (double lnS : {l0, l1}) {
    if (std::abs(w * lnS) >= num::kPi / 2.0)
      throw SingularProfileError(
          "cos(sqrt(beta0*beta2)/(2M) ln S) vanishes inside the S-range");
  }
  auto integrand = [&](double S) {
    const double c = std::cos(w * std::log(S));
    return 1.0 / (std::sqrt(S) * c * c);
  };
  for (double S : areas) {
    const double zeta = ratio * std::tan(w * std::log(S));
    const double x = p.beta0 / (2.0 * p.M) *
                     (S >= 1.0 ? num::integrate(integrand, 1.0, S).value
                               : -num::integrate(integrand, S, 1.0).value);
    rows.push_back({S, zeta, x});
  }
  return rows;
}

}  // namespace webster

#endif  // WEBSTER_PROFILES_HPP
