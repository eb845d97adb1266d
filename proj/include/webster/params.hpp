#ifndef WEBSTER_PARAMS_HPP
#define WEBSTER_PARAMS_HPP

#include <webster/error.hpp>

#include <cmath>

namespace webster {

/// Nonlinearity a and dissipation nu of the dimensionless equation. a / nu is
/// the acoustic Reynolds number.
struct PhysParams {
  double a = 1.0;
  double nu = 1.0;

  double reynolds() const noexcept { return a / nu; }

  void validate() const {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("nu must be > 0");
    if (!(a >= 0.0) || !std::isfinite(a)) throw ConfigError("a must be >= 0");
  }
};

}  // namespace webster

#endif  // WEBSTER_PARAMS_HPP
