#ifndef WEBSTER_ERROR_HPP
#define WEBSTER_ERROR_HPP

// Exception hierarchy shared by every module. ConfigError maps to CLI exit
// code 2; everything else derived from NumericFailure maps to exit code 3.

#include <cstdio>
#include <stdexcept>
#include <string>

namespace webster {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user input: bad configuration, missing file, malformed table.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the declared domain of a formula.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Base for failures of a numerical procedure on valid input.
class NumericFailure : public Error {
 public:
  using Error::Error;
};

/// Quadrature, root-finding or iteration that did not reach its tolerance.
class NumericError : public NumericFailure {
 public:
  NumericError(const std::string& what, double achieved)
      : NumericFailure(what + " (achieved error " + format(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

 private:
  static std::string format(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
  }
  double achieved_;
};

/// The classifying quadratic b(zeta) (or a profile formula) is singular.
class SingularProfileError : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

/// Logarithm argument of an RG solution is non-positive.
class BreakdownError : public NumericFailure {
 public:
  BreakdownError(double x, double tau, double argument)
      : NumericFailure(message(x, tau, argument)), x_(x), tau_(tau) {}
  double x() const noexcept { return x_; }
  double tau() const noexcept { return tau_; }

 private:
  static std::string message(double x, double tau, double argument) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "approximation breakdown: log argument %.6g <= 0 at x=%.9g, "
                  "tau=%.9g",
                  argument, x, tau);
    return buf;
  }
  double x_;
  double tau_;
};

/// Kernel mass outside the declared data window exceeds the budget.
class TruncationError : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

/// Step-size collapse or spectrum not resolved by the grid.
class ResolutionError : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

/// Requested argument outside a table's coverage.
class ExtentError : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

/// ODE solution escaped to infinity.
class FiniteEscapeError : public NumericFailure {
 public:
  FiniteEscapeError(double lambda, const std::string& what)
      : NumericFailure(what), lambda_(lambda) {}
  double lambda() const noexcept { return lambda_; }

 private:
  double lambda_;
};

/// Series truncation insufficient for the requested accuracy.
class TailBoundError : public NumericFailure {
 public:
  TailBoundError(int suggested_kmax, const std::string& what)
      : NumericFailure(what), suggested_(suggested_kmax) {}
  int suggested_kmax() const noexcept { return suggested_; }

 private:
  int suggested_;
};

/// Floating-point overflow in a special function.
class RangeError : public NumericFailure {
 public:
  using NumericFailure::NumericFailure;
};

}  // namespace webster

#endif  // WEBSTER_ERROR_HPP
