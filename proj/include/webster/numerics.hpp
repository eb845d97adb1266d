#ifndef WEBSTER_NUMERICS_HPP
#define WEBSTER_NUMERICS_HPP

// Thin wrappers over Boost.Math for adaptive quadrature and bracketed root
// finding, translating non-convergence into webster exceptions.

#include <webster/error.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <vector>
#include <string>
#include <utility>

namespace webster::num {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

inline bool is_power_of_two(std::size_t n) noexcept {
  return n != 0 && (n & (n - 1)) == 0;
}

struct QuadResult {
  double value;
  double error;
};

/// Globally adaptive 31-point Gauss-Kronrod quadrature on [a, b]: the
/// interval with the largest error estimate is bisected until the total
/// falls below max(rel_tol * L1, abs_tol). Throws NumericError otherwise.
template <class F>
QuadResult integrate(F&& f, double a, double b, double rel_tol = 1e-10,
                     double abs_tol = 0.0, std::size_t max_intervals = 4096) {
  if (a == b) return {0.0, 0.0};
  struct Piece {
    double lo, hi, value, error, l1;
    bool operator<(const Piece& o) const { return error < o.error; }
  };
  // Boost's single-pass rule maps to [-1, 1] and reports the error estimate
  // in those units; the half-width is applied here.
  auto rule = [&](double lo, double hi) {
    double err = 0.0, l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        f, lo, hi, 0, 0.0, &err, &l1);
    return Piece{lo, hi, v, err * std::abs(0.5 * (hi - lo)), l1};
  };
  std::priority_queue<Piece> queue;
  Piece first = rule(a, b);
  double value = first.value, error = first.error, l1 = first.l1;
  queue.push(first);
  auto budget = [&] {
    return std::max({rel_tol * l1, abs_tol,
                     64.0 * std::numeric_limits<double>::epsilon() * l1});
  };
  while (error > budget() && queue.size() < max_intervals) {
    const Piece worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > std::min(worst.lo, worst.hi) && mid < std::max(worst.lo, worst.hi))) break;
    const Piece left = rule(worst.lo, mid), right = rule(mid, worst.hi);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    l1 += left.l1 + right.l1 - worst.l1;
    queue.push(left);
    queue.push(right);
  }
  // Re-sum from the pieces so the running updates leave no drift.
  value = error = l1 = 0.0;
  std::vector<Piece> pieces;
  while (!queue.empty()) {
    pieces.push_back(queue.top());
    queue.pop();
  }
  std::sort(pieces.begin(), pieces.end(),
            [](const Piece& p, const Piece& q) { return p.lo < q.lo; });
  for (const auto& p : pieces) {
    value += p.value;
    error += p.error;
    l1 += p.l1;
  }
  if (!std::isfinite(value) || error > budget())
    throw NumericError("adaptive quadrature did not converge", error);
  return {value, error};
}

/// Root of f inside [lo, hi] (sign change required) to absolute tolerance
/// x_tol, via the TOMS 748 bracketing hybrid.
template <class F>
double find_root(F&& f, double lo, double hi, double x_tol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::signbit(flo) == std::signbit(fhi)) {
    throw NumericError("root not bracketed on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]",
                       std::min(std::abs(flo), std::abs(fhi)));
  }
  std::uintmax_t iters = 200;
  auto tol = [x_tol](double l, double h) { return std::abs(h - l) <= x_tol; };
  auto [l, h] = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol,
                                                  iters);
  if (std::abs(h - l) > x_tol) {
    throw NumericError("bracketed root search exhausted iterations",
                       std::abs(h - l));
  }
  return 0.5 * (l + h);
}

/// Composite Simpson weights for an even number of panels on [0, 1].
inline double simpson_weight(std::size_t i, std::size_t panels) {
  const double h = 1.0 / static_cast<double>(panels);
  if (i == 0 || i == panels) return h / 3.0;
  return (i % 2 == 1 ? 4.0 : 2.0) * h / 3.0;
}

}  // namespace webster::num

#endif  // WEBSTER_NUMERICS_HPP
