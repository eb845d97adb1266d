#include <webster/rg.hpp>

#include <gtest/gtest.h>

#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <random>

namespace {

using namespace webster;

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

Profile exponential(double alpha) { return Profile({shape::Exponential{alpha}}); }

InitialCondition random_ic(unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = 64;
  auto t = spectral::periodic_points(n);
  std::vector<double> w(n, 0.0);
  for (int k = 1; k <= 5; ++k) {
    const double c = u(rng) / k, s = u(rng) / k;
    for (std::size_t i = 0; i < n; ++i) w[i] += c * std::cos(k * t[i]) + s * std::sin(k * t[i]);
  }
  return InitialCondition::tabulated(t, w);
}

TEST(RG, BoundaryRecovery) {
  auto grid = TauGrid::periodic(256);
  std::vector<InitialCondition> ics{InitialCondition::harmonic(), random_ic(1), random_ic(2),
                                    random_ic(3)};
  for (const auto& ic : ics) {
    const auto w = ic.sample(256);
    for (double a : {0.0, 1.0, 10.0}) {
      RGSolver rg({a, 1.0}, exponential(-0.1), ic, grid);
      auto s = rg.solve(0.0);
      EXPECT_LE(max_abs_diff(s.q0, w), 1e-10);
      EXPECT_LE(max_abs_diff(s.q1, w), 1e-10);
      EXPECT_LE(max_abs_diff(s.qpt, w), 1e-10);
    }
  }
}

TEST(RG, ConstantChannelIsColeHopf) {
  auto grid = TauGrid::periodic(64);
  RGSolver rg({1.0, 1.0}, Profile(), InitialCondition::harmonic(), grid);
  // x -> infinity: (nu/a) ln I0(a/nu)
  const double limit = std::log(boost::math::cyl_bessel_i(0, 1.0));
  EXPECT_NEAR(limit, 0.235914, 1e-6);
  for (double q : rg.solve(60.0).q0) EXPECT_NEAR(q, limit, 1e-13);
  for (double x : {0.1, 1.0}) {
    auto s = rg.solve(x);
    auto k = K_series(1.0, x, 1.0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) EXPECT_NEAR(s.q0[i], std::log(k.K[i]), 1e-12);
    EXPECT_EQ(s.q1, s.q0);
    EXPECT_EQ(s.panels, 0u);
  }
}

TEST(RG, LinearLimitDecaysAsHeatMode) {
  auto grid = TauGrid::periodic(32);
  RGSolver rg({0.0, 0.5}, Profile(), InitialCondition::harmonic(), grid);
  for (double x : {0.3, 2.0}) {
    auto s = rg.solve(x);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double ref = std::exp(-0.5 * x) * std::cos(grid[i]);
      EXPECT_NEAR(s.q0[i], ref, 1e-14);
      EXPECT_NEAR(s.q1[i], ref, 1e-14);
      EXPECT_NEAR(s.qpt[i], ref, 1e-14);
    }
  }
}

TEST(RG, PerturbativeConstantChannelClosedForm) {
  // K_a0 = e^{-nu x} cos / nu, K_aa0 = (1 + e^{-4 nu x} cos 2 tau) / (2 nu^2)
  const double a = 0.3, nu = 0.7;
  auto grid = TauGrid::periodic(32);
  RGSolver rg({a, nu}, Profile(), InitialCondition::harmonic(), grid);
  for (double x : {0.2, 1.5}) {
    auto s = rg.solve(x);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double t = grid[i];
      const double ka = std::exp(-nu * x) * std::cos(t) / nu;
      const double kaa = (1.0 + std::exp(-4 * nu * x) * std::cos(2 * t)) / (2 * nu * nu);
      EXPECT_NEAR(s.qpt[i], nu * ka + 0.5 * nu * a * (kaa - ka * ka), 1e-14);
    }
  }
}

TEST(RG, InnerIntegralMatchesUniformMeshOracle) {
  // Independent x' quadrature: uniform midpoint rule with Richardson on
  // 1000/2000 nodes, directly on the bracket as written.
  const double a = 1.0, nu = 1.0, alpha = -0.1, x = 1.0;
  auto ic = InitialCondition::harmonic();
  auto grid = TauGrid::periodic(256);
  auto prof = exponential(alpha);
  RGSolver rg({a, nu}, prof, ic, grid);
  auto s = rg.solve(x, true, false);
  EXPECT_GT(s.panels, 0u);
  SpectralKernel sk(ic, {a, nu}, 256);
  auto mid = [&](int m) {
    spectral::Spectrum acc(129, 0.0);
    for (int j = 0; j < m; ++j) {
      const double xp = (j + 0.5) * x / m;
      const double mu = nu * std::exp(alpha * xp);
      auto k = sk.field(xp);
      std::vector<double> b(256);
      for (std::size_t i = 0; i < 256; ++i) {
        const double phi = 1.0 + nu / mu * (k.K[i] - 1.0);
        b[i] = 1.0 - k.K[i] + (k.K[i] - 1.0 + mu / nu) * std::log(phi);
      }
      auto sp = spectral::forward(b);
      spectral::propagate(sp, nu * (x - xp));
      for (auto& c : sp) c *= alpha * x / m;
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += sp[i];
    }
    return spectral::inverse(acc, 256);
  };
  auto i1 = mid(1000), i2 = mid(2000);
  const double mu = nu * std::exp(alpha * x);
  auto k = sk.field(x);
  double scale = 0.0, worst = 0.0;
  for (std::size_t i = 0; i < 256; ++i) {
    const double ref = i2[i] + (i2[i] - i1[i]) / 3.0;
    const double got = k.km1[i] - mu / nu * std::expm1(a * s.q1[i] / mu);
    scale = std::max(scale, std::abs(ref));
    worst = std::max(worst, std::abs(got - ref));
  }
  EXPECT_LE(worst, 1e-6 * scale);
}

TEST(RG, DependsOnlyOnReducedParameters) {
  auto grid = TauGrid::periodic(64);
  RGSolver r1({1.0, 1.0}, exponential(-0.1), InitialCondition::harmonic(), grid);
  RGSolver r2({2.0, 2.0}, exponential(-0.2), InitialCondition::harmonic(), grid);
  auto s1 = r1.solve(1.0), s2 = r2.solve(0.5);
  EXPECT_LE(max_abs_diff(s1.q0, s2.q0), 1e-12);
  EXPECT_LE(max_abs_diff(s1.q1, s2.q1), 1e-7);
  EXPECT_LE(max_abs_diff(s1.qpt, s2.qpt), 1e-9);
}

TEST(RG, PerturbativeGapScalesAsASquared) {
  auto grid = TauGrid::periodic(64);
  std::vector<double> la, lg;
  for (double a : {0.02, 0.04, 0.08}) {
    RGSolver rg({a, 1.0}, exponential(-0.1), InitialCondition::harmonic(), grid);
    auto s = rg.solve(2.0);
    la.push_back(std::log(a));
    lg.push_back(std::log(max_abs_diff(s.q1, s.qpt)));
  }
  const double mx = (la[0] + la[1] + la[2]) / 3, my = (lg[0] + lg[1] + lg[2]) / 3;
  double sxy = 0, sxx = 0;
  for (int i = 0; i < 3; ++i) {
    sxy += (la[i] - mx) * (lg[i] - my);
    sxx += (la[i] - mx) * (la[i] - mx);
  }
  EXPECT_NEAR(sxy / sxx, 2.0, 0.2);
}

TEST(RG, BreakdownIsReportedOrMasked) {
  auto grid = TauGrid::periodic(256);
  RGSolver strict({10.0, 1.0}, exponential(-0.1), InitialCondition::harmonic(), grid);
  try {
    strict.solve(0.08);
    FAIL() << "expected BreakdownError";
  } catch (const BreakdownError& e) {
    EXPECT_EQ(e.x(), 0.08);
    EXPECT_NEAR(e.tau(), std::numbers::pi, 1.0);
  }
  RGOptions opt;
  opt.breakdown = Breakdown::kMask;
  RGSolver masked({10.0, 1.0}, exponential(-0.1), InitialCondition::harmonic(), grid, opt);
  auto s = masked.solve(0.08);
  EXPECT_GT(s.inner_breakdown_nodes, 0u);
  std::size_t bad = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!s.valid0[i]) {
      ++bad;
      EXPECT_TRUE(std::isnan(s.q0[i]));
    } else {
      EXPECT_TRUE(std::isfinite(s.q0[i]));
    }
  }
  EXPECT_GT(bad, 0u);
  EXPECT_LT(bad, grid.size());
  // Well past the steepening the approximation is valid again.
  auto late = strict.solve(0.5);
  for (double q : late.q1) EXPECT_TRUE(std::isfinite(q));
}

TEST(RG, StationOutsideProfileDomain) {
  auto grid = TauGrid::periodic(32);
  RGSolver rg({1.0, 1.0}, Profile({shape::Spherical{-2.0}, 1.5}),
              InitialCondition::harmonic(), grid);
  EXPECT_THROW(rg.solve(1.6), DomainError);
  EXPECT_THROW(rg.solve(-0.1), DomainError);
  EXPECT_NO_THROW(rg.solve(1.0));
}

}  // namespace
