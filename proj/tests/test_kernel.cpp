#include <webster/kernel.hpp>

#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>

namespace {

using namespace webster;

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double max_abs(const std::vector<double>& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

TEST(HeatKernel, PointValues) {
  EXPECT_NEAR(heat_kernel(1.0, 0.0, 1.0), 0.28209479177387814, 1e-15);
  EXPECT_NEAR(heat_kernel(1.0, 2.0, 1.0), std::exp(-1.0) * 0.28209479177387814, 1e-15);
  EXPECT_THROW(heat_kernel(0.0, 0.0, 1.0), DomainError);
}

TEST(HeatKernel, UnitMass) {
  for (double x : {0.01, 1.0, 7.0}) {
    auto g = [&](double t) { return heat_kernel(x, t, 0.5); };
    const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        g, -std::numeric_limits<double>::infinity(),
        std::numeric_limits<double>::infinity(), 15, 1e-14);
    EXPECT_NEAR(mass, 1.0, 1e-12);
  }
}

TEST(BesselI, PowerSeriesOracle) {
  // sum (z/2)^(2m+1) / (m! (m+1)!), 12 terms, z = 1
  double sum = 0.0, fact_m = 1.0;
  for (int m = 0; m < 12; ++m) {
    if (m > 0) fact_m *= m;
    sum += std::pow(0.5, 2 * m + 1) / (fact_m * fact_m * (m + 1));
  }
  EXPECT_NEAR(bessel_I(1, 1.0), sum, 1e-15);
  EXPECT_NEAR(bessel_I(1, 1.0), 0.565159, 1e-6);
  EXPECT_EQ(bessel_I(0, 0.0), 1.0);
  EXPECT_EQ(bessel_I(3, 0.0), 0.0);
}

TEST(BesselI, AgreesWithBoostAcrossRegimes) {
  for (double z : {1e-3, 0.5, 1.0, 5.0, 10.0, 14.99, 15.01, 20.0, 60.0, 250.0, 650.0}) {
    const auto all = bessel_I_all(80, z);
    for (int k : {0, 1, 2, 7, 20, 45, 80}) {
      const double ref = boost::math::cyl_bessel_i(k, z);
      if (ref < 1e-290) continue;
      EXPECT_NEAR(all[k] / ref, 1.0, 1e-12) << "k=" << k << " z=" << z;
    }
  }
  EXPECT_THROW(bessel_I(0, 800.0), RangeError);
  EXPECT_THROW(bessel_I(-1, 1.0), DomainError);
}

TEST(BesselI, GeneratingFunction) {
  for (double z : {1.0, 10.0, 30.0}) {
    const auto I = bessel_I_all(120, z);
    double s = I[0];
    for (int k = 1; k <= 120; ++k) s += 2.0 * I[k];
    EXPECT_NEAR(s / std::exp(z), 1.0, 1e-13);
  }
}

TEST(KSeries, Examples) {
  auto grid = TauGrid::periodic(16);
  EXPECT_NEAR(K_series(1.0, 0.0, 1.0, grid).K[0], std::numbers::e, 1e-14);
  const double i0 = boost::math::cyl_bessel_i(0, 1.0);
  for (double k : K_series(1.0, 60.0, 1.0, grid).K) EXPECT_NEAR(k, i0, 1e-14);
  EXPECT_NEAR(i0, 1.266066, 1e-6);
}

TEST(KSeries, TailBoundIsEnforced) {
  auto grid = TauGrid::periodic(16);
  try {
    K_series(10.0, 1.0, 1.0, grid, 5);
    FAIL() << "expected TailBoundError";
  } catch (const TailBoundError& e) {
    const int k = e.suggested_kmax();
    EXPECT_LT(boost::math::cyl_bessel_i(k + 1, 10.0),
              1e-14 * boost::math::cyl_bessel_i(0, 10.0));
    EXPECT_GE(boost::math::cyl_bessel_i(k, 10.0),
              1e-14 * boost::math::cyl_bessel_i(0, 10.0));
    EXPECT_NO_THROW(K_series(10.0, 1.0, 1.0, grid, k));
  }
}

TEST(KQuadrature, DeltaLimitAtOrigin) {
  auto grid = TauGrid::periodic(64);
  auto f = K_quadrature(1.0, 0.0, InitialCondition::harmonic(), 1.0, grid);
  EXPECT_DOUBLE_EQ(f.K[0], std::numbers::e);
  for (std::size_t i = 0; i < grid.size(); ++i)
    EXPECT_DOUBLE_EQ(f.K[i], std::exp(std::cos(grid[i])));
}

TEST(KQuadrature, VanishingNonlinearity) {
  auto grid = TauGrid::periodic(64);
  for (double x : {0.0, 0.3, 3.0}) {
    auto f = K_quadrature(0.0, x, InitialCondition::harmonic(), 1.0, grid);
    for (double k : f.K) EXPECT_EQ(k, 1.0);
    for (double k : f.km1) EXPECT_EQ(k, 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i)
      EXPECT_NEAR(f.K_a[i], std::exp(-x) * std::cos(grid[i]), 1e-15);
  }
}

TEST(KQuadrature, MatchesSeries) {
  auto grid = TauGrid::periodic(256);
  for (double a : {1.0, 10.0}) {
    for (double x : {0.08, 0.5, 1.0, 2.0}) {
      auto q = K_quadrature(a, x, InitialCondition::harmonic(), 1.0, grid);
      auto s = K_series(a, x, 1.0, grid);
      EXPECT_LE(max_abs_diff(q.K, s.K), 1e-8);
      EXPECT_LE(max_abs_diff(q.km1, s.km1), 1e-8);
      EXPECT_LE(max_abs_diff(q.K_a, s.K_a), 1e-8);
      EXPECT_LE(max_abs_diff(q.K_aa, s.K_aa), 1e-8);
    }
  }
  // Rescaled nu: the series depends on a/nu and nu x only.
  auto q = K_quadrature(2.0, 0.25, InitialCondition::harmonic(), 2.0, grid);
  auto s = K_series(1.0, 0.5, 1.0, grid);
  EXPECT_LE(max_abs_diff(q.K, s.K), 1e-12);
}

TEST(KQuadrature, Semigroup) {
  SpectralKernel sk(InitialCondition::harmonic(), {10.0, 1.0});
  const double x1 = 0.3, x2 = 0.45;
  auto k1 = sk.field(x1).K;
  auto s = spectral::forward(k1);
  spectral::propagate(s, x2);
  auto composed = spectral::inverse(s, k1.size());
  EXPECT_LE(max_abs_diff(composed, sk.field(x1 + x2).K), 1e-10 * max_abs(composed));
}

TEST(KQuadrature, Positivity) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> t = spectral::periodic_points(32), w(32);
  std::vector<double> c(6);
  for (auto& v : c) v = u(rng);
  for (std::size_t i = 0; i < 32; ++i)
    for (int k = 0; k < 6; ++k) w[i] += c[k] * std::cos((k + 1) * t[i] + k);
  double peak = 0.0;
  for (double v : w) peak = std::max(peak, std::abs(v));
  for (double& v : w) v /= peak;
  for (const auto& ic : {InitialCondition::harmonic(), InitialCondition::tabulated(t, w)}) {
    for (double a : {1.0, 10.0, 20.0}) {
      SpectralKernel sk(ic, {a, 1.0});
      for (double x : {0.0, 1e-3, 0.08, 1.0, 10.0})
        for (double k : sk.field(x).K) ASSERT_GT(k, 0.0);
    }
  }
}

TEST(KQuadrature, TroughKeepsRelativeAccuracy) {
  // Real-line oracle; the Bessel series itself cancels to ~1e-15 of I_0 here.
  auto grid = TauGrid::periodic(256);
  for (double x : {1e-4, 1e-3, 0.01}) {
    auto q = K_quadrature(20.0, x, InitialCondition::harmonic(), 1.0, grid);
    for (std::size_t i = 0; i < grid.size(); i += 8) {
      const double t = grid[i], r = 40.0 * std::sqrt(2.0 * x);
      auto f = [&](double xi) { return std::exp(20.0 * std::cos(xi)) * heat_kernel(x, t - xi, 1.0); };
      const double ref = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
          f, t - r, t + r, 20, 1e-14);
      EXPECT_NEAR(q.K[i] / ref, 1.0, 1e-7) << "x=" << x << " tau=" << t;
    }
  }
}

TEST(KQuadrature, DerivativesMatchFiniteDifferences) {
  auto grid = TauGrid::periodic(128);
  auto ic = InitialCondition::harmonic();
  const double h = 1e-5;
  for (double a : {1.0, 5.0}) {
    for (double x : {0.0, 0.2, 2.0}) {
      auto f = K_quadrature(a, x, ic, 1.0, grid);
      auto p = K_quadrature(a + h, x, ic, 1.0, grid);
      auto m = K_quadrature(a - h, x, ic, 1.0, grid);
      for (std::size_t i = 0; i < grid.size(); ++i) {
        const double da = (p.K[i] - m.K[i]) / (2 * h);
        const double daa = (p.K_a[i] - m.K_a[i]) / (2 * h);
        EXPECT_NEAR(f.K_a[i], da, 1e-6 * std::abs(f.K_a[i]) + 1e-9);
        EXPECT_NEAR(f.K_aa[i], daa, 1e-6 * std::abs(f.K_aa[i]) + 1e-9);
      }
    }
  }
}

TEST(KQuadrature, GridDoublesForSteepData) {
  SpectralKernel mild(InitialCondition::harmonic(), {1.0, 1.0});
  EXPECT_EQ(mild.size(), 256u);
  SpectralKernel steep(InitialCondition::harmonic(), {200.0, 1.0});
  EXPECT_GT(steep.size(), 256u);
  auto grid = TauGrid::periodic(256);
  auto s = K_series(200.0, 0.01, 1.0, grid);
  auto q = steep.field(0.01, grid);
  EXPECT_LE(max_abs_diff(q.K, s.K), 1e-12 * max_abs(s.K));
}

TEST(KQuadrature, NonPeriodicGaussianBump) {
  // G * exp(-xi^2) = exp(-tau^2 / (1 + 4 nu x)) / sqrt(1 + 4 nu x)
  auto ic = InitialCondition::nonperiodic([](double t) { return std::exp(-t * t); },
                                          -10.0, 10.0);
  auto grid = TauGrid::window(-3.0, 3.0, 13);
  const double x = 0.4, nu = 0.5;
  auto f = K_quadrature(0.0, x, ic, nu, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = f.tau[i], s = 1.0 + 4.0 * nu * x;
    EXPECT_NEAR(f.K_a[i], std::exp(-t * t / s) / std::sqrt(s) / nu, 1e-11);
    EXPECT_EQ(f.K[i], 1.0);
  }
  // Nonlinear case against the periodic machinery on a wide period.
  auto g = K_quadrature(1.0, x, ic, nu, grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    auto integrand = [&](double xi) {
      return std::expm1(std::exp(-xi * xi) / nu) * heat_kernel(x, f.tau[i] - xi, nu);
    };
    const double ref = 1.0 + boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
                                 integrand, -12.0, 12.0, 20, 1e-14);
    EXPECT_NEAR(g.K[i], ref, 1e-11);
  }
}

TEST(KQuadrature, NonPeriodicTruncationReported) {
  auto ic = InitialCondition::nonperiodic([](double t) { return std::exp(-t * t); },
                                          -1.0, 1.0);
  auto grid = TauGrid::window(-1.0, 1.0, 5);
  EXPECT_THROW(K_quadrature(1.0, 0.5, ic, 1.0, grid), TruncationError);
}

TEST(InitialConditionTable, ClosedAndOpenForms) {
  const std::size_t n = 32;
  std::vector<double> t_open = spectral::periodic_points(n), w_open(n);
  for (std::size_t i = 0; i < n; ++i) w_open[i] = std::sin(2 * t_open[i]) + 0.3;
  auto open = InitialCondition::tabulated(t_open, w_open);
  auto t_closed = t_open;
  auto w_closed = w_open;
  t_closed.push_back(2 * std::numbers::pi);
  w_closed.push_back(w_open[0]);
  auto closed = InitialCondition::tabulated(t_closed, w_closed);
  for (double t : {0.1, 1.7, 4.0}) {
    EXPECT_NEAR(open(t), std::sin(2 * t) + 0.3, 1e-14);
    EXPECT_NEAR(closed(t), std::sin(2 * t) + 0.3, 1e-14);
  }
  auto fine = open.sample(128);
  auto tf = spectral::periodic_points(128);
  for (std::size_t i = 0; i < 128; ++i) EXPECT_NEAR(fine[i], std::sin(2 * tf[i]) + 0.3, 1e-14);

  w_closed.back() += 0.1;
  EXPECT_THROW(InitialCondition::tabulated(t_closed, w_closed), ConfigError);
  std::vector<double> ramp(n);
  for (std::size_t i = 0; i < n; ++i) ramp[i] = static_cast<double>(i);
  EXPECT_THROW(InitialCondition::tabulated(t_open, ramp), ConfigError);
  t_open[3] += 0.01;
  EXPECT_THROW(InitialCondition::tabulated(t_open, w_open), ConfigError);
}

TEST(InitialConditionTable, ReadsStationCsv) {
  const auto path = std::filesystem::temp_directory_path() / "webster_ic.csv";
  {
    std::ofstream out(path);
    out << "tau,q0,q1\n" << std::setprecision(17);
    for (double t : spectral::periodic_points(16))
      out << t << "," << std::cos(t) << "," << std::sin(t) << "\n";
  }
  auto ic = read_initial_condition(path.string(), "q1");
  EXPECT_NEAR(ic(0.5), std::sin(0.5), 1e-5);
  EXPECT_THROW(read_initial_condition(path.string(), "qnum"), ConfigError);
  std::filesystem::remove(path);
}

TEST(TauGridTest, Validation) {
  EXPECT_THROW(TauGrid::periodic(8), ConfigError);
  EXPECT_THROW(TauGrid::periodic(100), ConfigError);
  auto g = TauGrid::periodic(16);
  EXPECT_NEAR(g.spacing(), 2 * std::numbers::pi / 16, 1e-16);
  auto w = TauGrid::window(-1.0, 1.0, 5);
  EXPECT_EQ(w.points(), (std::vector<double>{-1.0, -0.5, 0.0, 0.5, 1.0}));
}

}  // namespace
