#include <gtest/gtest.h>

#include <cmath>

#include "censem/errors.hpp"
#include "censem/special_fn.hpp"
#include "oracles.hpp"

using namespace censem;
using namespace censem::special;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

TEST(GammaComplete, KnownValues) {
  EXPECT_NEAR(gamma_complete(1.0), 1.0, 1e-15);
  EXPECT_NEAR(gamma_complete(0.5), std::sqrt(M_PI), 1e-14);
  const double q = oracle::integrate(
      [](double t) { return t > 0 ? std::pow(t, 1.7526) * std::exp(-t) : 0.0; }, 0.0,
      INFINITY);
  EXPECT_LT(rel(gamma_complete(2.7526), q), 1e-12);
}

TEST(GammaComplete, RejectsNonPositive) {
  EXPECT_THROW(gamma_complete(0.0), DomainError);
  EXPECT_THROW(gamma_complete(-1.0), DomainError);
}

TEST(GammaUpper, SpotValues) {
  EXPECT_NEAR(gamma_upper(1.0, 0.7), std::exp(-0.7), 1e-15);
  EXPECT_NEAR(gamma_upper(0.5, 0.0), std::sqrt(M_PI), 1e-14);
  EXPECT_LT(rel(gamma_upper(0.0, 1.0), 0.21938393439552027), 1e-13);
  EXPECT_LT(rel(gamma_upper(0.0, 1.0), oracle::upper_gamma(0.0, 1.0)), 1e-12);
}

TEST(GammaUpper, DomainErrors) {
  EXPECT_THROW(gamma_upper(0.0, 0.0), DomainError);
  EXPECT_THROW(gamma_upper(-0.5, 1.0), DomainError);
  EXPECT_THROW(gamma_upper(1.0, -1.0), DomainError);
}

TEST(GammaUpper, MatchesQuadratureAcrossBranches) {
  for (double s : {0.0, 0.05, 0.3, 0.57, 1.0, 1.57, 2.5, 7.0}) {
    for (double x : {1e-6, 0.01, 0.3, 0.9, 1.5, 3.0, 8.0, 25.0}) {
      const double ref = oracle::upper_gamma(s, x);
      EXPECT_LT(rel(gamma_upper(s, x), ref), 1e-11) << "s=" << s << " x=" << x;
    }
  }
}

TEST(GammaUpper, RecurrenceOnGrid) {
  for (int i = 0; i < 50; ++i) {
    const double s = 0.1 + i * (10.0 - 0.1) / 49.0;
    for (int j = 0; j < 50; ++j) {
      const double x = 0.01 + j * (30.0 - 0.01) / 49.0;
      const double lhs = gamma_upper(s + 1.0, x);
      const double rhs = s * gamma_upper(s, x) + std::exp(s * std::log(x) - x);
      ASSERT_LE(std::abs(lhs - rhs), 1e-10 * lhs) << "s=" << s << " x=" << x;
    }
  }
}

TEST(GammaUpper, ComplementAtZero) {
  for (int i = 0; i < 100; ++i) {
    const double s = 0.1 + i * 0.099;
    EXPECT_LT(rel(gamma_upper(s, 0.0), std::tgamma(s)), 1e-12) << s;
  }
}

TEST(GammaUpper, StrictlyDecreasingInX) {
  for (double s : {0.0, 0.2, 1.0, 4.0}) {
    double prev = gamma_upper(s, 1e-3);
    for (int j = 1; j < 200; ++j) {
      const double cur = gamma_upper(s, 1e-3 + j * 0.15);
      ASSERT_LT(cur, prev);
      ASSERT_TRUE(std::isfinite(cur));
      prev = cur;
    }
  }
}

TEST(GammaIntervalAndLower, AddUpToComplete) {
  for (double s : {0.3, 1.0, 2.2}) {
    EXPECT_LT(rel(gamma_lower(s, 2.0) + gamma_upper(s, 2.0), std::tgamma(s)), 1e-13);
    EXPECT_LT(rel(gamma_interval(s, 0.5, 2.0),
                  gamma_upper(s, 0.5) - gamma_upper(s, 2.0)),
              1e-12);
  }
}

TEST(EulerGamma, ConstantAndLimits) {
  EXPECT_NEAR(euler_gamma(), 0.5772156649015329, 1e-16);
  // both expressions differ from their limit by O(z log z)
  const double z = 1e-8;
  EXPECT_NEAR(-(std::exp(-z) * std::log(z) + gamma_upper(0.0, z)), euler_gamma(), 5e-7);
  EXPECT_NEAR(gamma_upper(0.0, z) + std::log(z) + euler_gamma(), 0.0, 1e-7);
}

TEST(Ein, MatchesDefinition) {
  for (double x : {1e-9, 1e-3, 0.5, 1.0, 4.0}) {
    const double ref =
        oracle::integrate([](double t) { return t > 0 ? -std::expm1(-t) / t : 1.0; }, 0.0, x);
    EXPECT_LT(rel(ein(x), ref), 1e-12) << x;
  }
}

TEST(DSeries, ZeroAtOrigin) { EXPECT_EQ(d_series(1.0, 0.0), 0.0); }

TEST(DSeries, MatchesExtendedPrecisionSum) {
  EXPECT_LT(rel(d_series(1.0, 0.5), oracle::d_series(1.0, 0.5)), 1e-12);
  for (double a = 0.1; a <= 5.0001; a += 0.35) {
    for (double z : {1e-6, 0.01, 0.3, 1.0, 2.0, 3.5, 5.0}) {
      ASSERT_LT(rel(d_series(a, z), oracle::d_series(a, z)), 1e-10) << a << " " << z;
    }
  }
}

TEST(DSeries, EqualsDerivativeOfLowerGamma) {
  // d/da γ(a+1, z) = γ(a+1, z) log z - d_series(a, z)
  const double a = 0.5, z = 2.0, h = 1e-5;
  const double fd = (gamma_lower(a + 1 + h, z) - gamma_lower(a + 1 - h, z)) / (2 * h);
  const double expect = gamma_lower(a + 1, z) * std::log(z) - d_series(a, z);
  EXPECT_NEAR(fd, expect, 1e-8);
}

TEST(DSeries, ExhaustedBudgetThrows) {
  SpecialFnConfig cfg;
  cfg.max_terms = 50;
  EXPECT_THROW(d_series(1.0, 60.0, cfg), ConvergenceError);
  EXPECT_THROW(d_series(0.0, 1.0), DomainError);
}

TEST(SpecialFnConfig, Validation) {
  SpecialFnConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.rel_tol = 1e-5;
  EXPECT_THROW(cfg.validate(), DomainError);
  cfg = {};
  cfg.max_terms = 10;
  EXPECT_THROW(cfg.validate(), DomainError);
}
