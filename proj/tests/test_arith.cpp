#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "siegel/arith.hpp"

using namespace siegel;

namespace {

// Independent continued-fraction convergents from the digits.
std::vector<std::pair<long double, long double>> oracle_convergents(const std::vector<std::int64_t>& digits) {
  std::vector<std::pair<long double, long double>> out;
  long double p0 = 1, q0 = 0, p1 = 0, q1 = 1;
  for (auto a : digits) {
    long double p2 = a * p1 + p0, q2 = a * q1 + q0;
    out.emplace_back(p2, q2);
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
  }
  return out;
}

}  // namespace

TEST(ContinuedFraction, GoldenDigitsAndConvergents) {
  auto th = RotationAngle::from_value(0.61803398875L, 8);
  ASSERT_EQ(th.digits().size(), 8u);
  for (auto a : th.digits()) EXPECT_EQ(a, 1);
  const std::vector<Convergent> want{{1, 1}, {1, 2}, {2, 3}, {3, 5}, {5, 8}};
  for (std::size_t k = 0; k < want.size(); ++k) {
    EXPECT_EQ(th.convergents()[k].p, want[k].p);
    EXPECT_EQ(th.convergents()[k].q, want[k].q);
  }
}

TEST(ContinuedFraction, SqrtTwoMinusOneIsAllTwos) {
  auto th = RotationAngle::from_value(std::sqrt(2.0L) - 1.0L, 6);
  EXPECT_EQ(th.digits(), (std::vector<std::int64_t>(6, 2)));
}

TEST(ContinuedFraction, JustBelowOneHalf) {
  auto th = RotationAngle::from_value(0.5L - 1e-9L, 3);
  EXPECT_EQ(th.digits().front(), 2);
}

TEST(ContinuedFraction, RationalInputRejected) {
  try {
    RotationAngle::from_value(0.375L, 10);
    FAIL() << "expected rational-input";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RationalInput);
  }
  EXPECT_THROW(RotationAngle::from_value(0.0L, 4), Error);
  EXPECT_THROW(RotationAngle::from_value(1.0L, 4), Error);
}

TEST(ContinuedFraction, GoldenKeepsFortyDigits) {
  auto th = RotationAngle::golden();
  EXPECT_GE(th.digits().size(), 40u);
  EXPECT_TRUE(th.bounded_type(1));
  EXPECT_NEAR(th.value(), (std::sqrt(5.0) - 1.0) / 2.0, 1e-16);
}

TEST(ContinuedFraction, ApproximationBoundHoldsForRandomValues) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<long double> U(0.001L, 0.999L);
  for (int trial = 0; trial < 500; ++trial) {
    long double x = U(rng);
    auto th = RotationAngle::from_value(x, 30);
    const auto& cv = th.convergents();
    for (std::size_t k = 0; k + 1 < cv.size(); ++k) {
      EXPECT_LT(cv[k].q, cv[k + 1].q);
      long double err = std::fabs(x - static_cast<long double>(cv[k].p) / cv[k].q);
      long double bound = 1.0L / (static_cast<long double>(cv[k].q) * cv[k + 1].q);
      EXPECT_LT(err, bound) << "x=" << static_cast<double>(x) << " k=" << k;
    }
    for (auto a : th.digits()) EXPECT_GE(a, 1);
  }
}

TEST(ContinuedFraction, ConvergentsMatchIndependentRecursion) {
  auto th = RotationAngle::from_value(0.2718281828459045L, 15);
  auto oracle = oracle_convergents(th.digits());
  for (std::size_t k = 0; k < oracle.size(); ++k) {
    EXPECT_EQ(static_cast<long double>(th.convergents()[k].p), oracle[k].first);
    EXPECT_EQ(static_cast<long double>(th.convergents()[k].q), oracle[k].second);
  }
}

TEST(ContinuedFraction, BoundedTypeFlag) {
  auto th = RotationAngle::from_digits({1, 3, 1, 7, 2});
  EXPECT_EQ(th.max_digit(), 7);
  EXPECT_TRUE(th.bounded_type(7));
  EXPECT_FALSE(th.bounded_type(6));
}

TEST(ContinuedFraction, BrjunoPartialSumsMatchOracle) {
  auto th = RotationAngle::from_value(std::sqrt(2.0L) - 1.0L, 20);
  auto oracle = oracle_convergents(th.digits());
  auto w = th.brjuno_partial_sums();
  ASSERT_FALSE(w.empty());
  long double sum = 0.0L;
  for (std::size_t k = 0; k < w.size(); ++k) {
    sum += std::log(oracle[k + 1].second) / oracle[k].second;
    EXPECT_NEAR(w[k], static_cast<double>(sum), 1e-12);
  }
  // partial sums are nondecreasing
  for (std::size_t k = 1; k < w.size(); ++k) EXPECT_GE(w[k], w[k - 1]);
}

TEST(CircleLift, ValidationRejectsBadLifts) {
  CircleMapLift folded([](double x) { return x + 0.3 + 0.3 * std::sin(kTwoPi * x); }, "folded");
  EXPECT_THROW(folded.validate(), Error);
  CircleMapLift stretched([](double x) { return 1.5 * x; }, "stretched");
  EXPECT_THROW(stretched.validate(), Error);
  EXPECT_NO_THROW(sine_circle_lift(0.3, 0.9).validate());
}

TEST(RotationNumber, RigidRotationBracketsTranslation) {
  const double theta = (std::sqrt(5.0) - 1.0) / 2.0;
  auto r = rotation_number(rigid_rotation_lift(theta), 0.0, 100000);
  EXPECT_LE(r.lower, theta);
  EXPECT_GE(r.upper, theta);
  EXPECT_LE(std::abs(r.estimate - theta), r.error_bound + 1e-15);
  EXPECT_LT(r.error_bound, 1e-4);
}

TEST(RotationNumber, SineMapAgreesWithLongOrbitOracle) {
  auto f = [](double x) { return x + 0.30 + 0.05 * std::sin(kTwoPi * x); };
  CircleMapLift lift(f, "sine");
  auto r = rotation_number(lift, 0.0, 100000);
  // Oracle: plain average over 1e7 steps, error at most 1/N for a monotone lift.
  const long n = 10000000;
  long double x = 0.0L;
  long double shift = 0.0L;
  for (long k = 0; k < n; ++k) {
    double y = f(static_cast<double>(x));
    double fl = std::floor(y);
    shift += fl;
    x = y - fl;
  }
  double oracle = static_cast<double>((shift + x) / n);
  EXPECT_LE(std::abs(r.estimate - oracle), r.error_bound + 1.0 / n);
}

TEST(RotationNumber, ConjugationInvariance) {
  auto f = sine_circle_lift(0.41, 0.7);
  // phi(x) = x + 0.04 sin(2 pi x), inverted by Newton
  auto phi = [](double x) { return x + 0.04 * std::sin(kTwoPi * x); };
  auto phi_inv = [](double y) {
    double x = y;
    for (int i = 0; i < 50; ++i) x -= (x + 0.04 * std::sin(kTwoPi * x) - y) / (1.0 + 0.04 * kTwoPi * std::cos(kTwoPi * x));
    return x;
  };
  CircleMapLift g([=](double x) { return phi(f(phi_inv(x))); }, "conjugated");
  auto a = rotation_number(f, 0.0, 100000);
  auto b = rotation_number(g, 0.2, 100000);
  EXPECT_LE(std::abs(a.estimate - b.estimate), a.error_bound + b.error_bound);
}

TEST(RotationNumber, RejectsNonMonotoneLift) {
  CircleMapLift folded([](double x) { return x + 0.3 + 0.3 * std::sin(kTwoPi * x); }, "folded");
  EXPECT_THROW(rotation_number(folded, 0.0, 1000), Error);
}

TEST(Calibration, RigidFamilyReturnsTheta) {
  auto th = RotationAngle::golden();
  auto cal = calibrate_t([](double t) { return rigid_rotation_lift(t); }, th, 1e-9);
  EXPECT_NEAR(cal.t, th.value(), 2e-9);
  EXPECT_LE(cal.t_lo, cal.t);
  EXPECT_GE(cal.t_hi, cal.t);
}

TEST(Calibration, MonotoneConsistentBracket) {
  auto family = [](double t) { return sine_circle_lift(t, 0.8); };
  auto th = RotationAngle::from_value(std::sqrt(2.0L) - 1.0L, 20);
  auto cal = calibrate_t(family, th, 1e-8);
  EXPECT_LE(std::abs(cal.rho.estimate - th.value()), 1e-8);
  auto lo = rotation_number(family(cal.t_lo), 0.0, 200000);
  auto hi = rotation_number(family(cal.t_hi), 0.0, 200000);
  EXPECT_LE(lo.lower, hi.upper);
}

TEST(Calibration, RefusesTinyTolerance) {
  try {
    calibrate_t([](double t) { return rigid_rotation_lift(t); }, 0.3, 1e-12);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
}

TEST(Calibration, TargetOutsideRangeIsBracketFailure) {
  try {
    calibrate_t([](double t) { return rigid_rotation_lift(0.1 * t); }, 0.5, 1e-6);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::BracketFailure);
  }
}
