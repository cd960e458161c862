#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include <gtest/gtest.h>

#include "siegel/surgery.hpp"

using namespace siegel;

namespace {

const RotationAngle& golden() {
  static const RotationAngle th = RotationAngle::golden();
  return th;
}

const BlaschkeParams& params() {
  static const BlaschkeParams p = solve_blaschke(2.0, golden());
  return p;
}

const CircleConjugacy& conj4096() {
  static const CircleConjugacy h = circle_conjugacy(params(), 4096);
  return h;
}

const DiskExtension& extension() {
  static const DiskExtension ext(conj4096());
  return ext;
}

double mean_off_table(const CircleConjugacy& h, int probes) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double sum = 0.0;
  for (int i = 0; i < probes; ++i) sum += std::abs(h.residual(u(rng)));
  return sum / probes;
}

}  // namespace

TEST(CircleConjugacy, TableShape) {
  const auto& h = conj4096();
  ASSERT_EQ(h.size(), 4096u);
  EXPECT_EQ(h(0.0), 0.0);
  EXPECT_EQ(h.table().front().first, 0.0);
  for (std::size_t i = 1; i < h.size(); ++i) {
    ASSERT_GT(h.table()[i].first, h.table()[i - 1].first);
    ASSERT_GT(h.table()[i].second, h.table()[i - 1].second);
  }
  EXPECT_EQ(h.table_residual(), 0.0);
  EXPECT_NEAR(h(1.25) - h(0.25), 1.0, 1e-15);
  for (double y : {0.1, 0.5, 0.93}) EXPECT_NEAR(h(h.inverse(y)), y, 1e-12);
}

TEST(CircleConjugacy, MidpointResidual) {
  const auto& h = conj4096();
  const auto& t = h.table();
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    worst = std::max(worst, std::abs(h.residual(0.5 * (t[i].first + t[i + 1].first))));
  }
  EXPECT_LE(worst, 1e-3);
}

TEST(CircleConjugacy, OffTableResidualShrinks) {
  double prev = INFINITY;
  for (int n : {1024, 2048, 4096}) {
    double m = mean_off_table(circle_conjugacy(params(), n), 1000);
    EXPECT_LT(m, prev) << n;
    prev = m;
  }
}

TEST(CircleConjugacy, RigidRotationGivesIdentity) {
  const double theta = golden().value();
  auto h = CircleConjugacy::rigid(theta, 500);
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    double x = u(rng);
    // table entries carry the rounding of a 500-step orbit
    EXPECT_NEAR(h(x), x, 1e-11);
    EXPECT_LE(std::abs(h.residual(x)), 1e-11);
  }
}

TEST(CircleConjugacy, RationalOrbitCollides) {
  try {
    CircleConjugacy::rigid(1.0 / 3.0, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OrbitCollision);
  }
  EXPECT_THROW(CircleConjugacy({{0.1, 0.0}}, rigid_rotation_lift(0.3), 0.3), Error);
}

TEST(DiskExtension, IdentityBoundary) {
  auto id = DiskExtension::identity();
  for (cplx w : {cplx(0.0, 0.0), cplx(0.3, -0.2), cplx(-0.7, 0.6), cplx(0.0, 0.95)}) {
    EXPECT_LT(std::abs(id(w) - w), 1e-10);
  }
}

TEST(DiskExtension, ReproducesMobiusBoundary) {
  // The extension of the boundary values of a disk automorphism is that automorphism.
  const cplx a(0.4, -0.3);
  const cplx rot = unit_turn(0.17);
  auto mobius = [=](cplx z) { return rot * (z - a) / (1.0 - std::conj(a) * z); };
  DiskExtension ext(mobius);
  for (cplx w : {cplx(0.0, 0.0), cplx(0.5, 0.5), cplx(-0.8, 0.1), cplx(0.2, -0.9)}) {
    EXPECT_LT(std::abs(ext(w) - mobius(w)), 1e-10) << w;
  }
}

TEST(DiskExtension, MobiusNaturality) {
  const auto& h = conj4096();
  const cplx a(0.3, 0.0);
  auto g = [a](cplx z) { return (z - a) / (1.0 - std::conj(a) * z); };
  DiskExtension moved([&h, g](cplx z) { return g(unit_turn(h(turns_of(z)))); });
  for (cplx w : {cplx(0.0, 0.0), cplx(0.1, 0.2), cplx(-0.5, 0.3), cplx(0.6, -0.6), cplx(0.0, 0.9)}) {
    EXPECT_LT(std::abs(moved(w) - g(extension()(w))), 1e-6) << w;
  }
}

// Exact in principle; the quadrature sees a kinked boundary map, so only to 1e-5.
TEST(DiskExtension, RotationNaturality) {
  const auto& h = conj4096();
  const cplx pre = unit_turn(0.21), post = unit_turn(-0.08);
  DiskExtension twisted([&h, pre, post](cplx z) { return post * unit_turn(h(turns_of(pre * z))); });
  for (cplx w : {cplx(0.1, 0.2), cplx(-0.5, 0.3), cplx(0.6, -0.6)}) {
    EXPECT_LT(std::abs(twisted(w) - post * extension()(pre * w)), 1e-5) << w;
  }
}

TEST(DiskExtension, BoundaryConsistency) {
  const auto& h = conj4096();
  double worst = 0.0;
  for (int k = 0; k < 64; ++k) {
    double x = (k + 0.5) / 64.0;
    cplx v = extension()(0.999 * unit_turn(x));
    worst = std::max(worst, std::abs(v - unit_turn(h(x))));
  }
  EXPECT_LE(worst, 0.02);
}

TEST(DiskExtension, MapsIntoDisk) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> r(0.0, 0.99), a(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    cplx w = std::sqrt(r(rng)) * unit_turn(a(rng));
    EXPECT_LT(std::abs(extension()(w)), 1.0);
  }
  EXPECT_THROW(extension()(1.0), Error);
}

TEST(DiskExtension, InverseRoundTrip) {
  for (cplx w : {cplx(0.1, 0.1), cplx(-0.4, 0.5), cplx(0.7, 0.0)}) {
    cplx v = extension()(w);
    EXPECT_LT(std::abs(extension().inverse(v, 0.0) - w), 1e-9) << w;
  }
}

TEST(DiskExtension, ConcurrentEvaluationMatchesSerial) {
  std::vector<cplx> pts;
  for (int k = 0; k < 16; ++k) pts.push_back(0.8 * std::sqrt((k + 0.5) / 16.0) * unit_turn(k * 0.618));
  DiskExtension serial(conj4096());
  std::vector<cplx> want;
  for (cplx w : pts) want.push_back(serial(w));
  DiskExtension shared(conj4096());
  std::vector<cplx> got(pts.size());
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t) {
    pool.emplace_back([&, t] {
      for (std::size_t i = static_cast<std::size_t>(t); i < pts.size(); i += 4) got[i] = shared(pts[i]);
      for (std::size_t i = 0; i < pts.size(); ++i) shared(pts[i]);
    });
  }
  for (auto& th : pool) th.join();
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_EQ(got[i], want[i]);
}

TEST(ModifiedBlaschke, AgreesWithBOutside) {
  const auto b = params().map();
  for (cplx z : {cplx(1.0, 0.0), cplx(1.5, -2.0), cplx(0.0, 3.0)}) {
    EXPECT_EQ(modified_blaschke_eval(params(), extension(), z), b(z));
  }
}

TEST(ModifiedBlaschke, ConjugateToRotationInside) {
  const cplx lambda = golden().multiplier();
  for (cplx z : {cplx(0.2, 0.1), cplx(-0.5, -0.3), cplx(0.0, 0.8)}) {
    cplx image = modified_blaschke_eval(params(), extension(), z);
    EXPECT_LT(std::abs(extension()(image) - lambda * extension()(z)), 1e-10) << z;
  }
}

TEST(ModifiedBlaschke, FixesPreimageOfCenter) {
  cplx z0 = extension().inverse(0.0, 0.0);
  EXPECT_LT(std::abs(extension()(z0)), 1e-12);
  EXPECT_LT(std::abs(modified_blaschke_eval(params(), extension(), z0) - z0), 1e-9);
}

TEST(ModifiedBlaschke, SeamIsSmall) {
  const auto b = params().map();
  double worst = 0.0;
  for (int k = 0; k < 32; ++k) {
    cplx u = unit_turn((k + 0.25) / 32.0);
    worst = std::max(worst, std::abs(modified_blaschke_eval(params(), extension(), 0.999 * u) - b(u)));
  }
  EXPECT_LE(worst, 0.05);
}

TEST(Beltrami, IdentityIsConformal) {
  auto id = DiskExtension::identity(256);
  for (cplx w : {cplx(0.0, 0.0), cplx(0.4, 0.4), cplx(-0.8, 0.0)}) {
    auto s = beltrami_sample(id, w);
    EXPECT_LT(std::abs(s.mu), 1e-6);
    EXPECT_NEAR(s.dilatation, 1.0, 1e-5);
  }
}

TEST(Beltrami, BoundedOnGrid) {
  double worst = 0.0;
  for (int a = 0; a < 4; ++a) {
    for (int k = 0; k < 8; ++k) {
      cplx w = 0.9 * (a + 0.5) / 4.0 * unit_turn(k / 8.0);
      auto s = beltrami_sample(extension(), w);
      worst = std::max(worst, std::abs(s.mu));
      EXPECT_GE(s.dilatation, 1.0);
    }
  }
  EXPECT_LT(worst, 1.0);
}

TEST(Beltrami, RejectsPointsTooCloseToCircle) {
  try {
    beltrami_sample(DiskExtension::identity(64), 0.9995, 1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
  }
}
