#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"

using namespace rtcurved;

namespace {

const DomainSpec kBall = DomainSpec::solid(EllipsoidShape::ball());
const DomainSpec kHollowEllipsoid = DomainSpec::holed({0.6, 0.8, 1.0});

Vec3 random_shell_point(std::mt19937& rng, const EllipsoidShape& s, double lo, double hi) {
  std::uniform_real_distribution<double> r(lo, hi);
  std::normal_distribution<double> n(0.0, 1.0);
  Vec3 d(std::abs(n(rng)), std::abs(n(rng)), std::abs(n(rng)));
  d.normalize();
  return r(rng) * Vec3(s.a * d[0], s.b * d[1], s.c * d[2]);
}

}  // namespace

TEST(Eta, AxisPointsLieOnTheOuterSurface) {
  const EllipsoidShape s{0.6, 0.8, 1.0};
  EXPECT_DOUBLE_EQ(eta(s, {0.6, 0, 0}), 1.0);
  EXPECT_DOUBLE_EQ(eta(s, {0, 0.8, 0}), 1.0);
  EXPECT_DOUBLE_EQ(eta(s, {0, 0, 1.0}), 1.0);
  EXPECT_DOUBLE_EQ(eta(s, {0, 0, 0.5}), 0.5);
}

TEST(Eta, RejectsNonpositiveAxes) {
  EXPECT_THROW((EllipsoidShape{0.0, 1.0, 1.0}.validate()), ParameterError);
}

TEST(ExactFields, GradientAndLaplacianMatchFiniteDifferences) {
  std::mt19937 rng(11);
  for (const DomainSpec& spec : {kBall, kHollowEllipsoid}) {
    for (Profile prof : {Profile::G1, Profile::G2, Profile::G3}) {
      const SolutionProfile sp{prof, 0.7};
      auto u = [&](const Vec3& x) { return exact_fields(spec, sp, x).u; };
      for (int i = 0; i < 20; ++i) {
        const Vec3 x = random_shell_point(rng, spec.shape, 0.35, 1.0);
        const Fields f = exact_fields(spec, sp, x);
        const Vec3 g = oracle::fd_gradient(u, x);
        const double lap = oracle::fd_laplacian(u, x);
        EXPECT_LE((g - f.p).norm(), 1e-4 * std::max(f.p.norm(), 1e-3)) << to_string(prof);
        EXPECT_LE(std::abs(lap - f.divp), 1e-4 * std::max(std::abs(f.divp), 1e-2)) << to_string(prof);
        EXPECT_NEAR(f.f, 0.7 * f.u - f.divp, 1e-14);
      }
    }
  }
}

TEST(ExactFields, G1IsRegularAtTheCentre) {
  const EllipsoidShape s{0.6, 0.8, 1.0};
  const Fields f = exact_fields(DomainSpec::solid(s), {Profile::G1, 1.0}, Vec3::Zero());
  EXPECT_EQ(f.u, 0.0);
  EXPECT_EQ(f.p.norm(), 0.0);
  EXPECT_DOUBLE_EQ(f.divp, 1 / 0.36 + 1 / 0.64 + 1.0);
}

TEST(ExactFields, SingularProfilesRejectTheCentreRegion) {
  EXPECT_THROW(exact_fields(kBall, {Profile::G2, 1.0}, Vec3(0.1, 0, 0)), DomainError);
  EXPECT_THROW(exact_fields(kBall, {Profile::G3, 1.0}, Vec3(0.2, 0, 0)), DomainError);
  EXPECT_NO_THROW(exact_fields(kBall, {Profile::G3, 1.0}, Vec3(0.3, 0, 0)));
}

TEST(ExactFields, ProfilesSatisfyTheirBoundaryConditions) {
  std::mt19937 rng(5);
  const EllipsoidShape s = kHollowEllipsoid.shape;
  for (int i = 0; i < 10; ++i) {
    const Vec3 outer = random_shell_point(rng, s, 1.0, 1.0);
    const Vec3 inner = 0.5 * outer;
    // G1: p.n = 0 on the outer surface.
    EXPECT_NEAR(exact_fields(kHollowEllipsoid, {Profile::G1, 1}, outer).p.norm(), 0.0, 1e-14);
    // G2: u = 0 on the inner surface, p = 0 on the outer one.
    EXPECT_NEAR(exact_fields(kHollowEllipsoid, {Profile::G2, 1}, inner).u, 0.0, 1e-14);
    EXPECT_NEAR(exact_fields(kHollowEllipsoid, {Profile::G2, 1}, outer).p.norm(), 0.0, 1e-14);
    // G3: u = 0 outside, p = 0 on the inner surface.
    EXPECT_NEAR(exact_fields(kHollowEllipsoid, {Profile::G3, 1}, outer).u, 0.0, 1e-14);
    EXPECT_NEAR(exact_fields(kHollowEllipsoid, {Profile::G3, 1}, inner).p.norm(), 0.0, 1e-14);
  }
}

TEST(SurfaceNormal, IsTheUnitGradientOfEta) {
  std::mt19937 rng(3);
  const EllipsoidShape s = kHollowEllipsoid.shape;
  auto e = [&](const Vec3& x) { return eta(s, x); };
  for (int i = 0; i < 10; ++i) {
    const Vec3 x = random_shell_point(rng, s, 1.0, 1.0);
    const Vec3 n = surface_normal(kHollowEllipsoid, Surface::Outer, x);
    EXPECT_NEAR(n.norm(), 1.0, 1e-14);
    EXPECT_LE((n - oracle::fd_gradient(e, x).normalized()).norm(), 1e-8);
    const Vec3 ni = surface_normal(kHollowEllipsoid, Surface::Inner, 0.5 * x);
    EXPECT_LE((ni + n).norm(), 1e-12);  // inner normal points towards the centre
  }
}

TEST(SurfaceNormal, RejectsPointsOffTheSurface) {
  EXPECT_THROW(surface_normal(kBall, Surface::Outer, Vec3(0.5, 0, 0)), DomainError);
  EXPECT_THROW(surface_normal(kBall, Surface::Inner, Vec3(0.5, 0, 0)), DomainError);
}

TEST(RaySurfacePoint, MatchesBisection) {
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> d(0.05, 1.0);
  for (const DomainSpec& spec : {kBall, kHollowEllipsoid}) {
    for (int i = 0; i < 20; ++i) {
      const Vec3 m(d(rng), d(rng), d(rng));
      for (double level : {1.0, 0.5}) {
        const Vec3 p = ray_surface_point(spec, m, level);
        EXPECT_LE((p - oracle::bisect_ray(spec.shape, m, level)).norm(), 1e-12);
        EXPECT_NEAR(eta(spec.shape, p), level, 1e-14);
      }
    }
  }
}

TEST(RaySurfacePoint, RejectsTheOrigin) {
  EXPECT_THROW(ray_surface_point(kBall, Vec3::Zero(), 1.0), DomainError);
}
