#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "crossbif/builtins.hpp"
#include "crossbif/frames.hpp"

namespace crossbif {
namespace {

constexpr double kDeg = M_PI / 180.0;

TEST(UnitEigenspace, ShearAndRotatedShear) {
  const Mat2 J{1, 1, 0, 1};
  const EigenspaceResult r = unit_eigenspace(J);
  ASSERT_EQ(r.status, EigenspaceResult::Status::ok);
  EXPECT_NEAR(r.direction.x, 1.0, 1e-14);
  EXPECT_NEAR(r.direction.y, 0.0, 1e-14);

  const double theta = 30 * kDeg;
  const Mat2 R = Mat2::rotation(theta);
  const Mat2 Jr = R * J * Mat2::rotation(-theta);
  const EigenspaceResult rr = unit_eigenspace(Jr);
  ASSERT_EQ(rr.status, EigenspaceResult::Status::ok);
  EXPECT_NEAR(rr.direction.x, std::cos(theta), 1e-12);
  EXPECT_NEAR(rr.direction.y, std::sin(theta), 1e-12);
}

TEST(UnitEigenspace, FlagsIdentityAndMissingEigenvalue) {
  EXPECT_EQ(unit_eigenspace(Mat2::identity()).status,
            EigenspaceResult::Status::identity_jacobian);
  EXPECT_EQ(unit_eigenspace(Mat2{0, -1, 1, 0}).status,
            EigenspaceResult::Status::no_unit_eigenvalue);
  EXPECT_THROW(unit_eigenspace(Mat2{2, 0, 0, 1}), Error);  // det != 1
}

TEST(AdaptedFrame, RoundTrip) {
  AdaptedFrame f;
  f.base = {0.4, -0.2, 0.7};
  f.theta = 0.6;
  f.c = -1.3;
  f.c1 = 0.8;
  const Point3 pts[] = {{0.1, 0.2, 0.3}, {-1, 0.5, -0.25}, {0, 0, 1}};
  for (const Point3& p : pts) {
    const Point3 back = f.to_frame(f.to_world(p));
    EXPECT_NEAR(back.q, p.q, 1e-13);
    EXPECT_NEAR(back.p, p.p, 1e-13);
    EXPECT_NEAR(back.eps, p.eps, 1e-13);
  }
  const std::array<double, 3> d{0.3, -0.7, 0.2};
  const auto d2 = f.direction_to_frame(f.direction_to_world(d));
  EXPECT_NEAR(d2[0], d[0], 1e-13);
  EXPECT_NEAR(d2[1], d[1], 1e-13);
  EXPECT_NEAR(d2[2], d[2], 1e-13);
}

void expect_adapted(const DerivativeJet& j) {
  EXPECT_NEAR(j.Qq(), 1.0, 1e-10);
  EXPECT_GT(std::fabs(j.Qp()), 1e-3);
  EXPECT_NEAR(j.Pq(), 0.0, 1e-10);
  EXPECT_NEAR(j.Pp(), 1.0, 1e-10);
  EXPECT_NEAR(j.Qe(), 0.0, 1e-10);
  EXPECT_NEAR(j.Pe(), 0.0, 1e-10);
}

TEST(ToAdapted, ShearFamilyIsAlreadyAdapted) {
  const auto fam = shear_family({{1, 1, 0, 1.0}, {2, 0, 0, -1.0}});
  const AdaptedResult r = to_adapted(fam, {0, 0, 0});
  EXPECT_NEAR(r.frame.theta, 0.0, 1e-12);
  EXPECT_NEAR(r.frame.c, 0.0, 1e-12);
  expect_adapted(r.jet);
  EXPECT_NEAR(r.jet.Pqq(), -2.0, 1e-10);
  EXPECT_NEAR(r.jet.Pqe(), 1.0, 1e-10);
}

TEST(ToAdapted, RotationConjugationIsInvisibleInAdaptedJet) {
  for (const double deg : {30.0, 77.0}) {
    const auto fam = shear_family({{1, 1, 0, 1.0}, {2, 0, 0, -1.0}}, deg * kDeg);
    const AdaptedResult r = to_adapted(fam, {0, 0, 0});
    EXPECT_NEAR(std::remainder(r.frame.theta - deg * kDeg, M_PI), 0.0, 1e-9) << deg;
    expect_adapted(r.jet);
    EXPECT_NEAR(r.jet.Pqq(), -2.0, 1e-9) << deg;
    EXPECT_NEAR(r.jet.Pqe(), 1.0, 1e-9) << deg;
    EXPECT_NEAR(r.jet.Pee(), 0.0, 1e-9) << deg;
  }
}

TEST(ToAdapted, ShearSlotPreservesAdaptedness) {
  const auto fam = shear_family({{1, 1, 0, 1.0}, {2, 0, 0, -1.0}}, 0.4);
  const AdaptedResult r = to_adapted(fam, {0, 0, 0});
  const AdaptedFrame sheared = apply_shear(r.frame, 0.7);
  const FramedFamily g(fam, sheared);
  const DerivativeJet j = g.jet({0, 0, 0}, 2);
  expect_adapted(j);
  // the pure-q second partial is shear invariant
  EXPECT_NEAR(j.Pqq(), -2.0, 1e-9);
}

TEST(ToAdapted, ReportsEachHypothesisFailure) {
  const auto cross = shear_family({{1, 1, 0, 1.0}, {2, 0, 0, -1.0}});
  // not a fixed point
  EXPECT_THROW(
      {
        try {
          to_adapted(cross, {0.5, 0, 0});
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), errc::seed_not_fixed);
          throw;
        }
      },
      Error);
  // fixed point with trace away from 2: q = eps branch at eps = 0.2
  EXPECT_THROW(
      {
        try {
          to_adapted(cross, {0.2, 0, 0.2});
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), errc::no_unit_eigenvalue);
          throw;
        }
      },
      Error);
  // identity Jacobian: the identity map itself
  const auto ident =
      std::make_shared<PolynomialFamily>(Poly::variable(0), Poly::variable(1));
  EXPECT_THROW(
      {
        try {
          to_adapted(ident, {0, 0, 0});
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), errc::identity_jacobian);
          throw;
        }
      },
      Error);
  // unremovable P_eps: g = eps - q^2
  const auto fold = shear_family({{0, 1, 0, 1.0}, {2, 0, 0, -1.0}});
  EXPECT_THROW(
      {
        try {
          to_adapted(fold, {0, 0, 0});
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), errc::rank2_detected);
          throw;
        }
      },
      Error);
}

TEST(FramedFamily, JetMatchesDirectFiniteDifferences) {
  const auto fam = shear_family({{1, 1, 0, 1.0}, {3, 0, 0, -1.0}}, 0.9);
  const AdaptedResult r = to_adapted(fam, {0, 0, 0});
  const Point3 pt{0.05, -0.03, 0.02};
  const DerivativeJet exact = r.family->jet(pt, 3);
  const DerivativeJet approx =
      fd_jet([&](const Point3& x) { return r.family->eval(x); }, pt, 3);
  for (int comp = 0; comp < 2; ++comp)
    for (int s = 0; s < kJetSlots; ++s)
      EXPECT_NEAR(exact.c[comp][s], approx.c[comp][s], 5e-6) << "comp " << comp << " slot " << s;
}

}  // namespace
}  // namespace crossbif
