#include <gtest/gtest.h>

#include <cmath>
#include <memory>

#include "crossbif/classifier.hpp"
#include "crossbif/poincare.hpp"

namespace crossbif {
namespace {

TEST(HamiltonianSystem, RejectsPotentialsWithoutTheInvariantLine) {
  EXPECT_THROW(HamiltonianSystem::from_terms({{1, 0, 0.3}}), Error);
  EXPECT_THROW(HamiltonianSystem::from_terms({{1, 2, -0.1}}), Error);
  EXPECT_THROW(HamiltonianSystem::named("nope"), Error);
  EXPECT_NO_THROW(HamiltonianSystem::from_terms({{2, 1, 0.5}, {0, 2, 0.5}}));
}

TEST(ReducedSystem, PlanePotentialAndLinearization) {
  const HamiltonianSystem h = HamiltonianSystem::named("demo");
  const ReducedSystem r = reduced_system(h);
  // U(y) = y^2/2 + (lambda/4) y^4 on the plane
  EXPECT_NEAR(r.U(0.8), 0.5 * 0.64 + 0.125 * 0.4096, 1e-13);
  EXPECT_NEAR(r.Up(0.8), 0.8 + 0.5 * 0.512, 1e-13);
  // transverse linearization: traceless with A12 = 1, A21 = -V_xx(0, y)
  const Mat2 a = r.A(0.7, 0.3);
  EXPECT_DOUBLE_EQ(a.a, 0.0);
  EXPECT_DOUBLE_EQ(a.b, 1.0);
  EXPECT_NEAR(a.c, -(kDemoOmega * kDemoOmega + kDemoAlpha * 0.7), 1e-13);
  EXPECT_DOUBLE_EQ(a.d, 0.0);
}

TEST(DefaultSection, FindsThePlaneEquilibrium) {
  EXPECT_NEAR(default_section_y(reduced_system(HamiltonianSystem::named("harmonic"))), 0.0,
              1e-11);
  EXPECT_NEAR(default_section_y(reduced_system(HamiltonianSystem::named("demo"))), 0.0,
              1e-11);
  // a potential with no well on the line: V = y
  const HamiltonianSystem tilt = HamiltonianSystem::from_terms({{0, 1, 1.0}});
  EXPECT_THROW(default_section_y(reduced_system(tilt)), Error);
}

TEST(FindLibration, HarmonicOrbitIsTheUnitCircle) {
  const ReducedSystem r = reduced_system(HamiltonianSystem::named("harmonic"));
  const LibratingOrbit orbit = find_libration(r, 0.0, 0.5);
  EXPECT_NEAR(orbit.y1, -1.0, 1e-10);
  EXPECT_NEAR(orbit.y2, 1.0, 1e-10);
  EXPECT_NEAR(orbit.T, 2 * M_PI, 1e-9);
  EXPECT_NEAR(orbit.period_quadrature, 2 * M_PI, 1e-9);
  EXPECT_NEAR(orbit.py_start, 1.0, 1e-10);

  // periodicity and energy conservation along the stored orbit
  for (int i = 0; i <= 16; ++i) {
    const double t = orbit.T * i / 16.0;
    const double e = 0.5 * orbit.py(t) * orbit.py(t) + r.U(orbit.y(t));
    EXPECT_NEAR(e, 0.5, 1e-9) << t;
  }
  EXPECT_NEAR(orbit.y(orbit.T), orbit.y_start, 1e-8);
  EXPECT_NEAR(orbit.py(orbit.T), orbit.py_start, 1e-8);
}

TEST(FindLibration, PeriodsAgreeOnTheQuarticWell) {
  const ReducedSystem r = reduced_system(HamiltonianSystem::named("demo"));
  for (const double e : {0.05, 0.15, 0.3}) {
    const LibratingOrbit orbit = find_libration(r, 0.0, e);
    EXPECT_NEAR(orbit.T, orbit.period_quadrature, 1e-8) << e;
    EXPECT_LT(orbit.T, 2 * M_PI) << e;  // hardening spring: below the linear period
  }
}

TEST(FindLibration, EnergyBelowTheWellIsRejected) {
  const ReducedSystem r = reduced_system(HamiltonianSystem::named("harmonic"));
  EXPECT_THROW(
      {
        try {
          find_libration(r, 0.0, -0.1);
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), errc::no_well);
          throw;
        }
      },
      Error);
}

TEST(Monodromy, HarmonicPeriodGivesTheIdentity) {
  const ReducedSystem r = reduced_system(HamiltonianSystem::named("harmonic"));
  const LibratingOrbit orbit = find_libration(r, 0.0, 0.5);
  const MonodromyData m = fundamental_system(r, orbit);
  EXPECT_NEAR(m.phi_T, 1.0, 5e-9);
  EXPECT_NEAR(m.psi_T, 0.0, 5e-9);
  EXPECT_NEAR(m.dphi_T, 0.0, 5e-9);
  EXPECT_NEAR(m.dpsi_T, 1.0, 5e-9);
  EXPECT_LE(m.wronskian_defect, 1e-9);
}

TEST(Monodromy, ConstantCoefficientClosedForm) {
  // V = y^2/2 + (w^2/2) x^2 gives the constant Hill coefficient f = w^2 and
  // the explicit rotation-form monodromy over one plane period T = 2 pi
  const double w = 1.3;
  const HamiltonianSystem h =
      HamiltonianSystem::from_terms({{0, 2, 0.5}, {2, 0, 0.5 * w * w}});
  const ReducedSystem r = reduced_system(h);
  const LibratingOrbit orbit = find_libration(r, 0.0, 0.5);
  const MonodromyData m = fundamental_system(r, orbit);
  const double wt = w * orbit.T;
  EXPECT_NEAR(m.phi_T, std::cos(wt), 1e-9);
  EXPECT_NEAR(m.psi_T, std::sin(wt) / w, 1e-9);
  EXPECT_NEAR(m.dphi_T, -w * std::sin(wt), 1e-9);
  EXPECT_NEAR(m.dpsi_T, std::cos(wt), 1e-9);
}

PoincareContext demo_context() {
  return make_poincare_context(HamiltonianSystem::named("demo"), {}, 0.05);
}

TEST(PoincareMap, PlanePointsAreExactlyFixed) {
  const PoincareContext ctx = demo_context();
  EXPECT_NEAR(ctx.section.y0, 0.0, 1e-11);
  EXPECT_GT(ctx.t_ref, 0.0);
  for (const double eps : {0.0, 0.1, 0.25}) {
    const Vec2 img = poincare_map(ctx, {0, 0, eps});
    EXPECT_EQ(img.x, 0.0) << eps;
    EXPECT_EQ(img.y, 0.0) << eps;
  }
}

TEST(PoincareMap, EnergyForbiddenLiftIsRejected) {
  const PoincareContext ctx = demo_context();
  EXPECT_THROW(
      {
        try {
          poincare_map(ctx, {0, 0, -0.2});
        } catch (const Error& e) {
          EXPECT_EQ(e.code(), errc::energy_forbidden);
          throw;
        }
      },
      Error);
}

TEST(PoincareFamily, ReturnMapIsSymplectic) {
  const PoincareFamily family(demo_context());
  const Point3 pts[] = {{0.1, -0.05, 0.02}, {0.05, 0.1, 0.15}, {-0.08, 0.03, 0.2}};
  for (const Point3& pt : pts) {
    const double defect = std::fabs(family.jet(pt, 1).jacobian().det() - 1.0);
    EXPECT_LE(defect, 1e-6) << pt.q << " " << pt.p << " " << pt.eps;
  }
}

TEST(PoincareFamily, JacobianMatchesTheMonodromyMatrix) {
  const PoincareContext ctx = demo_context();
  const ReducedSystem r = reduced_system(ctx.h);
  const PoincareFamily family(ctx);
  for (const double eps : {0.0, 0.24}) {
    const LibratingOrbit orbit = find_libration(r, ctx.section.y0, ctx.e0 + eps);
    const MonodromyData m = fundamental_system(r, orbit);
    const Mat2 j = family.jet({0, 0, eps}, 1).jacobian();
    const Mat2 diff{j.a - m.phi_T, j.b - m.psi_T, j.c - m.dphi_T, j.d - m.dpsi_T};
    EXPECT_LE(diff.norm_inf(), 1e-5) << eps;
  }
}

TEST(LibrationScan, FindsTheTwoUnitTraceCrossings) {
  const PoincareContext ctx = demo_context();
  const ScanResult scan = libration_branch_scan(ctx, 0.20, 0.30, 11);
  ASSERT_EQ(scan.rows.size(), 11u);
  EXPECT_TRUE(scan.notes.empty());
  EXPECT_FALSE(scan.degenerate_flat_trace);
  for (size_t i = 0; i < scan.rows.size(); ++i) {
    EXPECT_EQ(scan.branch.samples[i].q, 0.0);
    EXPECT_EQ(scan.branch.samples[i].p, 0.0);
    EXPECT_NEAR(scan.rows[i].eps, 0.20 + 0.01 * i, 1e-12);
    EXPECT_NEAR(scan.rows[i].trace, scan.rows[i].phi_T + scan.rows[i].dpsi_T, 1e-12);
  }

  // frozen regression values for the shipped demo constants
  ASSERT_EQ(scan.crossings.size(), 2u);
  const TraceCrossing& up = scan.crossings[0];
  const TraceCrossing& down = scan.crossings[1];
  EXPECT_NEAR(up.eps_star, 0.2446395795, 5e-7);
  EXPECT_NEAR(up.trace_slope, 0.083294, 1e-3);
  EXPECT_NEAR(down.eps_star, 0.2777982170, 5e-7);
  EXPECT_NEAR(down.trace_slope, -0.079644, 1e-3);
  ASSERT_TRUE(up.report.has_value()) << up.classify_error;
  EXPECT_EQ(up.report->kind, BifurcationKind::rank1_cross_fork_like);
  // V is even in x, so the transcritical coefficient vanishes identically
  EXPECT_NEAR(up.report->p_qq, 0.0, 1e-6);
}

TEST(LibrationScan, RejectsDegenerateWindows) {
  const PoincareContext ctx = demo_context();
  EXPECT_THROW(libration_branch_scan(ctx, 0.3, 0.2, 11), Error);
  EXPECT_THROW(libration_branch_scan(ctx, 0.2, 0.3, 1), Error);
}

}  // namespace
}  // namespace crossbif
