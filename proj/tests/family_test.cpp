#include <gtest/gtest.h>

#include <memory>
#include <random>

#include "crossbif/builtins.hpp"
#include "crossbif/family.hpp"
#include "crossbif/poly.hpp"

namespace crossbif {
namespace {

TEST(Poly, EvalDerivativeSubstitute) {
  // f = 2 q^3 eps - p^2 + 3
  Poly f = Poly::monomial({3, 0, 1, 0}, 2) + Poly::monomial({0, 2, 0, 0}, -1) +
           Poly::monomial({0, 0, 0, 0}, 3);
  EXPECT_DOUBLE_EQ(f.eval({1, 2, 0.5, 0}), 0.0);
  EXPECT_DOUBLE_EQ(f.derivative(0).eval({1, 2, 0.5, 0}), 3.0);   // 6 q^2 eps
  EXPECT_DOUBLE_EQ(f.derivative(1).eval({1, 2, 0.5, 0}), -4.0);  // -2 p
  EXPECT_DOUBLE_EQ(f.derivative(3).eval({1, 2, 0.5, 0}), 0.0);

  const Poly g = f.substituted(1, 2.0);  // p := 2
  EXPECT_FALSE(g.depends_on(1));
  EXPECT_DOUBLE_EQ(g.eval({1, 99, 0.5, 0}), 0.0);

  EXPECT_TRUE((f - f).zero());
  EXPECT_EQ(f.degree(0), 3);
  EXPECT_EQ(f.degree(1), 2);
}

TEST(Poly, ProductExpansion) {
  const Poly x = Poly::variable(0), y = Poly::variable(1);
  const Poly s = (x + y) * (x + y);
  EXPECT_DOUBLE_EQ(s.eval({2, 3, 0, 0}), 25.0);
  EXPECT_DOUBLE_EQ(s.derivative(0).eval({2, 3, 0, 0}), 10.0);
}

TEST(PolynomialFamily, ExactJetMatchesFiniteDifferences) {
  // shear recipe with a cubic so the third-order slots are populated
  const auto fam = shear_family({{1, 1, 0, 1.0}, {3, 0, 0, -1.0}});  // g = eps q - q^3
  const Point3 pt{0.3, -0.1, 0.2};
  const DerivativeJet exact = fam->jet(pt, 3);
  const DerivativeJet approx =
      fd_jet([&](const Point3& x) { return fam->eval(x); }, pt, 3);
  for (int comp = 0; comp < 2; ++comp)
    for (int s = 0; s < kJetSlots; ++s)
      EXPECT_NEAR(exact.c[comp][s], approx.c[comp][s], 5e-7) << "comp " << comp << " slot " << s;
}

TEST(PolynomialFamily, JetBaseAndValues) {
  const auto fam = shear_family({{1, 1, 0, 1.0}, {2, 0, 0, -1.0}});  // g = eps q - q^2
  const DerivativeJet j = fam->jet({0, 0, 0}, 3);
  EXPECT_DOUBLE_EQ(j.Q(), 0.0);
  EXPECT_DOUBLE_EQ(j.P(), 0.0);
  EXPECT_DOUBLE_EQ(j.Qq(), 1.0);
  EXPECT_DOUBLE_EQ(j.Qp(), 1.0);
  EXPECT_DOUBLE_EQ(j.Pq(), 0.0);
  EXPECT_DOUBLE_EQ(j.Pp(), 1.0);
  EXPECT_DOUBLE_EQ(j.Pqq(), -2.0);
  EXPECT_DOUBLE_EQ(j.Pqe(), 1.0);
  EXPECT_DOUBLE_EQ(j.Pee(), 0.0);
}

TEST(PolynomialFamily, SymplecticEverywhere) {
  const auto fam = shear_family({{1, 1, 0, 1.0}, {2, 0, 0, -0.7}, {3, 0, 0, 0.4}});
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 25; ++i) {
    const Point3 pt{u(rng), u(rng), u(rng)};
    EXPECT_LE(check_symplectic(*fam, pt), 1e-12);
  }
}

TEST(PolynomialFamily, DetDerivativeIdentityOnUnipotentPoints) {
  // g = eps q - q^2 has g_q = 0 along eps = 2 q, where J is unipotent
  const auto fam = shear_family({{1, 1, 0, 1.0}, {2, 0, 0, -1.0}});
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int i = 0; i < 20; ++i) {
    const double t = u(rng);
    const Point3 pt{t, u(rng), 2 * t};
    for (int axis = 0; axis < 3; ++axis)
      EXPECT_LE(det_derivative_residual(*fam, pt, axis), 1e-10) << "axis " << axis;
  }
}

TEST(PolynomialFamily, DetDerivativeRejectsNonUnipotentPoint) {
  const auto fam = shear_family({{1, 1, 0, 1.0}, {2, 0, 0, -1.0}});
  EXPECT_THROW(det_derivative_residual(*fam, {0.3, 0, 0}, 0), Error);
}

TEST(TwoParamExtension, DeltaDerivativeAndSlice) {
  BuiltinFamilySpec spec;
  spec.kind = BuiltinFamilySpec::Kind::two_param_extension;
  spec.g = {{1, 1, 0, 1.0}, {2, 0, 0, -1.0}, {1, 0, 1, 0.5}};  // g += 0.5 delta q
  spec.delta_shift_q = 0.25;
  spec.delta_shift_p = -0.75;
  const auto fam = make_family(spec);
  ASSERT_TRUE(fam->two_parameter());

  const Point3 pt{2.0, 0.3, 0.1};
  const Vec2 dv = fam->delta_derivative(pt);  // (g_delta + shift_q, g_delta + shift_p)
  EXPECT_NEAR(dv.x, 0.5 * 2.0 + 0.25, 1e-12);
  EXPECT_NEAR(dv.y, 0.5 * 2.0 - 0.75, 1e-12);

  const auto sliced = fam->delta_slice(0.5);
  EXPECT_FALSE(sliced->two_parameter());
  const Vec2 direct = fam->eval(pt);  // plain eval sees the delta = 0 slice
  const auto base = shear_family({{1, 1, 0, 1.0}, {2, 0, 0, -1.0}});
  const Vec2 expect = base->eval(pt);
  EXPECT_DOUBLE_EQ(direct.x, expect.x);
  EXPECT_DOUBLE_EQ(direct.y, expect.y);

  const Vec2 at_half = sliced->eval(pt);
  const double g_extra = 0.5 * 0.5 * 2.0;  // 0.5 delta q at delta = 0.5, q = 2
  EXPECT_NEAR(at_half.x, expect.x + g_extra + 0.25 * 0.5, 1e-12);
  EXPECT_NEAR(at_half.y, expect.y + g_extra - 0.75 * 0.5, 1e-12);
}

TEST(Builtins, RejectsMalformedSpecs) {
  BuiltinFamilySpec bad;
  bad.kind = BuiltinFamilySpec::Kind::shear_composition;
  bad.g = {{1, 0, 1, 1.0}};  // delta power without the two-parameter kind
  EXPECT_THROW(make_family(bad), Error);

  BuiltinFamilySpec shift;
  shift.kind = BuiltinFamilySpec::Kind::rotated_conjugate;
  shift.g = {{1, 1, 0, 1.0}};
  shift.delta_shift_p = 1.0;
  EXPECT_THROW(make_family(shift), Error);
}

}  // namespace
}  // namespace crossbif
