#pragma once

#include <memory>
#include <string>
#include <vector>

#include "crossbif/family.hpp"
#include "crossbif/frames.hpp"
#include "crossbif/poly.hpp"

namespace crossbif {

/// Monomial of the generating polynomial g: c * q^i * eps^j * delta^k.
struct GTerm {
  int i{0}, j{0}, k{0};
  double c{0};
};

/// Recipes for the stock families used by the CLI and the test corpus.
///
/// shear_composition:  Q = q + p + g(q,eps),  P = p + g(q,eps)
///   (a vertical shear by g followed by the standard horizontal shear; the
///    Jacobian [[1+g_q, 1], [g_q, 1]] has determinant 1 identically)
/// rotated_conjugate:  R(theta) o F o R(-theta) of the shear family
/// two_param_extension: shear family with delta powers allowed in g, plus an
///   optional rigid displacement (delta_shift_q, delta_shift_p) * delta of
///   the image, which stays area preserving and gives the family a
///   prescribed d(Q,P)/d delta.
struct BuiltinFamilySpec {
  enum class Kind { shear_composition, rotated_conjugate, two_param_extension };
  Kind kind{Kind::shear_composition};
  std::vector<GTerm> g;
  double theta{0};
  double delta_shift_q{0};
  double delta_shift_p{0};
};

inline Poly g_polynomial(const std::vector<GTerm>& terms) {
  Poly g;
  for (const GTerm& t : terms) g += Poly::monomial({t.i, 0, t.j, t.k}, t.c);
  return g;
}

inline std::shared_ptr<const MapFamily> make_family(const BuiltinFamilySpec& spec) {
  const Poly g = g_polynomial(spec.g);
  if (g.depends_on(1))
    fail(errc::config_invalid, "builtin family: g may depend on q, eps, delta only");
  if (spec.kind != BuiltinFamilySpec::Kind::two_param_extension &&
      (g.depends_on(3) || spec.delta_shift_q != 0 || spec.delta_shift_p != 0))
    fail(errc::config_invalid, "builtin family: delta terms need two_param_extension");

  Poly Q = Poly::variable(0) + Poly::variable(1) + g;
  Poly P = Poly::variable(1) + g;
  if (spec.kind == BuiltinFamilySpec::Kind::two_param_extension) {
    Q += Poly::monomial({0, 0, 0, 1}, spec.delta_shift_q);
    P += Poly::monomial({0, 0, 0, 1}, spec.delta_shift_p);
  }
  auto base = std::make_shared<PolynomialFamily>(std::move(Q), std::move(P));
  if (spec.kind == BuiltinFamilySpec::Kind::rotated_conjugate && spec.theta != 0) {
    // A FramedFamily with frame angle -theta expresses F in coordinates that
    // are rotated by -theta, which is the conjugate R(theta) o F o R(-theta):
    // its unit eigendirection is the shear family's (1,0) rotated by +theta.
    AdaptedFrame rot;
    rot.theta = -spec.theta;
    return std::make_shared<FramedFamily>(std::move(base), rot);
  }
  return base;
}

/// Shorthand used all over the tests: the shear family for a list of
/// (i, j, coefficient) powers of q^i eps^j.
inline std::shared_ptr<const MapFamily> shear_family(const std::vector<GTerm>& g,
                                                     double theta = 0) {
  BuiltinFamilySpec spec;
  spec.kind = theta == 0 ? BuiltinFamilySpec::Kind::shear_composition
                         : BuiltinFamilySpec::Kind::rotated_conjugate;
  spec.g = g;
  spec.theta = theta;
  return make_family(spec);
}

}  // namespace crossbif
