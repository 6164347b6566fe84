#pragma once

#include <memory>
#include <string>

#include "crossbif/common.hpp"
#include "crossbif/jet.hpp"
#include "crossbif/poly.hpp"

namespace crossbif {

/// One-parameter family of planar maps (q,p) -> (Q,P) depending on eps.
/// Implementations must be area preserving in (q,p) for every fixed eps.
/// Families may carry an optional second parameter delta; the plain eval/jet
/// interface always sees the delta = 0 slice.
class MapFamily {
 public:
  virtual ~MapFamily() = default;

  virtual Vec2 eval(const Point3& pt) const = 0;

  /// Partial derivatives up to `order` (1..3). The default implementation
  /// uses central finite differences on eval().
  virtual DerivativeJet jet(const Point3& pt, int order) const {
    return fd_jet([this](const Point3& x) { return eval(x); }, pt, order);
  }

  virtual bool two_parameter() const { return false; }

  /// d(Q,P)/d delta at delta = 0.
  virtual Vec2 delta_derivative(const Point3&) const {
    fail(errc::precondition_violated, "family has no second parameter");
  }

  /// One-parameter family obtained by freezing delta.
  virtual std::shared_ptr<const MapFamily> delta_slice(double) const {
    fail(errc::precondition_violated, "family has no second parameter");
  }
};

/// Family given by explicit polynomials Q(q,p,eps,delta), P(q,p,eps,delta).
/// Jets are exact coefficient differentiation, no finite differences.
class PolynomialFamily : public MapFamily {
 public:
  PolynomialFamily(Poly q_comp, Poly p_comp)
      : q_(std::move(q_comp)), p_(std::move(p_comp)), delta_(0) {
    two_param_ = q_.depends_on(3) || p_.depends_on(3);
  }

  Vec2 eval(const Point3& pt) const override {
    const std::array<double, 4> v{pt.q, pt.p, pt.eps, delta_};
    return {q_.eval(v), p_.eval(v)};
  }

  DerivativeJet jet(const Point3& pt, int order) const override {
    DerivativeJet j;
    j.base = pt;
    j.order = order;
    const std::array<double, 4> v{pt.q, pt.p, pt.eps, delta_};
    for (int s = 0; s < kJetSlots; ++s) {
      const auto& mi = kJetIndex[s];
      if (mi[0] + mi[1] + mi[2] > order) break;
      Poly dq = q_, dp = p_;
      for (int var = 0; var < 3; ++var)
        for (int n = 0; n < mi[var]; ++n) {
          dq = dq.derivative(var);
          dp = dp.derivative(var);
        }
      j.c[0][s] = dq.eval(v);
      j.c[1][s] = dp.eval(v);
    }
    return j;
  }

  bool two_parameter() const override { return two_param_; }

  Vec2 delta_derivative(const Point3& pt) const override {
    if (!two_param_) return {0, 0};
    const std::array<double, 4> v{pt.q, pt.p, pt.eps, delta_};
    return {q_.derivative(3).eval(v), p_.derivative(3).eval(v)};
  }

  std::shared_ptr<const MapFamily> delta_slice(double delta) const override {
    return std::make_shared<PolynomialFamily>(q_.substituted(3, delta),
                                              p_.substituted(3, delta));
  }

  const Poly& q_poly() const { return q_; }
  const Poly& p_poly() const { return p_; }

 private:
  Poly q_, p_;
  double delta_;
  bool two_param_;
};

/// |det J - 1| at a point; zero (to tolerance) for a valid family.
inline double check_symplectic(const MapFamily& f, const Point3& pt) {
  return std::fabs(f.jet(pt, 1).jacobian().det() - 1.0);
}

/// Residual of the area-preservation identity for second partials,
///   Q_{qu} + P_{pu} = Q_p P_{qu},   u in {q, p, eps},
/// valid at points where Q_q = P_p = 1 and P_q = 0. Those hypotheses are
/// checked against pre_tol first.
inline double det_derivative_residual(const MapFamily& f, const Point3& pt, int axis,
                                      double pre_tol = 1e-8) {
  if (axis < 0 || axis > 2)
    fail(errc::precondition_violated, "det_derivative_residual: axis must be 0, 1 or 2");
  const DerivativeJet j = f.jet(pt, 2);
  if (std::fabs(j.Qq() - 1) > pre_tol || std::fabs(j.Pp() - 1) > pre_tol ||
      std::fabs(j.Pq()) > pre_tol)
    fail(errc::precondition_violated,
         "det_derivative_residual: Jacobian is not unipotent at this point");
  int e[3] = {1, 0, 0};
  e[axis] += 1;  // multi-index of d/dq d/du
  const double q_qu = j.d(0, e[0], e[1], e[2]);
  const double p_qu = j.d(1, e[0], e[1], e[2]);
  int g[3] = {0, 1, 0};
  g[axis] += 1;  // multi-index of d/dp d/du
  const double p_pu = j.d(1, g[0], g[1], g[2]);
  return std::fabs(q_qu + p_pu - j.Qp() * p_qu);
}

}  // namespace crossbif
