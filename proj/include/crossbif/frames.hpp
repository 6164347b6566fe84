#pragma once

#include <memory>
#include <utility>

#include "crossbif/common.hpp"
#include "crossbif/family.hpp"
#include "crossbif/jet.hpp"

namespace crossbif {

struct EigenspaceResult {
  enum class Status { ok, no_unit_eigenvalue, identity_jacobian };
  Status status{Status::ok};
  Vec2 direction{1, 0};  // unit vector, q-component >= 0 (tie: p >= 0)
};

/// Eigendirection of J for eigenvalue 1, assuming det J = 1 so that the
/// eigenvalue shows up as tr J = 2. The identity Jacobian is reported
/// separately: it has a plane of eigenvectors, not a direction.
inline EigenspaceResult unit_eigenspace(const Mat2& J, const Tolerances& tol = {}) {
  if (std::fabs(J.det() - 1.0) > 1e-6)
    fail(errc::precondition_violated, "unit_eigenspace: matrix is not area preserving");
  EigenspaceResult r;
  if (std::fabs(J.trace() - 2.0) > tol.trace_unit) {
    r.status = EigenspaceResult::Status::no_unit_eigenvalue;
    return r;
  }
  if ((J - Mat2::identity()).norm_inf() <= tol.identity) {
    r.status = EigenspaceResult::Status::identity_jacobian;
    return r;
  }
  // rows of J - I are both orthogonal complements of the eigendirection;
  // take the one with the larger norm for stability
  const Vec2 row1{J.a - 1, J.b}, row2{J.c, J.d - 1};
  const Vec2 row = row1.norm() >= row2.norm() ? row1 : row2;
  Vec2 v{row.y, -row.x};
  const double n = v.norm();
  v = v * (1.0 / n);
  if (v.x < 0 || (v.x == 0 && v.y < 0)) v = v * -1.0;
  r.direction = v;
  return r;
}

/// Coordinate frame that brings a family into adapted form at a bifurcation
/// candidate: shift the base point to the origin, rotate the unit
/// eigendirection onto the q-axis, remove the eps-slope of the first
/// component with the translation p -> p - c*eps, and optionally shear
/// q -> q - c1*eps.
struct AdaptedFrame {
  Point3 base{};      // world-space anchor (fixed point, parameter origin)
  double theta{0};
  double c{0};
  double c1{0};

  Point3 to_world(const Point3& f) const {
    const double u = f.q + c1 * f.eps;
    const double v = f.p + c * f.eps;
    const Mat2 R = Mat2::rotation(theta);
    const Vec2 w = R * Vec2{u, v};
    return {base.q + w.x, base.p + w.y, base.eps + f.eps};
  }

  Point3 to_frame(const Point3& w) const {
    const double eta = w.eps - base.eps;
    const Mat2 R = Mat2::rotation(-theta);
    const Vec2 u = R * Vec2{w.q - base.q, w.p - base.p};
    return {u.x - c1 * eta, u.y - c * eta, eta};
  }

  /// Push a tangent direction of the extended space (dq, dp, deps) from world
  /// to frame coordinates.
  std::array<double, 3> direction_to_frame(const std::array<double, 3>& d) const {
    const Mat2 R = Mat2::rotation(-theta);
    const Vec2 u = R * Vec2{d[0], d[1]};
    return {u.x - c1 * d[2], u.y - c * d[2], d[2]};
  }

  std::array<double, 3> direction_to_world(const std::array<double, 3>& d) const {
    const Mat2 R = Mat2::rotation(theta);
    const Vec2 u = R * Vec2{d[0] + c1 * d[2], d[1] + c * d[2]};
    return {u.x, u.y, d[2]};
  }
};

/// The base family conjugated by an adapted frame. Evaluation maps frame
/// coordinates to world, applies the family, and pulls the image back into
/// the same parameter slice. Jets are the base family's jets pushed through
/// the affine changes, so polynomial bases keep exact derivatives.
class FramedFamily : public MapFamily {
 public:
  FramedFamily(std::shared_ptr<const MapFamily> base, const AdaptedFrame& frame)
      : base_(std::move(base)), frame_(frame) {}

  Vec2 eval(const Point3& pt) const override {
    const Point3 w = frame_.to_world(pt);
    const Vec2 img = base_->eval({w.q, w.p, w.eps});
    const Point3 back = frame_.to_frame({img.x, img.y, w.eps});
    return {back.q, back.p};
  }

  DerivativeJet jet(const Point3& pt, int order) const override {
    const Point3 w = frame_.to_world(pt);
    const DerivativeJet base_jet = base_->jet(w, order);
    const double co = std::cos(frame_.theta), si = std::sin(frame_.theta);
    const Mat2 N = Mat2::rotation(-frame_.theta);
    const std::array<std::array<double, 3>, 3> M = {{
        {co, -si, co * frame_.c1 - si * frame_.c},
        {si, co, si * frame_.c1 + co * frame_.c},
        {0, 0, 1},
    }};
    const std::array<std::array<double, 3>, 2> L = {{
        {0, 0, -frame_.c1},
        {0, 0, -frame_.c},
    }};
    const Vec2 base_off = N * Vec2{-frame_.base.q, -frame_.base.p};
    const Vec2 affine_value{base_off.x - frame_.c1 * pt.eps, base_off.y - frame_.c * pt.eps};
    return transform_jet(base_jet, N, M, L, affine_value, pt);
  }

  bool two_parameter() const override { return base_->two_parameter(); }

  Vec2 delta_derivative(const Point3& pt) const override {
    const Point3 w = frame_.to_world(pt);
    // the frame maps do not involve delta, so the vector just rotates
    return Mat2::rotation(-frame_.theta) * base_->delta_derivative(w);
  }

  std::shared_ptr<const MapFamily> delta_slice(double delta) const override {
    return std::make_shared<FramedFamily>(base_->delta_slice(delta), frame_);
  }

  const AdaptedFrame& frame() const { return frame_; }
  std::shared_ptr<const MapFamily> base() const { return base_; }

 private:
  std::shared_ptr<const MapFamily> base_;
  AdaptedFrame frame_;
};

namespace detail {

/// Shared frame construction for to_adapted and the classifier. Runs the
/// whole ladder and reports how far it got instead of throwing.
struct FrameBuild {
  enum class Status { ok, not_fixed, no_unit_eigenvalue, identity, rank2 };
  Status status{Status::ok};
  AdaptedFrame frame{};
  Vec2 eigen_direction{1, 0};
  double rotated_pe{0};  // P_eps after rotation (survives the translation)
};

inline FrameBuild build_frame(const MapFamily& f, const Point3& pt, const Tolerances& tol) {
  FrameBuild out;
  out.frame.base = pt;

  const Vec2 img = f.eval(pt);
  if (std::fabs(img.x - pt.q) > tol.fixed_point || std::fabs(img.y - pt.p) > tol.fixed_point) {
    out.status = FrameBuild::Status::not_fixed;
    return out;
  }

  const DerivativeJet j1 = f.jet(pt, 1);
  const Mat2 J = j1.jacobian();
  const EigenspaceResult eig = unit_eigenspace(J, tol);
  if (eig.status == EigenspaceResult::Status::no_unit_eigenvalue) {
    out.status = FrameBuild::Status::no_unit_eigenvalue;
    return out;
  }
  if (eig.status == EigenspaceResult::Status::identity_jacobian) {
    out.status = FrameBuild::Status::identity;
    return out;
  }
  out.eigen_direction = eig.direction;
  out.frame.theta = std::atan2(eig.direction.y, eig.direction.x);

  // eps-partials in the rotated chart decide the translation and the rank
  const Mat2 Rm = Mat2::rotation(-out.frame.theta);
  const Vec2 fe = Rm * Vec2{j1.Qe(), j1.Pe()};
  const Mat2 Jr = Rm * J * Mat2::rotation(out.frame.theta);
  const double qp = Jr.b;
  if (std::fabs(qp) < tol.qp_min) {
    // cannot happen for a non-identity unipotent Jacobian, but guard anyway
    out.status = FrameBuild::Status::identity;
    return out;
  }
  out.frame.c = -fe.x / qp;
  out.rotated_pe = fe.y;
  if (std::fabs(fe.y) > tol.rank2) out.status = FrameBuild::Status::rank2;
  return out;
}

}  // namespace detail

struct AdaptedResult {
  AdaptedFrame frame;
  std::shared_ptr<const MapFamily> family;  // the conjugated family
  DerivativeJet jet;                        // its jet at the frame origin
};

/// Build adapted coordinates at a fixed point whose Jacobian has the double
/// eigenvalue 1. Throws when a hypothesis fails; use the classifier when a
/// verdict is wanted instead of an exception.
inline AdaptedResult to_adapted(std::shared_ptr<const MapFamily> f, const Point3& fixed_pt,
                                const Tolerances& tol = {}, int jet_order = 3) {
  using detail::FrameBuild;
  const FrameBuild b = detail::build_frame(*f, fixed_pt, tol);
  switch (b.status) {
    case FrameBuild::Status::not_fixed:
      fail(errc::seed_not_fixed, "to_adapted: point is not fixed");
    case FrameBuild::Status::no_unit_eigenvalue:
      fail(errc::no_unit_eigenvalue, "to_adapted: trace is away from 2");
    case FrameBuild::Status::identity:
      fail(errc::identity_jacobian, "to_adapted: Jacobian is the identity");
    case FrameBuild::Status::rank2:
      fail(errc::rank2_detected,
           "to_adapted: P_eps persists after translation (rank-2 parameter dependence)");
    case FrameBuild::Status::ok:
      break;
  }
  AdaptedResult r;
  r.frame = b.frame;
  r.family = std::make_shared<FramedFamily>(std::move(f), b.frame);
  r.jet = r.family->jet({0, 0, 0}, jet_order);
  return r;
}

/// Replace the shear slot of a frame. Useful for normalizing branch tangents;
/// adaptedness is preserved for any c1.
inline AdaptedFrame apply_shear(AdaptedFrame frame, double c1) {
  frame.c1 = c1;
  return frame;
}

}  // namespace crossbif
