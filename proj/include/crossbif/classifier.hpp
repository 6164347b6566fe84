#pragma once

#include <memory>
#include <optional>
#include <string>

#include "crossbif/common.hpp"
#include "crossbif/frames.hpp"

namespace crossbif {

enum class BifurcationKind {
  not_fixed_point,
  no_unit_eigenvalue,
  identity_jacobian,
  rank2_saddle_node_candidate,
  rank1_definite,
  rank1_cross_transcritical,
  rank1_cross_fork_like,
  rank1_cross_degenerate,
  rank1_degenerate_hessian,
};

inline const char* kind_name(BifurcationKind k) {
  switch (k) {
    case BifurcationKind::not_fixed_point: return "NotFixedPoint";
    case BifurcationKind::no_unit_eigenvalue: return "NoUnitEigenvalue";
    case BifurcationKind::identity_jacobian: return "IdentityJacobian";
    case BifurcationKind::rank2_saddle_node_candidate: return "Rank2SaddleNodeCandidate";
    case BifurcationKind::rank1_definite: return "Rank1Definite";
    case BifurcationKind::rank1_cross_transcritical: return "Rank1CrossTranscritical";
    case BifurcationKind::rank1_cross_fork_like: return "Rank1CrossForkLike";
    case BifurcationKind::rank1_cross_degenerate: return "Rank1CrossDegenerate";
    case BifurcationKind::rank1_degenerate_hessian: return "Rank1DegenerateHessian";
  }
  return "Unknown";
}

inline bool is_cross_kind(BifurcationKind k) {
  return k == BifurcationKind::rank1_cross_transcritical ||
         k == BifurcationKind::rank1_cross_fork_like ||
         k == BifurcationKind::rank1_cross_degenerate;
}

struct BifurcationReport {
  BifurcationKind kind{BifurcationKind::not_fixed_point};
  AdaptedFrame frame{};
  Vec2 eigen_direction{kNaN, kNaN};

  // second-order data of the adapted second component with respect to (q,eps)
  Mat2 hessian{kNaN, kNaN, kNaN, kNaN};
  double hessian_det{kNaN};
  std::array<double, 2> hessian_eigenvalues{kNaN, kNaN};
  double p_qq{kNaN};
  double eps_b_second{kNaN};  // curvature of the fork branch, fork-like only

  // branch tangents in frame coordinates (dq, dp, deps); filled by the
  // continuation stage for cross kinds
  std::optional<std::array<double, 3>> tangent_a, tangent_b;

  Tolerances tols{};

  // carried for downstream numerics, not serialized
  std::shared_ptr<const MapFamily> adapted_family;
  DerivativeJet adapted_jet{};
};

/// Curvature of the parameter along the fork branch through an adapted
/// bifurcation point:
///   eps_B''(0) = (3 Q_qq P_qp - Q_p P_qqq) / (3 Q_p P_qe).
/// Requires an adapted third-order jet of a fork-like point: |P_qq| at or
/// below threshold and P_qe away from zero.
inline double fork_eps_second(const DerivativeJet& adapted_jet, const Tolerances& tol = {}) {
  if (adapted_jet.order < 3)
    fail(errc::precondition_violated, "fork_eps_second: needs a third-order jet");
  if (std::fabs(adapted_jet.Pqq()) > tol.p_qq)
    fail(errc::precondition_violated, "fork_eps_second: P_qq does not vanish");
  if (std::fabs(adapted_jet.Pqe()) <= tol.p_qq)
    fail(errc::precondition_violated, "fork_eps_second: P_qe vanishes");
  return (3 * adapted_jet.Qqq() * adapted_jet.Pqp() - adapted_jet.Qp() * adapted_jet.Pqqq()) /
         (3 * adapted_jet.Qp() * adapted_jet.Pqe());
}

/// Full decision ladder at a candidate point. Never throws for a reachable
/// verdict; every early exit is a report kind of its own.
inline BifurcationReport classify(std::shared_ptr<const MapFamily> family, const Point3& pt,
                                  const Tolerances& tol = {}) {
  using detail::FrameBuild;
  BifurcationReport rep;
  rep.tols = tol;

  const FrameBuild b = detail::build_frame(*family, pt, tol);
  rep.frame = b.frame;
  rep.eigen_direction = b.eigen_direction;
  switch (b.status) {
    case FrameBuild::Status::not_fixed:
      rep.kind = BifurcationKind::not_fixed_point;
      return rep;
    case FrameBuild::Status::no_unit_eigenvalue:
      rep.kind = BifurcationKind::no_unit_eigenvalue;
      return rep;
    case FrameBuild::Status::identity:
      rep.kind = BifurcationKind::identity_jacobian;
      return rep;
    case FrameBuild::Status::rank2:
      rep.kind = BifurcationKind::rank2_saddle_node_candidate;
      return rep;
    case FrameBuild::Status::ok:
      break;
  }

  rep.adapted_family = std::make_shared<FramedFamily>(family, b.frame);
  rep.adapted_jet = rep.adapted_family->jet({0, 0, 0}, 3);
  const DerivativeJet& j = rep.adapted_jet;

  rep.hessian = {j.Pqq(), j.Pqe(), j.Pqe(), j.Pee()};
  rep.hessian_det = rep.hessian.det();
  rep.hessian_eigenvalues = rep.hessian.sym_eigenvalues();
  rep.p_qq = j.Pqq();

  const double h_norm = rep.hessian.norm_inf();
  const double degenerate_tol = tol.hessian_scale * (1 + h_norm * h_norm);
  if (std::fabs(rep.hessian_det) <= degenerate_tol) {
    rep.kind = BifurcationKind::rank1_degenerate_hessian;
    return rep;
  }
  if (rep.hessian_det > 0) {
    rep.kind = BifurcationKind::rank1_definite;
    return rep;
  }

  // indefinite: a cross of two branches
  if (std::fabs(j.Pqq()) > tol.p_qq) {
    rep.kind = BifurcationKind::rank1_cross_transcritical;
    return rep;
  }
  const double fork_test = 3 * j.Qqq() * j.Pqp() - j.Qp() * j.Pqqq();
  if (std::fabs(fork_test) > tol.fork_criterion) {
    rep.kind = BifurcationKind::rank1_cross_fork_like;
    rep.eps_b_second = fork_eps_second(j, tol);
    return rep;
  }
  rep.kind = BifurcationKind::rank1_cross_degenerate;
  return rep;
}

/// Outcome of the two-parameter destruction test at a cross point.
struct MapDestructionCheck {
  Vec2 delta_vector_world{};    // d(Q,P)/d delta at the point
  Vec2 delta_vector_adapted{};  // the same vector in frame coordinates
  bool in_eigenspace{true};
  bool destroys{false};
  Mat2 scaled_hessian{};        // -(1/P_delta) * adapted Hessian
  bool hessian_nondegenerate{false};
  BifurcationReport base_report{};
};

/// Decide whether switching on the second parameter destroys the cross:
/// it does exactly when the delta-derivative of the map leaves the unit
/// eigenspace, which in adapted coordinates is the q-axis, so the test is on
/// the adapted P component of the vector.
inline MapDestructionCheck destruction_check_map(std::shared_ptr<const MapFamily> family,
                                                 const Point3& pt, const Tolerances& tol = {}) {
  if (!family->two_parameter())
    fail(errc::precondition_violated, "destruction_check_map: family has one parameter");
  MapDestructionCheck out;
  out.base_report = classify(family, pt, tol);
  if (!is_cross_kind(out.base_report.kind))
    fail(errc::not_cross, "destruction_check_map: base point does not classify as a cross");

  out.delta_vector_world = family->delta_derivative(pt);
  out.delta_vector_adapted =
      Mat2::rotation(-out.base_report.frame.theta) * out.delta_vector_world;
  const double p_delta = out.delta_vector_adapted.y;
  const double scale = 1 + out.delta_vector_world.norm();
  out.in_eigenspace = std::fabs(p_delta) <= tol.rank2 * scale;
  out.destroys = !out.in_eigenspace;
  if (out.destroys) {
    out.scaled_hessian = out.base_report.hessian * (-1.0 / p_delta);
    const double hn = out.scaled_hessian.norm_inf();
    out.hessian_nondegenerate =
        std::fabs(out.scaled_hessian.det()) > tol.hessian_scale * (1 + hn * hn);
  }
  return out;
}

}  // namespace crossbif
