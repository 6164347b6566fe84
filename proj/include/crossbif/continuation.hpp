#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "crossbif/classifier.hpp"
#include "crossbif/common.hpp"
#include "crossbif/family.hpp"
#include "crossbif/frames.hpp"
#include "crossbif/numerics.hpp"

namespace crossbif {

/// Newton iteration for a fixed point of the eps-slice. Residual is checked
/// before factoring, so an exact predictor passes through points where the
/// linearization J - I is singular (it is singular exactly at bifurcations).
inline Vec2 newton_fixed_point(const MapFamily& f, double eps, Vec2 guess, double tol = 1e-12,
                               int max_iter = 50) {
  for (int it = 0; it < max_iter; ++it) {
    const Point3 pt{guess.x, guess.y, eps};
    const Vec2 img = f.eval(pt);
    const Vec2 res{img.x - guess.x, img.y - guess.y};
    if (res.norm_inf() <= tol) return guess;
    const Mat2 A = f.jet(pt, 1).jacobian() - Mat2::identity();
    const double scale = std::max(1.0, A.norm_inf());
    if (std::fabs(A.det()) < 1e-14 * scale * scale)
      fail(errc::singular_jacobian, "newton_fixed_point: J - I is numerically singular");
    const Vec2 step = A.inverse() * res;
    guess = guess - step;
    if (!std::isfinite(guess.x) || !std::isfinite(guess.y))
      fail(errc::numerical_breakdown, "newton_fixed_point: iterate left the chart");
  }
  fail(errc::no_convergence, "newton_fixed_point: no convergence");
}

enum class BranchParam { by_eps, by_q };

struct BranchBoundary {
  bool truncated{false};
  double at{0};
  std::string reason;
};

/// A continued family of fixed points. Samples are world coordinates ordered
/// by the parametrization variable. Derivative data at the reference point
/// (slopes, curvatures, trace slope) is filled by split_cross_branches.
struct Branch {
  BranchParam parametrization{BranchParam::by_eps};
  std::vector<Point3> samples;
  std::vector<double> trace;
  std::optional<AdaptedFrame> frame;

  double q_slope{kNaN};        // frame d q / d eps at the reference point
  double p_slope{kNaN};        // frame d p / d eps
  double trace_slope{kNaN};    // d Tr / d eps
  double eps_second{kNaN};     // by_q: d^2 eps / d q^2 at q = 0
  double p_second{kNaN};       // by_q: d^2 p / d q^2 at q = 0
  std::optional<std::array<double, 3>> tangent;  // frame (dq, dp, deps)

  BranchBoundary lower, upper;
  bool degenerate_flat_trace{false};
};

namespace detail {

inline Vec2 branch_tangent(const MapFamily& f, const Point3& pt) {
  const DerivativeJet j = f.jet(pt, 1);
  const Mat2 A = j.jacobian() - Mat2::identity();
  const double scale = std::max(1.0, A.norm_inf());
  if (std::fabs(A.det()) < 1e-10 * scale * scale) return {0, 0};
  return A.inverse() * Vec2{-j.Qe(), -j.Pe()};
}

}  // namespace detail

/// Fixed-step predictor-corrector continuation in eps over [eps_lo, eps_hi].
/// The seed must already be a fixed point. Failed corrector steps halve the
/// step; persistent failure truncates the branch and records the boundary.
inline Branch continue_branch(const std::shared_ptr<const MapFamily>& family, const Point3& seed,
                              double eps_lo, double eps_hi, double step) {
  if (!(eps_lo <= seed.eps && seed.eps <= eps_hi) || step <= 0)
    fail(errc::precondition_violated, "continue_branch: seed outside range or bad step");
  const MapFamily& f = *family;

  const Vec2 seed_img = f.eval(seed);
  if (std::fabs(seed_img.x - seed.q) > 1e-6 || std::fabs(seed_img.y - seed.p) > 1e-6)
    fail(errc::seed_not_fixed, "continue_branch: seed is not a fixed point");
  Vec2 at{seed.q, seed.p};
  try {
    at = newton_fixed_point(f, seed.eps, at);
  } catch (const Error&) {
    // seed already satisfies the loose residual gate; keep it as is
  }

  const auto march = [&](double dir, double bound, BranchBoundary& edge) {
    std::vector<Point3> out;
    Vec2 cur = at;
    double eps = seed.eps;
    double h = step;
    edge.at = eps;
    while (dir * (bound - eps) > 1e-15) {
      const double target = dir > 0 ? std::min(eps + h, bound) : std::max(eps - h, bound);
      const Vec2 tan = detail::branch_tangent(f, {cur.x, cur.y, eps});
      const Vec2 pred = cur + tan * (target - eps);
      bool ok = true;
      Vec2 next{};
      try {
        next = newton_fixed_point(f, target, pred);
      } catch (const Error&) {
        ok = false;
      }
      if (!ok) {
        h *= 0.5;
        if (h < step / 1024.0) {
          edge.truncated = true;
          edge.at = eps;
          edge.reason = "corrector failed below minimum step";
          break;
        }
        continue;
      }
      cur = next;
      eps = target;
      edge.at = eps;
      out.push_back({cur.x, cur.y, eps});
      h = std::min(step, h * 2);
    }
    return out;
  };

  Branch br;
  br.parametrization = BranchParam::by_eps;
  const std::vector<Point3> up = march(+1, eps_hi, br.upper);
  const std::vector<Point3> down = march(-1, eps_lo, br.lower);
  br.samples.assign(down.rbegin(), down.rend());
  br.samples.push_back({at.x, at.y, seed.eps});
  br.samples.insert(br.samples.end(), up.begin(), up.end());
  return br;
}

inline void trace_on_branch(const MapFamily& f, Branch& br) {
  br.trace.resize(br.samples.size());
  for (size_t i = 0; i < br.samples.size(); ++i)
    br.trace[i] = f.jet(br.samples[i], 1).jacobian().trace();
}

/// Fixed point on a by_eps branch at an off-sample parameter value, seeded by
/// interpolation of the neighbouring samples.
inline Vec2 branch_point_at(const MapFamily& f, const Branch& br, double eps,
                            double tol = 1e-12) {
  if (br.parametrization != BranchParam::by_eps || br.samples.empty())
    fail(errc::precondition_violated, "branch_point_at: needs a sampled by_eps branch");
  const auto it = std::lower_bound(
      br.samples.begin(), br.samples.end(), eps,
      [](const Point3& s, double e) { return s.eps < e; });
  Vec2 guess;
  if (it == br.samples.begin()) {
    guess = {it->q, it->p};
  } else if (it == br.samples.end()) {
    guess = {(it - 1)->q, (it - 1)->p};
  } else {
    const Point3 &a = *(it - 1), &b = *it;
    const double w = (eps - a.eps) / (b.eps - a.eps);
    guess = {a.q + w * (b.q - a.q), a.p + w * (b.p - a.p)};
  }
  return newton_fixed_point(f, eps, guess, tol);
}

inline double branch_trace_at(const MapFamily& f, const Branch& br, double eps) {
  const Vec2 pt = branch_point_at(f, br, eps);
  return f.jet({pt.x, pt.y, eps}, 1).jacobian().trace();
}

struct CrossingReport {
  double eps_star{kNaN};
  double trace_slope{kNaN};
  Vec2 point{};
  BifurcationReport classification{};
};

/// Locate isolated trace = 2 crossings along a by_eps branch by sign change
/// plus bracketed refinement; each crossing is classified in place. A branch
/// whose whole trace sits at 2 within tolerance is flagged degenerate-flat
/// and yields no isolated crossings.
inline std::vector<CrossingReport> find_trace2_crossings(
    const std::shared_ptr<const MapFamily>& family, Branch& br, const Tolerances& tol = {}) {
  if (br.trace.size() != br.samples.size() || br.samples.size() < 2)
    fail(errc::precondition_violated, "find_trace2_crossings: branch traces not filled");
  const MapFamily& f = *family;

  double max_dev = 0;
  for (double t : br.trace) max_dev = std::max(max_dev, std::fabs(t - 2.0));
  if (max_dev <= tol.trace_unit) {
    br.degenerate_flat_trace = true;
    return {};
  }

  std::vector<CrossingReport> out;
  for (size_t i = 0; i + 1 < br.samples.size(); ++i) {
    const double ta = br.trace[i] - 2.0, tb = br.trace[i + 1] - 2.0;
    if (ta == 0 && i > 0) continue;  // handled by the previous bracket
    if (ta * tb > 0) continue;
    const double ea = br.samples[i].eps, eb = br.samples[i + 1].eps;
    const double eps_star =
        find_root([&](double e) { return branch_trace_at(f, br, e) - 2.0; }, ea, eb, 1e-13);

    CrossingReport rep;
    rep.eps_star = eps_star;

    // local samples around the crossing; the crossing point itself comes from
    // a fit because Newton's linearization degenerates exactly there
    const double h = 3e-4 * std::max(1.0, std::fabs(eps_star));
    std::vector<double> es, qs, ps, trs;
    for (int m : {-2, -1, 1, 2}) {
      const double e = eps_star + m * h;
      const Vec2 pt = branch_point_at(f, br, e);
      es.push_back(e);
      qs.push_back(pt.x);
      ps.push_back(pt.y);
      trs.push_back(f.jet({pt.x, pt.y, e}, 1).jacobian().trace());
    }
    rep.point = {fit_quadratic(es, qs, eps_star).c0, fit_quadratic(es, ps, eps_star).c0};
    {
      std::vector<double> es5 = es, trs5 = trs;
      es5.push_back(eps_star);
      trs5.push_back(
          f.jet({rep.point.x, rep.point.y, eps_star}, 1).jacobian().trace());
      rep.trace_slope = fit_quadratic(es5, trs5, eps_star).c1;
    }
    rep.classification =
        classify(family, {rep.point.x, rep.point.y, eps_star}, tol);
    out.push_back(std::move(rep));
  }
  return out;
}

namespace detail {

/// 2-D Newton for a point of the fork branch at fixed adapted q: unknowns are
/// (p, eps) with equations (Q - q, P - p) = 0.
inline Vec2 newton_on_fork(const MapFamily& g, double q, Vec2 guess_p_eps, double tol = 1e-12,
                           int max_iter = 60) {
  for (int it = 0; it < max_iter; ++it) {
    const Point3 pt{q, guess_p_eps.x, guess_p_eps.y};
    const DerivativeJet j = g.jet(pt, 1);
    const Vec2 res{j.Q() - q, j.P() - pt.p};
    if (res.norm_inf() <= tol) return guess_p_eps;
    const Mat2 A{j.Qp(), j.Qe(), j.Pp() - 1.0, j.Pe()};
    const double scale = std::max(1.0, A.norm_inf());
    if (std::fabs(A.det()) < 1e-14 * scale * scale)
      fail(errc::singular_jacobian, "newton_on_fork: degenerate linearization");
    guess_p_eps = guess_p_eps - A.inverse() * res;
    if (!std::isfinite(guess_p_eps.x) || !std::isfinite(guess_p_eps.y))
      fail(errc::numerical_breakdown, "newton_on_fork: iterate left the chart");
  }
  fail(errc::no_convergence, "newton_on_fork: no convergence");
}

/// March a by_eps branch of the adapted family outward from the origin along
/// a tangent line (slope = frame dq/deps), one side at a time.
inline void march_adapted_by_eps(const MapFamily& g, double slope, double step, int count,
                                 double dir, std::vector<Point3>& out) {
  Vec2 prev{0, 0};
  double prev_eps = 0;
  for (int k = 1; k <= count; ++k) {
    const double eps = dir * k * step;
    const Vec2 tan = branch_tangent(g, {prev.x, prev.y, prev_eps});
    Vec2 seed = (k == 1) ? Vec2{slope * eps, 0} : prev + tan * (eps - prev_eps);
    Vec2 pt{};
    try {
      pt = newton_fixed_point(g, eps, seed);
    } catch (const Error&) {
      break;  // branch left the chart; keep what we have
    }
    out.push_back({pt.x, pt.y, eps});
    prev = pt;
    prev_eps = eps;
  }
}

struct SlopeFits {
  double q_slope, p_slope, trace_slope;
};

/// Five-point least-squares fits of q, p and the trace against eps on an
/// adapted by_eps branch through the origin. The fit window is much finer
/// than the continuation step so cubic terms stay below 1e-7.
inline SlopeFits fit_adapted_slopes(const MapFamily& g, double slope_guess, double h = 3e-4) {
  std::vector<double> es{0.0}, qs{0.0}, ps{0.0}, trs;
  trs.push_back(g.jet({0, 0, 0}, 1).jacobian().trace());
  for (int m : {-2, -1, 1, 2}) {
    const double eps = m * h;
    const Vec2 pt = newton_fixed_point(g, eps, {slope_guess * eps, 0});
    es.push_back(eps);
    qs.push_back(pt.x);
    ps.push_back(pt.y);
    trs.push_back(g.jet({pt.x, pt.y, eps}, 1).jacobian().trace());
  }
  return {fit_quadratic(es, qs, 0).c1, fit_quadratic(es, ps, 0).c1,
          fit_quadratic(es, trs, 0).c1};
}

}  // namespace detail

struct BranchPair {
  Branch a;  // the branch transversal to the q-axis of the frame (by_eps)
  Branch b;  // the second branch; by_eps if transcritical, by_q if fork-like
};

/// Split the two fixed-point lines through a cross bifurcation. Tangent
/// directions come from the null lines of the adapted Hessian; each branch is
/// then continued in frame coordinates and mapped back to world samples.
inline BranchPair split_cross_branches(const std::shared_ptr<const MapFamily>& family,
                                       const Point3& cross_pt, const Tolerances& tol = {},
                                       double step = 0.01, double range = 0.25) {
  const BifurcationReport rep = classify(family, cross_pt, tol);
  if (rep.kind != BifurcationKind::rank1_cross_transcritical &&
      rep.kind != BifurcationKind::rank1_cross_fork_like)
    fail(errc::not_cross, std::string("split_cross_branches: point classifies as ") +
                              kind_name(rep.kind));
  const MapFamily& g = *rep.adapted_family;
  const DerivativeJet& j = rep.adapted_jet;
  const int count = std::max(2, static_cast<int>(std::floor(range / step + 0.5)));

  const auto build_by_eps = [&](double slope) {
    Branch br;
    br.parametrization = BranchParam::by_eps;
    br.frame = rep.frame;
    std::vector<Point3> up, down;
    detail::march_adapted_by_eps(g, slope, step, count, +1, up);
    detail::march_adapted_by_eps(g, slope, step, count, -1, down);
    std::vector<Point3> adapted(down.rbegin(), down.rend());
    adapted.push_back({0, 0, 0});
    adapted.insert(adapted.end(), up.begin(), up.end());
    br.trace.reserve(adapted.size());
    for (const Point3& s : adapted) {
      br.trace.push_back(g.jet(s, 1).jacobian().trace());
      br.samples.push_back(rep.frame.to_world(s));
    }
    const detail::SlopeFits fits = detail::fit_adapted_slopes(g, slope);
    br.q_slope = fits.q_slope;
    br.p_slope = fits.p_slope;
    br.trace_slope = fits.trace_slope;
    br.tangent = {{fits.q_slope, fits.p_slope, 1.0}};
    br.lower = {false, adapted.empty() ? 0.0 : adapted.front().eps, ""};
    br.upper = {false, adapted.empty() ? 0.0 : adapted.back().eps, ""};
    return br;
  };

  const auto build_fork_b = [&]() {
    Branch br;
    br.parametrization = BranchParam::by_q;
    br.frame = rep.frame;
    const double eps2 = rep.eps_b_second;
    std::vector<Point3> adapted;
    for (double dir : {-1.0, 1.0}) {
      std::vector<Point3> side;
      Vec2 prev{0, 0.5 * eps2 * step * step};
      for (int k = 1; k <= count; ++k) {
        const double q = dir * k * step;
        Vec2 seed = (k <= 2) ? Vec2{0, 0.5 * eps2 * q * q} : prev;
        Vec2 pe{};
        try {
          pe = detail::newton_on_fork(g, q, seed);
        } catch (const Error&) {
          break;
        }
        side.push_back({q, pe.x, pe.y});
        prev = pe;
      }
      if (dir < 0)
        adapted.assign(side.rbegin(), side.rend());
      else {
        adapted.push_back({0, 0, 0});
        adapted.insert(adapted.end(), side.begin(), side.end());
      }
    }
    br.trace.reserve(adapted.size());
    for (const Point3& s : adapted) {
      br.trace.push_back(g.jet(s, 1).jacobian().trace());
      br.samples.push_back(rep.frame.to_world(s));
    }

    // curvatures from symmetric differences with one Richardson step
    const auto curv = [&](double h) -> Vec2 {
      const Vec2 plus = detail::newton_on_fork(g, h, {0, 0.5 * eps2 * h * h});
      const Vec2 minus = detail::newton_on_fork(g, -h, {0, 0.5 * eps2 * h * h});
      return {(plus.x + minus.x) / (h * h), (plus.y + minus.y) / (h * h)};
    };
    const double h = std::min(0.05, 5 * step);
    const Vec2 s1 = curv(h), s2 = curv(0.5 * h);
    br.p_second = (4 * s2.x - s1.x) / 3.0;
    br.eps_second = (4 * s2.y - s1.y) / 3.0;
    const auto slope = [&](double h2) -> Vec2 {
      const Vec2 plus = detail::newton_on_fork(g, h2, {0, 0.5 * eps2 * h2 * h2});
      const Vec2 minus = detail::newton_on_fork(g, -h2, {0, 0.5 * eps2 * h2 * h2});
      return {(plus.x - minus.x) / (2 * h2), (plus.y - minus.y) / (2 * h2)};
    };
    const Vec2 t = slope(h);
    br.tangent = {{1.0, t.x, t.y}};
    br.lower = {false, adapted.empty() ? 0.0 : adapted.front().q, ""};
    br.upper = {false, adapted.empty() ? 0.0 : adapted.back().q, ""};
    return br;
  };

  BranchPair pair;
  if (rep.kind == BifurcationKind::rank1_cross_transcritical) {
    // null directions (q, eps) of the Hessian: P_qq r^2 + 2 P_qe r + P_ee = 0
    const double a = j.Pqq(), b2 = j.Pqe(), c0 = j.Pee();
    const double disc = b2 * b2 - a * c0;
    if (disc <= 0) fail(errc::numerical_breakdown, "split: indefinite Hessian without roots");
    const double sq = std::sqrt(disc);
    // stable quadratic roots
    const double qbig = -(b2 + (b2 >= 0 ? sq : -sq));
    const double r1 = qbig / a;
    const double r2 = c0 / qbig;
    pair.a = build_by_eps(std::fabs(r1) <= std::fabs(r2) ? r1 : r2);
    pair.b = build_by_eps(std::fabs(r1) <= std::fabs(r2) ? r2 : r1);
  } else {
    const double r_a = -j.Pee() / (2 * j.Pqe());
    pair.a = build_by_eps(r_a);
    pair.b = build_fork_b();
  }
  return pair;
}

struct TraceSlopeCheck {
  double slope_a{kNaN};
  double slope_b{kNaN};
  double residual{kNaN};
};

/// Transcritical trace balance: the two branch trace slopes at the crossing
/// cancel, Tr_A'(0) + Tr_B'(0) = 0.
inline TraceSlopeCheck trace_slope_sum(const Branch& a, const Branch& b) {
  if (std::isnan(a.trace_slope) || std::isnan(b.trace_slope))
    fail(errc::precondition_violated, "trace_slope_sum: branches carry no slope fits");
  return {a.trace_slope, b.trace_slope, std::fabs(a.trace_slope + b.trace_slope)};
}

struct ForkTraceCheck {
  double slope_a{kNaN};
  double slope_b_limit{kNaN};  // lim (Tr_B - 2) / eps_B along the fork branch
  double residual{kNaN};
};

/// Fork-like trace balance: with eps_B'(0) = 0 the second branch slope is the
/// limit of (Tr_B(q) - 2) / eps_B(q) for q -> 0, and Tr_A'(0) + Tr_B'(0)/2
/// vanishes. The limit is taken by Richardson extrapolation over a halving
/// q sequence; samples with |eps_B| below 1e-12 are discarded.
inline ForkTraceCheck fork_trace_relation(const std::shared_ptr<const MapFamily>& family,
                                          const Branch& a, const Branch& b) {
  if (std::isnan(a.trace_slope) || !b.frame || b.parametrization != BranchParam::by_q)
    fail(errc::precondition_violated, "fork_trace_relation: needs split branches");
  const FramedFamily g(family, *b.frame);
  const double eps2 = std::isnan(b.eps_second) ? 0.0 : b.eps_second;

  const auto one_side = [&](double dir) {
    std::vector<double> hs, ratios;
    double q = 0.08;
    for (int k = 0; k < 9; ++k, q *= 0.5) {
      const double qq = dir * q;
      Vec2 pe{};
      try {
        pe = detail::newton_on_fork(g, qq, {0, 0.5 * eps2 * qq * qq});
      } catch (const Error&) {
        continue;
      }
      if (std::fabs(pe.y) < 1e-12) continue;
      const double tr = g.jet({qq, pe.x, pe.y}, 1).jacobian().trace();
      hs.push_back(q);
      ratios.push_back((tr - 2.0) / pe.y);
    }
    if (hs.size() < 3)
      fail(errc::numerical_breakdown, "fork_trace_relation: too few usable samples");
    return extrapolate_to_zero(hs, ratios);
  };

  ForkTraceCheck out;
  out.slope_a = a.trace_slope;
  out.slope_b_limit = 0.5 * (one_side(+1) + one_side(-1));
  out.residual = std::fabs(out.slope_a + 0.5 * out.slope_b_limit);
  return out;
}

}  // namespace crossbif
