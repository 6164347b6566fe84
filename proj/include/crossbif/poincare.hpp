#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "crossbif/classifier.hpp"
#include "crossbif/common.hpp"
#include "crossbif/continuation.hpp"
#include "crossbif/family.hpp"
#include "crossbif/numerics.hpp"
#include "crossbif/ode.hpp"
#include "crossbif/parallel.hpp"
#include "crossbif/poly.hpp"

namespace crossbif {

// Mechanical Hamiltonians H = p_x^2/2 + p_y^2/2 + V(x,y) whose y-axis carries
// straight-line librations. Variable slots in the polynomials: 0=x, 1=y,
// 2=p_x, 3=p_y.

struct PotentialTerm {
  int i{0}, j{0};  // x^i y^j
  double c{0};
};

// Shipped demo constants: a hardening quartic well in y, a transverse mode of
// frequency omega, and an x^2 y coupling that modulates the transverse
// frequency along the libration. Even in x, so the transverse plane stays
// invariant for every energy.
inline constexpr double kDemoLambda = 0.5;
inline constexpr double kDemoOmega = 1.1;
inline constexpr double kDemoAlpha = 0.3;

class HamiltonianSystem {
 public:
  static HamiltonianSystem from_terms(const std::vector<PotentialTerm>& terms) {
    Poly v;
    for (const PotentialTerm& t : terms) {
      if (t.c == 0) continue;
      if (t.i == 1)
        fail(errc::config_invalid,
             "potential has an x-linear monomial; the y-axis would not stay invariant");
      v += Poly::monomial({t.i, t.j, 0, 0}, t.c);
    }
    return HamiltonianSystem(std::move(v));
  }

  static HamiltonianSystem named(const std::string& name) {
    if (name == "harmonic") return from_terms({{2, 0, 0.5}, {0, 2, 0.5}});
    if (name == "demo")
      return from_terms({{0, 2, 0.5},
                         {0, 4, kDemoLambda / 4},
                         {2, 0, kDemoOmega * kDemoOmega / 2},
                         {2, 1, kDemoAlpha / 2}});
    fail(errc::config_invalid, "unknown potential name: " + name);
  }

  explicit HamiltonianSystem(Poly v)
      : v_(std::move(v)),
        vx_(v_.derivative(0)),
        vy_(v_.derivative(1)),
        vxx_(vx_.derivative(0)) {
    for (const Poly::Term& t : v_.terms())
      if (t.e[2] || t.e[3])
        fail(errc::config_invalid, "potential must depend on (x, y) only");
    for (const Poly::Term& t : vx_.terms())
      if (t.e[0] == 0)
        fail(errc::config_invalid,
             "potential has an x-linear monomial; the y-axis would not stay invariant");
  }

  double potential(double x, double y) const { return v_.eval({x, y, 0, 0}); }
  /// Potential restricted to the invariant plane.
  double v0(double y) const { return v_.eval({0, y, 0, 0}); }
  double v0_prime(double y) const { return vy_.eval({0, y, 0, 0}); }
  /// Transverse curvature V_xx(0, y), the coefficient of the Hill equation.
  double f_coeff(double y) const { return vxx_.eval({0, y, 0, 0}); }

  const Poly& v() const { return v_; }
  const Poly& vx() const { return vx_; }
  const Poly& vy() const { return vy_; }

  double energy(const OdeState& s) const {
    return 0.5 * (s[2] * s[2] + s[3] * s[3]) + potential(s[0], s[1]);
  }

  void rhs4(const double* s, double* ds) const {
    ds[0] = s[2];
    ds[1] = s[3];
    ds[2] = -vx_.eval({s[0], s[1], 0, 0});
    ds[3] = -vy_.eval({s[0], s[1], 0, 0});
  }

 private:
  Poly v_, vx_, vy_, vxx_;
};

/// Dynamics restricted to the invariant plane x = p_x = 0: a 1-D mechanical
/// system with potential u(y), plus the linearization matrix governing the
/// transverse (x, p_x) variations along plane orbits.
struct ReducedSystem {
  Poly u;   // plane potential, slot 1 only
  Poly up;  // du/dy
  std::function<Mat2(double, double)> linearization;

  double U(double y) const { return u.eval({0, y, 0, 0}); }
  double Up(double y) const { return up.eval({0, y, 0, 0}); }
  Mat2 A(double y, double py) const { return linearization(y, py); }
};

inline ReducedSystem reduced_system(const HamiltonianSystem& h) {
  ReducedSystem r;
  r.u = h.v().substituted(0, 0.0);
  r.up = r.u.derivative(1);
  Poly vxx = h.vx().derivative(0);
  r.linearization = [vxx](double y, double) {
    return Mat2{0, 1, -vxx.eval({0, y, 0, 0}), 0};
  };
  return r;
}

struct SectionSpec {
  double y0{kNaN};  // NaN selects the plane equilibrium automatically
  int crossing_direction{+1};
};

/// Equilibrium of the plane system: the first minimum of u found in the
/// window, located as an upward sign change of u' and polished by bisection.
inline double default_section_y(const ReducedSystem& r, double lo = -10, double hi = 10) {
  const int n = 800;
  double prev_y = lo, prev_s = r.Up(lo);
  for (int i = 1; i <= n; ++i) {
    const double y = lo + (hi - lo) * i / n;
    const double s = r.Up(y);
    if (prev_s < 0 && s >= 0)
      return find_root([&](double t) { return r.Up(t); }, prev_y, y);
    prev_y = y;
    prev_s = s;
  }
  fail(errc::no_well, "plane potential has no minimum in the search window");
}

struct LibratingOrbit {
  double energy{0};
  double T{0};                  // period from the section-return event
  double period_quadrature{0};  // independent turning-point integral
  double y1{0}, y2{0};          // turning points, y1 < y(0) < y2
  double y_start{0};            // section plane
  double py_start{0};           // positive by construction
  DenseOutput plane;            // dim 2: (y, p_y) over [0, T]

  double y(double t) const {
    double s[2];
    plane.eval(t, s);
    return s[0];
  }
  double py(double t) const {
    double s[2];
    plane.eval(t, s);
    return s[1];
  }
};

namespace detail {

// Descending coefficient list of E - u(y) for a slot-1 polynomial.
inline std::vector<double> shifted_plane_coeffs(const Poly& u, double energy) {
  int deg = 0;
  for (const Poly::Term& t : u.terms()) deg = std::max(deg, t.e[1]);
  std::vector<double> c(deg + 1, 0.0);
  for (const Poly::Term& t : u.terms()) c[deg - t.e[1]] -= t.c;
  c[deg] += energy;
  return c;
}

// Synthetic division by (y - root); the remainder is dropped (callers divide
// by numerically located roots, so it is at rounding level).
inline std::vector<double> deflate(const std::vector<double>& c, double root) {
  if (c.size() < 2) fail(errc::numerical_breakdown, "deflate: constant polynomial");
  std::vector<double> q(c.size() - 1);
  q[0] = c[0];
  for (size_t i = 1; i < q.size(); ++i) q[i] = c[i] + root * q[i - 1];
  return q;
}

inline double horner(const std::vector<double>& c, double y) {
  double acc = 0;
  for (double ck : c) acc = acc * y + ck;
  return acc;
}

inline double bracket_turning_point(const ReducedSystem& r, double energy, double y0, int side,
                                    double radius) {
  const double step = 1e-3 * (1 + std::fabs(y0));
  double prev = y0;
  for (double d = step; d <= radius; d = 1.5 * d + step) {
    const double cur = y0 + side * d;
    if (energy - r.U(cur) <= 0)
      return find_root([&](double y) { return energy - r.U(y); }, prev, cur);
    prev = cur;
  }
  fail(errc::turning_point_not_found, "no turning point within the search radius");
}

}  // namespace detail

/// Period by quadrature between the turning points. Writing E - u(y) =
/// (y - y1)(y2 - y) R(y) via synthetic division and substituting
/// y = ym + a sin(phi) cancels the inverse square-root endpoint singularity
/// exactly: T = integral of 2 / sqrt(2 R) d(phi). This avoids the
/// catastrophic cancellation a direct 1/sqrt(E - u) quadrature would hit.
inline double quadrature_period(const ReducedSystem& r, double energy, double y1, double y2) {
  std::vector<double> c = detail::shifted_plane_coeffs(r.u, energy);
  const std::vector<double> q2 = detail::deflate(detail::deflate(c, y1), y2);
  const double ym = 0.5 * (y1 + y2), a = 0.5 * (y2 - y1);
  const auto integrand = [&](double phi) {
    const double rest = -detail::horner(q2, ym + a * std::sin(phi));
    if (rest <= 0)
      fail(errc::numerical_breakdown, "period quadrature: factored potential not positive");
    return 2.0 / std::sqrt(2.0 * rest);
  };
  const double half_pi = std::asin(1.0);
  return integrate_adaptive(integrand, -half_pi, half_pi, 1e-12);
}

/// Closed plane orbit through (y0, +sqrt(2(E - u(y0)))): turning points by
/// bracketing and bisection, period by the section-return event, and an
/// independent quadrature period stored alongside for consistency checks.
inline LibratingOrbit find_libration(const ReducedSystem& r, double y0, double energy,
                                     double search_radius = 50) {
  const double kinetic = energy - r.U(y0);
  if (kinetic <= 0) fail(errc::no_well, "energy does not reach the section plane");

  LibratingOrbit orbit;
  orbit.energy = energy;
  orbit.y_start = y0;
  orbit.py_start = std::sqrt(2 * kinetic);
  orbit.y1 = detail::bracket_turning_point(r, energy, y0, -1, search_radius);
  orbit.y2 = detail::bracket_turning_point(r, energy, y0, +1, search_radius);
  orbit.period_quadrature = quadrature_period(r, energy, orbit.y1, orbit.y2);

  const OdeRhs rhs = [&r](double, const double* s, double* ds) {
    ds[0] = s[1];
    ds[1] = -r.Up(s[0]);
  };
  OdeState s{};
  s[0] = y0;
  s[1] = orbit.py_start;
  EventSpec ev;
  ev.value = [y0](double, const double* st) { return st[0] - y0; };
  const EventHit hit =
      integrate_until_event(rhs, 2, s, 0.0, 3 * orbit.period_quadrature, ev, {}, &orbit.plane);
  if (!hit.found)
    fail(errc::numerical_breakdown, "libration did not close within three quadrature periods");
  orbit.T = hit.t;

  if (std::fabs(s[0] - y0) > 1e-8 * (1 + std::fabs(y0)) ||
      std::fabs(s[1] - orbit.py_start) > 1e-8 * (1 + orbit.py_start))
    fail(errc::numerical_breakdown, "libration endpoint does not match its start");
  return orbit;
}

/// Fundamental transverse solutions along a plane orbit: columns
/// (phi, phi') and (psi, psi') of zeta' = A(t) zeta with phi(0) = psi'(0) = 1
/// and phi'(0) = psi(0) = 0. The plane coordinates are re-integrated jointly
/// so the driving orbit carries no interpolation error.
struct MonodromyData {
  double T{0};
  double phi_T{1}, psi_T{0}, dphi_T{0}, dpsi_T{1};
  Mat2 M = Mat2::identity();
  double wronskian_defect{0};
  /// dim 6 dense storage: (y, p_y, phi, phi', psi, psi') over [0, T]
  DenseOutput flow;
};

inline MonodromyData fundamental_system(const ReducedSystem& r, const LibratingOrbit& orbit) {
  const OdeRhs rhs = [&r](double, const double* s, double* ds) {
    const Mat2 a = r.A(s[0], s[1]);
    ds[0] = s[1];
    ds[1] = -r.Up(s[0]);
    ds[2] = a.a * s[2] + a.b * s[3];
    ds[3] = a.c * s[2] + a.d * s[3];
    ds[4] = a.a * s[4] + a.b * s[5];
    ds[5] = a.c * s[4] + a.d * s[5];
  };
  OdeState s{};
  s[0] = orbit.y_start;
  s[1] = orbit.py_start;
  s[2] = 1;  // phi
  s[5] = 1;  // psi'
  MonodromyData m;
  m.T = orbit.T;
  integrate_to(rhs, 6, s, 0.0, orbit.T, {}, &m.flow);
  m.phi_T = s[2];
  m.dphi_T = s[3];
  m.psi_T = s[4];
  m.dpsi_T = s[5];
  m.M = Mat2{m.phi_T, m.psi_T, m.dphi_T, m.dpsi_T};
  m.wronskian_defect = std::fabs(m.phi_T * m.dpsi_T - m.psi_T * m.dphi_T - 1.0);
  if (m.wronskian_defect > 1e-9)
    fail(errc::numerical_breakdown, "fundamental system lost the unit Wronskian");
  return m;
}

inline MonodromyData hill_fundamental(const HamiltonianSystem& h, const LibratingOrbit& orbit) {
  return fundamental_system(reduced_system(h), orbit);
}

// ---------------------------------------------------------------------------
// The section return map as a one-parameter symplectic family.

struct PoincareContext {
  HamiltonianSystem h;
  SectionSpec section;
  double e0{0};         // reference energy; the family parameter is E - e0
  double t_ref{0};      // reduced period at e0, basis of the return budget
  double chart_bound{10.0};
  IntegratorOptions opts{};
};

inline PoincareContext make_poincare_context(HamiltonianSystem h, SectionSpec section,
                                             double e0) {
  const ReducedSystem r = reduced_system(h);
  if (std::isnan(section.y0)) section.y0 = default_section_y(r);
  PoincareContext ctx{std::move(h), section, e0, 0.0, 10.0, {}};
  ctx.t_ref = find_libration(r, ctx.section.y0, e0).T;
  return ctx;
}

/// (q, p, eps) -> (x, y, p_x, p_y) on the section with the energy E = e0+eps.
inline OdeState lift_section_point(const PoincareContext& ctx, const Point3& pt) {
  const double radicand =
      2 * (ctx.e0 + pt.eps - ctx.h.potential(pt.q, ctx.section.y0)) - pt.p * pt.p;
  if (radicand <= 0)
    fail(errc::energy_forbidden, "energy too low to cross the section at this (q, p)");
  OdeState s{};
  s[0] = pt.q;
  s[1] = ctx.section.y0;
  s[2] = pt.p;
  s[3] = ctx.section.crossing_direction >= 0 ? std::sqrt(radicand) : -std::sqrt(radicand);
  return s;
}

inline Vec2 poincare_map(const PoincareContext& ctx, const Point3& pt) {
  OdeState s = lift_section_point(ctx, pt);
  const double y0 = ctx.section.y0;
  const double dir = ctx.section.crossing_direction >= 0 ? 1.0 : -1.0;
  const OdeRhs rhs = [&ctx](double, const double* st, double* ds) { ctx.h.rhs4(st, ds); };
  EventSpec ev;
  ev.value = [y0, dir](double, const double* st) { return dir * (st[1] - y0); };
  IntegratorOptions opts = ctx.opts;
  const double bound = ctx.chart_bound;
  opts.inside = [bound](double, const double* st) {
    return std::fabs(st[0]) <= bound && std::fabs(st[2]) <= bound;
  };
  const EventHit hit = integrate_until_event(rhs, 4, s, 0.0, 3 * ctx.t_ref, ev, opts);
  if (!hit.found)
    fail(errc::no_return, "orbit did not return to the section within three reference periods");
  return {s[0], s[2]};
}

/// MapFamily adapter around the section return map. Jets are finite
/// differences over integrated evaluations, so they use the wide-stencil
/// steps and callers should pair them with Tolerances::numerical().
class PoincareFamily final : public MapFamily {
 public:
  explicit PoincareFamily(PoincareContext ctx) : ctx_(std::move(ctx)) {}

  Vec2 eval(const Point3& pt) const override { return poincare_map(ctx_, pt); }

  DerivativeJet jet(const Point3& pt, int order) const override {
    return fd_jet([this](const Point3& x) { return eval(x); }, pt, order, FdSteps{1e-3, 1e-2});
  }

  const PoincareContext& context() const { return ctx_; }

 private:
  PoincareContext ctx_;
};

// ---------------------------------------------------------------------------
// Energy scan along the plane fixed-point branch (0, 0, eps).

struct ScanRow {
  double eps{0}, T{0}, trace{0};
  double phi_T{0}, psi_T{0}, dphi_T{0}, dpsi_T{0};
};

struct TraceCrossing {
  double eps_star{0};
  double trace_slope{0};
  std::optional<BifurcationReport> report;
  std::string classify_error;
};

struct ScanResult {
  std::vector<ScanRow> rows;
  Branch branch;  // (0, 0, eps) with the monodromy trace per sample
  std::vector<TraceCrossing> crossings;
  bool degenerate_flat_trace{false};
  std::vector<std::string> notes;
};

namespace detail {

inline ScanRow scan_row(const ReducedSystem& r, double y0, double e0, double eps) {
  const LibratingOrbit orbit = find_libration(r, y0, e0 + eps);
  const MonodromyData m = fundamental_system(r, orbit);
  return {eps, orbit.T, m.phi_T + m.dpsi_T, m.phi_T, m.psi_T, m.dphi_T, m.dpsi_T};
}

}  // namespace detail

/// Scan the plane branch over [eps_lo, eps_hi] with n samples: period and
/// monodromy per energy, unit-trace crossings refined on the smooth
/// monodromy trace and classified through the finite-difference family.
/// Failing energies truncate the scan to its longest consecutive run.
inline ScanResult libration_branch_scan(const PoincareContext& ctx, double eps_lo, double eps_hi,
                                        int n, int threads = threads_from_env()) {
  if (n < 2 || eps_hi <= eps_lo)
    fail(errc::precondition_violated, "scan needs n >= 2 and a nonempty range");
  const ReducedSystem r = reduced_system(ctx.h);
  const double y0 = ctx.section.y0;

  std::vector<std::optional<ScanRow>> slots(n);
  std::vector<std::string> errors(n);
  parallel_for(static_cast<size_t>(n), threads, [&](size_t i) {
    const double eps = eps_lo + (eps_hi - eps_lo) * static_cast<double>(i) / (n - 1);
    try {
      slots[i] = detail::scan_row(r, y0, ctx.e0, eps);
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  // keep the longest consecutive run of successful energies
  int best_lo = 0, best_len = 0, cur_lo = 0, cur_len = 0;
  for (int i = 0; i < n; ++i) {
    if (slots[i]) {
      if (cur_len == 0) cur_lo = i;
      if (++cur_len > best_len) {
        best_len = cur_len;
        best_lo = cur_lo;
      }
    } else {
      cur_len = 0;
    }
  }
  ScanResult out;
  if (best_len == 0)
    fail(errc::numerical_breakdown, "no scan energy admits a libration: " + errors[0]);
  for (int i = best_lo; i < best_lo + best_len; ++i) out.rows.push_back(*slots[i]);
  for (int i = 0; i < n; ++i)
    if (!slots[i] && !errors[i].empty())
      out.notes.push_back("eps index " + std::to_string(i) + " dropped: " + errors[i]);

  out.branch.parametrization = BranchParam::by_eps;
  for (const ScanRow& row : out.rows) {
    out.branch.samples.push_back({0, 0, row.eps});
    out.branch.trace.push_back(row.trace);
  }

  double flat = 0;
  for (const ScanRow& row : out.rows) flat = std::max(flat, std::fabs(row.trace - 2));
  if (flat <= 1e-9) {
    out.degenerate_flat_trace = true;
    out.branch.degenerate_flat_trace = true;
    return out;
  }

  const auto trace_at = [&](double eps) {
    return detail::scan_row(r, y0, ctx.e0, eps).trace;
  };
  for (size_t i = 0; i + 1 < out.rows.size(); ++i) {
    const double ta = out.rows[i].trace - 2, tb = out.rows[i + 1].trace - 2;
    if (ta == 0 && i > 0) continue;
    if (ta * tb > 0) continue;
    TraceCrossing crossing;
    crossing.eps_star = find_root([&](double e) { return trace_at(e) - 2; },
                                  out.rows[i].eps, out.rows[i + 1].eps);
    const double h = 1e-4 * std::max(1.0, std::fabs(crossing.eps_star));
    crossing.trace_slope =
        (trace_at(crossing.eps_star + h) - trace_at(crossing.eps_star - h)) / (2 * h);
    try {
      auto family = std::make_shared<PoincareFamily>(ctx);
      crossing.report =
          classify(family, {0, 0, crossing.eps_star}, Tolerances::numerical());
    } catch (const Error& e) {
      crossing.classify_error = e.what();
    }
    out.crossings.push_back(std::move(crossing));
  }
  return out;
}

}  // namespace crossbif
