#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "crossbif/common.hpp"
#include "crossbif/numerics.hpp"
#include "crossbif/ode.hpp"
#include "crossbif/poincare.hpp"
#include "crossbif/poly.hpp"

namespace crossbif {

// Perturbations H + delta*F of a mechanical Hamiltonian, F polynomial in
// (x, y, p_x, p_y) = slots (0, 1, 2, 3). The analysis runs along a plane
// libration of the unperturbed system: restricted forcing functions, their
// weighted integrals against the fundamental transverse solutions, and the
// resulting criterion for whether the perturbation destroys a unit-trace
// bifurcation of the section return map.

inline Poly perturbation_named(const std::string& name) {
  if (name == "rotation")
    return Poly::monomial({1, 0, 0, 1}, 1) - Poly::monomial({0, 1, 1, 0}, 1);
  if (name == "x2y" || name == "symmetric") return Poly::monomial({2, 1, 0, 0}, 1);
  fail(errc::config_invalid, "unknown perturbation name: " + name);
}

/// Forcing terms induced by F on the invariant plane:
/// g1 = dF/dp_x (0, y, 0, p_y) and g2 = -dF/dx (0, y, 0, p_y).
struct GFunctions {
  Poly g1, g2;  // polynomials in (y, p_y)

  double eval1(double y, double py) const { return g1.eval({0, y, 0, py}); }
  double eval2(double y, double py) const { return g2.eval({0, y, 0, py}); }
  bool both_zero() const { return g1.zero() && g2.zero(); }
};

inline GFunctions g_functions(const Poly& f) {
  GFunctions g;
  g.g1 = f.derivative(2).substituted(0, 0.0).substituted(2, 0.0);
  g.g2 = (f.derivative(0) * -1.0).substituted(0, 0.0).substituted(2, 0.0);
  return g;
}

/// A perturbation leaves the plane x = p_x = 0 invariant iff both forcing
/// terms vanish identically. For a polynomial that holds exactly when every
/// monomial has x-power + p_x-power either zero or at least two; the sampled
/// sup over the given (y, p_y) window double-checks the closed form.
inline bool is_cross_preserving(const Poly& f, double y_lo, double y_hi, double py_max,
                                double tol = 1e-10) {
  bool exact = true;
  for (const Poly::Term& t : f.terms())
    if (t.e[0] + t.e[2] == 1) exact = false;

  const GFunctions g = g_functions(f);
  double sup = 0;
  const int n = 40;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) {
      const double y = y_lo + (y_hi - y_lo) * i / n;
      const double py = -py_max + 2 * py_max * j / n;
      sup = std::max(sup, std::fabs(g.eval1(y, py)));
      sup = std::max(sup, std::fabs(g.eval2(y, py)));
    }
  return exact && sup <= tol;
}

/// Response of the transverse variations to the forcing, from zero initial
/// data: zeta' = A(t) zeta + (g1, g2) integrated over one period jointly with
/// the driving plane orbit.
inline Vec2 inhomogeneous_solution(const ReducedSystem& r, const LibratingOrbit& orbit,
                                   const GFunctions& g) {
  const OdeRhs rhs = [&](double, const double* s, double* ds) {
    const Mat2 a = r.A(s[0], s[1]);
    ds[0] = s[1];
    ds[1] = -r.Up(s[0]);
    ds[2] = a.a * s[2] + a.b * s[3] + g.eval1(s[0], s[1]);
    ds[3] = a.c * s[2] + a.d * s[3] + g.eval2(s[0], s[1]);
  };
  OdeState s{};
  s[0] = orbit.y_start;
  s[1] = orbit.py_start;
  integrate_to(rhs, 4, s, 0.0, orbit.T, {});
  return {s[2], s[3]};
}

/// Weighted integrals of the forcing against the fundamental solutions:
/// c1 = int(psi' g1 - psi g2), c2 = -int(phi' g1 - phi g2) over one period.
/// By variation of parameters the period response equals M (c1, c2).
inline Vec2 c_integrals(const MonodromyData& mono, const GFunctions& g) {
  double state[6];
  const auto integrand1 = [&](double t) {
    mono.flow.eval(t, state);
    return state[5] * g.eval1(state[0], state[1]) - state[4] * g.eval2(state[0], state[1]);
  };
  const auto integrand2 = [&](double t) {
    mono.flow.eval(t, state);
    return state[3] * g.eval1(state[0], state[1]) - state[2] * g.eval2(state[0], state[1]);
  };
  const double c1 = integrate_adaptive(integrand1, 0.0, mono.T, 1e-11);
  const double c2 = -integrate_adaptive(integrand2, 0.0, mono.T, 1e-11);
  return {c1, c2};
}

struct DestructionReport {
  std::vector<double> g1_samples, g2_samples;  // forcing along the orbit
  double c1{0}, c2{0};
  double xi_T{0}, eta_T{0};
  Vec2 criterion{0, 0};  // (M - I)(c1, c2)
  bool destroys{false};
  bool degenerate_identity{false};
  // second route: the period response M c lies in the unit eigenspace of M
  // iff the criterion vector vanishes (M is invertible), checked numerically
  bool eigen_route_destroys{false};
  bool routes_agree{true};
  double consistency_defect{0};  // |(xi_T, eta_T) - M c|
  // rotation special case: the reduced vector (int y psi', -int y phi') and
  // whether the boundary-term identity tying it to (c1, c2) held
  std::optional<Vec2> alt_vector;
  std::optional<bool> alt_agrees;
};

/// Decide destruction from the criterion vector (M - I) c, with the
/// scale-aware threshold tol*(1+|M|)(1+|c|). When a directly integrated
/// period response is supplied it is checked against M c.
inline DestructionReport destruction_criterion(const MonodromyData& mono, const Vec2& c,
                                               std::optional<Vec2> direct_response = {},
                                               double tol = 1e-6) {
  const Mat2& m = mono.M;
  DestructionReport rep;
  rep.c1 = c.x;
  rep.c2 = c.y;

  const Vec2 mc{m.a * c.x + m.b * c.y, m.c * c.x + m.d * c.y};
  const Vec2 response = direct_response.value_or(mc);
  rep.xi_T = response.x;
  rep.eta_T = response.y;
  rep.consistency_defect = (response - mc).norm();
  if (rep.consistency_defect > 1e-8 * (1 + m.norm_inf() * c.norm()))
    fail(errc::numerical_breakdown,
         "period response disagrees with the variation-of-parameters identity");

  rep.criterion = {mc.x - c.x, mc.y - c.y};  // (M - I) c
  const double scale = (1 + m.norm_inf()) * (1 + c.norm());
  rep.degenerate_identity = (Mat2{m.a - 1, m.b, m.c, m.d - 1}).norm_inf() <= tol;
  rep.destroys = !rep.degenerate_identity && rep.criterion.norm() > tol * scale;

  // eigen-route: (M - I) M c, one more factor of M in the scale
  const Vec2 w{(m.a - 1) * mc.x + m.b * mc.y, m.c * mc.x + (m.d - 1) * mc.y};
  rep.eigen_route_destroys =
      !rep.degenerate_identity && w.norm() > tol * (1 + m.norm_inf()) * scale;
  rep.routes_agree = rep.degenerate_identity || rep.eigen_route_destroys == rep.destroys;
  return rep;
}

namespace detail {

inline void sample_forcing(const LibratingOrbit& orbit, const GFunctions& g,
                           DestructionReport& rep) {
  const int n = 32;
  for (int k = 0; k <= n; ++k) {
    const double t = orbit.T * k / n;
    const double y = orbit.y(t), py = orbit.py(t);
    rep.g1_samples.push_back(g.eval1(y, py));
    rep.g2_samples.push_back(g.eval2(y, py));
  }
}

}  // namespace detail

/// Full pipeline for one perturbation term against one libration.
inline DestructionReport destruction_report(const ReducedSystem& r, const LibratingOrbit& orbit,
                                            const MonodromyData& mono, const Poly& f) {
  const GFunctions g = g_functions(f);
  const Vec2 c = g.both_zero() ? Vec2{0, 0} : c_integrals(mono, g);
  const Vec2 direct =
      g.both_zero() ? Vec2{0, 0} : inhomogeneous_solution(r, orbit, g);
  DestructionReport rep = destruction_criterion(mono, c, direct);
  detail::sample_forcing(orbit, g, rep);
  return rep;
}

/// The angular-momentum perturbation F = x p_y - y p_x admits a reduced
/// criterion vector (int y psi' dt, -int y phi' dt). Integrating the generic
/// integrals by parts ties the two together:
/// c = -2 v + y(0) * (psi_T, 1 - phi_T). Both are computed and compared; the
/// destroys decision always comes from the generic route.
inline DestructionReport rotation_case(const ReducedSystem& r, const LibratingOrbit& orbit,
                                       const MonodromyData& mono) {
  DestructionReport rep = destruction_report(r, orbit, mono, perturbation_named("rotation"));

  double state[6];
  const auto y_dpsi = [&](double t) {
    mono.flow.eval(t, state);
    return state[0] * state[5];
  };
  const auto y_dphi = [&](double t) {
    mono.flow.eval(t, state);
    return state[0] * state[3];
  };
  const Vec2 v{integrate_adaptive(y_dpsi, 0.0, mono.T, 1e-11),
               -integrate_adaptive(y_dphi, 0.0, mono.T, 1e-11)};
  rep.alt_vector = v;

  const Vec2 c{rep.c1, rep.c2};
  const Vec2 tied{-2 * v.x + orbit.y_start * mono.psi_T,
                  -2 * v.y + orbit.y_start * (1 - mono.phi_T)};
  rep.alt_agrees = (c - tied).norm() <= 1e-8 * (1 + c.norm() + 2 * v.norm());
  return rep;
}

// ---------------------------------------------------------------------------
// Cross-preserving rescans: for perturbations that leave the plane invariant,
// the unit-trace crossing of the plane branch must persist for small delta.

/// Plane dynamics of H + delta*F. Requires F cross-preserving and its plane
/// restriction p_y-free, so the reduced system stays mechanical.
inline ReducedSystem perturbed_reduced_system(const HamiltonianSystem& h, const Poly& f,
                                              double delta) {
  Poly plane_extra;  // pure-y monomials of F shift the plane potential
  for (const Poly::Term& t : f.terms()) {
    if (t.e[0] + t.e[2] == 1)
      fail(errc::precondition_violated,
           "perturbation does not leave the libration plane invariant");
    if (t.e[0] == 0 && t.e[2] == 0) {
      if (t.e[3] != 0)
        fail(errc::precondition_violated,
             "perturbation breaks the mechanical form of the reduced system");
      plane_extra += Poly::monomial(t.e, t.c);
    }
  }

  ReducedSystem r = reduced_system(h);
  r.u += plane_extra * delta;
  r.up = r.u.derivative(1);

  const Poly fx = f.derivative(0), fpx = f.derivative(2);
  const Poly fxx = fx.derivative(0).substituted(0, 0.0).substituted(2, 0.0);
  const Poly fxpx = fx.derivative(2).substituted(0, 0.0).substituted(2, 0.0);
  const Poly fpxpx = fpx.derivative(2).substituted(0, 0.0).substituted(2, 0.0);
  Poly vxx = h.vx().derivative(0);
  r.linearization = [vxx, fxx, fxpx, fpxpx, delta](double y, double py) {
    const std::array<double, 4> at{0, y, 0, py};
    const double off = delta * fxpx.eval(at);
    return Mat2{off, 1 + delta * fpxpx.eval(at),
                -(vxx.eval(at) + delta * fxx.eval(at)), -off};
  };
  return r;
}

/// First unit-trace crossing of the plane branch of a reduced system over the
/// eps grid, refined by root finding on the smooth monodromy trace.
inline std::optional<double> first_trace_crossing(const ReducedSystem& r, double y0, double e0,
                                                  double eps_lo, double eps_hi, int n) {
  std::vector<double> eps(n), tr(n);
  for (int i = 0; i < n; ++i) {
    eps[i] = eps_lo + (eps_hi - eps_lo) * i / (n - 1);
    tr[i] = detail::scan_row(r, y0, e0, eps[i]).trace - 2;
  }
  for (int i = 0; i + 1 < n; ++i) {
    if (tr[i] == 0 && i > 0) continue;
    if (tr[i] * tr[i + 1] > 0) continue;
    return find_root(
        [&](double e) { return detail::scan_row(r, y0, e0, e).trace - 2; }, eps[i], eps[i + 1]);
  }
  return std::nullopt;
}

struct PreservationCheck {
  double delta{0};
  double base_eps{kNaN}, plus_eps{kNaN}, minus_eps{kNaN};
  double base_slope{kNaN}, plus_slope{kNaN}, minus_slope{kNaN};
  bool persists{false};
};

/// Direct numerical embodiment of the persistence argument: rescan the plane
/// branch of H + delta*F at delta = 0 and +-delta and require the unit-trace
/// crossing to survive with a nonzero trace slope.
inline PreservationCheck preservation_smoke(const HamiltonianSystem& h, const Poly& f,
                                            double delta, double y0, double e0, double eps_lo,
                                            double eps_hi, int n = 25) {
  PreservationCheck out;
  out.delta = delta;

  const auto crossing = [&](double d, double& eps_out, double& slope_out) {
    const ReducedSystem r = perturbed_reduced_system(h, f, d);
    const std::optional<double> star = first_trace_crossing(r, y0, e0, eps_lo, eps_hi, n);
    if (!star) return false;
    eps_out = *star;
    const double hstep = 1e-4 * std::max(1.0, std::fabs(*star));
    slope_out = (detail::scan_row(r, y0, e0, *star + hstep).trace -
                 detail::scan_row(r, y0, e0, *star - hstep).trace) /
                (2 * hstep);
    return true;
  };

  const bool base_ok = crossing(0.0, out.base_eps, out.base_slope);
  const bool plus_ok = crossing(delta, out.plus_eps, out.plus_slope);
  const bool minus_ok = crossing(-delta, out.minus_eps, out.minus_slope);
  out.persists = base_ok && plus_ok && minus_ok && std::fabs(out.plus_slope) > 0 &&
                 std::fabs(out.minus_slope) > 0;
  return out;
}

}  // namespace crossbif
