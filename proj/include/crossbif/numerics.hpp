#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <vector>

#include "crossbif/common.hpp"

namespace crossbif {

/// Bracketed scalar root find, bisection with secant acceleration.
/// Requires f(a) and f(b) of opposite sign (or one of them zero).
inline double find_root(const std::function<double(double)>& f, double a, double b,
                        double xtol = 1e-13, int max_iter = 200) {
  double fa = f(a), fb = f(b);
  if (fa == 0) return a;
  if (fb == 0) return b;
  if (fa * fb > 0) fail(errc::precondition_violated, "find_root: endpoints do not bracket");
  for (int it = 0; it < max_iter; ++it) {
    // secant proposal, clipped into the bracket; fall back to the midpoint
    double m = b - fb * (b - a) / (fb - fa);
    const double lo = std::min(a, b), hi = std::max(a, b);
    if (!(m > lo && m < hi)) m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0 || std::fabs(b - a) < xtol) return m;
    if (fa * fm < 0) {
      b = m;
      fb = fm;
    } else {
      a = m;
      fa = fm;
    }
  }
  return 0.5 * (a + b);
}

/// Coefficients of y ~ c0 + c1*(x-x0) + c2*(x-x0)^2 by least squares.
struct QuadFit {
  double c0{0}, c1{0}, c2{0};
};

inline QuadFit fit_quadratic(const std::vector<double>& xs, const std::vector<double>& ys,
                             double x0) {
  const size_t n = xs.size();
  if (n < 3 || ys.size() != n)
    fail(errc::precondition_violated, "fit_quadratic: need >= 3 samples");
  // normal equations for the centered monomial basis
  double s1 = 0, s2 = 0, s3 = 0, s4 = 0;
  double b0 = 0, b1 = 0, b2 = 0;
  for (size_t i = 0; i < n; ++i) {
    const double t = xs[i] - x0, t2 = t * t;
    s1 += t;
    s2 += t2;
    s3 += t2 * t;
    s4 += t2 * t2;
    b0 += ys[i];
    b1 += ys[i] * t;
    b2 += ys[i] * t2;
  }
  const double s0 = static_cast<double>(n);
  // solve the symmetric 3x3 system [s0 s1 s2; s1 s2 s3; s2 s3 s4] c = b
  double m[3][4] = {{s0, s1, s2, b0}, {s1, s2, s3, b1}, {s2, s3, s4, b2}};
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    std::swap(m[col], m[piv]);
    if (m[col][col] == 0) fail(errc::numerical_breakdown, "fit_quadratic: singular system");
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double k = m[r][col] / m[col][col];
      for (int cc = col; cc < 4; ++cc) m[r][cc] -= k * m[col][cc];
    }
  }
  return {m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]};
}

/// Neville polynomial extrapolation of (h_k, v_k) samples to h = 0.
inline double extrapolate_to_zero(std::vector<double> hs, std::vector<double> vs) {
  const size_t n = hs.size();
  if (n == 0 || vs.size() != n)
    fail(errc::precondition_violated, "extrapolate_to_zero: empty or mismatched input");
  for (size_t level = 1; level < n; ++level)
    for (size_t i = 0; i + level < n; ++i)
      vs[i] = (hs[i + level] * vs[i] - hs[i] * vs[i + 1]) / (hs[i + level] - hs[i]);
  return vs[0];
}

namespace detail {
// 16-point Gauss-Legendre rule on [-1, 1] (positive abscissae half).
inline constexpr std::array<double, 8> kGlx = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274, 0.6178762444026438,
    0.7554044083550030, 0.8656312023878318, 0.9445750230732326, 0.9894009349916499};
inline constexpr std::array<double, 8> kGlw = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};
}  // namespace detail

/// Composite 16-node Gauss-Legendre quadrature; nodes stay interior to each
/// panel, so integrable endpoint behaviour (e.g. removable 0/0) is fine.
inline double gauss_legendre(const std::function<double(double)>& f, double a, double b,
                             int panels) {
  const double h = (b - a) / panels;
  double total = 0;
  for (int k = 0; k < panels; ++k) {
    const double mid = a + (k + 0.5) * h, half = 0.5 * h;
    double acc = 0;
    for (int i = 0; i < 8; ++i)
      acc += detail::kGlw[i] * (f(mid + half * detail::kGlx[i]) + f(mid - half * detail::kGlx[i]));
    total += acc * half;
  }
  return total;
}

/// Panel-doubling Gauss-Legendre until two refinements agree to tol.
inline double integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                 double tol = 1e-12) {
  int panels = 4;
  double prev = gauss_legendre(f, a, b, panels);
  for (int round = 0; round < 12; ++round) {
    panels *= 2;
    const double cur = gauss_legendre(f, a, b, panels);
    if (std::fabs(cur - prev) <= tol * (1 + std::fabs(cur))) return cur;
    prev = cur;
  }
  fail(errc::no_convergence, "integrate_adaptive: quadrature did not settle");
}

}  // namespace crossbif
