#pragma once

#include <array>
#include <functional>

#include "crossbif/common.hpp"

namespace crossbif {

// Multi-indices (i,j,k) for partials d^(i+j+k)/dq^i dp^j deps^k, order <= 3,
// grouped by total order. Slot 0 is the value itself.
inline constexpr int kJetSlots = 20;
inline constexpr std::array<std::array<int, 3>, kJetSlots> kJetIndex = {{
    {0, 0, 0},
    {1, 0, 0}, {0, 1, 0}, {0, 0, 1},
    {2, 0, 0}, {1, 1, 0}, {1, 0, 1}, {0, 2, 0}, {0, 1, 1}, {0, 0, 2},
    {3, 0, 0}, {2, 1, 0}, {2, 0, 1}, {1, 2, 0}, {1, 1, 1}, {1, 0, 2},
    {0, 3, 0}, {0, 2, 1}, {0, 1, 2}, {0, 0, 3},
}};

inline int jet_slot(int i, int j, int k) {
  for (int s = 0; s < kJetSlots; ++s)
    if (kJetIndex[s][0] == i && kJetIndex[s][1] == j && kJetIndex[s][2] == k) return s;
  fail(errc::precondition_violated, "jet_slot: order above 3");
}

/// Partial derivatives of both map components at a base point, stored as raw
/// derivative values (not Taylor coefficients) keyed by multi-index.
struct DerivativeJet {
  Point3 base{};
  int order{0};
  // [0] = first component (Q), [1] = second component (P)
  std::array<std::array<double, kJetSlots>, 2> c{};

  double d(int comp, int i, int j, int k) const { return c[comp][jet_slot(i, j, k)]; }
  void set(int comp, int i, int j, int k, double v) { c[comp][jet_slot(i, j, k)] = v; }

  // value and the partials that show up in the classification formulas
  double Q() const { return c[0][0]; }
  double P() const { return c[1][0]; }
  double Qq() const { return d(0, 1, 0, 0); }
  double Qp() const { return d(0, 0, 1, 0); }
  double Qe() const { return d(0, 0, 0, 1); }
  double Pq() const { return d(1, 1, 0, 0); }
  double Pp() const { return d(1, 0, 1, 0); }
  double Pe() const { return d(1, 0, 0, 1); }
  double Qqq() const { return d(0, 2, 0, 0); }
  double Pqq() const { return d(1, 2, 0, 0); }
  double Pqp() const { return d(1, 1, 1, 0); }
  double Pqe() const { return d(1, 1, 0, 1); }
  double Pee() const { return d(1, 0, 0, 2); }
  double Pqqq() const { return d(1, 3, 0, 0); }

  Mat2 jacobian() const { return {Qq(), Qp(), Pq(), Pp()}; }
};

namespace detail {

// Dense tensors of partials per component, used as scratch for the affine
// pushforward. Symmetric entries are stored redundantly.
struct JetTensors {
  Vec2 val{};
  std::array<std::array<double, 3>, 2> d1{};
  std::array<std::array<std::array<double, 3>, 3>, 2> d2{};
  std::array<std::array<std::array<std::array<double, 3>, 3>, 3>, 2> d3{};
};

inline JetTensors to_tensors(const DerivativeJet& j) {
  JetTensors t;
  t.val = {j.c[0][0], j.c[1][0]};
  for (int comp = 0; comp < 2; ++comp) {
    for (int a = 0; a < 3; ++a) {
      int e1[3] = {0, 0, 0};
      e1[a] = 1;
      t.d1[comp][a] = j.d(comp, e1[0], e1[1], e1[2]);
      for (int b = 0; b < 3; ++b) {
        int e2[3] = {0, 0, 0};
        e2[a] += 1;
        e2[b] += 1;
        t.d2[comp][a][b] = j.d(comp, e2[0], e2[1], e2[2]);
        for (int cc = 0; cc < 3; ++cc) {
          int e3[3] = {0, 0, 0};
          e3[a] += 1;
          e3[b] += 1;
          e3[cc] += 1;
          t.d3[comp][a][b][cc] = j.d(comp, e3[0], e3[1], e3[2]);
        }
      }
    }
  }
  return t;
}

inline void from_tensors(const JetTensors& t, DerivativeJet& j) {
  j.c[0][0] = t.val.x;
  j.c[1][0] = t.val.y;
  for (int comp = 0; comp < 2; ++comp)
    for (int s = 1; s < kJetSlots; ++s) {
      // expand the multi-index into an index tuple and read one representative
      const auto& mi = kJetIndex[s];
      int idx[3] = {0, 0, 0}, n = 0;
      for (int v = 0; v < 3; ++v)
        for (int r = 0; r < mi[v]; ++r) idx[n++] = v;
      double val = 0;
      if (n == 1)
        val = t.d1[comp][idx[0]];
      else if (n == 2)
        val = t.d2[comp][idx[0]][idx[1]];
      else
        val = t.d3[comp][idx[0]][idx[1]][idx[2]];
      j.c[comp][s] = val;
    }
}

}  // namespace detail

/// Pushforward of a jet through affine input/output changes:
///   G(w) = N * F(M w + m) + L w + n
/// `in` must be the jet of F at M w0 + m; the result is the jet of G at w0.
/// `affine_value` is the already-evaluated L w0 + n.
inline DerivativeJet transform_jet(const DerivativeJet& in, const Mat2& N,
                                   const std::array<std::array<double, 3>, 3>& M,
                                   const std::array<std::array<double, 3>, 2>& L,
                                   const Vec2& affine_value, const Point3& new_base) {
  using detail::JetTensors;
  const JetTensors s = detail::to_tensors(in);
  JetTensors t;
  const double n2[2][2] = {{N.a, N.b}, {N.c, N.d}};

  // inner contraction with M per derivative index, then the output mix with N
  for (int comp = 0; comp < 2; ++comp) {
    for (int a = 0; a < 3; ++a) {
      double acc1 = 0;
      for (int i = 0; i < 3; ++i) acc1 += s.d1[comp][i] * M[i][a];
      t.d1[comp][a] = acc1;
      for (int b = 0; b < 3; ++b) {
        double acc2 = 0;
        for (int i = 0; i < 3; ++i)
          for (int jj = 0; jj < 3; ++jj) acc2 += s.d2[comp][i][jj] * M[i][a] * M[jj][b];
        t.d2[comp][a][b] = acc2;
        for (int cc = 0; cc < 3; ++cc) {
          double acc3 = 0;
          for (int i = 0; i < 3; ++i)
            for (int jj = 0; jj < 3; ++jj)
              for (int kk = 0; kk < 3; ++kk)
                acc3 += s.d3[comp][i][jj][kk] * M[i][a] * M[jj][b] * M[kk][cc];
          t.d3[comp][a][b][cc] = acc3;
        }
      }
    }
  }

  JetTensors out;
  out.val = {n2[0][0] * s.val.x + n2[0][1] * s.val.y + affine_value.x,
             n2[1][0] * s.val.x + n2[1][1] * s.val.y + affine_value.y};
  for (int comp = 0; comp < 2; ++comp)
    for (int a = 0; a < 3; ++a) {
      out.d1[comp][a] = n2[comp][0] * t.d1[0][a] + n2[comp][1] * t.d1[1][a] + L[comp][a];
      for (int b = 0; b < 3; ++b) {
        out.d2[comp][a][b] = n2[comp][0] * t.d2[0][a][b] + n2[comp][1] * t.d2[1][a][b];
        for (int cc = 0; cc < 3; ++cc)
          out.d3[comp][a][b][cc] =
              n2[comp][0] * t.d3[0][a][b][cc] + n2[comp][1] * t.d3[1][a][b][cc];
      }
    }

  DerivativeJet r;
  r.base = new_base;
  r.order = in.order;
  detail::from_tensors(out, r);
  return r;
}

/// Finite-difference step sizes. The defaults suit closed-form evaluators;
/// maps obtained by numerical integration carry ~1e-10 evaluator noise and
/// need wider stencils so the h^2 and h^3 divisors do not amplify it.
struct FdSteps {
  double h12{1e-4};
  double h3{1e-3};
};

/// Central finite-difference jet of an arbitrary evaluator. Per-axis
/// h = max(h12, h12*|coordinate|) for first and second order, a fixed wider
/// h3 for third order.
inline DerivativeJet fd_jet(const std::function<Vec2(const Point3&)>& eval, const Point3& base,
                            int order, const FdSteps& steps = {}) {
  DerivativeJet j;
  j.base = base;
  j.order = order;

  const double coord[3] = {base.q, base.p, base.eps};
  const auto at = [&](double dq, double dp, double de) {
    return eval({base.q + dq, base.p + dp, base.eps + de});
  };
  const auto shifted = [&](const std::array<double, 3>& d) { return at(d[0], d[1], d[2]); };

  const Vec2 f0 = at(0, 0, 0);
  j.c[0][0] = f0.x;
  j.c[1][0] = f0.y;
  if (order < 1) return j;

  double h12[3], h3 = steps.h3;
  for (int a = 0; a < 3; ++a) h12[a] = std::max(steps.h12, steps.h12 * std::fabs(coord[a]));

  const auto axis_step = [&](int a, double h, double sign) {
    std::array<double, 3> d{0, 0, 0};
    d[a] = sign * h;
    return d;
  };

  // first order
  std::array<Vec2, 3> plus, minus;
  for (int a = 0; a < 3; ++a) {
    plus[a] = shifted(axis_step(a, h12[a], +1));
    minus[a] = shifted(axis_step(a, h12[a], -1));
    const Vec2 g = (plus[a] - minus[a]) * (1.0 / (2 * h12[a]));
    int e[3] = {0, 0, 0};
    e[a] = 1;
    j.set(0, e[0], e[1], e[2], g.x);
    j.set(1, e[0], e[1], e[2], g.y);
  }
  if (order < 2) return j;

  // second order: pure and mixed stencils
  for (int a = 0; a < 3; ++a) {
    const Vec2 g = (plus[a] + minus[a] - f0 * 2.0) * (1.0 / (h12[a] * h12[a]));
    int e[3] = {0, 0, 0};
    e[a] = 2;
    j.set(0, e[0], e[1], e[2], g.x);
    j.set(1, e[0], e[1], e[2], g.y);
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) {
      std::array<double, 3> d{0, 0, 0};
      d[a] = h12[a];
      d[b] = h12[b];
      const Vec2 fpp = shifted(d);
      d[b] = -h12[b];
      const Vec2 fpm = shifted(d);
      d[a] = -h12[a];
      const Vec2 fmm = shifted(d);
      d[b] = h12[b];
      const Vec2 fmp = shifted(d);
      const Vec2 g = (fpp - fpm - fmp + fmm) * (1.0 / (4 * h12[a] * h12[b]));
      int e[3] = {0, 0, 0};
      e[a] += 1;
      e[b] += 1;
      j.set(0, e[0], e[1], e[2], g.x);
      j.set(1, e[0], e[1], e[2], g.y);
    }
  if (order < 3) return j;

  // third order on the wider stencil
  const auto at3 = [&](int da, int db, int dc) {
    return at(da * h3, db * h3, dc * h3);
  };
  const auto set3 = [&](int i, int jj, int k, const Vec2& g) {
    j.set(0, i, jj, k, g.x);
    j.set(1, i, jj, k, g.y);
  };

  for (int a = 0; a < 3; ++a) {
    int s[3] = {0, 0, 0};
    const auto pt = [&](int mult) {
      std::array<double, 3> d{0, 0, 0};
      d[a] = mult * h3;
      return shifted(d);
    };
    const Vec2 g = (pt(2) - pt(1) * 2.0 + pt(-1) * 2.0 - pt(-2)) * (1.0 / (2 * h3 * h3 * h3));
    s[a] = 3;
    set3(s[0], s[1], s[2], g);
  }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      if (a == b) continue;
      // d^3 / da^2 db: second difference in a, first difference in b
      const auto pt = [&](int sa, int sb) {
        std::array<double, 3> d{0, 0, 0};
        d[a] = sa * h3;
        d[b] = sb * h3;
        return shifted(d);
      };
      const Vec2 g = (pt(1, 1) - pt(0, 1) * 2.0 + pt(-1, 1) - pt(1, -1) + pt(0, -1) * 2.0 -
                      pt(-1, -1)) *
                     (1.0 / (2 * h3 * h3 * h3));
      int e[3] = {0, 0, 0};
      e[a] += 2;
      e[b] += 1;
      j.set(0, e[0], e[1], e[2], g.x);
      j.set(1, e[0], e[1], e[2], g.y);
    }
  {
    // the single fully mixed stencil
    Vec2 acc{0, 0};
    for (int sa : {-1, 1})
      for (int sb : {-1, 1})
        for (int sc : {-1, 1}) {
          const Vec2 v = at3(sa, sb, sc);
          const double sgn = sa * sb * sc;
          acc = acc + v * sgn;
        }
    set3(1, 1, 1, acc * (1.0 / (8 * h3 * h3 * h3)));
  }
  return j;
}

}  // namespace crossbif
