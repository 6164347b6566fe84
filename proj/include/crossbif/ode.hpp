#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <utility>
#include <vector>

#include "crossbif/common.hpp"

namespace crossbif {

// Right-hand side f(t, y, dy); state dimension is passed alongside and is at
// most kOdeMaxDim.
using OdeRhs = std::function<void(double, const double*, double*)>;
inline constexpr int kOdeMaxDim = 8;
using OdeState = std::array<double, kOdeMaxDim>;

struct IntegratorOptions {
  double rtol{1e-11};
  double atol{1e-11};
  long max_steps{4000000};
  /// Optional chart guard, checked after every accepted step.
  std::function<bool(double, const double*)> inside;
};

/// Piecewise quintic interpolant collected along an integration.
class DenseOutput {
 public:
  struct Step {
    double t0, h;
    std::array<OdeState, 5> r;
  };

  int dim{0};
  std::vector<Step> steps;

  double t_begin() const { return steps.empty() ? 0 : steps.front().t0; }
  double t_end() const { return steps.empty() ? 0 : steps.back().t0 + steps.back().h; }

  void eval(double t, double* out) const {
    if (steps.empty()) fail(errc::precondition_violated, "DenseOutput: empty");
    size_t lo = 0, hi = steps.size() - 1;
    while (lo < hi) {
      const size_t mid = (lo + hi + 1) / 2;
      if (steps[mid].t0 <= t)
        lo = mid;
      else
        hi = mid - 1;
    }
    const Step& s = steps[lo];
    const double th = (t - s.t0) / s.h, th1 = 1.0 - th;
    for (int i = 0; i < dim; ++i)
      out[i] = s.r[0][i] +
               th * (s.r[1][i] + th1 * (s.r[2][i] + th * (s.r[3][i] + th1 * s.r[4][i])));
  }
};

struct EventSpec {
  /// Scalar event function; the integrator reports upward zero crossings
  /// (negative to nonnegative) after t_min.
  std::function<double(double, const double*)> value;
  double t_min{0};
};

struct EventHit {
  bool found{false};
  double t{0};
};

namespace detail {

// Dormand-Prince 5(4) tableau with the standard quintic interpolant.
struct Dopri5 {
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                          a75 = -2187.0 / 6784, a76 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  static constexpr double d1 = -12715105075.0 / 11282082432.0;
  static constexpr double d3 = 87487479700.0 / 32700410799.0;
  static constexpr double d4 = -10690763975.0 / 1880347072.0;
  static constexpr double d5 = 701980252875.0 / 199316789632.0;
  static constexpr double d6 = -1453857185.0 / 822651844.0;
  static constexpr double d7 = 69997945.0 / 29380423.0;
};

class Stepper {
 public:
  Stepper(const OdeRhs& rhs, int dim, const IntegratorOptions& opts)
      : rhs_(rhs), dim_(dim), opts_(opts) {
    if (dim < 1 || dim > kOdeMaxDim)
      fail(errc::precondition_violated, "integrator: unsupported dimension");
  }

  void start(double t, const OdeState& y) {
    t_ = t;
    y_ = y;
    rhs_(t_, y_.data(), k_[0].data());
    h_ = initial_step();
  }

  double t() const { return t_; }
  const OdeState& y() const { return y_; }

  /// One accepted step, not exceeding t_limit. Returns the step object for
  /// dense evaluation over [t_prev, t].
  DenseOutput::Step step(double t_limit) {
    using T = Dopri5;
    for (int attempt = 0; attempt < 64; ++attempt) {
      double h = std::min(h_, t_limit - t_);
      if (h <= 0) fail(errc::numerical_breakdown, "integrator: nonpositive step");
      const bool clipped = h < h_;

      OdeState w{};
      const auto stage = [&](int idx, std::initializer_list<std::pair<int, double>> terms,
                             double cfrac) {
        for (int i = 0; i < dim_; ++i) {
          double acc = y_[i];
          for (const auto& [src, coef] : terms) acc += h * coef * k_[src][i];
          w[i] = acc;
        }
        rhs_(t_ + cfrac * h, w.data(), k_[idx].data());
      };
      stage(1, {{0, T::a21}}, T::c2);
      stage(2, {{0, T::a31}, {1, T::a32}}, T::c3);
      stage(3, {{0, T::a41}, {1, T::a42}, {2, T::a43}}, T::c4);
      stage(4, {{0, T::a51}, {1, T::a52}, {2, T::a53}, {3, T::a54}}, T::c5);
      stage(5, {{0, T::a61}, {1, T::a62}, {2, T::a63}, {3, T::a64}, {4, T::a65}}, 1.0);

      OdeState ynew{};
      for (int i = 0; i < dim_; ++i)
        ynew[i] = y_[i] + h * (T::a71 * k_[0][i] + T::a73 * k_[2][i] + T::a74 * k_[3][i] +
                               T::a75 * k_[4][i] + T::a76 * k_[5][i]);
      rhs_(t_ + h, ynew.data(), k_[6].data());

      double err = 0;
      for (int i = 0; i < dim_; ++i) {
        const double e = h * (T::e1 * k_[0][i] + T::e3 * k_[2][i] + T::e4 * k_[3][i] +
                              T::e5 * k_[4][i] + T::e6 * k_[5][i] + T::e7 * k_[6][i]);
        const double sc =
            opts_.atol + opts_.rtol * std::max(std::fabs(y_[i]), std::fabs(ynew[i]));
        err += (e / sc) * (e / sc);
      }
      err = std::sqrt(err / dim_);

      if (err <= 1.0) {
        DenseOutput::Step ds;
        ds.t0 = t_;
        ds.h = h;
        for (int i = 0; i < dim_; ++i) {
          const double dy = ynew[i] - y_[i];
          ds.r[0][i] = y_[i];
          ds.r[1][i] = dy;
          ds.r[2][i] = h * k_[0][i] - dy;
          ds.r[3][i] = dy - h * k_[6][i] - ds.r[2][i];
          ds.r[4][i] = h * (T::d1 * k_[0][i] + T::d3 * k_[2][i] + T::d4 * k_[3][i] +
                            T::d5 * k_[4][i] + T::d6 * k_[5][i] + T::d7 * k_[6][i]);
        }
        t_ += h;
        y_ = ynew;
        k_[0] = k_[6];  // first-same-as-last
        const double fac = std::clamp(0.9 * std::pow(err > 1e-32 ? err : 1e-32, -0.2),
                                      rejected_ ? 1.0 : 0.2, rejected_ ? 1.0 : 6.0);
        if (!clipped) h_ = h * fac;
        rejected_ = false;
        return ds;
      }
      rejected_ = true;
      h_ = h * std::max(0.2, 0.9 * std::pow(err, -0.2));
      if (h_ < 1e-14 * std::max(1.0, std::fabs(t_)))
        fail(errc::numerical_breakdown, "integrator: step size underflow");
    }
    fail(errc::numerical_breakdown, "integrator: repeated step rejection");
  }

 private:
  double initial_step() const {
    double dn = 0, yn = 0;
    for (int i = 0; i < dim_; ++i) {
      dn = std::max(dn, std::fabs(k_[0][i]));
      yn = std::max(yn, std::fabs(y_[i]));
    }
    const double h = 0.01 * (yn + 1e-6) / (dn + 1e-6);
    return std::clamp(h, 1e-8, 0.1);
  }

  const OdeRhs& rhs_;
  int dim_;
  IntegratorOptions opts_;
  double t_{0}, h_{0};
  OdeState y_{};
  std::array<OdeState, 7> k_{};
  bool rejected_{false};
};

}  // namespace detail

/// Integrate to the fixed time t1. The final state lands in y; the optional
/// dense output covers [t0, t1].
inline void integrate_to(const OdeRhs& rhs, int dim, OdeState& y, double t0, double t1,
                         const IntegratorOptions& opts = {}, DenseOutput* dense = nullptr) {
  if (t1 <= t0) fail(errc::precondition_violated, "integrate_to: needs t1 > t0");
  detail::Stepper st(rhs, dim, opts);
  st.start(t0, y);
  if (dense) {
    dense->dim = dim;
    dense->steps.clear();
  }
  for (long n = 0; n < opts.max_steps; ++n) {
    const DenseOutput::Step ds = st.step(t1);
    if (dense) dense->steps.push_back(ds);
    if (opts.inside && !opts.inside(st.t(), st.y().data()))
      fail(errc::domain_escape, "integrate_to: trajectory left the configured chart");
    if (st.t() >= t1 * (1 - 1e-16) && std::fabs(st.t() - t1) < 1e-12 * std::max(1.0, t1)) {
      y = st.y();
      return;
    }
  }
  fail(errc::numerical_breakdown, "integrate_to: step budget exhausted");
}

inline void rhs_eval(const OdeRhs& rhs, double t, const OdeState& y, OdeState& dy) {
  rhs(t, y.data(), dy.data());
}

/// Directional derivative of the event value along the flow, by a small
/// central difference in t on the frozen state plus the state drift term.
inline double event_slope(const EventSpec& event, double t, const OdeState& y, const OdeState& dy,
                          int dim) {
  const double h = 1e-7;
  OdeState yp = y, ym = y;
  for (int i = 0; i < dim; ++i) {
    yp[i] += h * dy[i];
    ym[i] -= h * dy[i];
  }
  return (event.value(t + h, yp.data()) - event.value(t - h, ym.data())) / (2 * h);
}

/// Integrate until the first upward zero crossing of the event function after
/// event.t_min, or until t_max. On a hit, the crossing time is refined on the
/// dense interpolant by bisection and polished by Newton with the true
/// right-hand side, and y holds the state at the event.
inline EventHit integrate_until_event(const OdeRhs& rhs, int dim, OdeState& y, double t0,
                                      double t_max, const EventSpec& event,
                                      const IntegratorOptions& opts = {},
                                      DenseOutput* dense = nullptr) {
  if (!event.value) fail(errc::precondition_violated, "integrate_until_event: no event");
  detail::Stepper st(rhs, dim, opts);
  st.start(t0, y);
  if (dense) {
    dense->dim = dim;
    dense->steps.clear();
  }
  double g_prev = event.value(t0, y.data());
  double t_prev = t0;

  OdeState buf{};
  const auto value_at = [&](const DenseOutput::Step& ds, double t) {
    const double th = (t - ds.t0) / ds.h, th1 = 1.0 - th;
    for (int i = 0; i < dim; ++i)
      buf[i] = ds.r[0][i] +
               th * (ds.r[1][i] + th1 * (ds.r[2][i] + th * (ds.r[3][i] + th1 * ds.r[4][i])));
    return event.value(t, buf.data());
  };

  for (long n = 0; n < opts.max_steps; ++n) {
    const DenseOutput::Step ds = st.step(t_max);
    if (dense) dense->steps.push_back(ds);
    if (opts.inside && !opts.inside(st.t(), st.y().data()))
      fail(errc::domain_escape, "integrate_until_event: trajectory left the chart");
    const double g_new = event.value(st.t(), st.y().data());
    if (st.t() > event.t_min && g_prev < 0 && g_new >= 0 && t_prev >= event.t_min) {
      // bracketed upward crossing inside this step
      double lo = std::max(t_prev, ds.t0), hi = st.t();
      for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (value_at(ds, mid) < 0)
          lo = mid;
        else
          hi = mid;
      }
      double t_ev = 0.5 * (lo + hi);
      // Newton polish: g' comes from the actual vector field
      OdeState dy{};
      for (int it = 0; it < 3; ++it) {
        const double g = value_at(ds, t_ev);
        rhs_eval(rhs, t_ev, buf, dy);
        const double gd = event_slope(event, t_ev, buf, dy, dim);
        if (gd == 0) break;
        const double tn = t_ev - g / gd;
        if (tn < ds.t0 || tn > ds.t0 + ds.h) break;
        t_ev = tn;
      }
      value_at(ds, t_ev);
      y = buf;
      return {true, t_ev};
    }
    g_prev = g_new;
    t_prev = st.t();
    if (st.t() >= t_max * (1 - 1e-16) && std::fabs(st.t() - t_max) < 1e-12 * std::max(1.0, t_max)) {
      y = st.y();
      return {false, st.t()};
    }
  }
  fail(errc::numerical_breakdown, "integrate_until_event: step budget exhausted");
}

}  // namespace crossbif
