#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace crossbif {

inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class errc {
  domain_escape,
  numerical_breakdown,
  no_convergence,
  singular_jacobian,
  seed_not_fixed,
  precondition_violated,
  not_cross,
  energy_forbidden,
  no_return,
  no_well,
  turning_point_not_found,
  rank2_detected,
  no_unit_eigenvalue,
  identity_jacobian,
  config_invalid,
  io_error,
};

inline const char* errc_name(errc c) {
  switch (c) {
    case errc::domain_escape: return "DomainEscape";
    case errc::numerical_breakdown: return "NumericalBreakdown";
    case errc::no_convergence: return "NoConvergence";
    case errc::singular_jacobian: return "SingularJacobian";
    case errc::seed_not_fixed: return "SeedNotFixed";
    case errc::precondition_violated: return "PreconditionViolated";
    case errc::not_cross: return "NotCross";
    case errc::energy_forbidden: return "EnergyForbidden";
    case errc::no_return: return "NoReturn";
    case errc::no_well: return "NoWell";
    case errc::turning_point_not_found: return "TurningPointNotFound";
    case errc::rank2_detected: return "Rank2Detected";
    case errc::no_unit_eigenvalue: return "NoUnitEigenvalue";
    case errc::identity_jacobian: return "IdentityJacobian";
    case errc::config_invalid: return "ConfigInvalid";
    case errc::io_error: return "IoError";
  }
  return "Unknown";
}

/// Single exception type for the library; the code tells callers (and the
/// CLI exit-status mapping) what went wrong.
class Error : public std::runtime_error {
 public:
  Error(errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw Error(code, msg); }

struct Vec2 {
  double x{0}, y{0};

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  double norm() const { return std::hypot(x, y); }
  double norm_inf() const { return std::max(std::fabs(x), std::fabs(y)); }
};

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }

struct Mat2 {
  // row-major: [[a, b], [c, d]]
  double a{0}, b{0}, c{0}, d{0};

  static Mat2 identity() { return {1, 0, 0, 1}; }
  static Mat2 rotation(double theta) {
    const double co = std::cos(theta), si = std::sin(theta);
    return {co, -si, si, co};
  }

  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }
  double norm_inf() const {
    return std::max(std::fabs(a) + std::fabs(b), std::fabs(c) + std::fabs(d));
  }

  Vec2 operator*(const Vec2& v) const { return {a * v.x + b * v.y, c * v.x + d * v.y}; }
  Mat2 operator*(const Mat2& m) const {
    return {a * m.a + b * m.c, a * m.b + b * m.d, c * m.a + d * m.c, c * m.b + d * m.d};
  }
  Mat2 operator-(const Mat2& m) const { return {a - m.a, b - m.b, c - m.c, d - m.d}; }
  Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }

  Mat2 transpose() const { return {a, c, b, d}; }
  Mat2 inverse() const {
    const double dt = det();
    return {d / dt, -b / dt, -c / dt, a / dt};
  }

  /// Eigenvalues of a symmetric 2x2 (returns {smaller, larger}).
  std::array<double, 2> sym_eigenvalues() const {
    const double m = 0.5 * trace();
    const double disc = std::sqrt(std::max(0.0, m * m - det()));
    return {m - disc, m + disc};
  }
};

/// A point of the extended phase space: section coordinates plus the family
/// parameter.
struct Point3 {
  double q{0}, p{0}, eps{0};

  bool finite() const {
    return std::isfinite(q) && std::isfinite(p) && std::isfinite(eps);
  }
};

/// Tolerance ladder used across the classification pipeline. Defaults match
/// analytic (polynomial) families; numerical() loosens them to the noise
/// floor of finite-difference jets over an integrated map.
struct Tolerances {
  double fixed_point = 1e-9;      // |Q-q|, |P-p| at a fixed point
  double trace_unit = 1e-7;       // |tr J - 2| for eigenvalue-1 detection
  double identity = 1e-7;         // ||J - I||_inf for the excluded identity case
  double rank2 = 1e-7;            // |P_eps| in rotated coordinates
  double hessian_scale = 1e-8;    // |det H| vs hessian_scale*(1+||H||^2)
  double p_qq = 1e-7;             // transcriticality threshold on |P_qq|
  double fork_criterion = 1e-7;   // threshold on |3 Q_qq P_qp - Q_p P_qqq|
  double newton = 1e-12;          // fixed-point Newton residual
  double symplectic = 1e-9;       // |det J - 1| for analytic families
  double qp_min = 1e-6;           // lower bound on |Q_p| in adapted coordinates
  double frame_residual = 1e-8;   // adapted-frame first-order residuals

  static Tolerances analytic() { return {}; }

  /// Preset for numerically induced (section-map) families: second/third
  /// order finite differences over an integrator carry noise around
  /// 1e-3..1e-2, so structural thresholds sit well above that.
  static Tolerances numerical() {
    Tolerances t;
    t.fixed_point = 1e-8;
    t.trace_unit = 1e-6;
    t.identity = 1e-6;
    t.rank2 = 1e-4;
    t.hessian_scale = 1e-3;
    t.p_qq = 3e-2;
    t.fork_criterion = 3e-2;
    t.newton = 1e-10;
    t.symplectic = 1e-6;
    t.qp_min = 1e-6;
    t.frame_residual = 1e-5;
    return t;
  }
};

}  // namespace crossbif
