#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <vector>

#include "crossbif/common.hpp"

namespace crossbif {

/// Sparse polynomial in up to four variables. The library uses two variable
/// conventions: map families read slots as (q, p, eps, delta), Hamiltonian
/// data as (x, y, p_x, p_y). Exponents are tiny, coefficients are double.
class Poly {
 public:
  struct Term {
    std::array<int, 4> e{0, 0, 0, 0};
    double c{0};
  };

  Poly() = default;
  explicit Poly(double constant) {
    if (constant != 0) terms_.push_back({{0, 0, 0, 0}, constant});
  }

  static Poly variable(int slot, int power = 1, double coef = 1.0) {
    Poly p;
    Term t;
    t.e[slot] = power;
    t.c = coef;
    p.terms_.push_back(t);
    return p;
  }

  static Poly monomial(const std::array<int, 4>& e, double coef) {
    Poly p;
    if (coef != 0) p.terms_.push_back({e, coef});
    return p;
  }

  const std::vector<Term>& terms() const { return terms_; }
  bool zero() const { return terms_.empty(); }

  void add_term(const std::array<int, 4>& e, double coef) {
    terms_.push_back({e, coef});
    normalize();
  }

  Poly& operator+=(const Poly& o) {
    terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
    normalize();
    return *this;
  }
  Poly operator+(const Poly& o) const {
    Poly r = *this;
    r += o;
    return r;
  }
  Poly operator-(const Poly& o) const {
    Poly r = *this;
    for (const Term& t : o.terms_) r.terms_.push_back({t.e, -t.c});
    r.normalize();
    return r;
  }
  Poly operator*(double s) const {
    Poly r = *this;
    for (Term& t : r.terms_) t.c *= s;
    r.normalize();
    return r;
  }
  Poly operator*(const Poly& o) const {
    Poly r;
    for (const Term& ta : terms_)
      for (const Term& tb : o.terms_) {
        Term t;
        for (int i = 0; i < 4; ++i) t.e[i] = ta.e[i] + tb.e[i];
        t.c = ta.c * tb.c;
        r.terms_.push_back(t);
      }
    r.normalize();
    return r;
  }

  Poly derivative(int slot) const {
    Poly r;
    for (const Term& t : terms_) {
      if (t.e[slot] == 0) continue;
      Term d = t;
      d.c = t.c * t.e[slot];
      d.e[slot] -= 1;
      r.terms_.push_back(d);
    }
    r.normalize();
    return r;
  }

  /// Evaluate with plain power products. Powers are expanded as repeated
  /// multiplies so a zero factor annihilates its term exactly in floating
  /// point; invariant-plane arguments then stay exactly on the plane.
  double eval(const std::array<double, 4>& v) const {
    double acc = 0;
    for (const Term& t : terms_) {
      double m = t.c;
      for (int i = 0; i < 4; ++i)
        for (int k = 0; k < t.e[i]; ++k) m *= v[i];
      acc += m;
    }
    return acc;
  }

  /// Partial evaluation: pin one variable to a constant.
  Poly substituted(int slot, double value) const {
    Poly r;
    for (const Term& t : terms_) {
      Term s = t;
      for (int k = 0; k < t.e[slot]; ++k) s.c *= value;
      s.e[slot] = 0;
      r.terms_.push_back(s);
    }
    r.normalize();
    return r;
  }

  bool depends_on(int slot) const {
    for (const Term& t : terms_)
      if (t.e[slot] > 0) return true;
    return false;
  }

  int degree(int slot) const {
    int d = 0;
    for (const Term& t : terms_) d = std::max(d, t.e[slot]);
    return d;
  }

 private:
  void normalize() {
    std::sort(terms_.begin(), terms_.end(), [](const Term& a, const Term& b) {
      return a.e < b.e;
    });
    std::vector<Term> out;
    for (const Term& t : terms_) {
      if (!out.empty() && out.back().e == t.e)
        out.back().c += t.c;
      else
        out.push_back(t);
    }
    out.erase(std::remove_if(out.begin(), out.end(),
                             [](const Term& t) { return t.c == 0.0; }),
              out.end());
    terms_ = std::move(out);
  }

  std::vector<Term> terms_;
};

}  // namespace crossbif
