#pragma once

// Error-free transformations, double-double and quad-double arithmetic.
//
// The alternating binomial sums that build Laguerre coefficients cancel
// catastrophically for strongly specular channels: intermediate terms can
// exceed the result by 30-50 orders of magnitude. Compensated double runs
// out at ~16 digits, double-double at ~32, so a quad-double (~62 digit)
// level is provided as well. The expansion algorithms follow Shewchuk's
// exact-arithmetic primitives; products use FMA for the roundoff term.

#include <cmath>
#include <cstdlib>
#include <algorithm>

namespace fadinglab {

inline double two_sum(double a, double b, double& err) {
  double s = a + b;
  double bb = s - a;
  err = (a - (s - bb)) + (b - bb);
  return s;
}

// requires |a| >= |b| or a == 0
inline double quick_two_sum(double a, double b, double& err) {
  double s = a + b;
  err = b - (s - a);
  return s;
}

inline double two_prod(double a, double b, double& err) {
  double p = a * b;
  err = std::fma(a, b, -p);
  return p;
}

// Neumaier compensated accumulator.
struct comp_sum {
  double s = 0.0, c = 0.0;
  void add(double x) {
    double t = s + x;
    if (std::abs(s) >= std::abs(x))
      c += (s - t) + x;
    else
      c += (x - t) + s;
    s = t;
  }
  double value() const { return s + c; }
};

// ---------------------------------------------------------------- double-double

struct dd {
  double hi = 0.0, lo = 0.0;

  dd() = default;
  dd(double h) : hi(h), lo(0.0) {}
  dd(double h, double l) : hi(h), lo(l) {}

  explicit operator double() const { return hi + lo; }
};

inline double to_double(const dd& a) { return a.hi + a.lo; }

inline dd dd_norm(double h, double l) {
  double e;
  double s = quick_two_sum(h, l, e);
  return dd(s, e);
}

inline dd operator+(const dd& a, const dd& b) {
  double s1, s2, t1, t2;
  s1 = two_sum(a.hi, b.hi, s2);
  t1 = two_sum(a.lo, b.lo, t2);
  s2 += t1;
  s1 = quick_two_sum(s1, s2, s2);
  s2 += t2;
  return dd_norm(s1, s2);
}

inline dd operator-(const dd& a) { return dd(-a.hi, -a.lo); }
inline dd operator-(const dd& a, const dd& b) { return a + (-b); }

inline dd operator*(const dd& a, const dd& b) {
  double e;
  double p = two_prod(a.hi, b.hi, e);
  e += a.hi * b.lo + a.lo * b.hi;
  return dd_norm(p, e);
}

inline dd operator/(const dd& a, const dd& b) {
  double q1 = a.hi / b.hi;
  dd r = a - dd(q1) * b;
  double q2 = r.hi / b.hi;
  r = r - dd(q2) * b;
  double q3 = r.hi / b.hi;
  double e;
  double s = quick_two_sum(q1, q2, e);
  dd q = dd_norm(s, e) + dd(q3);
  return q;
}

inline dd operator+(const dd& a, double b) { return a + dd(b); }
inline dd operator*(const dd& a, double b) { return a * dd(b); }
inline dd operator/(const dd& a, double b) { return a / dd(b); }
inline bool operator<(const dd& a, const dd& b) { return a.hi < b.hi || (a.hi == b.hi && a.lo < b.lo); }

inline dd dd_abs(const dd& a) { return a.hi < 0.0 ? -a : a; }

// ---------------------------------------------------------------- expansions

namespace detail {

// Grow a nonoverlapping expansion e[0..n) (increasing magnitude) by b.
// h may alias e. Returns new length (n+1).
inline int grow_expansion(const double* e, int n, double b, double* h) {
  double q = b;
  for (int i = 0; i < n; ++i) {
    double err;
    double s = two_sum(q, e[i], err);
    h[i] = err;
    q = s;
  }
  h[n] = q;
  return n + 1;
}

// Shewchuk COMPRESS: e[0..n) increasing magnitude -> h increasing magnitude,
// largest component a faithful approximation of the total. Returns length.
inline int compress_expansion(const double* e, int n, double* h) {
  if (n == 0) {
    h[0] = 0.0;
    return 1;
  }
  double g[64];
  double q = e[n - 1];
  int bottom = n - 1;
  for (int i = n - 2; i >= 0; --i) {
    double err;
    double s = two_sum(q, e[i], err);
    if (err != 0.0) {
      g[bottom--] = s;
      q = err;
    } else {
      q = s;
    }
  }
  g[bottom] = q;
  int top = 0;
  q = g[bottom];
  for (int i = bottom + 1; i <= n - 1; ++i) {
    double err;
    double s = two_sum(g[i], q, err);
    if (err != 0.0) h[top++] = err;
    q = s;
  }
  h[top++] = q;
  return top;
}

}  // namespace detail

// ---------------------------------------------------------------- quad-double

struct qd {
  // components in decreasing magnitude, nonoverlapping; value = sum
  double x[4] = {0.0, 0.0, 0.0, 0.0};

  qd() = default;
  qd(double d) { x[0] = d; }
  qd(double a, double b, double c, double d) {
    x[0] = a;
    x[1] = b;
    x[2] = c;
    x[3] = d;
  }
  explicit qd(const dd& a) {
    x[0] = a.hi;
    x[1] = a.lo;
  }
  explicit operator double() const { return x[0]; }
};

inline double to_double(const qd& a) { return ((a.x[3] + a.x[2]) + a.x[1]) + a.x[0]; }
inline double to_double(double a) { return a; }

namespace detail {

inline qd qd_from_expansion(const double* e, int n) {
  double h[64];
  int m = compress_expansion(e, n, h);
  qd r;
  for (int i = 0; i < 4 && i < m; ++i) r.x[i] = h[m - 1 - i];
  return r;
}

}  // namespace detail

inline qd operator+(const qd& a, const qd& b) {
  double e[16];
  int n = 0;
  double buf[16];
  for (int i = 3; i >= 0; --i)
    if (a.x[i] != 0.0) n = detail::grow_expansion(e, n, a.x[i], e);
  for (int i = 3; i >= 0; --i)
    if (b.x[i] != 0.0) n = detail::grow_expansion(e, n, b.x[i], e);
  (void)buf;
  if (n == 0) return qd();
  return detail::qd_from_expansion(e, n);
}

inline qd operator-(const qd& a) { return qd(-a.x[0], -a.x[1], -a.x[2], -a.x[3]); }
inline qd operator-(const qd& a, const qd& b) { return a + (-b); }

inline qd operator*(const qd& a, const qd& b) {
  // products with i+j <= 3 carry roundoff terms; band i+j == 4 enters plainly,
  // anything further is below 2^-250 relative and is dropped
  double comps[24];
  int m = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4 - i; ++j) {
      double err;
      double p = two_prod(a.x[i], b.x[j], err);
      if (p != 0.0) comps[m++] = p;
      if (err != 0.0) comps[m++] = err;
    }
  }
  if (a.x[1] != 0.0 && b.x[3] != 0.0) comps[m++] = a.x[1] * b.x[3];
  if (a.x[2] != 0.0 && b.x[2] != 0.0) comps[m++] = a.x[2] * b.x[2];
  if (a.x[3] != 0.0 && b.x[1] != 0.0) comps[m++] = a.x[3] * b.x[1];
  if (m == 0) return qd();
  double e[64];
  int n = 0;
  for (int i = 0; i < m; ++i) n = detail::grow_expansion(e, n, comps[i], e);
  return detail::qd_from_expansion(e, n);
}

inline qd operator*(const qd& a, double b) { return a * qd(b); }
inline qd operator+(const qd& a, double b) { return a + qd(b); }
inline qd operator-(const qd& a, double b) { return a - qd(b); }

inline qd operator/(const qd& a, const qd& b) {
  // Newton iteration on the reciprocal, then one correction of the quotient
  qd r(1.0 / b.x[0]);
  for (int it = 0; it < 3; ++it) r = r + r * (qd(1.0) - b * r);
  qd q = a * r;
  q = q + (a - q * b) * r;
  return q;
}

inline qd operator/(const qd& a, double b) { return a / qd(b); }
inline bool operator<(const qd& a, const qd& b) { return to_double(a - b) < 0.0; }

inline qd qd_abs(const qd& a) { return a.x[0] < 0.0 ? -a : a; }

// ------------------------------------------------- generic real helpers

template <class Real>
inline Real real_from(double v) {
  return Real(v);
}

inline double abs_value(double a) { return std::abs(a); }
inline double abs_value(const dd& a) { return std::abs(to_double(a)); }
inline double abs_value(const qd& a) { return std::abs(to_double(a)); }

}  // namespace fadinglab
