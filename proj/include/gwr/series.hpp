#pragma once

#include <vector>

#include "gwr/scalar.hpp"

namespace gwr {

// Truncated power series in kappa with exact rational coefficients.
// coeff[j] is the kappa^j coefficient; arithmetic never reads past order().
struct Series {
  std::vector<Rational> c;

  Series() = default;
  explicit Series(int order) : c(static_cast<size_t>(order) + 1, Rational(0)) {}

  int order() const { return static_cast<int>(c.size()) - 1; }
  Rational& operator[](int j) { return c[static_cast<size_t>(j)]; }
  const Rational& operator[](int j) const { return c[static_cast<size_t>(j)]; }

  static Series constant(const Rational& value, int order) {
    Series s(order);
    s[0] = value;
    return s;
  }
};

inline Series series_add(const Series& a, const Series& b) {
  int n = std::min(a.order(), b.order());
  Series r(n);
  for (int j = 0; j <= n; ++j) r[j] = a[j] + b[j];
  return r;
}

inline Series series_sub(const Series& a, const Series& b) {
  int n = std::min(a.order(), b.order());
  Series r(n);
  for (int j = 0; j <= n; ++j) r[j] = a[j] - b[j];
  return r;
}

inline Series series_scale(const Rational& c, const Series& a) {
  Series r = a;
  for (auto& x : r.c) x *= c;
  return r;
}

inline Series series_mul(const Series& a, const Series& b) {
  int n = std::min(a.order(), b.order());
  Series r(n);
  for (int i = 0; i <= n; ++i) {
    if (a[i] == 0) continue;
    for (int j = 0; i + j <= n; ++j) r[i + j] += a[i] * b[j];
  }
  return r;
}

// Multiplication by kappa^k (index shift up, truncated).
inline Series series_shift_up(const Series& a, int k) {
  Series r(a.order());
  for (int j = k; j <= a.order(); ++j) r[j] = a[j - k];
  return r;
}

// Exact division by kappa^k; the dropped low coefficients must vanish.
// The result is only trusted up to order() - k; the high slots are zero.
inline Series series_shift_down(const Series& a, int k) {
  for (int j = 0; j < k; ++j)
    if (a[j] != 0) fail(errc::bad_argument, "series_shift_down: nonzero low coefficient");
  Series r(a.order() - k);
  for (int j = 0; j + k <= a.order(); ++j) r[j] = a[j + k];
  return r;
}

// Inverse of a series with nonzero constant term, by back-substitution.
inline Series series_inv(const Series& a) {
  if (a[0] == 0)
    fail(errc::division_by_zero_constant_term, "series_inv: zero constant term");
  Series r(a.order());
  r[0] = 1 / a[0];
  for (int j = 1; j <= a.order(); ++j) {
    Rational acc(0);
    for (int i = 1; i <= j; ++i) acc += a[i] * r[j - i];
    r[j] = -acc / a[0];
  }
  return r;
}

// sqrt(1 + a) for a series a with zero constant term, via the recursion
// s^2 = 1 + a solved order by order with s[0] = 1.
inline Series series_sqrt_one_plus(const Series& a) {
  if (a[0] != 0)
    fail(errc::bad_argument, "series_sqrt_one_plus: expects zero constant term");
  Series s(a.order());
  s[0] = 1;
  for (int j = 1; j <= a.order(); ++j) {
    Rational acc(0);
    for (int i = 1; i < j; ++i) acc += s[i] * s[j - i];
    s[j] = (a[j] - acc) / 2;
  }
  return s;
}

inline Series series_pow(const Series& a, int n) {
  Series r = Series::constant(Rational(1), a.order());
  Series base = a;
  int e = n;
  while (e > 0) {
    if (e & 1) r = series_mul(r, base);
    base = series_mul(base, base);
    e >>= 1;
  }
  return r;
}

// mu(kappa) = 1 + kappa^2/2 - kappa*sqrt(1 + kappa^2/4): the root of
// mu^2 - (2 + kappa^2) mu + 1 = 0 with mu(0) = 1 and mu decreasing.
// This is the decay factor of the Dirichlet half-line resolvent.
inline Series mu_series(int order) {
  Series a(order);
  if (order >= 2) a[2] = rat(1, 4);
  Series root = series_sqrt_one_plus(a);
  Series mu(order);
  mu[0] = 1;
  if (order >= 2) mu[2] = rat(1, 2);
  return series_sub(mu, series_shift_up(root, 1));
}

// Series of the free half-line resolvent entry
//   r(kappa)[n,m] = (mu^|n-m| - mu^(n+m)) / (mu^{-1} - mu).
// Numerator and denominator both vanish to first order at kappa = 0; one
// power of kappa is cancelled exactly before dividing. Coefficient j of the
// result is g_{alpha,j}[n,m].
inline Series ray_resolvent_entry_series(int n, int m, int order) {
  if (n < 1 || m < 1) fail(errc::bad_argument, "ray_resolvent_entry_series: positions start at 1");
  const int work = order + 2;
  Series mu = mu_series(work);
  int lo = std::abs(n - m), hi = n + m;
  Series num = series_sub(series_pow(mu, lo), series_pow(mu, hi));
  Series den = series_sub(series_inv(mu), mu);
  Series num1 = series_shift_down(num, 1);
  Series den1 = series_shift_down(den, 1);
  Series q = series_mul(num1, series_inv(den1));
  Series out(order);
  for (int j = 0; j <= order; ++j) out[j] = q[j];
  return out;
}

}  // namespace gwr
