#pragma once

#include <map>
#include <memory>
#include <vector>

#include "gwr/graph.hpp"
#include "gwr/matrix.hpp"
#include "gwr/ray_function.hpp"
#include "gwr/series.hpp"

namespace gwr {

// Free model: the operator H_0 = h_0 (+) h_1 (+) ... (+) h_N together with
// evaluable expansion kernels G_{0,j} of its resolvent. All kernel data is
// integer-derived, so it is computed exactly over rationals regardless of
// the scalar backend and cast on access.
template <class S>
struct FreeModel {
  GraphWithRays graph;
  bool two_id = false;   // h_0 = 2*id instead of the Dirichlet operator on K
  int kernel_cap = 8;    // largest usable kernel order
  int tail_cap = kDefaultTailCap;
  double rank_tol = kDefaultRankTol;
  Matrix<Rational> h0;   // exact; positive definite by construction

  // pure memos: idempotent fills keyed by derived data only
  struct Cache {
    std::map<int, Matrix<Rational>> h0_inv_pow;          // p -> h0^{-p}
    std::map<std::pair<int, int>, Series> ray_series;    // (min,max) -> entry series
    std::map<std::pair<int, int>, std::vector<Rational>> tail_poly;  // (j,m)
  };
  std::shared_ptr<Cache> cache = std::make_shared<Cache>();
};

struct FreeModelOptions {
  bool two_id = false;
  int kernel_cap = 8;
  int tail_cap = kDefaultTailCap;
  double rank_tol = kDefaultRankTol;
};

template <class S>
FreeModel<S> build_free_model(const GraphWithRays& g, const FreeModelOptions& opt = {}) {
  FreeModel<S> m;
  m.graph = g;
  m.two_id = opt.two_id;
  m.kernel_cap = opt.kernel_cap;
  m.tail_cap = opt.tail_cap;
  m.rank_tol = opt.rank_tol;
  m.h0 = Matrix<Rational>(g.k_size(), g.k_size());
  if (opt.two_id) {
    for (int v = 0; v < g.k_size(); ++v) m.h0(v, v) = 2;
  } else {
    for (int v = 0; v < g.k_size(); ++v)
      m.h0(v, v) = Rational(g.degree_k(v) + static_cast<int>(g.rays_at[v].size()));
    for (const auto& e : g.k_edges) {
      m.h0(e.first, e.second) = -1;
      m.h0(e.second, e.first) = -1;
    }
  }
  // h_0 has no zero eigenvalue for a connected K with at least one joint;
  // a failure here is a bug, never a valid input.
  if (!is_positive_definite(m.h0))
    fail(errc::not_positive_definite, "build_free_model: h0 is not positive definite");
  return m;
}

namespace detail {

template <class S>
const Matrix<Rational>& h0_inverse_power(const FreeModel<S>& m, int p) {
  auto it = m.cache->h0_inv_pow.find(p);
  if (it != m.cache->h0_inv_pow.end()) return it->second;
  Matrix<Rational> value;
  if (p == 1) value = inverse(m.h0);
  else value = h0_inverse_power(m, p - 1) * h0_inverse_power(m, 1);
  return m.cache->h0_inv_pow.emplace(p, std::move(value)).first->second;
}

// Exact closed-form half-line kernels for j <= 3; series extraction above.
inline Rational ray_kernel_exact(int j, int n, int m) {
  long mn = std::min(n, m), mx = std::max(n, m);
  switch (j) {
    case 0:
      return Rational(mn);
    case 1:
      return Rational(-static_cast<long>(n) * m);
    case 2:
      return rat(-mn, 6) + rat(mn * mn * mn, 6) +
             rat(static_cast<long>(n) * m * mx, 2);
    case 3: {
      long nn = n, mm = m;
      return rat(5 * nn * mm, 24) - rat(nn * nn * nn * mm, 6) -
             rat(nn * mm * mm * mm, 6);
    }
    default:
      break;
  }
  fail(errc::bad_argument, "ray_kernel_exact: only j <= 3 has a closed form here");
}

template <class S>
Rational ray_kernel_rational(const FreeModel<S>& m, int j, int n, int mm) {
  if (j <= 3) return ray_kernel_exact(j, n, mm);
  auto key = std::make_pair(std::min(n, mm), std::max(n, mm));
  auto it = m.cache->ray_series.find(key);
  if (it == m.cache->ray_series.end()) {
    Series s = ray_resolvent_entry_series(key.first, key.second, m.kernel_cap);
    it = m.cache->ray_series.emplace(key, std::move(s)).first;
  }
  return it->second[j];
}

// Polynomial in n of g_{alpha,j}[n,m] on the region n >= m, exact and
// verified on extra sample points. Degree is at most j.
template <class S>
const std::vector<Rational>& ray_tail_poly(const FreeModel<S>& m, int j, int mm) {
  auto key = std::make_pair(j, mm);
  auto it = m.cache->tail_poly.find(key);
  if (it != m.cache->tail_poly.end()) return it->second;
  std::vector<Rational> coeffs;
  switch (j) {
    case 0:
      coeffs = {Rational(mm)};
      break;
    case 1:
      coeffs = {Rational(0), Rational(-mm)};
      break;
    case 2:
      coeffs = {rat(-mm, 6) + rat(static_cast<long>(mm) * mm * mm, 6), Rational(0),
                rat(mm, 2)};
      break;
    case 3:
      coeffs = {Rational(0),
                rat(5 * static_cast<long>(mm), 24) -
                    rat(static_cast<long>(mm) * mm * mm, 6),
                Rational(0), rat(-mm, 6)};
      break;
    default: {
      // exact Vandermonde fit on j+1 samples n = m .. m+j
      int d = j;
      Matrix<Rational> vand(d + 1, d + 1);
      std::vector<Rational> rhs(static_cast<size_t>(d) + 1);
      for (int r = 0; r <= d; ++r) {
        long n = mm + r;
        Rational pw(1);
        for (int c = 0; c <= d; ++c) {
          vand(r, c) = pw;
          pw *= Rational(n);
        }
        rhs[static_cast<size_t>(r)] = ray_kernel_rational(m, j, static_cast<int>(n), mm);
      }
      coeffs = mat_vec(inverse(vand), rhs);
      for (int extra = 1; extra <= 3; ++extra) {
        long n = mm + d + extra;
        if (poly_eval(coeffs, n) != ray_kernel_rational(m, j, static_cast<int>(n), mm))
          fail(errc::bad_argument, "ray_tail_poly: kernel is not polynomial at this order");
      }
      break;
    }
  }
  return m.cache->tail_poly.emplace(key, std::move(coeffs)).first->second;
}

}  // namespace detail

// Kernel entry G_{0,j}[x,y]: block diagonal, zero across blocks; the K block
// is (-1)^{j/2} h0^{-j/2-1} for even j and 0 for odd j.
template <class S>
S free_kernel(const FreeModel<S>& m, int j, const SiteIndex& x, const SiteIndex& y) {
  if (j < 0 || j > m.kernel_cap) fail(errc::order_exceeds_cap, "free_kernel: order exceeds cap");
  if (x.is_k() != y.is_k()) return scalar_traits<S>::zero();
  if (x.is_k()) {
    if (j % 2 == 1) return scalar_traits<S>::zero();
    Rational v = detail::h0_inverse_power(m, j / 2 + 1)(x.k_index, y.k_index);
    if ((j / 2) % 2 == 1) v = -v;
    return scalar_from_rational<S>(v);
  }
  if (x.ray != y.ray) return scalar_traits<S>::zero();
  return scalar_from_rational<S>(detail::ray_kernel_rational(m, j, x.position, y.position));
}

// Applies G_{0,j} to a finitely supported function, producing an exact
// RayFunction whose ray tails are polynomials of degree <= j.
template <class S>
RayFunction<S> apply_free_coefficient(const FreeModel<S>& m, int j, const RayFunction<S>& u) {
  if (j < 0 || j > m.kernel_cap)
    fail(errc::order_exceeds_cap, "apply_free_coefficient: order exceeds cap");
  if (!u.finitely_supported())
    fail(errc::not_finitely_supported, "apply_free_coefficient: input has nonzero tails");
  if (j > m.tail_cap)
    fail(errc::order_exceeds_cap, "apply_free_coefficient: tail degree cap too small");
  const GraphWithRays& g = m.graph;
  RayFunction<S> r(g, u.tail_cap);
  if (j % 2 == 0) {
    const Matrix<Rational>& hp = detail::h0_inverse_power(m, j / 2 + 1);
    bool neg = (j / 2) % 2 == 1;
    for (int x = 0; x < g.k_size(); ++x) {
      S acc = scalar_traits<S>::zero();
      for (int y = 0; y < g.k_size(); ++y) {
        Rational kv = hp(x, y);
        if (neg) kv = -kv;
        acc += scalar_from_rational<S>(kv) * u.k_values[y];
      }
      r.k_values[x] = acc;
    }
  }
  for (int alpha = 0; alpha < g.ray_count(); ++alpha) {
    int h = u.head_len(alpha);
    if (h == 0) continue;
    auto& ray = r.rays[alpha];
    ray.head.assign(static_cast<size_t>(h), scalar_traits<S>::zero());
    for (int n = 1; n <= h; ++n) {
      S acc = scalar_traits<S>::zero();
      for (int mm = 1; mm <= h; ++mm)
        acc += scalar_from_rational<S>(detail::ray_kernel_rational(m, j, n, mm)) *
               u.rays[alpha].head[mm - 1];
      ray.head[n - 1] = acc;
    }
    ray.tail.assign(static_cast<size_t>(j) + 1, scalar_traits<S>::zero());
    for (int mm = 1; mm <= h; ++mm) {
      const S& um = u.rays[alpha].head[mm - 1];
      if (scalar_traits<S>::exact && um == scalar_traits<S>::zero()) continue;
      const auto& poly = detail::ray_tail_poly(m, j, mm);
      for (size_t d = 0; d < poly.size(); ++d)
        ray.tail[d] += scalar_from_rational<S>(poly[d]) * um;
    }
  }
  r.trim();
  return r;
}

}  // namespace gwr
