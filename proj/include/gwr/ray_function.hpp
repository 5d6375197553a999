#pragma once

#include <algorithm>
#include <vector>

#include "gwr/graph.hpp"
#include "gwr/scalar.hpp"

namespace gwr {

constexpr int kDefaultTailCap = 6;

// Polynomial helpers on dense coefficient vectors c0..cD (value sum c_d n^d).
template <class S>
S poly_eval(const std::vector<S>& c, long n) {
  S x = scalar_traits<S>::zero();
  S pw = scalar_traits<S>::one();
  S nn = S(static_cast<int>(n));
  for (const S& coeff : c) {
    x += coeff * pw;
    pw *= nn;
  }
  return x;
}

// Coefficients of p(n + shift) given those of p(n).
template <class S>
std::vector<S> poly_shift(const std::vector<S>& c, int shift) {
  const int d = static_cast<int>(c.size());
  std::vector<S> out(c.size(), scalar_traits<S>::zero());
  std::vector<std::vector<long>> binom(d, std::vector<long>(d, 0));
  for (int i = 0; i < d; ++i) {
    binom[i][0] = 1;
    for (int j = 1; j <= i; ++j)
      binom[i][j] = binom[i - 1][j - 1] + (j <= i - 1 ? binom[i - 1][j] : 0);
  }
  for (int e = 0; e < d; ++e) {
    if (scalar_traits<S>::exact && c[e] == scalar_traits<S>::zero()) continue;
    long spow = 1;
    for (int k = 0; k <= e; ++k) {
      // term c_e * C(e, e-k) * shift^k * n^(e-k)
      out[e - k] += c[e] * S(static_cast<int>(binom[e][e - k] * spow));
      spow *= shift;
    }
  }
  return out;
}

// Function on a graph with rays: scalar per K vertex, a finite head on each
// ray, and an exact polynomial tail valid beyond the head. The head always
// overrides the tail at positions it covers.
template <class S>
struct RayFunction {
  struct Ray {
    std::vector<S> head;   // values at positions 1..head.size()
    std::vector<S> tail;   // polynomial coefficients c0..cD for n > head.size()
  };
  std::vector<S> k_values;
  std::vector<Ray> rays;
  int tail_cap = kDefaultTailCap;

  RayFunction() = default;
  explicit RayFunction(const GraphWithRays& g, int cap = kDefaultTailCap)
      : k_values(g.k_size(), scalar_traits<S>::zero()), rays(g.ray_count()), tail_cap(cap) {}

  S at(const SiteIndex& x) const {
    if (x.is_k()) return k_values[x.k_index];
    const Ray& r = rays[x.ray];
    if (x.position <= static_cast<int>(r.head.size())) return r.head[x.position - 1];
    return poly_eval(r.tail, x.position);
  }

  int head_len(int ray) const { return static_cast<int>(rays[ray].head.size()); }

  bool tail_zero(int ray) const {
    for (const S& c : rays[ray].tail)
      if (!(c == scalar_traits<S>::zero())) return false;
    return true;
  }

  bool finitely_supported() const {
    for (size_t r = 0; r < rays.size(); ++r)
      if (!tail_zero(static_cast<int>(r))) return false;
    return true;
  }

  int tail_degree(int ray) const {
    const auto& t = rays[ray].tail;
    for (int d = static_cast<int>(t.size()) - 1; d >= 0; --d)
      if (!(t[d] == scalar_traits<S>::zero())) return d;
    return -1;  // zero tail
  }

  // Largest tail degree over all rays; -1 when finitely supported.
  int max_tail_degree() const {
    int d = -1;
    for (size_t r = 0; r < rays.size(); ++r) d = std::max(d, tail_degree(static_cast<int>(r)));
    return d;
  }

  void trim() {
    for (auto& r : rays) {
      while (!r.tail.empty() && r.tail.back() == scalar_traits<S>::zero()) r.tail.pop_back();
      while (!r.head.empty() && r.head.back() == scalar_traits<S>::zero()) {
        // only safe to drop a trailing head value if the tail agrees there
        int n = static_cast<int>(r.head.size());
        if (!(poly_eval(r.tail, n) == scalar_traits<S>::zero())) break;
        r.head.pop_back();
      }
    }
  }

  void set_head_value(int ray, int n, const S& v) {
    auto& h = rays[ray].head;
    if (static_cast<int>(h.size()) < n) {
      // extend the head with tail values so evaluation is unchanged
      int old = static_cast<int>(h.size());
      h.resize(n, scalar_traits<S>::zero());
      for (int i = old + 1; i < n; ++i) h[i - 1] = poly_eval(rays[ray].tail, i);
    }
    h[n - 1] = v;
  }
};

template <class S>
RayFunction<S> delta_function(const GraphWithRays& g, const SiteIndex& x,
                              int cap = kDefaultTailCap) {
  RayFunction<S> u(g, cap);
  if (x.is_k()) u.k_values[x.k_index] = scalar_traits<S>::one();
  else u.set_head_value(x.ray, x.position, scalar_traits<S>::one());
  return u;
}

// n^(alpha): position value n on ray alpha, zero elsewhere.
template <class S>
RayFunction<S> n_function(const GraphWithRays& g, int alpha, int cap = kDefaultTailCap) {
  RayFunction<S> u(g, cap);
  u.rays[alpha].tail = {scalar_traits<S>::zero(), scalar_traits<S>::one()};
  return u;
}

// 1^(alpha): constant one on ray alpha, zero elsewhere.
template <class S>
RayFunction<S> one_function(const GraphWithRays& g, int alpha, int cap = kDefaultTailCap) {
  RayFunction<S> u(g, cap);
  u.rays[alpha].tail = {scalar_traits<S>::one()};
  return u;
}

template <class S>
RayFunction<S> rf_add(const RayFunction<S>& a, const RayFunction<S>& b) {
  RayFunction<S> r = a;
  for (size_t i = 0; i < r.k_values.size(); ++i) r.k_values[i] += b.k_values[i];
  for (size_t ray = 0; ray < r.rays.size(); ++ray) {
    int h = std::max(a.head_len(static_cast<int>(ray)), b.head_len(static_cast<int>(ray)));
    auto& rr = r.rays[ray];
    const auto& ta = a.rays[ray].tail;
    const auto& tb = b.rays[ray].tail;
    std::vector<S> tail(std::max(ta.size(), tb.size()), scalar_traits<S>::zero());
    for (size_t d = 0; d < tail.size(); ++d) {
      if (d < ta.size()) tail[d] += ta[d];
      if (d < tb.size()) tail[d] += tb[d];
    }
    std::vector<S> head(static_cast<size_t>(h));
    for (int n = 1; n <= h; ++n)
      head[n - 1] = a.at(SiteIndex::ray_site(static_cast<int>(ray), n)) +
                    b.at(SiteIndex::ray_site(static_cast<int>(ray), n));
    rr.head = std::move(head);
    rr.tail = std::move(tail);
  }
  r.trim();
  return r;
}

template <class S>
RayFunction<S> rf_scale(const S& c, const RayFunction<S>& a) {
  RayFunction<S> r = a;
  for (auto& v : r.k_values) v = c * v;
  for (auto& ray : r.rays) {
    for (auto& v : ray.head) v = c * v;
    for (auto& v : ray.tail) v = c * v;
  }
  return r;
}

template <class S>
RayFunction<S> rf_sub(const RayFunction<S>& a, const RayFunction<S>& b) {
  return rf_add(a, rf_scale(S(-1), b));
}

// Exact equality as functions (all sites).
template <class S>
bool rf_equal(const RayFunction<S>& a, const RayFunction<S>& b) {
  if (a.k_values != b.k_values) return false;
  for (size_t ray = 0; ray < a.rays.size(); ++ray) {
    int h = std::max(a.head_len(static_cast<int>(ray)), b.head_len(static_cast<int>(ray)));
    for (int n = 1; n <= h; ++n) {
      SiteIndex x = SiteIndex::ray_site(static_cast<int>(ray), n);
      if (!(a.at(x) == b.at(x))) return false;
    }
    const auto& ta = a.rays[ray].tail;
    const auto& tb = b.rays[ray].tail;
    for (size_t d = 0; d < std::max(ta.size(), tb.size()); ++d) {
      S ca = d < ta.size() ? ta[d] : scalar_traits<S>::zero();
      S cb = d < tb.size() ? tb[d] : scalar_traits<S>::zero();
      if (!(ca == cb)) return false;
    }
  }
  return true;
}

// Duality pairing <u1, u2> = sum_x u1[x] u2[x] (real scalars). Requires a
// summable product: on every ray at least one factor must have a zero tail.
template <class S>
S pair(const RayFunction<S>& u1, const RayFunction<S>& u2) {
  S acc = scalar_traits<S>::zero();
  for (size_t i = 0; i < u1.k_values.size(); ++i) acc += u1.k_values[i] * u2.k_values[i];
  for (size_t ray = 0; ray < u1.rays.size(); ++ray) {
    int r = static_cast<int>(ray);
    bool z1 = u1.tail_zero(r), z2 = u2.tail_zero(r);
    if (!z1 && !z2)
      fail(errc::non_summable_pair, "pair: both factors have nonzero tails on a ray");
    int upto = z1 ? u1.head_len(r) : u2.head_len(r);
    for (int n = 1; n <= upto; ++n) {
      SiteIndex x = SiteIndex::ray_site(r, n);
      acc += u1.at(x) * u2.at(x);
    }
  }
  return acc;
}

enum class SpaceKind { L1Weighted, LinfDualWeighted };

// Membership in the weighted spaces: u is in L^s iff finitely supported
// (a nonzero polynomial tail is never l^1-summable against (1+n^2)^(s/2),
// s >= 0), and u is in (L^s)* iff every tail degree is at most s.
template <class S>
bool space_membership(const RayFunction<S>& u, const Rational& s, SpaceKind kind) {
  if (kind == SpaceKind::L1Weighted) return u.finitely_supported();
  for (size_t ray = 0; ray < u.rays.size(); ++ray) {
    int d = u.tail_degree(static_cast<int>(ray));
    if (d >= 0 && Rational(d) > s) return false;
  }
  return true;
}

namespace detail {
// Shared difference stencil on ray interiors: (Lu)[n] = 2u[n]-u[n-1]-u[n+1],
// with the value at n=0 supplied by the caller (joint value or Dirichlet 0).
template <class S>
void ray_second_difference(const RayFunction<S>& u, int ray, const S& at_zero,
                           typename RayFunction<S>::Ray& out) {
  int h = u.head_len(ray);
  int out_h = h + 1;
  out.head.assign(static_cast<size_t>(out_h), scalar_traits<S>::zero());
  for (int n = 1; n <= out_h; ++n) {
    S um = (n == 1) ? at_zero : u.at(SiteIndex::ray_site(ray, n - 1));
    S u0 = u.at(SiteIndex::ray_site(ray, n));
    S up = u.at(SiteIndex::ray_site(ray, n + 1));
    out.head[n - 1] = S(2) * u0 - um - up;
  }
  const auto& t = u.rays[ray].tail;
  std::vector<S> tp = poly_shift(t, 1), tm = poly_shift(t, -1);
  out.tail.assign(t.size(), scalar_traits<S>::zero());
  for (size_t d = 0; d < t.size(); ++d) out.tail[d] = S(2) * t[d] - tp[d] - tm[d];
}
}  // namespace detail

// Graph Laplacian -Delta_G: second differences along rays plus the joint
// edges {x_alpha, 1^(alpha)}.
template <class S>
RayFunction<S> apply_graph_laplacian(const GraphWithRays& g, const RayFunction<S>& u) {
  RayFunction<S> r(g, u.tail_cap);
  for (int v = 0; v < g.k_size(); ++v) {
    S acc = S(g.degree_k(v) + static_cast<int>(g.rays_at[v].size())) * u.k_values[v];
    for (int w : g.adjacency[v]) acc -= u.k_values[w];
    for (int alpha : g.rays_at[v]) acc -= u.at(SiteIndex::ray_site(alpha, 1));
    r.k_values[v] = acc;
  }
  for (int alpha = 0; alpha < g.ray_count(); ++alpha)
    detail::ray_second_difference(u, alpha, u.k_values[g.joints[alpha]], r.rays[alpha]);
  r.trim();
  return r;
}

// Free operator H_0 = h_0 (+) h_1 (+) ... (+) h_N: Dirichlet condition on
// each ray (no joint coupling) and the Dirichlet Schroedinger operator on K.
// two_id replaces h_0 by 2*id on K.
template <class S>
RayFunction<S> apply_free_operator(const GraphWithRays& g, const RayFunction<S>& u,
                                   bool two_id = false) {
  RayFunction<S> r(g, u.tail_cap);
  for (int v = 0; v < g.k_size(); ++v) {
    if (two_id) {
      r.k_values[v] = S(2) * u.k_values[v];
    } else {
      S acc = S(g.degree_k(v) + static_cast<int>(g.rays_at[v].size())) * u.k_values[v];
      for (int w : g.adjacency[v]) acc -= u.k_values[w];
      r.k_values[v] = acc;
    }
  }
  for (int alpha = 0; alpha < g.ray_count(); ++alpha)
    detail::ray_second_difference(u, alpha, scalar_traits<S>::zero(), r.rays[alpha]);
  r.trim();
  return r;
}

// Casts a rational-backend function to another scalar backend.
template <class S>
RayFunction<S> rf_cast(const RayFunction<Rational>& u) {
  RayFunction<S> r;
  r.tail_cap = u.tail_cap;
  r.k_values.reserve(u.k_values.size());
  for (const auto& v : u.k_values) r.k_values.push_back(scalar_from_rational<S>(v));
  r.rays.resize(u.rays.size());
  for (size_t i = 0; i < u.rays.size(); ++i) {
    for (const auto& v : u.rays[i].head) r.rays[i].head.push_back(scalar_from_rational<S>(v));
    for (const auto& v : u.rays[i].tail) r.rays[i].tail.push_back(scalar_from_rational<S>(v));
  }
  return r;
}

}  // namespace gwr
