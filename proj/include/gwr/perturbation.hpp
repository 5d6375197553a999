#pragma once

#include <vector>

#include "gwr/free_model.hpp"
#include "gwr/graph.hpp"
#include "gwr/matrix.hpp"
#include "gwr/ray_function.hpp"

namespace gwr {

// Factored perturbation V = v U v* with v injective and U a self-adjoint
// unitary on K-space (dimension k). Columns are finitely supported, which
// places V in every weighted class the theorems require.
template <class S>
struct FactoredPerturbation {
  int k = 0;
  std::vector<RayFunction<S>> columns;
  Matrix<S> U;
  int support_radius = 0;

  bool empty() const { return k == 0; }
};

template <class S>
int columns_support_radius(const std::vector<RayFunction<S>>& columns) {
  int radius = 0;
  for (const auto& c : columns)
    for (size_t ray = 0; ray < c.rays.size(); ++ray)
      radius = std::max(radius, c.head_len(static_cast<int>(ray)));
  return radius;
}

template <class S>
FactoredPerturbation<S> build_factored(const GraphWithRays& g,
                                       std::vector<RayFunction<S>> columns, Matrix<S> u) {
  FactoredPerturbation<S> v;
  v.k = static_cast<int>(columns.size());
  if (u.rows != v.k || u.cols != v.k)
    fail(errc::bad_argument, "build_factored: U dimension mismatch");
  if (!is_symmetric(u)) fail(errc::non_symmetric_u, "build_factored: U is not symmetric");
  Matrix<S> uu = u * u;
  Matrix<S> eye = Matrix<S>::identity(v.k, u.rank_tol);
  S scale = max_abs(u);
  for (int i = 0; i < v.k; ++i)
    for (int j = 0; j < v.k; ++j)
      if (!scalar_traits<S>::is_zero(uu(i, j) - eye(i, j), scale * scale, u.rank_tol))
        fail(errc::non_unitary_u, "build_factored: U^2 != I");
  for (auto& c : columns) {
    c.trim();
    if (!c.finitely_supported())
      fail(errc::not_finitely_supported, "build_factored: column has a nonzero tail");
  }
  // injectivity: stack column values over the joint support window
  if (v.k > 0) {
    int radius = columns_support_radius(columns);
    std::vector<SiteIndex> sites = window_sites(g, radius);
    Matrix<S> stacked(static_cast<int>(sites.size()), v.k, u.rank_tol);
    for (int c = 0; c < v.k; ++c)
      for (size_t s = 0; s < sites.size(); ++s)
        stacked(static_cast<int>(s), c) = columns[c].at(sites[s]);
    if (rank(stacked) != v.k)
      fail(errc::dependent_columns, "build_factored: columns are linearly dependent");
    v.support_radius = radius;
  }
  v.columns = std::move(columns);
  v.U = std::move(u);
  return v;
}

// The joining operator J = -sum_alpha(|s_alpha><f_alpha| + |f_alpha><s_alpha|)
// with -Delta_G = H_0 + J, factored with one s-column per distinct joint
// vertex paired against the sum of that vertex's f's (keeps v injective when
// several rays share a joint). Defined relative to the default Dirichlet h_0.
template <class S>
FactoredPerturbation<S> joining_perturbation(const GraphWithRays& g,
                                             double rank_tol = kDefaultRankTol) {
  std::vector<int> distinct;  // joint vertices in first-appearance order
  for (int alpha = 0; alpha < g.ray_count(); ++alpha) {
    int x = g.joints[alpha];
    bool seen = false;
    for (int d : distinct) seen = seen || (d == x);
    if (!seen) distinct.push_back(x);
  }
  std::vector<RayFunction<S>> columns;
  Matrix<S> u(2 * static_cast<int>(distinct.size()), 2 * static_cast<int>(distinct.size()),
              rank_tol);
  for (size_t d = 0; d < distinct.size(); ++d) {
    RayFunction<S> s = delta_function<S>(g, SiteIndex::kvertex(distinct[d]));
    RayFunction<S> f(g);
    for (int alpha : g.rays_at[distinct[d]])
      f = rf_add(f, delta_function<S>(g, SiteIndex::ray_site(alpha, 1)));
    columns.push_back(std::move(s));
    columns.push_back(std::move(f));
    u(static_cast<int>(2 * d), static_cast<int>(2 * d + 1)) = S(-1);
    u(static_cast<int>(2 * d + 1), static_cast<int>(2 * d)) = S(-1);
  }
  return build_factored(g, std::move(columns), std::move(u));
}

// v* u as a K-space vector of pairings <v_i, u>; defined for any u since the
// columns are finitely supported.
template <class S>
Vector<S> vstar_apply(const FactoredPerturbation<S>& v, const RayFunction<S>& u) {
  Vector<S> r(static_cast<size_t>(v.k), scalar_traits<S>::zero());
  for (int i = 0; i < v.k; ++i) r[static_cast<size_t>(i)] = pair(v.columns[i], u);
  return r;
}

template <class S>
RayFunction<S> v_apply(const FactoredPerturbation<S>& v, const GraphWithRays& g,
                       const Vector<S>& phi) {
  RayFunction<S> r(g);
  for (int i = 0; i < v.k; ++i)
    r = rf_add(r, rf_scale(phi[static_cast<size_t>(i)], v.columns[i]));
  return r;
}

template <class S>
RayFunction<S> apply_V(const FactoredPerturbation<S>& v, const RayFunction<S>& u) {
  if (v.k == 0) {
    RayFunction<S> zero = u;
    for (auto& x : zero.k_values) x = scalar_traits<S>::zero();
    for (auto& ray : zero.rays) { ray.head.clear(); ray.tail.clear(); }
    return zero;
  }
  Vector<S> coords = mat_vec(v.U, vstar_apply(v, u));
  RayFunction<S> r = u;
  for (auto& x : r.k_values) x = scalar_traits<S>::zero();
  for (auto& ray : r.rays) { ray.head.clear(); ray.tail.clear(); }
  for (int i = 0; i < v.k; ++i)
    r = rf_add(r, rf_scale(coords[static_cast<size_t>(i)], v.columns[i]));
  return r;
}

// Auto-factorization of a dense symmetric finitely supported V over a site
// window, via eigendecomposition: columns sqrt(|lambda|) u_j, U = diag(sign).
// Float backend only; rational users must supply factors.
template <class S>
FactoredPerturbation<S> factor_dense(const GraphWithRays& g,
                                     const std::vector<SiteIndex>& sites,
                                     const Matrix<S>& entries, double rank_tol = kDefaultRankTol) {
  if constexpr (scalar_traits<S>::exact) {
    (void)g; (void)sites; (void)entries; (void)rank_tol;
    fail(errc::rational_backend_unsupported,
         "factor_dense: float backend only; supply factors in rational mode");
  } else {
    require_symmetric(entries, "factor_dense");
    std::vector<double> w;
    Matrix<double> vecs;
    symmetric_eigen(entries, w, vecs);
    double scale = 0.0;
    for (double x : w) scale = std::max(scale, std::abs(x));
    std::vector<RayFunction<S>> columns;
    std::vector<int> signs;
    for (int j = 0; j < static_cast<int>(w.size()); ++j) {
      if (std::abs(w[j]) <= rank_tol * std::max(scale, 1.0)) continue;
      RayFunction<S> col(g);
      double root = std::sqrt(std::abs(w[j]));
      for (size_t s = 0; s < sites.size(); ++s) {
        double val = root * vecs(static_cast<int>(s), j);
        if (sites[s].is_k()) col.k_values[sites[s].k_index] += val;
        else col.set_head_value(sites[s].ray, sites[s].position,
                                col.at(sites[s]) + val);
      }
      columns.push_back(std::move(col));
      signs.push_back(w[j] > 0 ? 1 : -1);
    }
    Matrix<S> u(static_cast<int>(signs.size()), static_cast<int>(signs.size()), rank_tol);
    for (size_t j = 0; j < signs.size(); ++j)
      u(static_cast<int>(j), static_cast<int>(j)) = static_cast<double>(signs[j]);
    auto fact = build_factored(g, std::move(columns), std::move(u));
    // reconstruction residual check
    double err = 0.0, nrm = 0.0;
    for (size_t a = 0; a < sites.size(); ++a) {
      RayFunction<S> da = delta_function<S>(g, sites[a]);
      RayFunction<S> va = apply_V(fact, da);
      for (size_t b = 0; b < sites.size(); ++b) {
        double got = va.at(sites[b]);
        double want = entries(static_cast<int>(b), static_cast<int>(a));
        err = std::max(err, std::abs(got - want));
        nrm = std::max(nrm, std::abs(want));
      }
    }
    if (err > 1e-10 * std::max(nrm, 1.0))
      fail(errc::bad_argument, "factor_dense: reconstruction residual too large");
    return fact;
  }
}

// H = H_0 + V applied to a function with polynomial tails; exact on tails.
template <class S>
RayFunction<S> apply_H(const FreeModel<S>& m, const FactoredPerturbation<S>& v,
                       const RayFunction<S>& u) {
  return rf_add(apply_free_operator(m.graph, u, m.two_id), apply_V(v, u));
}

// M_0 = U + v* G_{0,0} v and M_j = v* G_{0,j} v for j >= 1.
template <class S>
Matrix<S> Mj_matrix(const FreeModel<S>& m, const FactoredPerturbation<S>& v, int j) {
  Matrix<S> r(v.k, v.k, m.rank_tol);
  for (int l = 0; l < v.k; ++l) {
    RayFunction<S> gl = apply_free_coefficient(m, j, v.columns[l]);
    for (int i = 0; i <= l; ++i) {
      S val = pair(v.columns[i], gl);
      r(i, l) = val;
      r(l, i) = val;
    }
  }
  if (j == 0) r = r + v.U;
  return r;
}

// Casts a rational perturbation to another backend (used by the oracle).
template <class S>
FactoredPerturbation<S> perturbation_cast(const FactoredPerturbation<Rational>& v) {
  FactoredPerturbation<S> r;
  r.k = v.k;
  r.support_radius = v.support_radius;
  r.U = Matrix<S>(v.k, v.k);
  for (int i = 0; i < v.k; ++i)
    for (int j = 0; j < v.k; ++j) r.U(i, j) = scalar_from_rational<S>(v.U(i, j));
  for (const auto& c : v.columns) r.columns.push_back(rf_cast<S>(c));
  return r;
}

}  // namespace gwr
