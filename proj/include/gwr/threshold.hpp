#pragma once

#include <string>
#include <vector>

#include "gwr/free_model.hpp"
#include "gwr/matrix.hpp"
#include "gwr/operator_expr.hpp"
#include "gwr/perturbation.hpp"

namespace gwr {

enum class ThresholdClass { Regular, FirstKind, SecondKind, ThirdKind };

inline const char* to_string(ThresholdClass c) {
  switch (c) {
    case ThresholdClass::Regular: return "regular";
    case ThresholdClass::FirstKind: return "first kind";
    case ThresholdClass::SecondKind: return "second kind";
    case ThresholdClass::ThirdKind: return "third kind";
  }
  return "?";
}

// A function known up to an overall positive scale: represents
// sqrt(scale2) * fn with scale2 kept exact. Orthonormal bases in rational
// mode are reported this way (the norms involve square roots).
template <class S>
struct ScaledFunction {
  RayFunction<S> fn;
  S scale2;
};

// The K-space operators of the inversion scheme, plus the Gram-Schmidt
// chain used by the map z.
template <class S>
struct IntermediateOperators {
  Matrix<S> M0;
  Subspace<S> QK;       // Ker M0
  Matrix<S> Qproj;
  Matrix<S> m0;         // -sum |Q v* n^a><Q v* n^a|
  Subspace<S> SK;       // Ker m0 within QK
  Matrix<S> Sproj;
  Subspace<S> PK;       // span{v* n^a}
  Matrix<S> Pproj;
  Matrix<S> n_pairings;  // k x N, column a = v* n^(a)

  // psi_tilde[a] realizes Psi^(a) = psi_tilde[a] / sqrt(scale2[a]); entries
  // with zero scale are skipped by the pseudo-inverse convention.
  std::vector<RayFunction<S>> psi_tilde;
  std::vector<Vector<S>> phi_tilde;  // v* psi_tilde[a]
  std::vector<S> psi_scale2;
};

template <class S>
IntermediateOperators<S> intermediate_operators(const FreeModel<S>& m,
                                                const FactoredPerturbation<S>& v) {
  const GraphWithRays& g = m.graph;
  const int k = v.k;
  const int N = g.ray_count();
  IntermediateOperators<S> out;
  out.M0 = Mj_matrix(m, v, 0);
  out.QK = null_space(out.M0);
  out.Qproj = orthogonal_projection(out.QK);

  out.n_pairings = Matrix<S>(k, N, m.rank_tol);
  std::vector<RayFunction<S>> nfn;
  for (int a = 0; a < N; ++a) {
    nfn.push_back(n_function<S>(g, a, m.tail_cap));
    Vector<S> col = vstar_apply(v, nfn.back());
    for (int i = 0; i < k; ++i) out.n_pairings(i, a) = col[static_cast<size_t>(i)];
  }

  out.m0 = Matrix<S>(k, k, m.rank_tol);
  for (int a = 0; a < N; ++a) {
    Vector<S> col(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) col[static_cast<size_t>(i)] = out.n_pairings(i, a);
    Vector<S> qc = mat_vec(out.Qproj, col);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        out.m0(i, j) -= qc[static_cast<size_t>(i)] * qc[static_cast<size_t>(j)];
  }
  out.SK = subspace_intersect(null_space(out.m0), out.QK);
  out.Sproj = orthogonal_projection(out.SK);
  out.PK = make_subspace(k, out.n_pairings);
  out.Pproj = orthogonal_projection(out.PK);

  // inductive Gram-Schmidt chain (170807): psi~(a) = n^(a) - sum_{c<a}
  // <v* Psi^c, v* n^a> Psi^c, with the scalar pseudo-inverse skipping
  // zero-norm members.
  S scale = max_abs(out.M0) + max_abs(out.n_pairings);
  for (int a = 0; a < N; ++a) {
    RayFunction<S> psi = nfn[a];
    Vector<S> na(static_cast<size_t>(k));
    for (int i = 0; i < k; ++i) na[static_cast<size_t>(i)] = out.n_pairings(i, a);
    for (int c = 0; c < a; ++c) {
      if (scalar_traits<S>::is_zero(out.psi_scale2[c], scale, m.rank_tol)) continue;
      S coeff = dot(out.phi_tilde[c], na) / out.psi_scale2[c];
      psi = rf_sub(psi, rf_scale(coeff, out.psi_tilde[c]));
    }
    Vector<S> phi = vstar_apply(v, psi);
    out.psi_tilde.push_back(psi);
    out.phi_tilde.push_back(phi);
    out.psi_scale2.push_back(dot(phi, phi));
  }
  return out;
}

// z Phi = sum_a |Psi^a><Phi^a| M0 Phi - G_{0,0} v Phi, exact via the
// unnormalized chain since each dyad carries 1/scale2.
template <class S>
RayFunction<S> z_apply(const FreeModel<S>& m, const FactoredPerturbation<S>& v,
                       const IntermediateOperators<S>& io, const Vector<S>& phi) {
  Vector<S> mphi = mat_vec(io.M0, phi);
  RayFunction<S> r = rf_scale(S(-1),
      apply_free_coefficient(m, 0, v_apply(v, m.graph, phi)));
  S scale = max_abs(io.M0) + S(1);
  for (size_t a = 0; a < io.psi_tilde.size(); ++a) {
    if (scalar_traits<S>::is_zero(io.psi_scale2[a], scale, m.rank_tol)) continue;
    S coeff = dot(io.phi_tilde[a], mphi) / io.psi_scale2[a];
    r = rf_add(r, rf_scale(coeff, io.psi_tilde[a]));
  }
  return r;
}

// w Psi = U v* Psi; defined for functions with tails of degree <= 1.
template <class S>
Vector<S> w_apply(const FactoredPerturbation<S>& v, const RayFunction<S>& psi) {
  if (psi.max_tail_degree() > 1)
    fail(errc::tail_degree_too_high, "w_apply: function grows faster than n");
  return mat_vec(v.U, vstar_apply(v, psi));
}

template <class S>
ThresholdClass classify_from(const IntermediateOperators<S>& io, double tol) {
  if (io.QK.dim() == 0) return ThresholdClass::Regular;
  S scale = max_abs(io.m0);
  bool m0_zero = true;
  for (const auto& x : io.m0.a)
    if (!scalar_traits<S>::is_zero(x, scale, tol)) { m0_zero = false; break; }
  if (m0_zero) return ThresholdClass::SecondKind;
  if (io.SK.dim() == 0) return ThresholdClass::FirstKind;
  return ThresholdClass::ThirdKind;
}

// Full threshold analysis output: classification, eigenspace dimensions and
// bases with exact polynomial tails, the projection operators, and the data
// the expansion engine reuses.
template <class S>
struct ThresholdReport {
  ThresholdClass classification = ThresholdClass::Regular;
  int ray_count = 0;
  int dim_nonresonance = 0;  // dim(E~ / E)
  int dim_resonance = 0;     // dim(E / E_bound)
  int dim_bound = 0;         // dim E_bound

  IntermediateOperators<S> io;

  // canonical (echelon tie-break) representatives
  std::vector<RayFunction<S>> bound_basis;          // zero tails
  std::vector<RayFunction<S>> resonance_reps;       // constant tails
  std::vector<RayFunction<S>> nonresonance_reps;    // linear tails, via z
  std::vector<RayFunction<S>> kernel_n_combos;      // C n intersect Ker V part

  // orthonormal bases carried as sqrt(scale2)*fn pairs
  std::vector<ScaledFunction<S>> bound_onb;
  std::vector<ScaledFunction<S>> resonance_onb;
  // leading 1-coefficients of the orthonormal resonance basis: c^(g) =
  // sqrt(scale2) * c_rational
  std::vector<Vector<S>> resonance_c;   // rational parts
  Matrix<S> complement_gram;            // R = I_N - sum scale2 |c><c|

  DyadList<S> bound_projection;      // P_bound = G_-2
  DyadList<S> resonance_projection;  // P_res = G_-1
};

template <class S>
ThresholdReport<S> eigenspaces(const FreeModel<S>& m, const FactoredPerturbation<S>& v) {
  const GraphWithRays& g = m.graph;
  const int N = g.ray_count();
  ThresholdReport<S> rep;
  rep.ray_count = N;
  rep.io = intermediate_operators(m, v);
  const auto& io = rep.io;
  rep.classification = classify_from(io, m.rank_tol);

  Subspace<S> bound_sub = subspace_orthocomplement_within(io.QK, io.PK);
  rep.dim_bound = bound_sub.dim();
  rep.dim_resonance = io.QK.dim() - rep.dim_bound;

  // bound basis: z restricted to QK is -G_{0,0} v
  for (int c = 0; c < bound_sub.dim(); ++c) {
    Vector<S> phi(static_cast<size_t>(v.k));
    for (int i = 0; i < v.k; ++i) phi[static_cast<size_t>(i)] = bound_sub.basis(i, c);
    rep.bound_basis.push_back(z_apply(m, v, io, phi));
  }

  // resonance representatives: extend the bound basis to a QK basis and take
  // the added columns (pivot selection makes this canonical)
  if (rep.dim_resonance > 0) {
    Matrix<S> joint(v.k, bound_sub.dim() + io.QK.dim(), m.rank_tol);
    for (int i = 0; i < v.k; ++i) {
      for (int c = 0; c < bound_sub.dim(); ++c) joint(i, c) = bound_sub.basis(i, c);
      for (int c = 0; c < io.QK.dim(); ++c) joint(i, bound_sub.dim() + c) = io.QK.basis(i, c);
    }
    Matrix<S> work = joint;
    std::vector<int> pivots = rref_inplace(work);
    for (int p : pivots) {
      if (p < bound_sub.dim()) continue;
      Vector<S> phi(static_cast<size_t>(v.k));
      for (int i = 0; i < v.k; ++i) phi[static_cast<size_t>(i)] = joint(i, p);
      rep.resonance_reps.push_back(z_apply(m, v, io, phi));
    }
  }

  // non-resonance representatives: z on M0^+ [PK cap (QK)^perp] ...
  Subspace<S> pq = subspace_orthocomplement_within(io.PK, io.QK);
  Matrix<S> m0p = pseudo_inverse(io.M0);
  for (int c = 0; c < pq.dim(); ++c) {
    Vector<S> phi2(static_cast<size_t>(v.k));
    for (int i = 0; i < v.k; ++i) phi2[static_cast<size_t>(i)] = pq.basis(i, c);
    rep.nonresonance_reps.push_back(z_apply(m, v, io, mat_vec(m0p, phi2)));
  }
  // ... plus C n cap Ker V, solved directly as a null space
  Matrix<S> ker = kernel_basis(io.n_pairings);
  for (int c = 0; c < ker.cols; ++c) {
    RayFunction<S> u(g, m.tail_cap);
    for (int a = 0; a < N; ++a)
      u = rf_add(u, rf_scale(ker(a, c), n_function<S>(g, a, m.tail_cap)));
    rep.kernel_n_combos.push_back(u);
    rep.nonresonance_reps.push_back(u);
  }
  rep.dim_nonresonance = static_cast<int>(rep.nonresonance_reps.size());

  // bound projection P = -G00 v (S M2 S)^+ v* G00 with orthonormal basis
  // from the PSD split of -(S M2 S)^+
  if (rep.dim_bound > 0) {
    Matrix<S> m2 = Mj_matrix(m, v, 2);
    Matrix<S> w = io.Sproj * m2 * io.Sproj;
    Matrix<S> neg_wp = S(-1) * pseudo_inverse(w);
    std::vector<std::pair<Vector<S>, S>> split;
    try {
      split = ldlt_psd(neg_wp);
    } catch (const error&) {
      fail(errc::consistency_violation,
           "eigenspaces: S M2 S is not negative definite on SK, contradicting the "
           "resolvent bound");
    }
    if (static_cast<int>(split.size()) != rep.dim_bound)
      fail(errc::consistency_violation,
           "eigenspaces: S M2 S is singular on SK, contradicting the resolvent bound");
    for (auto& [l, d] : split) {
      RayFunction<S> b = rf_scale(S(-1), apply_free_coefficient(m, 0, v_apply(v, g, l)));
      rep.bound_projection.push_back({b, b, d});
      rep.bound_onb.push_back({b, d});
    }
  }

  // resonance projection P = -(I-P_b) G00 v m0^+ v* G00 (I-P_b)
  if (rep.dim_resonance > 0) {
    Matrix<S> neg_m0p = S(-1) * pseudo_inverse(io.m0);
    for (auto& [l, d] : ldlt_psd(neg_m0p)) {
      RayFunction<S> psi = rf_scale(S(-1), apply_free_coefficient(m, 0, v_apply(v, g, l)));
      psi = rf_sub(psi, apply_dyads(g, rep.bound_projection, psi));
      rep.resonance_projection.push_back({psi, psi, d});
      rep.resonance_onb.push_back({psi, d});
      Vector<S> c(static_cast<size_t>(N));
      RayFunction<S> vpsi = apply_V(v, psi);
      for (int a = 0; a < N; ++a)
        c[static_cast<size_t>(a)] = -pair(n_function<S>(g, a, m.tail_cap), vpsi);
      rep.resonance_c.push_back(std::move(c));
    }
  }

  rep.complement_gram = Matrix<S>::identity(N, m.rank_tol);
  for (size_t gamma = 0; gamma < rep.resonance_c.size(); ++gamma) {
    const S& d = rep.resonance_onb[gamma].scale2;
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b)
        rep.complement_gram(a, b) -= d * rep.resonance_c[gamma][static_cast<size_t>(a)] *
                                     rep.resonance_c[gamma][static_cast<size_t>(b)];
  }
  return rep;
}

template <class S>
ThresholdClass classify(const FreeModel<S>& m, const FactoredPerturbation<S>& v) {
  return classify_from(intermediate_operators(m, v), m.rank_tol);
}

}  // namespace gwr
