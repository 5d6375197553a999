#pragma once

#include <vector>

#include "gwr/operator_expr.hpp"
#include "gwr/threshold.hpp"

namespace gwr {

namespace detail {
template <class S>
bool matrices_close(const Matrix<S>& a, const Matrix<S>& b, double tol) {
  if (a.rows != b.rows || a.cols != b.cols) return false;
  S scale = max_abs(a) + max_abs(b);
  for (size_t i = 0; i < a.a.size(); ++i)
    if (!scalar_traits<S>::is_zero(a.a[i] - b.a[i], scale, tol)) return false;
  return true;
}
}  // namespace detail

// Coefficient list of a kappa-expansion of matrices, with a starting index
// (which is negative for the singular inversions).
template <class S>
struct CoeffList {
  int lo = 0;
  std::vector<Matrix<S>> mats;

  int hi() const { return lo + static_cast<int>(mats.size()) - 1; }
  bool has(int j) const { return j >= lo && j <= hi(); }
  const Matrix<S>& get(int j) const { return mats[static_cast<size_t>(j - lo)]; }
};

// Neumann-series inversion of X_0 + kappa X_1 + ... + projector, where the
// projector completes X_0 to an invertible matrix (pass zero for a plainly
// invertible X_0). Emits the B/C-style coefficient lists of the scheme.
template <class S>
CoeffList<S> neumann_cascade(const std::vector<Matrix<S>>& x, const Matrix<S>& proj,
                             int order) {
  const int n = x[0].rows;
  Matrix<S> lead = x[0] + proj;
  Matrix<S> r0;
  try {
    r0 = inverse(lead);
  } catch (const error&) {
    fail(errc::leading_not_invertible, "neumann_cascade: X0 + projector is singular");
  }
  CoeffList<S> out;
  out.lo = 0;
  out.mats.push_back(r0);
  for (int j = 1; j <= order; ++j) {
    Matrix<S> acc(n, n, x[0].rank_tol);
    for (int a = 1; a <= j && a < static_cast<int>(x.size()); ++a)
      acc = acc + x[a] * out.mats[static_cast<size_t>(j - a)];
    out.mats.push_back(S(-1) * (r0 * acc));
  }
  return out;
}

// Neumann inversion restricted to a subspace: X_0 must be invertible there
// (X_0 X_0^+ equals the subspace projection), and the inserted resolvent is
// the pseudo-inverse. In the second/third kind a failure here contradicts
// the a-priori resolvent bound and is reported as such.
template <class S>
CoeffList<S> restricted_neumann(const std::vector<Matrix<S>>& x, const Matrix<S>& subspace_proj,
                                int order, bool consistency = false) {
  const int n = x[0].rows;
  Matrix<S> r0 = pseudo_inverse(x[0]);
  if (!detail::matrices_close(x[0] * r0, subspace_proj, x[0].rank_tol)) {
    if (consistency)
      fail(errc::consistency_violation,
           "restricted_neumann: leading matrix singular on its subspace, contradicting the "
           "resolvent bound");
    fail(errc::leading_not_invertible, "restricted_neumann: leading matrix singular on subspace");
  }
  CoeffList<S> out;
  out.lo = 0;
  out.mats.push_back(r0);
  for (int j = 1; j <= order; ++j) {
    Matrix<S> acc(n, n, x[0].rank_tol);
    for (int a = 1; a <= j && a < static_cast<int>(x.size()); ++a)
      acc = acc + x[a] * out.mats[static_cast<size_t>(j - a)];
    out.mats.push_back(S(-1) * (r0 * acc));
  }
  return out;
}

// The sandwich cascade m(kappa) = P Mt(kappa) (I + kappa R0 Mt(kappa))^{-1} P
// with Mt = X_1 + kappa X_2 + ...; produces m_0..m_order. With P = Q and
// R0 = M0^+ + Q this reproduces the printed m-coefficients; with P = S and
// R0 = m0^+ + S the q-coefficients.
template <class S>
std::vector<Matrix<S>> sandwich_cascade(const std::vector<Matrix<S>>& x, const Matrix<S>& p,
                                        const Matrix<S>& r0, int order) {
  const int n = x[0].rows;
  std::vector<Matrix<S>> w;  // W_0 = I, W_j = -sum_a R0 X_{a} W_{j-a}
  w.push_back(Matrix<S>::identity(n, x[0].rank_tol));
  for (int j = 1; j <= order; ++j) {
    Matrix<S> acc(n, n, x[0].rank_tol);
    for (int a = 1; a <= j && a < static_cast<int>(x.size()); ++a)
      acc = acc + r0 * x[a] * w[static_cast<size_t>(j - a)];
    w.push_back(S(-1) * acc);
  }
  std::vector<Matrix<S>> out;
  for (int j = 0; j <= order; ++j) {
    Matrix<S> acc(n, n, x[0].rank_tol);
    for (int a = 0; a <= j; ++a)
      if (a + 1 < static_cast<int>(x.size()))
        acc = acc + x[a + 1] * w[static_cast<size_t>(j - a)];
    out.push_back(p * acc * p);
  }
  return out;
}

// m_0..m_order of the first inversion step (insertions M0^+ + Q).
template <class S>
std::vector<Matrix<S>> m_coefficients(const FreeModel<S>& model, const FactoredPerturbation<S>& v,
                                      const IntermediateOperators<S>& io, int order) {
  std::vector<Matrix<S>> mlist;
  for (int j = 0; j <= order + 1; ++j) mlist.push_back(Mj_matrix(model, v, j));
  Matrix<S> b0 = pseudo_inverse(io.M0) + io.Qproj;
  return sandwich_cascade(mlist, io.Qproj, b0, order);
}

// q_0..q_order of the second inversion step (insertions m0^+ + S).
template <class S>
std::vector<Matrix<S>> q_coefficients(const std::vector<Matrix<S>>& mlist, const Matrix<S>& m0,
                                      const Matrix<S>& sproj, int order) {
  Matrix<S> c0 = pseudo_inverse(m0) + sproj;
  return sandwich_cascade(mlist, sproj, c0, order);
}

namespace detail {

// out += coeff * sum over j1+j2+j3 = total of G_{0,j1} v X_{j2} v* G_{0,j3},
// with gv[j][i] = G_{0,j} v_i precomputed.
template <class S>
void add_sandwiched(OperatorExpr<S>& out, const CoeffList<S>& x, int total,
                    const std::vector<std::vector<RayFunction<S>>>& gv, const S& coeff) {
  const int kdim = gv.empty() || gv[0].empty() ? 0 : static_cast<int>(gv[0].size());
  if (kdim == 0) return;
  for (int j1 = 0; j1 < static_cast<int>(gv.size()); ++j1)
    for (int j3 = 0; j3 < static_cast<int>(gv.size()); ++j3) {
      int j2 = total - j1 - j3;
      if (!x.has(j2)) continue;
      const Matrix<S>& mid = x.get(j2);
      for (int i = 0; i < kdim; ++i)
        for (int l = 0; l < kdim; ++l) {
          S w = coeff * mid(i, l);
          if (scalar_traits<S>::exact && w == scalar_traits<S>::zero()) continue;
          out.add_dyad(gv[static_cast<size_t>(j1)][static_cast<size_t>(i)],
                       gv[static_cast<size_t>(j3)][static_cast<size_t>(l)], w);
        }
    }
}

// Convolution step of the scheme: out_j = base_j + sum_{j1+j2+j3 = j+1}
// left_{j1} mid_{j2} right_{j3}.
template <class S>
CoeffList<S> convolve_step(const CoeffList<S>& base, const CoeffList<S>& left,
                           const CoeffList<S>& mid, const CoeffList<S>& right, int lo, int hi) {
  CoeffList<S> out;
  out.lo = lo;
  const int n = base.get(base.lo).rows;
  for (int j = lo; j <= hi; ++j) {
    Matrix<S> acc(n, n, base.get(base.lo).rank_tol);
    if (base.has(j)) acc = acc + base.get(j);
    for (int j1 = left.lo; j1 <= left.hi(); ++j1)
      for (int j2 = mid.lo; j2 <= mid.hi(); ++j2) {
        int j3 = j + 1 - j1 - j2;
        if (!right.has(j3)) continue;
        acc = acc + left.get(j1) * mid.get(j2) * right.get(j3);
      }
    out.mats.push_back(acc);
  }
  return out;
}

}  // namespace detail

// (M(kappa) + proj)-style inversion with a supplied leading resolvent; used
// for the C-list of the third kind where the leading inverse is m0^+ + S.
template <class S>
CoeffList<S> neumann_cascade_on(const std::vector<Matrix<S>>& x, const Matrix<S>& r0, int order) {
  const int n = x[0].rows;
  CoeffList<S> out;
  out.lo = 0;
  out.mats.push_back(r0);
  for (int j = 1; j <= order; ++j) {
    Matrix<S> acc(n, n, x[0].rank_tol);
    for (int a = 1; a <= j && a < static_cast<int>(x.size()); ++a)
      acc = acc + x[a] * out.mats[static_cast<size_t>(j - a)];
    out.mats.push_back(S(-1) * (r0 * acc));
  }
  return out;
}

template <class S>
struct ResolventCoefficients {
  // orders -2, -1, 0, 1
  OperatorExpr<S> g[4];
  OperatorExpr<S>& at(int j) { return g[j + 2]; }
  const OperatorExpr<S>& at(int j) const { return g[j + 2]; }
};

// The raw coefficient pipeline: inserts the per-kind expansion of
// M(kappa)^{-1} into the second resolvent identity. Produces G_{-2}..G_1.
template <class S>
ResolventCoefficients<S> resolvent_coefficients(const FreeModel<S>& model,
                                                const FactoredPerturbation<S>& v,
                                                const ThresholdReport<S>& rep) {
  const ThresholdClass kind = rep.classification;
  const auto& io = rep.io;
  const int kdim = v.k;
  const int mcap = (kind == ThresholdClass::Regular) ? 1
                   : (kind == ThresholdClass::FirstKind) ? 3
                                                         : 5;
  if (model.kernel_cap < mcap)
    fail(errc::order_exceeds_cap, "resolvent_coefficients: kernel cap below required order");
  std::vector<Matrix<S>> mlist;
  for (int j = 0; j <= mcap; ++j) mlist.push_back(Mj_matrix(model, v, j));

  CoeffList<S> xlist;  // expansion of M(kappa)^{-1}
  if (kdim == 0) {
    xlist.lo = 0;
  } else if (kind == ThresholdClass::Regular) {
    Matrix<S> zero(kdim, kdim, model.rank_tol);
    xlist = neumann_cascade(mlist, zero, 1);
  } else {
    CoeffList<S> blist = neumann_cascade(mlist, io.Qproj, 3);
    std::vector<Matrix<S>> ms = sandwich_cascade(
        mlist, io.Qproj, pseudo_inverse(io.M0) + io.Qproj, mcap - 1);
    if (kind == ThresholdClass::FirstKind) {
      CoeffList<S> alist = restricted_neumann(ms, io.Qproj, 2);
      xlist = detail::convolve_step(blist, blist, alist, blist, -1, 1);
    } else if (kind == ThresholdClass::SecondKind) {
      std::vector<Matrix<S>> shifted(ms.begin() + 1, ms.end());
      CoeffList<S> alist = restricted_neumann(shifted, io.Qproj, 3, /*consistency=*/true);
      alist.lo = -1;
      xlist = detail::convolve_step(blist, blist, alist, blist, -2, 1);
    } else {
      std::vector<Matrix<S>> qs = q_coefficients(ms, io.m0, io.Sproj, 3);
      CoeffList<S> alist = restricted_neumann(qs, io.Sproj, 3, /*consistency=*/true);
      Matrix<S> c0 = pseudo_inverse(io.m0) + io.Sproj;
      CoeffList<S> clist = neumann_cascade_on(ms, c0, 3);
      CoeffList<S> dlist = detail::convolve_step(clist, clist, alist, clist, -1, 2);
      xlist = detail::convolve_step(blist, blist, dlist, blist, -2, 1);
    }
  }

  std::vector<std::vector<RayFunction<S>>> gv(4);
  for (int j = 0; j <= 3; ++j)
    for (int i = 0; i < kdim; ++i)
      gv[static_cast<size_t>(j)].push_back(apply_free_coefficient(model, j, v.columns[i]));

  ResolventCoefficients<S> out;
  for (int j = -2; j <= 1; ++j) {
    OperatorExpr<S>& e = out.at(j);
    if (j >= 0 && j % 2 == 0) e.add_base(j, scalar_traits<S>::one());
    if (j == 1) {
      for (int a = 0; a < model.graph.ray_count(); ++a) {
        RayFunction<S> nf = n_function<S>(model.graph, a, model.tail_cap);
        e.add_dyad(nf, nf, S(-1));
      }
    }
    if (kdim > 0) detail::add_sandwiched(e, xlist, j, gv, S(-1));
    compact(e);
  }
  return out;
}

namespace detail {

// (I - Pb) X (I - Pb) for a symmetric expression X and the bound projection.
template <class S>
OperatorExpr<S> sandwich_bound(const FreeModel<S>& m, const OperatorExpr<S>& x,
                               const DyadList<S>& pb) {
  OperatorExpr<S> out = x;
  std::vector<RayFunction<S>> xb;
  for (const auto& p : pb) xb.push_back(apply_expr(m, x, p.f));
  for (size_t p = 0; p < pb.size(); ++p) {
    out.add_dyad(pb[p].f, xb[p], -pb[p].w);
    out.add_dyad(xb[p], pb[p].f, -pb[p].w);
  }
  for (size_t p = 0; p < pb.size(); ++p)
    for (size_t q = 0; q < pb.size(); ++q)
      out.add_dyad(pb[p].f, pb[q].f, pb[p].w * pb[q].w * pair(pb[p].f, xb[q]));
  return out;
}

}  // namespace detail

// Closed forms for G_0 and G_1 per threshold type. Kept as a permanently
// independent pipeline from resolvent_coefficients; the two must agree as
// kernels and tests enforce it.
template <class S>
ResolventCoefficients<S> closed_form_G0_G1(const FreeModel<S>& model,
                                           const FactoredPerturbation<S>& v,
                                           const ThresholdReport<S>& rep) {
  const GraphWithRays& g = model.graph;
  const int kdim = v.k;
  const int N = g.ray_count();
  const ThresholdClass kind = rep.classification;
  ResolventCoefficients<S> out;
  out.at(-2).dyads = rep.bound_projection;
  out.at(-1).dyads = rep.resonance_projection;

  Matrix<S> M0dag = kdim ? pseudo_inverse(rep.io.M0) : Matrix<S>(0, 0, model.rank_tol);
  Matrix<S> m0dag = kdim ? pseudo_inverse(rep.io.m0) : Matrix<S>(0, 0, model.rank_tol);
  Matrix<S> m1 = kdim ? Mj_matrix(model, v, 1) : Matrix<S>(0, 0, model.rank_tol);

  std::vector<RayFunction<S>> g0v, g1v;
  for (int i = 0; i < kdim; ++i) {
    g0v.push_back(apply_free_coefficient(model, 0, v.columns[i]));
    g1v.push_back(apply_free_coefficient(model, 1, v.columns[i]));
  }
  auto vec_of = [&](const RayFunction<S>& u) { return vstar_apply(v, u); };
  auto vmul = [&](const Matrix<S>& mat, const Vector<S>& phi) { return mat_vec(mat, phi); };
  auto vfun = [&](const Vector<S>& phi) { return v_apply(v, g, phi); };

  const auto& pres = rep.resonance_projection;  // dyads of P_res, factors with scale2 in w
  const auto& pb = rep.bound_projection;

  // resonance helper data: w_g = V Psi_g for each orthonormal resonance member
  std::vector<RayFunction<S>> wres, ures;
  for (const auto& d : pres) {
    wres.push_back(apply_V(v, d.f));
    ures.push_back(apply_free_coefficient(model, 2, wres.back()));
  }

  OperatorExpr<S>& g0 = out.at(0);
  OperatorExpr<S>& g1 = out.at(1);

  if (kind == ThresholdClass::Regular) {
    g0.add_base(0, scalar_traits<S>::one());
    for (int i = 0; i < kdim; ++i)
      for (int l = 0; l < kdim; ++l) g0.add_dyad(g0v[i], g0v[l], -M0dag(i, l));
    for (int a = 0; a < N; ++a) {
      RayFunction<S> nf = n_function<S>(g, a, model.tail_cap);
      RayFunction<S> psi =
          kdim ? rf_sub(nf, apply_free_coefficient(model, 0, vfun(vmul(M0dag, vec_of(nf))))) : nf;
      g1.add_dyad(psi, psi, S(-1));
    }
  } else if (kind == ThresholdClass::FirstKind) {
    // G0 = G00 - PVG01 - G01VP - (G00 - PVG01) v M0+ v* (G00 - G01VP) + PVG02VP
    g0.add_base(0, scalar_traits<S>::one());
    std::vector<RayFunction<S>> g1w;  // G01 w_g
    for (const auto& w : wres) g1w.push_back(apply_free_coefficient(model, 1, w));
    for (size_t gm = 0; gm < pres.size(); ++gm) {
      g0.add_dyad(pres[gm].f, g1w[gm], -pres[gm].w);
      g0.add_dyad(g1w[gm], pres[gm].f, -pres[gm].w);
    }
    // modified columns a_i = (G00 - PVG01) v_i
    std::vector<RayFunction<S>> amod;
    for (int i = 0; i < kdim; ++i) {
      RayFunction<S> ai = g0v[i];
      for (size_t gm = 0; gm < pres.size(); ++gm)
        ai = rf_sub(ai, rf_scale(S(pres[gm].w * pair(g1w[gm], v.columns[i])), pres[gm].f));
      amod.push_back(ai);
    }
    for (int i = 0; i < kdim; ++i)
      for (int l = 0; l < kdim; ++l) g0.add_dyad(amod[i], amod[l], -M0dag(i, l));
    for (size_t a = 0; a < pres.size(); ++a)
      for (size_t b = 0; b < pres.size(); ++b)
        g0.add_dyad(pres[a].f, pres[b].f, pres[a].w * pres[b].w * pair(wres[a], ures[b]));

    // G1 per Theorem B.3
    // -P~ with the canonical complement Gram
    std::vector<RayFunction<S>> psit;
    for (int a = 0; a < N; ++a) {
      RayFunction<S> nf = n_function<S>(g, a, model.tail_cap);
      RayFunction<S> t = vfun(vmul(M0dag, vec_of(nf)));
      RayFunction<S> corr = apply_free_coefficient(model, 0, t);
      RayFunction<S> g1t = apply_free_coefficient(model, 1, t);
      for (size_t gm = 0; gm < pres.size(); ++gm)
        corr = rf_sub(corr, rf_scale(S(pres[gm].w * pair(pres[gm].f, apply_V(v, g1t))), pres[gm].f));
      psit.push_back(rf_sub(nf, corr));
    }
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b)
        g1.add_dyad(psit[static_cast<size_t>(a)], psit[static_cast<size_t>(b)],
                    -rep.complement_gram(a, b));
    // + PVG03VP + PVG02VPVG02VP
    const size_t R = pres.size();
    for (size_t a = 0; a < R; ++a)
      for (size_t b = 0; b < R; ++b) {
        S z3 = pair(wres[a], apply_free_coefficient(model, 3, wres[b]));
        g1.add_dyad(pres[a].f, pres[b].f, pres[a].w * pres[b].w * z3);
        S acc = scalar_traits<S>::zero();
        for (size_t c = 0; c < R; ++c)
          acc += pres[c].w * pair(wres[a], ures[c]) * pair(wres[c], ures[b]);
        g1.add_dyad(pres[a].f, pres[b].f, pres[a].w * pres[b].w * acc);
      }
    // -[I - (G00-PVG01) v M0+ v*](I + G01 VPV) G02 V P  - its transpose
    for (size_t gm = 0; gm < R; ++gm) {
      RayFunction<S> t = ures[gm];
      RayFunction<S> vres(g);
      for (size_t c = 0; c < R; ++c)
        vres = rf_add(vres, rf_scale(S(pres[c].w * pair(pres[c].f, apply_V(v, t))), pres[c].f));
      t = rf_add(t, apply_free_coefficient(model, 1, apply_V(v, vres)));
      Vector<S> coeffs = vmul(M0dag, vec_of(t));
      RayFunction<S> corr = apply_free_coefficient(model, 0, vfun(coeffs));
      RayFunction<S> g1y = apply_free_coefficient(model, 1, vfun(coeffs));
      for (size_t c = 0; c < R; ++c)
        corr = rf_sub(corr, rf_scale(S(pres[c].w * pair(pres[c].f, apply_V(v, g1y))), pres[c].f));
      RayFunction<S> r = rf_sub(t, corr);
      g1.add_dyad(r, pres[gm].f, -pres[gm].w);
      g1.add_dyad(pres[gm].f, r, -pres[gm].w);
    }
  } else {
    // second and third kind share the sandwich structure; the third kind has
    // extra m0+ terms (which vanish in the second kind where m0 = 0).
    bool third = (kind == ThresholdClass::ThirdKind);
    OperatorExpr<S> core;
    core.add_base(0, scalar_traits<S>::one());
    Matrix<S> w3 = third
        ? (Matrix<S>::identity(kdim, model.rank_tol) - m0dag * m1) * M0dag *
              (Matrix<S>::identity(kdim, model.rank_tol) - m1 * m0dag)
        : M0dag;
    for (int i = 0; i < kdim; ++i)
      for (int l = 0; l < kdim; ++l) core.add_dyad(g0v[i], g0v[l], -w3(i, l));
    if (third) {
      for (int i = 0; i < kdim; ++i)
        for (int l = 0; l < kdim; ++l) {
          core.add_dyad(g0v[i], g1v[l], -m0dag(i, l));
          core.add_dyad(g1v[i], g0v[l], -m0dag(i, l));
        }
      Matrix<S> m2 = Mj_matrix(model, v, 2);
      Matrix<S> t1 = m0dag * m2 * m0dag;
      // Y = v* G00 Pb G00 v
      Matrix<S> y(kdim, kdim, model.rank_tol);
      for (const auto& p : pb) {
        RayFunction<S> gb = apply_free_coefficient(model, 0, p.f);
        Vector<S> c = vec_of(gb);
        for (int i = 0; i < kdim; ++i)
          for (int l = 0; l < kdim; ++l)
            y(i, l) += p.w * c[static_cast<size_t>(i)] * c[static_cast<size_t>(l)];
      }
      Matrix<S> t2 = m0dag * y * m0dag;
      for (int i = 0; i < kdim; ++i)
        for (int l = 0; l < kdim; ++l)
          core.add_dyad(g0v[i], g0v[l], t1(i, l) + t2(i, l));
    }
    g0 = detail::sandwich_bound(model, core, pb);

    // G1: -P~ plus (third kind only) the resonance correction terms
    std::vector<RayFunction<S>> psit;
    for (int a = 0; a < N; ++a) {
      RayFunction<S> nf = n_function<S>(g, a, model.tail_cap);
      Vector<S> c = vec_of(nf);
      Vector<S> coeffs = third
          ? vmul((Matrix<S>::identity(kdim, model.rank_tol) - m0dag * m1) * M0dag, c)
          : vmul(M0dag, c);
      RayFunction<S> psi = rf_sub(nf, apply_free_coefficient(model, 0, vfun(coeffs)));
      psi = rf_sub(psi, apply_dyads(g, pb, psi));
      psit.push_back(psi);
    }
    for (int a = 0; a < N; ++a)
      for (int b = 0; b < N; ++b)
        g1.add_dyad(psit[static_cast<size_t>(a)], psit[static_cast<size_t>(b)],
                    -rep.complement_gram(a, b));
    if (third) {
      const size_t R = pres.size();
      for (size_t a = 0; a < R; ++a)
        for (size_t b = 0; b < R; ++b) {
          S z3 = pair(wres[a], apply_free_coefficient(model, 3, wres[b]));
          g1.add_dyad(pres[a].f, pres[b].f, pres[a].w * pres[b].w * z3);
          S z2 = dot(vec_of(ures[a]), vmul(m0dag, vec_of(ures[b])));
          g1.add_dyad(pres[a].f, pres[b].f, -pres[a].w * pres[b].w * z2);
        }
      for (size_t gm = 0; gm < R; ++gm) {
        RayFunction<S> s = rf_sub(
            ures[gm], apply_free_coefficient(model, 1, vfun(vmul(m0dag, vec_of(ures[gm])))));
        Vector<S> coeffs =
            vmul((Matrix<S>::identity(kdim, model.rank_tol) - m0dag * m1) * M0dag, vec_of(s));
        RayFunction<S> r = rf_sub(s, apply_free_coefficient(model, 0, vfun(coeffs)));
        r = rf_sub(r, apply_dyads(g, pb, r));
        g1.add_dyad(r, pres[gm].f, -pres[gm].w);
        g1.add_dyad(pres[gm].f, r, -pres[gm].w);
      }
    }
  }
  compact(out.at(0));
  compact(out.at(1));
  return out;
}

}  // namespace gwr
