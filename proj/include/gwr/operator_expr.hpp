#pragma once

#include <vector>

#include "gwr/free_model.hpp"
#include "gwr/ray_function.hpp"

namespace gwr {

// Rank-one term w |f><g|.
template <class S>
struct Dyad {
  RayFunction<S> f;
  RayFunction<S> g;
  S w;
};

template <class S>
using DyadList = std::vector<Dyad<S>>;

// A resolvent-expansion coefficient: a linear combination of free base
// kernels G_{0,j} (even j only; the odd kernels are finite rank and live in
// the dyad list) plus a finite-rank sum of RayFunction dyads.
template <class S>
struct OperatorExpr {
  std::vector<std::pair<int, S>> base_terms;
  DyadList<S> dyads;

  void add_base(int j, const S& coeff) {
    for (auto& t : base_terms)
      if (t.first == j) { t.second += coeff; return; }
    base_terms.push_back({j, coeff});
  }

  void add_dyad(RayFunction<S> f, RayFunction<S> g, const S& w) {
    if (scalar_traits<S>::exact && w == scalar_traits<S>::zero()) return;
    dyads.push_back({std::move(f), std::move(g), w});
  }

  void add(const OperatorExpr& other, const S& coeff) {
    for (const auto& t : other.base_terms) add_base(t.first, coeff * t.second);
    for (const auto& d : other.dyads) add_dyad(d.f, d.g, coeff * d.w);
  }
};

template <class S>
S evaluate(const FreeModel<S>& m, const OperatorExpr<S>& e, const SiteIndex& x,
           const SiteIndex& y) {
  S acc = scalar_traits<S>::zero();
  for (const auto& t : e.base_terms) acc += t.second * free_kernel(m, t.first, x, y);
  for (const auto& d : e.dyads) acc += d.w * d.f.at(x) * d.g.at(y);
  return acc;
}

// Applies the dyad part to any function whose pairings with the right
// factors are defined (mixed tails allowed as long as one side is finite).
template <class S>
RayFunction<S> apply_dyads(const GraphWithRays& g, const DyadList<S>& dyads,
                           const RayFunction<S>& u) {
  RayFunction<S> r(g);
  for (const auto& d : dyads) r = rf_add(r, rf_scale(S(d.w * pair(d.g, u)), d.f));
  return r;
}

// Applies the full expression to a finitely supported function.
template <class S>
RayFunction<S> apply_expr(const FreeModel<S>& m, const OperatorExpr<S>& e,
                          const RayFunction<S>& u) {
  RayFunction<S> r(m.graph);
  for (const auto& t : e.base_terms)
    r = rf_add(r, rf_scale(t.second, apply_free_coefficient(m, t.first, u)));
  return rf_add(r, apply_dyads(m.graph, e.dyads, u));
}

namespace detail {
// Scales f so its first nonzero coordinate is 1; returns the factor pulled
// out, or zero for the zero function.
template <class S>
S normalize_leading(RayFunction<S>& f) {
  S lead = scalar_traits<S>::zero();
  for (const S& v : f.k_values)
    if (!(v == scalar_traits<S>::zero())) { lead = v; break; }
  if (lead == scalar_traits<S>::zero()) {
    for (const auto& ray : f.rays) {
      for (const S& v : ray.head)
        if (!(v == scalar_traits<S>::zero())) { lead = v; break; }
      if (!(lead == scalar_traits<S>::zero())) break;
      for (const S& v : ray.tail)
        if (!(v == scalar_traits<S>::zero())) { lead = v; break; }
      if (!(lead == scalar_traits<S>::zero())) break;
    }
  }
  if (lead == scalar_traits<S>::zero()) return lead;
  f = rf_scale(scalar_traits<S>::one() / lead, f);
  return lead;
}
}  // namespace detail

// Merges proportional dyads (exact backend). No canonical form is claimed;
// equality of expressions is tested by evaluation, not structurally.
template <class S>
void compact(OperatorExpr<S>& e) {
  if constexpr (!scalar_traits<S>::exact) return;
  DyadList<S> out;
  for (auto& d : e.dyads) {
    RayFunction<S> f = d.f, g = d.g;
    S cf = detail::normalize_leading(f);
    S cg = detail::normalize_leading(g);
    S w = d.w * cf * cg;
    if (w == scalar_traits<S>::zero()) continue;
    bool merged = false;
    for (auto& o : out) {
      if (rf_equal(o.f, f) && rf_equal(o.g, g)) {
        o.w += w;
        merged = true;
        break;
      }
    }
    if (!merged) out.push_back({std::move(f), std::move(g), w});
  }
  DyadList<S> nz;
  for (auto& d : out)
    if (!(d.w == scalar_traits<S>::zero())) nz.push_back(std::move(d));
  e.dyads = std::move(nz);
}

}  // namespace gwr
