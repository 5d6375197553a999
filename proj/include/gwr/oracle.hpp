#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "gwr/expansion.hpp"
#include "gwr/operator_expr.hpp"
#include "gwr/perturbation.hpp"
#include "gwr/threshold.hpp"

namespace gwr {

constexpr double kDefaultCutoffConst = 40.0;

// Brute-force resolvent (H + kappa^2)^{-1} on the lattice truncated at ray
// position L with a Dirichlet condition at L+1. The interaction-free tail
// chains (sites beyond the core window) are eliminated exactly first - this
// is plain Gaussian elimination in a tail-first order, so the result is
// identical to the dense solve on all |K| + N L sites.
class TruncatedResolvent {
 public:
  TruncatedResolvent(const GraphWithRays& g, const FactoredPerturbation<double>& v, double kappa,
                     int cutoff, int window, double cutoff_const = kDefaultCutoffConst)
      : graph_(g), v_(v), kappa_(kappa), cutoff_(cutoff) {
    if (kappa <= 0) fail(errc::bad_argument, "TruncatedResolvent: kappa must be positive");
    if (static_cast<double>(cutoff) < cutoff_const / kappa)
      fail(errc::cutoff_too_small, "TruncatedResolvent: cutoff below c/kappa contract");
    core_depth_ = std::max(window, v.support_radius) + 2;
    if (core_depth_ > cutoff_) fail(errc::bad_argument, "TruncatedResolvent: window beyond cutoff");
    sites_ = window_sites(g, core_depth_);
    build();
  }

  int core_depth() const { return core_depth_; }

  // <delta_x, (H_trunc + kappa^2)^{-1} delta_y>, both sites inside the core.
  double entry(const SiteIndex& x, const SiteIndex& y) {
    const std::vector<double>& sol = solve(y);
    return sol[site_pos(x)];
  }

  // Max residual |(H+kappa^2) u - delta_y| over every truncated site, with
  // the tail values reconstructed along the eliminated chains.
  double residual(const SiteIndex& y) {
    const std::vector<double>& core = solve(y);
    const int n = graph_.k_size();
    const double diag = 2.0 + kappa_ * kappa_;
    double worst = 0.0;
    // full vector: K, then rays up to cutoff
    std::vector<std::vector<double>> ray_vals(graph_.ray_count());
    for (int a = 0; a < graph_.ray_count(); ++a) {
      auto& rv = ray_vals[a];
      rv.assign(static_cast<size_t>(cutoff_) + 2, 0.0);
      for (int p = 1; p <= core_depth_; ++p)
        rv[static_cast<size_t>(p)] = core[site_pos(SiteIndex::ray_site(a, p))];
      for (int p = core_depth_ + 1; p <= cutoff_; ++p)
        rv[static_cast<size_t>(p)] = rv[static_cast<size_t>(p - 1)] / chain_[a][static_cast<size_t>(p)];
    }
    RayFunction<double> u(graph_);
    for (int i = 0; i < n; ++i) u.k_values[i] = core[static_cast<size_t>(i)];
    for (int a = 0; a < graph_.ray_count(); ++a)
      for (int p = 1; p <= core_depth_; ++p)
        u.set_head_value(a, p, ray_vals[a][static_cast<size_t>(p)]);
    RayFunction<double> vu = apply_V(v_, u);
    for (int i = 0; i < n; ++i) {
      double acc = (h0_diag_[i] + kappa_ * kappa_) * core[static_cast<size_t>(i)];
      for (int w : graph_.adjacency[i]) acc -= core[static_cast<size_t>(w)];
      acc += vu.k_values[i];
      double want = (y.is_k() && y.k_index == i) ? 1.0 : 0.0;
      worst = std::max(worst, std::abs(acc - want));
    }
    for (int a = 0; a < graph_.ray_count(); ++a) {
      const auto& rv = ray_vals[a];
      for (int p = 1; p <= cutoff_; ++p) {
        double below = (p == 1) ? 0.0 : rv[static_cast<size_t>(p - 1)];
        double acc = diag * rv[static_cast<size_t>(p)] - below - rv[static_cast<size_t>(p + 1)];
        acc += vu.at(SiteIndex::ray_site(a, p));
        double want = (!y.is_k() && y.ray == a && y.position == p) ? 1.0 : 0.0;
        worst = std::max(worst, std::abs(acc - want));
      }
    }
    return worst;
  }

 private:
  size_t site_pos(const SiteIndex& x) const {
    if (x.is_k()) return static_cast<size_t>(x.k_index);
    return static_cast<size_t>(graph_.k_size() + x.ray * core_depth_ + (x.position - 1));
  }

  void build() {
    const double diag = 2.0 + kappa_ * kappa_;
    // chain elimination from the Dirichlet end: e_L = diag,
    // e_p = diag - 1/e_{p+1}; eliminating sites > core_depth corrects the
    // core diagonal at core_depth by -1/e_{core_depth+1}.
    chain_.assign(static_cast<size_t>(graph_.ray_count()), {});
    for (int a = 0; a < graph_.ray_count(); ++a) {
      auto& e = chain_[a];
      e.assign(static_cast<size_t>(cutoff_) + 2, 0.0);
      e[static_cast<size_t>(cutoff_)] = diag;
      for (int p = cutoff_ - 1; p >= 1; --p)
        e[static_cast<size_t>(p)] = diag - 1.0 / e[static_cast<size_t>(p + 1)];
    }
    const int n = static_cast<int>(sites_.size());
    Matrix<double> a(n, n);
    h0_diag_.assign(static_cast<size_t>(graph_.k_size()), 0.0);
    for (int i = 0; i < graph_.k_size(); ++i) {
      h0_diag_[static_cast<size_t>(i)] =
          graph_.degree_k(i) + static_cast<double>(graph_.rays_at[i].size());
      a(i, i) = h0_diag_[static_cast<size_t>(i)] + kappa_ * kappa_;
      for (int w : graph_.adjacency[i]) a(i, static_cast<int>(site_pos(SiteIndex::kvertex(w)))) -= 1.0;
    }
    for (int r = 0; r < graph_.ray_count(); ++r)
      for (int p = 1; p <= core_depth_; ++p) {
        int idx = static_cast<int>(site_pos(SiteIndex::ray_site(r, p)));
        a(idx, idx) = diag;
        if (p > 1) {
          int below = static_cast<int>(site_pos(SiteIndex::ray_site(r, p - 1)));
          a(idx, below) -= 1.0;
          a(below, idx) -= 1.0;
        }
        if (p == core_depth_ && cutoff_ > core_depth_)
          a(idx, idx) -= 1.0 / chain_[r][static_cast<size_t>(core_depth_ + 1)];
      }
    // V block via columns (dense over the joint support)
    for (int i = 0; i < v_.k; ++i)
      for (int l = 0; l < v_.k; ++l) {
        double u = v_.U(i, l);
        if (u == 0.0) continue;
        for (size_t sx = 0; sx < sites_.size(); ++sx) {
          double vx = v_.columns[i].at(sites_[sx]);
          if (vx == 0.0) continue;
          for (size_t sy = 0; sy < sites_.size(); ++sy) {
            double vy = v_.columns[l].at(sites_[sy]);
            if (vy == 0.0) continue;
            a(static_cast<int>(sx), static_cast<int>(sy)) += vx * u * vy;
          }
        }
      }
    factor_ = a;
    perm_.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) perm_[static_cast<size_t>(i)] = i;
    // LU with partial pivoting
    for (int c = 0; c < n; ++c) {
      int p = c;
      for (int r = c + 1; r < n; ++r)
        if (std::abs(factor_(r, c)) > std::abs(factor_(p, c))) p = r;
      if (std::abs(factor_(p, c)) < 1e-14)
        fail(errc::singular_solve, "TruncatedResolvent: singular truncated system");
      if (p != c) {
        for (int j = 0; j < n; ++j) std::swap(factor_(p, j), factor_(c, j));
        std::swap(perm_[static_cast<size_t>(p)], perm_[static_cast<size_t>(c)]);
      }
      for (int r = c + 1; r < n; ++r) {
        double f = factor_(r, c) / factor_(c, c);
        factor_(r, c) = f;
        for (int j = c + 1; j < n; ++j) factor_(r, j) -= f * factor_(c, j);
      }
    }
  }

  const std::vector<double>& solve(const SiteIndex& y) {
    size_t target = site_pos(y);
    auto it = cache_.find(target);
    if (it != cache_.end()) return it->second;
    const int n = static_cast<int>(sites_.size());
    std::vector<double> b(static_cast<size_t>(n), 0.0);
    for (int i = 0; i < n; ++i)
      if (perm_[static_cast<size_t>(i)] == static_cast<int>(target)) b[static_cast<size_t>(i)] = 1.0;
    for (int r = 1; r < n; ++r)
      for (int c = 0; c < r; ++c) b[static_cast<size_t>(r)] -= factor_(r, c) * b[static_cast<size_t>(c)];
    for (int r = n - 1; r >= 0; --r) {
      for (int c = r + 1; c < n; ++c) b[static_cast<size_t>(r)] -= factor_(r, c) * b[static_cast<size_t>(c)];
      b[static_cast<size_t>(r)] /= factor_(r, r);
    }
    return cache_.emplace(target, std::move(b)).first->second;
  }

  GraphWithRays graph_;
  FactoredPerturbation<double> v_;
  double kappa_;
  int cutoff_;
  int core_depth_;
  std::vector<SiteIndex> sites_;
  std::vector<std::vector<double>> chain_;
  std::vector<double> h0_diag_;
  Matrix<double> factor_;
  std::vector<int> perm_;
  std::map<size_t, std::vector<double>> cache_;
};

inline double numeric_resolvent_entry(const GraphWithRays& g,
                                      const FactoredPerturbation<double>& v, double kappa,
                                      int cutoff, const SiteIndex& x, const SiteIndex& y,
                                      double cutoff_const = kDefaultCutoffConst) {
  TruncatedResolvent solver(g, v, kappa, cutoff,
                            std::max({x.is_k() ? 0 : x.position, y.is_k() ? 0 : y.position, 1}),
                            cutoff_const);
  return solver.entry(x, y);
}

// Per-entry residual order of the four-term expansion against the numeric
// resolvent: rho(kappa)[x,y] = R(kappa)[x,y] - sum_j kappa^j G_j[x,y].
struct ResidualEntry {
  SiteIndex x, y;
  double slope = 0.0;        // least-squares slope of log|rho| vs log kappa
  bool below_floor = false;  // every residual at solver noise level; passes
  std::vector<double> residuals;
};

struct ResidualReport {
  std::vector<ResidualEntry> entries;
  double min_slope = 0.0;  // over entries above the noise floor
};

template <class S>
ResidualReport expansion_residual_report(const FreeModel<S>& model,
                                         const FactoredPerturbation<S>& v,
                                         const ResolventCoefficients<S>& coeffs,
                                         const std::vector<double>& kappas, int window,
                                         double cutoff_const = kDefaultCutoffConst,
                                         const std::vector<int>& drop = {}) {
  FactoredPerturbation<double> vd = [&] {
    if constexpr (scalar_traits<S>::exact) return perturbation_cast<double>(v);
    else return v;
  }();
  const GraphWithRays& g = model.graph;
  std::vector<SiteIndex> sites = window_sites(g, window);
  ResidualReport report;
  report.min_slope = 1e9;
  std::vector<std::vector<std::vector<double>>> numeric;  // kappa -> x -> y
  for (double kappa : kappas) {
    int cutoff = static_cast<int>(std::ceil(cutoff_const / kappa));
    TruncatedResolvent solver(g, vd, kappa, cutoff, window, cutoff_const);
    std::vector<std::vector<double>> grid;
    for (const SiteIndex& x : sites) {
      std::vector<double> row;
      for (const SiteIndex& y : sites) row.push_back(solver.entry(x, y));
      grid.push_back(std::move(row));
    }
    numeric.push_back(std::move(grid));
  }
  for (size_t xi = 0; xi < sites.size(); ++xi)
    for (size_t yi = 0; yi < sites.size(); ++yi) {
      ResidualEntry e;
      e.x = sites[xi];
      e.y = sites[yi];
      double scale = 0.0;
      for (size_t ki = 0; ki < kappas.size(); ++ki) {
        double kappa = kappas[ki];
        double partial = 0.0;
        for (int j = -2; j <= 1; ++j) {
          bool dropped = false;
          for (int d : drop) dropped = dropped || (d == j);
          if (dropped) continue;
          double gj = scalar_traits<S>::to_double(evaluate(model, coeffs.at(j), e.x, e.y));
          partial += std::pow(kappa, j) * gj;
        }
        double num = numeric[ki][xi][yi];
        scale = std::max(scale, std::abs(num));
        e.residuals.push_back(num - partial);
      }
      double floor = 1e-10 * std::max(scale, 1.0);
      bool above = false;
      for (double r : e.residuals) above = above || (std::abs(r) > floor);
      if (!above) {
        e.below_floor = true;
        e.slope = 99.0;
      } else {
        // least-squares fit of log|rho| against log kappa
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        int n = 0;
        for (size_t ki = 0; ki < kappas.size(); ++ki) {
          double r = std::abs(e.residuals[ki]);
          if (r < 1e-300) r = 1e-300;
          double lx = std::log(kappas[ki]), ly = std::log(r);
          sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly;
          ++n;
        }
        e.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        report.min_slope = std::min(report.min_slope, e.slope);
      }
      report.entries.push_back(std::move(e));
    }
  if (report.min_slope == 1e9) report.min_slope = 99.0;
  return report;
}

// Pass/fail ledger for the operator identities H G_{-2} = H G_{-1} = 0,
// H G_0 = I - Pb, H G_1 = -G_{-1}, plus symmetry and the projection laws,
// applied to all deltas in the window.
struct IdentityLedger {
  struct Item {
    std::string name;
    bool pass = true;
    std::string detail;
  };
  std::vector<Item> items;
  bool all_pass() const {
    for (const auto& it : items)
      if (!it.pass) return false;
    return true;
  }
};

template <class S>
IdentityLedger identity_suite(const FreeModel<S>& model, const FactoredPerturbation<S>& v,
                              const ThresholdReport<S>& rep, const ResolventCoefficients<S>& coeffs,
                              int window) {
  const GraphWithRays& g = model.graph;
  std::vector<SiteIndex> sites = window_sites(g, window);
  IdentityLedger ledger;
  auto zero_fn = [&](const RayFunction<S>& u) {
    RayFunction<S> t = u;
    t.trim();
    if (!t.finitely_supported()) return false;
    for (const auto& x : t.k_values)
      if (!scalar_traits<S>::is_zero(x, scalar_traits<S>::one(), model.rank_tol)) return false;
    for (size_t a = 0; a < t.rays.size(); ++a)
      for (const auto& x : t.rays[a].head)
        if (!scalar_traits<S>::is_zero(x, scalar_traits<S>::one(), model.rank_tol)) return false;
    return true;
  };
  auto check = [&](const std::string& name, bool ok) {
    ledger.items.push_back({name, ok, ok ? "" : "mismatch within window"});
  };

  bool hg2 = true, hg1 = true, hg0 = true, hgp1 = true, sym = true, proj = true;
  for (const SiteIndex& y : sites) {
    RayFunction<S> dy = delta_function<S>(g, y, model.tail_cap);
    RayFunction<S> pb_dy = apply_dyads(g, rep.bound_projection, dy);
    RayFunction<S> pr_dy = apply_dyads(g, rep.resonance_projection, dy);
    hg2 = hg2 && zero_fn(apply_H(model, v, apply_expr(model, coeffs.at(-2), dy)));
    hg1 = hg1 && zero_fn(apply_H(model, v, apply_expr(model, coeffs.at(-1), dy)));
    hg0 = hg0 && zero_fn(rf_sub(apply_H(model, v, apply_expr(model, coeffs.at(0), dy)),
                                rf_sub(dy, pb_dy)));
    hgp1 = hgp1 && zero_fn(rf_add(apply_H(model, v, apply_expr(model, coeffs.at(1), dy)), pr_dy));
    // projection laws: Pb^2 = Pb, Pres^2 = Pres on deltas
    proj = proj && zero_fn(rf_sub(apply_dyads(g, rep.bound_projection, pb_dy), pb_dy));
    proj = proj && zero_fn(rf_sub(apply_dyads(g, rep.resonance_projection, pr_dy), pr_dy));
  }
  for (size_t xi = 0; xi < sites.size(); ++xi)
    for (size_t yi = xi + 1; yi < sites.size(); ++yi)
      for (int j = -2; j <= 1; ++j) {
        S d = evaluate(model, coeffs.at(j), sites[xi], sites[yi]) -
              evaluate(model, coeffs.at(j), sites[yi], sites[xi]);
        sym = sym && scalar_traits<S>::is_zero(d, scalar_traits<S>::one(), model.rank_tol);
      }
  check("H G_-2 = 0", hg2);
  check("H G_-1 = 0", hg1);
  check("H G_0 = I - P_bound", hg0);
  check("H G_1 = -G_-1", hgp1);
  check("G_j symmetric", sym);
  check("projections idempotent", proj);
  return ledger;
}

// Lemma: <u2, G_{0,2} u1> = -<G_{0,0} u2, G_{0,0} u1> for finitely supported
// u1 with vanishing first moments on every ray.
template <class S>
bool lemma_pairing_check(const FreeModel<S>& model, const RayFunction<S>& u1,
                         const RayFunction<S>& u2) {
  if (!u1.finitely_supported() || !u2.finitely_supported())
    fail(errc::not_finitely_supported, "lemma_pairing_check: inputs must be finitely supported");
  for (int a = 0; a < model.graph.ray_count(); ++a) {
    S moment = pair(n_function<S>(model.graph, a, model.tail_cap), u1);
    if (!scalar_traits<S>::is_zero(moment, scalar_traits<S>::one(), model.rank_tol))
      fail(errc::precondition_moment_nonzero, "lemma_pairing_check: <n^(a), u1> != 0");
  }
  S lhs = pair(u2, apply_free_coefficient(model, 2, u1));
  S rhs = -pair(apply_free_coefficient(model, 0, u2), apply_free_coefficient(model, 0, u1));
  return scalar_traits<S>::is_zero(lhs - rhs,
                                   scalar_traits<S>::abs(lhs) + scalar_traits<S>::abs(rhs),
                                   model.rank_tol);
}

}  // namespace gwr
