#include <doctest.h>

#include <random>

#include "gwr/threshold.hpp"
#include "test_util.hpp"

using gwr::Matrix;
using gwr::Rational;
using gwr::RayFunction;
using gwr::SiteIndex;
using gwr::ThresholdClass;
using gwr::rat;

namespace {

bool vanishes_on_window(const gwr::GraphWithRays& g, const RayFunction<Rational>& u, int depth) {
  RayFunction<Rational> t = u;
  t.trim();
  if (!t.finitely_supported()) return false;
  for (const auto& x : gwr::window_sites(g, depth))
    if (!(t.at(x) == 0)) return false;
  return true;
}

}  // namespace

TEST_CASE("star graph intermediate operators and classification") {
  for (int n : {1, 2, 3, 5}) {
    std::vector<std::string> joints(static_cast<size_t>(n), "0");
    auto g = gwr::build_graph({"0"}, {}, joints);
    auto m = gwr::build_free_model<Rational>(g);
    auto v = gwr::joining_perturbation<Rational>(g);
    auto io = gwr::intermediate_operators(m, v);
    CAPTURE(n);
    REQUIRE(io.QK.dim() == 1);
    // QK = span{(N, 1)}
    CHECK(io.QK.basis(0, 0) == Rational(n) * io.QK.basis(1, 0));
    // PK = span{(0, 1)}
    REQUIRE(io.PK.dim() == 1);
    CHECK(io.PK.basis(0, 0) == 0);
    CHECK(gwr::classify_from(io, 1e-9) == ThresholdClass::FirstKind);
    CHECK(io.SK.dim() == 0);

    auto rep = gwr::eigenspaces(m, v);
    CHECK(rep.classification == ThresholdClass::FirstKind);
    CHECK(rep.dim_bound == 0);
    CHECK(rep.dim_resonance == 1);
    CHECK(rep.dim_nonresonance == n - 1);
    // E = C(s + sum 1^(a)): the resonance representative is proportional
    REQUIRE(rep.resonance_reps.size() == 1);
    const auto& psi = rep.resonance_reps[0];
    Rational s_val = psi.k_values[0];
    REQUIRE(s_val != 0);
    for (int a = 0; a < n; ++a) {
      CHECK(psi.tail_degree(a) == 0);
      CHECK(psi.rays[a].tail[0] == s_val);
      for (int p = 1; p <= 4; ++p) CHECK(psi.at(SiteIndex::ray_site(a, p)) == s_val);
    }
  }
}

TEST_CASE("trivial perturbation is regular") {
  auto g = gwr::build_graph({"a", "b"}, {{"a", "b"}}, {"a"});
  auto m = gwr::build_free_model<Rational>(g);
  gwr::FactoredPerturbation<Rational> v;  // k = 0
  auto rep = gwr::eigenspaces(m, v);
  CHECK(rep.classification == ThresholdClass::Regular);
  CHECK(rep.dim_bound == 0);
  CHECK(rep.dim_resonance == 0);
  CHECK(rep.dim_nonresonance == 1);
  CHECK(rep.bound_projection.empty());
  CHECK(rep.resonance_projection.empty());
}

TEST_CASE("rank-one perturbation on a path") {
  auto g = gwr::build_graph({"a", "b"}, {{"a", "b"}}, {"a"});
  auto m = gwr::build_free_model<Rational>(g);
  std::vector<RayFunction<Rational>> cols{
      gwr::delta_function<Rational>(g, SiteIndex::ray_site(0, 1))};
  Matrix<Rational> u(1, 1);
  u(0, 0) = -1;
  auto v = gwr::build_factored(g, cols, u);
  auto io = gwr::intermediate_operators(m, v);
  // M0 = -1 + g_{1,0}[1,1] = 0, so Q is everything
  CHECK(io.M0(0, 0) == 0);
  CHECK(io.QK.dim() == 1);
  // v* n^(1) = 1 != 0, so m0 != 0 and the threshold is first kind
  CHECK(gwr::classify_from(io, 1e-9) == ThresholdClass::FirstKind);
}

TEST_CASE("z and w") {
  auto g = gwr::build_graph({"0"}, {}, {"0", "0", "0"});
  auto m = gwr::build_free_model<Rational>(g);
  auto v = gwr::joining_perturbation<Rational>(g);
  auto io = gwr::intermediate_operators(m, v);
  SUBCASE("z of zero is zero") {
    gwr::Vector<Rational> zero(2, Rational(0));
    auto r = gwr::z_apply(m, v, io, zero);
    CHECK(vanishes_on_window(g, r, 5));
  }
  SUBCASE("w rejects fast-growing functions") {
    RayFunction<Rational> bad(g);
    bad.rays[0].tail = {rat(0), rat(0), rat(1)};  // n^2
    CHECK_THROWS_AS((void)gwr::w_apply(v, bad), gwr::error);
  }
  SUBCASE("wz is the identity on QK + M0^+[PK cap QK^perp]") {
    // domain here is QK only (PK cap (QK)^perp is trivial for the star)
    for (int c = 0; c < io.QK.dim(); ++c) {
      gwr::Vector<Rational> phi(2);
      for (int i = 0; i < 2; ++i) phi[static_cast<size_t>(i)] = io.QK.basis(i, c);
      auto back = gwr::w_apply(v, gwr::z_apply(m, v, io, phi));
      for (int i = 0; i < 2; ++i) CHECK(back[static_cast<size_t>(i)] == phi[static_cast<size_t>(i)]);
    }
  }
  SUBCASE("z of a kernel vector is a zero eigenfunction") {
    gwr::Vector<Rational> phi(2);
    phi[0] = 3;
    phi[1] = 1;  // QK direction for N=3
    auto psi = gwr::z_apply(m, v, io, phi);
    auto h = gwr::apply_H(m, v, psi);
    CHECK(vanishes_on_window(g, h, 6));
  }
}

TEST_CASE("eigenfunction validity and dimension relation on random instances") {
  std::mt19937 rng(2026);
  int checked = 0;
  for (int trial = 0; trial < 12; ++trial) {
    auto g = gwr_test::random_graph(rng, 1 + static_cast<int>(rng() % 4),
                                    1 + static_cast<int>(rng() % 3));
    auto m = gwr::build_free_model<Rational>(g);
    auto v = gwr_test::random_perturbation(rng, g, 1 + static_cast<int>(rng() % 3), 2);
    auto rep = gwr::eigenspaces(m, v);
    CHECK(rep.dim_nonresonance + rep.dim_resonance == g.ray_count());
    const int depth = v.support_radius + 5;
    auto check_eigen = [&](const RayFunction<Rational>& psi, int max_deg) {
      auto h = gwr::apply_H(m, v, psi);
      CHECK(vanishes_on_window(g, h, depth));
      CHECK(psi.max_tail_degree() <= max_deg);
      ++checked;
    };
    for (const auto& b : rep.bound_basis) check_eigen(b, -1);
    for (const auto& r : rep.resonance_reps) check_eigen(r, 0);
    for (const auto& nr : rep.nonresonance_reps) check_eigen(nr, 1);
    for (const auto& b : rep.bound_onb) check_eigen(b.fn, -1);
    for (const auto& r : rep.resonance_onb) check_eigen(r.fn, 0);
  }
  CHECK(checked > 10);
}

TEST_CASE("projections") {
  SUBCASE("star: bound projection vanishes, resonance projection is idempotent") {
    auto g = gwr::build_graph({"0"}, {}, {"0", "0", "0"});
    auto m = gwr::build_free_model<Rational>(g);
    auto v = gwr::joining_perturbation<Rational>(g);
    auto rep = gwr::eigenspaces(m, v);
    CHECK(rep.bound_projection.empty());
    REQUIRE(rep.resonance_projection.size() == 1);
    const int depth = 5;
    for (const auto& y : gwr::window_sites(g, depth)) {
      auto dy = gwr::delta_function<Rational>(g, y);
      auto p1 = gwr::apply_dyads(g, rep.resonance_projection, dy);
      auto p2 = gwr::apply_dyads(g, rep.resonance_projection, p1);
      CHECK(gwr::rf_equal(p1, p2));
      // H P = 0
      auto h = gwr::apply_H(m, v, p1);
      CHECK(vanishes_on_window(g, h, depth + 2));
    }
    // the resonance member spans C(s + sum 1)
    const auto& psi = rep.resonance_onb[0].fn;
    Rational s_val = psi.k_values[0];
    REQUIRE(s_val != 0);
    for (int a = 0; a < 3; ++a) CHECK(psi.rays[a].tail[0] == s_val);
    // normalization: scale2 * <c, c> = 1 with c the leading 1-coefficients
    Rational csq(0);
    for (int a = 0; a < 3; ++a)
      csq += rep.resonance_c[0][static_cast<size_t>(a)] * rep.resonance_c[0][static_cast<size_t>(a)];
    CHECK(rep.resonance_onb[0].scale2 * csq == 1);
  }
  SUBCASE("regular case: both projections vanish") {
    auto g = gwr::build_graph({"a"}, {}, {"a"});
    auto m = gwr::build_free_model<Rational>(g);
    std::vector<RayFunction<Rational>> cols{
        gwr::delta_function<Rational>(g, SiteIndex::ray_site(0, 1))};
    Matrix<Rational> u = Matrix<Rational>::identity(1);
    auto v = gwr::build_factored(g, cols, u);
    auto rep = gwr::eigenspaces(m, v);
    CHECK(rep.classification == ThresholdClass::Regular);
    CHECK(rep.bound_projection.empty());
    CHECK(rep.resonance_projection.empty());
  }
}

TEST_CASE("analytic family classification in float mode") {
  // H_{E,tau} = H0 + (E-2)|s><s| + tau J on the discrete line
  auto g = gwr::build_graph({"0"}, {}, {"0", "0"});
  gwr::FreeModelOptions opt;
  auto m = gwr::build_free_model<double>(g, opt);
  auto build_family = [&](double e, double tau) {
    std::vector<SiteIndex> sites{SiteIndex::kvertex(0), SiteIndex::ray_site(0, 1),
                                 SiteIndex::ray_site(1, 1)};
    Matrix<double> entries(3, 3);
    entries(0, 0) = e - 2.0;
    entries(0, 1) = entries(1, 0) = -tau;
    entries(0, 2) = entries(2, 0) = -tau;
    return gwr::factor_dense(g, sites, entries);
  };
  SUBCASE("(2,1) lies on the resonance curve") {
    auto v = build_family(2.0, 1.0);
    CHECK(gwr::classify(m, v) == ThresholdClass::FirstKind);
  }
  SUBCASE("(1,1) is regular") {
    auto v = build_family(1.0, 1.0);
    CHECK(gwr::classify(m, v) == ThresholdClass::Regular);
  }
  SUBCASE("(0,0) is on the curve but with a bound state") {
    auto v = build_family(0.0, 0.0);
    CHECK(gwr::classify(m, v) == ThresholdClass::SecondKind);
  }
}

TEST_CASE("asymptotic orthogonality between strata") {
  // leading linear coefficients of non-resonance representatives are
  // orthogonal to leading constant coefficients of resonance members
  std::mt19937 rng(404);
  int found = 0;
  for (int trial = 0; trial < 20 && found < 4; ++trial) {
    auto g = gwr_test::random_graph(rng, 1 + static_cast<int>(rng() % 3),
                                    1 + static_cast<int>(rng() % 3));
    auto m = gwr::build_free_model<Rational>(g);
    auto v = gwr_test::random_perturbation(rng, g, 1 + static_cast<int>(rng() % 3), 2);
    auto rep = gwr::eigenspaces(m, v);
    if (rep.resonance_onb.empty()) continue;
    ++found;
    for (const auto& nr : rep.nonresonance_reps)
      for (size_t gamma = 0; gamma < rep.resonance_onb.size(); ++gamma) {
        Rational acc(0);
        for (int a = 0; a < g.ray_count(); ++a) {
          Rational c1 = nr.tail_degree(a) >= 1 ? nr.rays[a].tail[1] : Rational(0);
          acc += rep.resonance_c[gamma][static_cast<size_t>(a)] * c1;
        }
        CHECK(acc == 0);
      }
  }
  CHECK(found > 0);
}
