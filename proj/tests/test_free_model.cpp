#include <doctest.h>

#include <random>

#include "gwr/free_model.hpp"
#include "gwr/perturbation.hpp"
#include "test_util.hpp"

using gwr::FreeModel;
using gwr::Matrix;
using gwr::Rational;
using gwr::RayFunction;
using gwr::SiteIndex;
using gwr::rat;

TEST_CASE("build_free_model h0") {
  SUBCASE("star K = {0} with N joints gives h0 = [N]") {
    for (int n : {1, 2, 3, 5}) {
      std::vector<std::string> joints(static_cast<size_t>(n), "0");
      auto g = gwr::build_graph({"0"}, {}, joints);
      auto m = gwr::build_free_model<Rational>(g);
      CHECK(m.h0(0, 0) == n);
    }
  }
  SUBCASE("path with one joint at a") {
    auto g = gwr::build_graph({"a", "b"}, {{"a", "b"}}, {"a"});
    auto m = gwr::build_free_model<Rational>(g);
    CHECK(m.h0(0, 0) == 2);
    CHECK(m.h0(0, 1) == -1);
    CHECK(m.h0(1, 1) == 1);
  }
  SUBCASE("triangle with a joint") {
    auto g = gwr::build_graph({"a", "b", "c"}, {{"a", "b"}, {"b", "c"}, {"a", "c"}}, {"a"});
    auto m = gwr::build_free_model<Rational>(g);
    CHECK(m.h0(0, 0) == 3);
    CHECK(m.h0(1, 1) == 2);
    CHECK(m.h0(2, 2) == 2);
    CHECK(m.h0(0, 1) == -1);
  }
  SUBCASE("two_id switch") {
    auto g = gwr::build_graph({"a", "b"}, {{"a", "b"}}, {"a"});
    gwr::FreeModelOptions opt;
    opt.two_id = true;
    auto m = gwr::build_free_model<Rational>(g, opt);
    CHECK(m.h0(0, 0) == 2);
    CHECK(m.h0(0, 1) == 0);
  }
  SUBCASE("h0 is positive definite for random graphs") {
    std::mt19937 rng(41);
    for (int trial = 0; trial < 50; ++trial) {
      auto g = gwr_test::random_graph(rng, 1 + static_cast<int>(rng() % 5),
                                      1 + static_cast<int>(rng() % 3));
      CHECK_NOTHROW((void)gwr::build_free_model<Rational>(g));
    }
  }
}

TEST_CASE("free_kernel") {
  auto g = gwr::build_graph({"a", "b"}, {{"a", "b"}}, {"a", "b"});
  auto m = gwr::build_free_model<Rational>(g);
  SUBCASE("ray block order 0 is min(n, m)") {
    CHECK(gwr::free_kernel(m, 0, SiteIndex::ray_site(0, 2), SiteIndex::ray_site(0, 5)) == 2);
  }
  SUBCASE("odd orders vanish on the K block") {
    CHECK(gwr::free_kernel(m, 1, SiteIndex::kvertex(0), SiteIndex::kvertex(1)) == 0);
    CHECK(gwr::free_kernel(m, 3, SiteIndex::kvertex(0), SiteIndex::kvertex(0)) == 0);
  }
  SUBCASE("blocks do not mix") {
    CHECK(gwr::free_kernel(m, 0, SiteIndex::ray_site(0, 1), SiteIndex::ray_site(1, 1)) == 0);
    CHECK(gwr::free_kernel(m, 2, SiteIndex::kvertex(0), SiteIndex::ray_site(0, 1)) == 0);
  }
  SUBCASE("order 2 on-ray value") {
    CHECK(gwr::free_kernel(m, 2, SiteIndex::ray_site(0, 1), SiteIndex::ray_site(0, 1)) ==
          rat(1, 2));
  }
  SUBCASE("K block uses signed inverse powers of h0") {
    // h0 = [[2,-1],[-1,2]] here; j=2 kernel is -h0^{-2}
    auto inv = gwr::inverse(m.h0);
    auto inv2 = inv * inv;
    CHECK(gwr::free_kernel(m, 2, SiteIndex::kvertex(0), SiteIndex::kvertex(1)) == -inv2(0, 1));
  }
  SUBCASE("symmetry in the site pair") {
    std::mt19937 rng(4);
    auto sites = gwr::window_sites(g, 5);
    for (int j = 0; j <= 5; ++j)
      for (const auto& x : sites)
        for (const auto& y : sites)
          CHECK(gwr::free_kernel(m, j, x, y) == gwr::free_kernel(m, j, y, x));
  }
  SUBCASE("order above the cap throws") {
    gwr::FreeModelOptions opt;
    opt.kernel_cap = 4;
    auto m2 = gwr::build_free_model<Rational>(g, opt);
    CHECK_THROWS_AS(
        (void)gwr::free_kernel(m2, 5, SiteIndex::ray_site(0, 1), SiteIndex::ray_site(0, 1)),
        gwr::error);
  }
}

TEST_CASE("apply_free_coefficient") {
  auto g = gwr::build_graph({"a"}, {}, {"a", "a"});
  auto m = gwr::build_free_model<Rational>(g);
  SUBCASE("order 0 on a delta has constant tail <n, u>") {
    auto d3 = gwr::delta_function<Rational>(g, SiteIndex::ray_site(0, 3));
    auto r = gwr::apply_free_coefficient(m, 0, d3);
    CHECK(r.at(SiteIndex::ray_site(0, 1)) == 1);
    CHECK(r.at(SiteIndex::ray_site(0, 2)) == 2);
    for (int n = 3; n <= 8; ++n) CHECK(r.at(SiteIndex::ray_site(0, n)) == 3);
    CHECK(r.tail_degree(0) == 0);
    CHECK(r.tail_zero(1));
  }
  SUBCASE("vanishing first moments give a finitely supported image") {
    RayFunction<Rational> u(g);
    u.set_head_value(0, 1, rat(2));
    u.set_head_value(0, 2, rat(-1));  // <n, u> = 0
    auto r = gwr::apply_free_coefficient(m, 0, u);
    CHECK(r.finitely_supported());
  }
  SUBCASE("order 1 on a delta has linear tail -2n") {
    auto d2 = gwr::delta_function<Rational>(g, SiteIndex::ray_site(0, 2));
    auto r = gwr::apply_free_coefficient(m, 1, d2);
    CHECK(r.tail_degree(0) == 1);
    for (int n = 1; n <= 6; ++n) CHECK(r.at(SiteIndex::ray_site(0, n)) == rat(-2 * n));
    CHECK(r.tail_zero(1));
    CHECK(r.k_values[0] == 0);
  }
  SUBCASE("matches kernel row sums for random inputs and orders") {
    std::mt19937 rng(9);
    for (int trial = 0; trial < 6; ++trial) {
      auto u = gwr_test::random_function(rng, g, 4);
      for (int j = 0; j <= 5; ++j) {
        auto r = gwr::apply_free_coefficient(m, j, u);
        for (const auto& x : gwr::window_sites(g, 12)) {
          Rational acc(0);
          for (const auto& y : gwr::window_sites(g, 6)) acc += gwr::free_kernel(m, j, x, y) * u.at(y);
          CHECK(r.at(x) == acc);
        }
      }
    }
  }
  SUBCASE("tails above the cap are rejected") {
    gwr::FreeModelOptions opt;
    opt.tail_cap = 2;
    auto m2 = gwr::build_free_model<Rational>(g, opt);
    auto d = gwr::delta_function<Rational>(g, SiteIndex::ray_site(0, 1));
    CHECK_THROWS_AS((void)gwr::apply_free_coefficient(m2, 3, d), gwr::error);
  }
  SUBCASE("non-finitely-supported input rejected") {
    CHECK_THROWS_AS((void)gwr::apply_free_coefficient(m, 0, gwr::one_function<Rational>(g, 0)),
                    gwr::error);
  }
}

TEST_CASE("free operator identities") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 8; ++trial) {
    auto g = gwr_test::random_graph(rng, 1 + static_cast<int>(rng() % 3),
                                    1 + static_cast<int>(rng() % 3));
    auto m = gwr::build_free_model<Rational>(g);
    auto u = gwr_test::random_function(rng, g, 3);
    SUBCASE("") {}
    // H0 G00 = I, H0 G01 = 0, H0 G0j = -G0,j-2
    auto g0 = gwr::apply_free_coefficient(m, 0, u);
    CHECK(gwr::rf_equal(gwr::apply_free_operator(g, g0), u));
    auto g1 = gwr::apply_free_coefficient(m, 1, u);
    auto h1 = gwr::apply_free_operator(g, g1);
    h1.trim();
    CHECK(h1.finitely_supported());
    bool zero = true;
    for (const auto& x : gwr::window_sites(g, 8)) zero = zero && (h1.at(x) == 0);
    CHECK(zero);
    for (int j = 2; j <= 5; ++j) {
      auto gj = gwr::apply_free_coefficient(m, j, u);
      auto want = gwr::rf_scale(Rational(-1), gwr::apply_free_coefficient(m, j - 2, u));
      CHECK(gwr::rf_equal(gwr::apply_free_operator(g, gj), want));
    }
  }
}

TEST_CASE("Mj matrices") {
  SUBCASE("star M0") {
    for (int n : {1, 2, 3, 5}) {
      std::vector<std::string> joints(static_cast<size_t>(n), "0");
      auto g = gwr::build_graph({"0"}, {}, joints);
      auto m = gwr::build_free_model<Rational>(g);
      auto v = gwr::joining_perturbation<Rational>(g);
      auto m0 = gwr::Mj_matrix(m, v, 0);
      REQUIRE(m0.rows == 2);
      CHECK(m0(0, 0) == rat(1, n));
      CHECK(m0(0, 1) == -1);
      CHECK(m0(1, 0) == -1);
      CHECK(m0(1, 1) == n);
    }
  }
  SUBCASE("1x1 with v = delta at ray site 1") {
    auto g = gwr::build_graph({"a"}, {}, {"a"});
    auto m = gwr::build_free_model<Rational>(g);
    std::vector<RayFunction<Rational>> cols{
        gwr::delta_function<Rational>(g, SiteIndex::ray_site(0, 1))};
    Matrix<Rational> u = Matrix<Rational>::identity(1);
    auto v = gwr::build_factored(g, cols, u);
    auto m0 = gwr::Mj_matrix(m, v, 0);
    CHECK(m0(0, 0) == 2);  // U + g[1,1] = 1 + 1
  }
  SUBCASE("M1 for two deltas") {
    auto g = gwr::build_graph({"a"}, {}, {"a"});
    auto m = gwr::build_free_model<Rational>(g);
    std::vector<RayFunction<Rational>> cols{
        gwr::delta_function<Rational>(g, SiteIndex::ray_site(0, 1)),
        gwr::delta_function<Rational>(g, SiteIndex::ray_site(0, 2))};
    Matrix<Rational> u(2, 2);
    u(0, 1) = 1;
    u(1, 0) = 1;
    auto v = gwr::build_factored(g, cols, u);
    auto m1 = gwr::Mj_matrix(m, v, 1);
    CHECK(m1(0, 0) == -1);
    CHECK(m1(0, 1) == -2);
    CHECK(m1(1, 0) == -2);
    CHECK(m1(1, 1) == -4);
  }
}
