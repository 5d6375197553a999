#include <doctest.h>

#include <random>

#include "gwr/series.hpp"

using gwr::Rational;
using gwr::Series;
using gwr::rat;

namespace {

// Independent oracle for mu: solve kappa^2 mu = (1 - mu)^2 order by order
// with mu_0 = 1 and the decreasing branch mu_1 = -1.
Series mu_oracle(int order) {
  Series mu(order);
  mu[0] = 1;
  if (order >= 1) mu[1] = -1;
  for (int j = 3; j <= order + 1; ++j) {
    // coefficient j of (1-mu)^2 equals coefficient j of kappa^2 mu, i.e.
    // mu_{j-2}; isolate mu_{j-1} from the convolution.
    Rational conv(0);
    for (int a = 2; a <= j - 2; ++a) conv += mu[a] * mu[j - a];
    Rational target = mu[j - 2] - conv;
    if (j - 1 <= order) mu[j - 1] = target / (2 * mu[1]);
  }
  return mu;
}

}  // namespace

TEST_CASE("series arithmetic basics") {
  SUBCASE("geometric inverse of 1 - kappa") {
    Series a(6);
    a[0] = 1;
    a[1] = -1;
    Series inv = gwr::series_inv(a);
    for (int j = 0; j <= 6; ++j) CHECK(inv[j] == 1);
  }
  SUBCASE("inverse requires nonzero constant term") {
    Series a(4);
    a[1] = 1;
    CHECK_THROWS_AS((void)gwr::series_inv(a), gwr::error);
  }
  SUBCASE("sqrt(1 + kappa^2/4) squares back") {
    Series a(8);
    a[2] = rat(1, 4);
    Series s = gwr::series_sqrt_one_plus(a);
    CHECK(s[0] == 1);
    CHECK(s[2] == rat(1, 8));
    CHECK(s[4] == rat(-1, 128));
    Series sq = gwr::series_mul(s, s);
    for (int j = 0; j <= 8; ++j) CHECK(sq[j] == a[j] + (j == 0 ? 1 : 0));
  }
  SUBCASE("mul by inverse is one for random series") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> num(-4, 4), den(1, 3);
    for (int trial = 0; trial < 20; ++trial) {
      Series a(7);
      a[0] = 1 + Rational(num(rng) * num(rng));  // keep constant term nonzero
      for (int j = 1; j <= 7; ++j) a[j] = rat(num(rng), den(rng));
      Series prod = gwr::series_mul(a, gwr::series_inv(a));
      CHECK(prod[0] == 1);
      for (int j = 1; j <= 7; ++j) CHECK(prod[j] == 0);
    }
  }
}

TEST_CASE("mu series") {
  Series mu = gwr::mu_series(8);
  SUBCASE("first coefficients match the order-by-order oracle") {
    Series oracle = mu_oracle(8);
    for (int j = 0; j <= 8; ++j) CHECK(mu[j] == oracle[j]);
    CHECK(mu[0] == 1);
    CHECK(mu[1] == -1);
    CHECK(mu[2] == rat(1, 2));
    CHECK(mu[3] == rat(-1, 8));
    CHECK(mu[4] == 0);
    CHECK(mu[5] == rat(1, 128));
  }
  SUBCASE("defining quadratic mu^2 - (2 + kappa^2) mu + 1 = 0") {
    Series lhs = gwr::series_mul(mu, mu);
    Series two_plus(8);
    two_plus[0] = 2;
    two_plus[2] = 1;
    lhs = gwr::series_sub(lhs, gwr::series_mul(two_plus, mu));
    lhs = gwr::series_add(lhs, Series::constant(Rational(1), 8));
    for (int j = 0; j <= 8; ++j) CHECK(lhs[j] == 0);
  }
  SUBCASE("inverse coefficients flip odd signs") {
    Series inv = gwr::series_inv(mu);
    CHECK(inv[0] == 1);
    CHECK(inv[1] == 1);
    CHECK(inv[2] == rat(1, 2));
    CHECK(inv[3] == rat(1, 8));
    Series prod = gwr::series_mul(mu, inv);
    CHECK(prod[0] == 1);
    for (int j = 1; j <= 8; ++j) CHECK(prod[j] == 0);
  }
}

namespace {

Rational kernel_closed_form(int j, int n, int m) {
  long mn = std::min(n, m), mx = std::max(n, m);
  switch (j) {
    case 0: return Rational(mn);
    case 1: return Rational(-static_cast<long>(n) * m);
    case 2:
      return rat(-mn, 6) + rat(mn * mn * mn, 6) + rat(static_cast<long>(n) * m * mx, 2);
    default:
      return rat(5L * n * m, 24) - rat(static_cast<long>(n) * n * n * m, 6) -
             rat(static_cast<long>(n) * m * m * m, 6);
  }
}

}  // namespace

TEST_CASE("half-line resolvent entry series") {
  SUBCASE("spot values from the printed kernels") {
    CHECK(gwr::ray_resolvent_entry_series(2, 5, 1)[0] == 2);
    CHECK(gwr::ray_resolvent_entry_series(1, 3, 1)[1] == -3);
    CHECK(gwr::ray_resolvent_entry_series(1, 1, 3)[3] == rat(-1, 8));
  }
  SUBCASE("orders 0..3 equal the closed forms on a window") {
    for (int n = 1; n <= 12; ++n)
      for (int m = 1; m <= 12; ++m) {
        Series s = gwr::ray_resolvent_entry_series(n, m, 3);
        for (int j = 0; j <= 3; ++j) CHECK(s[j] == kernel_closed_form(j, n, m));
      }
  }
  SUBCASE("symmetry in (n, m)") {
    for (int n = 1; n <= 8; ++n)
      for (int m = n; m <= 8; ++m) {
        Series a = gwr::ray_resolvent_entry_series(n, m, 6);
        Series b = gwr::ray_resolvent_entry_series(m, n, 6);
        for (int j = 0; j <= 6; ++j) CHECK(a[j] == b[j]);
      }
  }
  SUBCASE("recursion h g_j = -g_{j-2}, with g_0 the inverse and h g_1 = 0") {
    // apply the half-line operator in n for fixed m
    auto kernel = [](int j, int n, int m) {
      return gwr::ray_resolvent_entry_series(n, m, j)[j];
    };
    for (int m = 1; m <= 10; ++m)
      for (int n = 1; n <= 10; ++n)
        for (int j = 0; j <= 5; ++j) {
          Rational up = kernel(j, n + 1, m);
          Rational down = n == 1 ? Rational(0) : kernel(j, n - 1, m);
          Rational lhs = 2 * kernel(j, n, m) - up - down;
          Rational rhs;
          if (j == 0) rhs = (n == m) ? 1 : 0;
          else if (j == 1) rhs = 0;
          else rhs = -kernel(j - 2, n, m);
          CHECK(lhs == rhs);
        }
  }
}
