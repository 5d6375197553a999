#pragma once

#include <random>
#include <string>
#include <vector>

#include "gwr/graph.hpp"
#include "gwr/perturbation.hpp"
#include "gwr/ray_function.hpp"

namespace gwr_test {

inline gwr::Rational rand_rational(std::mt19937& rng, int num_range = 4) {
  std::uniform_int_distribution<int> num(-num_range, num_range);
  std::uniform_int_distribution<int> den(1, 3);
  return gwr::rat(num(rng), den(rng));
}

// Random connected simple graph on n vertices named v0..v{n-1}, plus extra
// edges on top of a random spanning tree.
inline gwr::GraphWithRays random_graph(std::mt19937& rng, int n, int rays) {
  std::vector<std::string> names;
  for (int i = 0; i < n; ++i) names.push_back("v" + std::to_string(i));
  std::vector<std::pair<std::string, std::string>> edges;
  std::uniform_int_distribution<int> coin(0, 3);
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> parent(0, i - 1);
    edges.push_back({names[parent(rng)], names[i]});
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      bool present = false;
      for (auto& e : edges)
        present = present || (e.first == names[i] && e.second == names[j]) ||
                  (e.first == names[j] && e.second == names[i]);
      if (!present && coin(rng) == 0) edges.push_back({names[i], names[j]});
    }
  std::vector<std::string> joints;
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int a = 0; a < rays; ++a) joints.push_back(names[pick(rng)]);
  return gwr::build_graph(names, edges, joints);
}

// Random finitely supported rational function with ray support <= radius.
inline gwr::RayFunction<gwr::Rational> random_function(std::mt19937& rng,
                                                       const gwr::GraphWithRays& g, int radius,
                                                       int num_range = 3) {
  gwr::RayFunction<gwr::Rational> u(g);
  for (int i = 0; i < g.k_size(); ++i) u.k_values[i] = rand_rational(rng, num_range);
  for (int a = 0; a < g.ray_count(); ++a)
    for (int p = 1; p <= radius; ++p)
      u.set_head_value(a, p, rand_rational(rng, num_range));
  u.trim();
  return u;
}

// Random rational self-adjoint unitary U = I - 2 P with P a rational
// orthogonal projection (every rational symmetric involution has this form).
inline gwr::Matrix<gwr::Rational> random_involution(std::mt19937& rng, int k) {
  using gwr::Matrix;
  using gwr::Rational;
  std::uniform_int_distribution<int> rdim(0, k);
  int r = rdim(rng);
  Matrix<Rational> u = Matrix<Rational>::identity(k);
  if (r == 0) return u;
  Matrix<Rational> b(k, r);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < r; ++j) b(i, j) = rand_rational(rng, 2);
  gwr::Subspace<Rational> span = gwr::make_subspace(k, b);
  if (span.dim() == 0) return u;
  Matrix<Rational> p = gwr::orthogonal_projection(span);
  return u - (Rational(2) * p);
}

// Random factored perturbation with k columns supported within radius.
inline gwr::FactoredPerturbation<gwr::Rational> random_perturbation(std::mt19937& rng,
                                                                    const gwr::GraphWithRays& g,
                                                                    int kdim, int radius) {
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::vector<gwr::RayFunction<gwr::Rational>> cols;
    for (int c = 0; c < kdim; ++c) cols.push_back(random_function(rng, g, radius, 2));
    auto u = random_involution(rng, kdim);
    try {
      return gwr::build_factored(g, std::move(cols), std::move(u));
    } catch (const gwr::error&) {
      continue;  // dependent columns; retry
    }
  }
  gwr::fail(gwr::errc::bad_argument, "random_perturbation: no independent draw found");
}

}  // namespace gwr_test
