#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "gwr/scalar.hpp"

namespace gwr {

// A site of the graph G = K u L_1 u ... u L_N: either a vertex of the
// finite graph K or position n >= 1 on ray alpha (0-based ray index).
struct SiteIndex {
  enum class Kind { KVertex, RaySite } kind;
  int k_index = -1;   // index into k_vertices ordering
  int ray = -1;       // 0-based
  int position = 0;   // n >= 1

  static SiteIndex kvertex(int idx) { return {Kind::KVertex, idx, -1, 0}; }
  static SiteIndex ray_site(int ray, int n) { return {Kind::RaySite, -1, ray, n}; }

  bool is_k() const { return kind == Kind::KVertex; }

  friend bool operator==(const SiteIndex& a, const SiteIndex& b) {
    return a.kind == b.kind && a.k_index == b.k_index && a.ray == b.ray &&
           a.position == b.position;
  }
  friend bool operator<(const SiteIndex& a, const SiteIndex& b) {
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.is_k()) return a.k_index < b.k_index;
    if (a.ray != b.ray) return a.ray < b.ray;
    return a.position < b.position;
  }
};

// Finite connected simple graph K with N discrete half-lines attached at
// joint vertices. Vertex ordering is the insertion order of k_vertices and
// fixes all matrix indexing downstream.
struct GraphWithRays {
  std::vector<std::string> k_vertices;
  std::vector<std::pair<int, int>> k_edges;   // index pairs, i < j
  std::vector<int> joints;                    // joints[alpha] = K vertex index
  std::vector<std::vector<int>> adjacency;    // K-internal neighbor lists
  std::vector<std::vector<int>> rays_at;      // rays_at[v] = rays jointed at v

  int k_size() const { return static_cast<int>(k_vertices.size()); }
  int ray_count() const { return static_cast<int>(joints.size()); }
  int degree_k(int v) const { return static_cast<int>(adjacency[v].size()); }

  int vertex_index(const std::string& name) const {
    for (int i = 0; i < k_size(); ++i)
      if (k_vertices[i] == name) return i;
    return -1;
  }
};

inline GraphWithRays build_graph(const std::vector<std::string>& k_vertices,
                                 const std::vector<std::pair<std::string, std::string>>& k_edges,
                                 const std::vector<std::string>& joints) {
  if (k_vertices.empty()) fail(errc::bad_argument, "build_graph: empty vertex list");
  if (joints.empty()) fail(errc::bad_argument, "build_graph: at least one ray is required");
  GraphWithRays g;
  std::map<std::string, int> index;
  for (const auto& v : k_vertices) {
    if (index.count(v)) fail(errc::duplicate_edge, "build_graph: duplicate vertex " + v);
    index[v] = static_cast<int>(g.k_vertices.size());
    g.k_vertices.push_back(v);
  }
  g.adjacency.resize(g.k_size());
  g.rays_at.resize(g.k_size());
  std::set<std::pair<int, int>> seen;
  for (const auto& e : k_edges) {
    auto ia = index.find(e.first), ib = index.find(e.second);
    if (ia == index.end() || ib == index.end())
      fail(errc::bad_argument, "build_graph: edge references unknown vertex");
    int a = ia->second, b = ib->second;
    if (a == b) fail(errc::self_loop, "build_graph: self loop at " + e.first);
    if (a > b) std::swap(a, b);
    if (!seen.insert({a, b}).second)
      fail(errc::duplicate_edge, "build_graph: duplicate edge " + e.first + "-" + e.second);
    g.k_edges.push_back({a, b});
    g.adjacency[a].push_back(b);
    g.adjacency[b].push_back(a);
  }
  // connectedness of (K, E_0)
  std::vector<bool> visited(g.k_size(), false);
  std::vector<int> stack{0};
  visited[0] = true;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    for (int w : g.adjacency[v])
      if (!visited[w]) { visited[w] = true; stack.push_back(w); }
  }
  for (int v = 0; v < g.k_size(); ++v)
    if (!visited[v]) fail(errc::disconnected_k, "build_graph: K is not connected");
  for (size_t alpha = 0; alpha < joints.size(); ++alpha) {
    auto it = index.find(joints[alpha]);
    if (it == index.end()) fail(errc::unknown_joint, "build_graph: unknown joint " + joints[alpha]);
    g.joints.push_back(it->second);
    g.rays_at[it->second].push_back(static_cast<int>(alpha));
  }
  return g;
}

// Enumerates K plus the first `depth` sites of every ray, in the canonical
// order used for windows and reports.
inline std::vector<SiteIndex> window_sites(const GraphWithRays& g, int depth) {
  std::vector<SiteIndex> sites;
  for (int v = 0; v < g.k_size(); ++v) sites.push_back(SiteIndex::kvertex(v));
  for (int alpha = 0; alpha < g.ray_count(); ++alpha)
    for (int n = 1; n <= depth; ++n) sites.push_back(SiteIndex::ray_site(alpha, n));
  return sites;
}

inline std::string site_label(const GraphWithRays& g, const SiteIndex& x) {
  if (x.is_k()) return g.k_vertices[x.k_index];
  return "ray" + std::to_string(x.ray + 1) + ":" + std::to_string(x.position);
}

}  // namespace gwr
