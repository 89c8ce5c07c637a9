#include "qpseudo/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "qpseudo/types.hpp"

namespace qpseudo {

std::vector<int> bfs_distances(const Graph& g, int src) {
  std::vector<int> d(g.n_nodes, -1);
  std::deque<int> q{src};
  d[src] = 0;
  while (!q.empty()) {
    const int u = q.front();
    q.pop_front();
    for (int v : g.adj[u])
      if (d[v] < 0) {
        d[v] = d[u] + 1;
        q.push_back(v);
      }
  }
  return d;
}

std::vector<int> bfs_path(const Graph& g, int a, int b) {
  std::vector<int> parent(g.n_nodes, -2);
  std::deque<int> q{a};
  parent[a] = -1;
  while (!q.empty()) {
    const int u = q.front();
    q.pop_front();
    if (u == b) break;
    for (int v : g.adj[u])
      if (parent[v] == -2) {
        parent[v] = u;
        q.push_back(v);
      }
  }
  if (parent[b] == -2) return {};
  std::vector<int> path;
  for (int u = b; u != -1; u = parent[u]) path.push_back(u);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<int> largest_component(const Graph& g) {
  std::vector<int> comp(g.n_nodes, -1);
  int best = -1;
  std::size_t best_size = 0;
  int n_comp = 0;
  for (int s = 0; s < g.n_nodes; ++s) {
    if (comp[s] >= 0) continue;
    std::deque<int> q{s};
    comp[s] = n_comp;
    std::size_t size = 0;
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      ++size;
      for (int v : g.adj[u])
        if (comp[v] < 0) {
          comp[v] = n_comp;
          q.push_back(v);
        }
    }
    if (size > best_size) {
      best_size = size;
      best = n_comp;
    }
    ++n_comp;
  }
  std::vector<int> nodes;
  nodes.reserve(best_size);
  for (int u = 0; u < g.n_nodes; ++u)
    if (comp[u] == best) nodes.push_back(u);
  return nodes;
}

namespace {

double curvature_value(int da_m, int d_bc, int da_b, int da_c) {
  const double dam = da_m;
  return (dam * dam + d_bc * d_bc / 4.0 - (da_b * (double)da_b + da_c * (double)da_c) / 2.0) /
         (2.0 * dam);
}

}  // namespace

CurvatureReport sectional_curvature(const Graph& g, int n_samples, Rng& rng) {
  if (n_samples <= 0) throw std::invalid_argument("sectional_curvature: n_samples must be > 0");
  const std::vector<int> nodes = largest_component(g);
  if (nodes.size() < 3)
    throw std::invalid_argument("sectional_curvature: component too small");
  CurvatureReport rep;
  rep.samples.reserve(n_samples);
  double sum = 0.0;
  int k = 0;
  long long guard = 0;
  while (k < n_samples) {
    if (++guard > 200LL * n_samples + 10000)
      throw std::invalid_argument("sectional_curvature: no even-distance pairs found");
    int b = nodes[rng.uniform_int(static_cast<int>(nodes.size()))];
    int c = b;
    while (c == b) c = nodes[rng.uniform_int(static_cast<int>(nodes.size()))];
    const std::vector<int> db = bfs_distances(g, b);
    if (db[c] % 2 != 0) continue;  // exact midpoint needs an even distance
    const std::vector<int> path = bfs_path(g, b, c);
    const int m = path[db[c] / 2];
    int a = m;
    while (a == m) a = nodes[rng.uniform_int(static_cast<int>(nodes.size()))];
    const std::vector<int> da = bfs_distances(g, a);
    CurvatureSample s{a, b, c, m, curvature_value(da[m], db[c], da[b], da[c])};
    sum += s.value;
    rep.samples.push_back(s);
    ++k;
  }
  rep.mean = sum / n_samples;
  return rep;
}

CurvatureReport sectional_curvature_exact(const Graph& g) {
  const std::vector<int> nodes = largest_component(g);
  CurvatureReport rep;
  double sum = 0.0;
  std::vector<std::vector<int>> dist(g.n_nodes);
  for (int u : nodes) dist[u] = bfs_distances(g, u);
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const int b = nodes[i], c = nodes[j];
      if (dist[b][c] % 2 != 0) continue;  // exact midpoint needs an even distance
      const std::vector<int> path = bfs_path(g, b, c);
      const int m = path[dist[b][c] / 2];
      for (int a : nodes) {
        if (a == m) continue;
        CurvatureSample s{a, b, c, m,
                          curvature_value(dist[a][m], dist[b][c], dist[a][b], dist[a][c])};
        sum += s.value;
        rep.samples.push_back(s);
      }
    }
  if (rep.samples.empty())
    throw std::invalid_argument("sectional_curvature_exact: no valid triples");
  rep.mean = sum / static_cast<double>(rep.samples.size());
  return rep;
}

namespace {

inline double quad_delta(int dxy, int dzw, int dxz, int dyw, int dxw, int dyz) {
  const int s1 = dxy + dzw, s2 = dxz + dyw, s3 = dxw + dyz;
  int m1 = s1, m2 = s2;
  if (m1 < m2) std::swap(m1, m2);
  if (s3 > m1) {
    m2 = m1;
    m1 = s3;
  } else if (s3 > m2) {
    m2 = s3;
  }
  return 0.5 * (m1 - m2);
}

HyperbolicityReport enumerate_all(const Graph& g, const std::vector<int>& nodes,
                                  const std::vector<std::vector<int>>& dist) {
  HyperbolicityReport rep;
  rep.exact = true;
  const int k = static_cast<int>(nodes.size());
  for (int i = 0; i < k; ++i)
    for (int j = i + 1; j < k; ++j)
      for (int l = j + 1; l < k; ++l)
        for (int m = l + 1; m < k; ++m) {
          const int y = nodes[j], z = nodes[l], w = nodes[m];
          const double d = quad_delta(dist[i][y], dist[l][w], dist[i][z], dist[j][w], dist[i][w],
                                      dist[j][z]);
          rep.histogram[d] += 1.0;
          rep.max_delta = std::max(rep.max_delta, d);
          ++rep.n_quadruples;
        }
  for (auto& [key, mass] : rep.histogram) mass /= static_cast<double>(rep.n_quadruples);
  return rep;
}

}  // namespace

HyperbolicityReport delta_hyperbolicity_exact(const Graph& g) {
  const std::vector<int> nodes = largest_component(g);
  if (nodes.size() > 200)
    throw std::invalid_argument("delta_hyperbolicity_exact: graph too large (O(n^4))");
  if (nodes.size() < 4)
    throw std::invalid_argument("delta_hyperbolicity_exact: need at least 4 nodes");
  std::vector<std::vector<int>> dist;
  dist.reserve(nodes.size());
  for (int u : nodes) dist.push_back(bfs_distances(g, u));
  return enumerate_all(g, nodes, dist);
}

HyperbolicityReport delta_hyperbolicity_sampled(const Graph& g, long long n_quadruples, Rng& rng,
                                                int pool) {
  if (n_quadruples <= 0)
    throw std::invalid_argument("delta_hyperbolicity_sampled: need n_quadruples > 0");
  std::vector<int> nodes = largest_component(g);
  if (nodes.size() < 4)
    throw std::invalid_argument("delta_hyperbolicity_sampled: need at least 4 nodes");
  if (static_cast<int>(nodes.size()) > pool) {
    // uniform pool without replacement (partial Fisher-Yates)
    for (int i = 0; i < pool; ++i) {
      const int j = i + rng.uniform_int(static_cast<int>(nodes.size()) - i);
      std::swap(nodes[i], nodes[j]);
    }
    nodes.resize(pool);
    std::sort(nodes.begin(), nodes.end());
  }
  const int k = static_cast<int>(nodes.size());
  std::vector<std::vector<int>> dist;
  dist.reserve(k);
  for (int u : nodes) dist.push_back(bfs_distances(g, u));

  const double total =
      static_cast<double>(k) * (k - 1) * (k - 2) * (k - 3) / 24.0;
  if (static_cast<double>(n_quadruples) >= total) {
    HyperbolicityReport rep = enumerate_all(g, nodes, dist);
    rep.exact = static_cast<int>(largest_component(g).size()) == k;
    return rep;
  }

  HyperbolicityReport rep;
  for (long long q = 0; q < n_quadruples; ++q) {
    int idx[4];
    for (int a = 0; a < 4; ++a) {
      bool fresh;
      do {
        idx[a] = rng.uniform_int(k);
        fresh = true;
        for (int b = 0; b < a; ++b) fresh &= (idx[a] != idx[b]);
      } while (!fresh);
    }
    const int i = idx[0], j = idx[1], l = idx[2], m = idx[3];
    const double d = quad_delta(dist[i][nodes[j]], dist[l][nodes[m]], dist[i][nodes[l]],
                                dist[j][nodes[m]], dist[i][nodes[m]], dist[j][nodes[l]]);
    rep.histogram[d] += 1.0;
    rep.max_delta = std::max(rep.max_delta, d);
    ++rep.n_quadruples;
  }
  for (auto& [key, mass] : rep.histogram) mass /= static_cast<double>(rep.n_quadruples);
  return rep;
}

}  // namespace qpseudo
