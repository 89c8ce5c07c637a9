#pragma once

#include <map>
#include <vector>

#include "qpseudo/graph.hpp"
#include "qpseudo/rng.hpp"

namespace qpseudo {

// BFS distances from src; -1 for unreachable nodes. Neighbor order is the
// sorted adjacency list, so parents (and midpoints) are id-deterministic.
std::vector<int> bfs_distances(const Graph& g, int src);

// Shortest path (node sequence) from a to b under the same deterministic BFS;
// empty when unreachable.
std::vector<int> bfs_path(const Graph& g, int a, int b);

std::vector<int> largest_component(const Graph& g);

struct CurvatureSample {
  int a, b, c, m;
  double value;
};

struct CurvatureReport {
  std::vector<CurvatureSample> samples;
  double mean = 0.0;
};

// Triangle-midpoint curvature estimate xi(m; b, c; a) over BFS distances,
// with m the midpoint of the deterministic shortest b-c path. Samples are
// drawn uniformly from the largest component.
CurvatureReport sectional_curvature(const Graph& g, int n_samples, Rng& rng);

// Exhaustive variant over all (b < c, a) triples with a != m; used by tests
// and small graphs.
CurvatureReport sectional_curvature_exact(const Graph& g);

struct HyperbolicityReport {
  std::map<double, double> histogram;  // delta value (granularity 0.5) -> mass
  double max_delta = 0.0;
  long long n_quadruples = 0;
  bool exact = false;
};

// Gromov four-point delta = (largest pairwise-distance sum - second largest)/2
// over node quadruples of the largest component.
HyperbolicityReport delta_hyperbolicity_exact(const Graph& g);  // O(n^4), n <= 200

// Sampled estimate; enumerates exhaustively (== exact) when n_quadruples
// covers all quadruples. On large graphs quadruples are drawn from a random
// pool of at most `pool` nodes to bound the number of BFS sweeps.
HyperbolicityReport delta_hyperbolicity_sampled(const Graph& g, long long n_quadruples, Rng& rng,
                                                int pool = 400);

}  // namespace qpseudo
