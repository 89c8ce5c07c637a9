#pragma once

#include <functional>

#include "qpseudo/graph.hpp"
#include "qpseudo/rng.hpp"

namespace qpseudo {

using DistanceFn = std::function<double(int, int)>;

struct MapResult {
  double map = 0.0;
  int skipped_isolated = 0;
};

// Graph-reconstruction mAP: per neighbor v_i of u, precision of the ranked
// prefix R_{u,v_i}, averaged per node then over non-isolated nodes. Ties are
// counted pessimistically: a non-neighbor at the same distance as v_i ranks
// ahead of it, a tied neighbor other than v_i ranks behind.
MapResult map_metric(const DistanceFn& dist, const Graph& g);
MapResult map_metric(const Eigen::MatrixXd& dist, const Graph& g);

// Mann-Whitney ROC AUC with half credit for ties. labels are 0/1; throws if
// one class is missing.
double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct F1Result {
  double micro = 0.0;
  double macro = 0.0;
};
F1Result f1_scores(const std::vector<int>& pred, const std::vector<int>& labels, int n_classes);

struct DistortionResult {
  double value = 0.0;
  bool sampled = false;
};

// (1/|V|^2) sum over ordered pairs u != v of ((d(u,v)/d_G(u,v))^2 - 1)^2.
// Exact below max_pairs ordered pairs, otherwise an unbiased sampled estimate
// (flagged). Throws on a disconnected graph.
DistortionResult distortion(const DistanceFn& dist, const Graph& g,
                            long long max_pairs = 4'000'000, std::uint64_t seed = 0);

}  // namespace qpseudo
