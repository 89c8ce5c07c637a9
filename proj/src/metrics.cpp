#include "qpseudo/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qpseudo/analysis.hpp"
#include "qpseudo/types.hpp"

namespace qpseudo {

MapResult map_metric(const DistanceFn& dist, const Graph& g) {
  const int n = g.n_nodes;
  MapResult res;
  double total = 0.0;
  int counted = 0;
  std::vector<std::pair<double, int>> order;
  order.reserve(n - 1);
  for (int u = 0; u < n; ++u) {
    if (g.adj[u].empty()) {
      ++res.skipped_isolated;
      continue;
    }
    order.clear();
    for (int w = 0; w < n; ++w)
      if (w != u) order.emplace_back(dist(u, w), w);
    std::sort(order.begin(), order.end());

    // precision of each neighbor's ranked prefix: strictly-closer nodes plus
    // tied non-neighbors plus the neighbor itself (pessimistic ties)
    std::vector<std::pair<int, double>> precision;  // (neighbor id, value)
    std::size_t i = 0;
    long long less_all = 0, less_nb = 0;
    while (i < order.size()) {
      std::size_t j = i;
      long long tied_nb = 0, tied_nonnb = 0;
      while (j < order.size() && order[j].first == order[i].first) {
        if (g.has_edge(u, order[j].second))
          ++tied_nb;
        else
          ++tied_nonnb;
        ++j;
      }
      const double prec =
          static_cast<double>(less_nb + 1) / static_cast<double>(less_all + tied_nonnb + 1);
      for (std::size_t k = i; k < j; ++k)
        if (g.has_edge(u, order[k].second)) precision.emplace_back(order[k].second, prec);
      less_all += static_cast<long long>(j - i);
      less_nb += tied_nb;
      i = j;
    }
    // accumulate in ascending neighbor id so the sum is order-canonical
    std::sort(precision.begin(), precision.end());
    double ap = 0.0;
    for (const auto& [w, prec] : precision) ap += prec;
    total += ap / static_cast<double>(g.degree(u));
    ++counted;
  }
  res.map = counted > 0 ? total / counted : 0.0;
  return res;
}

MapResult map_metric(const Eigen::MatrixXd& dist, const Graph& g) {
  return map_metric([&dist](int u, int v) { return dist(u, v); }, g);
}

double roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw DimensionError("roc_auc: scores/labels size mismatch");
  const std::size_t n = scores.size();
  long long n_pos = std::count(labels.begin(), labels.end(), 1);
  long long n_neg = static_cast<long long>(n) - n_pos;
  if (n_pos == 0 || n_neg == 0)
    throw std::invalid_argument("roc_auc: need at least one positive and one negative");

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&scores](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  double rank_sum_pos = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[idx[j]] == scores[idx[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // ranks are 1-based
    for (std::size_t k = i; k < j; ++k)
      if (labels[idx[k]] == 1) rank_sum_pos += avg_rank;
    i = j;
  }
  return (rank_sum_pos - 0.5 * static_cast<double>(n_pos) * static_cast<double>(n_pos + 1)) /
         (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

F1Result f1_scores(const std::vector<int>& pred, const std::vector<int>& labels, int n_classes) {
  if (pred.size() != labels.size()) throw DimensionError("f1_scores: size mismatch");
  std::vector<long long> tp(n_classes, 0), fp(n_classes, 0), fn(n_classes, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] < 0 || pred[i] >= n_classes || labels[i] < 0 || labels[i] >= n_classes)
      throw std::invalid_argument("f1_scores: label out of range");
    if (pred[i] == labels[i])
      ++tp[pred[i]];
    else {
      ++fp[pred[i]];
      ++fn[labels[i]];
    }
  }
  long long tp_all = 0, fp_all = 0, fn_all = 0;
  double macro = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    tp_all += tp[c];
    fp_all += fp[c];
    fn_all += fn[c];
    const long long denom = 2 * tp[c] + fp[c] + fn[c];
    macro += denom > 0 ? 2.0 * tp[c] / static_cast<double>(denom) : 0.0;
  }
  F1Result r;
  r.macro = n_classes > 0 ? macro / n_classes : 0.0;
  const long long denom = 2 * tp_all + fp_all + fn_all;
  r.micro = denom > 0 ? 2.0 * tp_all / static_cast<double>(denom) : 0.0;
  return r;
}

DistortionResult distortion(const DistanceFn& dist, const Graph& g, long long max_pairs,
                            std::uint64_t seed) {
  const int n = g.n_nodes;
  std::vector<std::vector<int>> dg(n);
  for (int u = 0; u < n; ++u) {
    dg[u] = bfs_distances(g, u);
    for (int v = 0; v < n; ++v)
      if (dg[u][v] < 0) throw std::invalid_argument("distortion: graph is disconnected");
  }
  auto term = [&](int u, int v) {
    const double r = dist(u, v) / static_cast<double>(dg[u][v]);
    const double x = r * r - 1.0;
    return x * x;
  };
  DistortionResult res;
  const long long total_pairs = static_cast<long long>(n) * (n - 1);
  if (total_pairs <= max_pairs) {
    double s = 0.0;
    for (int u = 0; u < n; ++u)
      for (int v = 0; v < n; ++v)
        if (u != v) s += term(u, v);
    res.value = s / (static_cast<double>(n) * n);
    return res;
  }
  res.sampled = true;
  Rng rng(seed);
  const long long m = max_pairs;
  double s = 0.0;
  for (long long k = 0; k < m; ++k) {
    int u = rng.uniform_int(n);
    int v = rng.uniform_int(n);
    while (v == u) v = rng.uniform_int(n);
    s += term(u, v);
  }
  res.value = (s / static_cast<double>(m)) * (static_cast<double>(total_pairs) /
                                              (static_cast<double>(n) * n));
  return res;
}

}  // namespace qpseudo
