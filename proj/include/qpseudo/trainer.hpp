#pragma once

#include <cmath>
#include <string>

#include "qpseudo/metrics.hpp"
#include "qpseudo/qgcn.hpp"

namespace qpseudo {

enum class Task { Reconstruct, LinkPred, NodeClass };
Task parse_task(const std::string& name);
std::string task_name(Task t);

struct TrainConfig {
  Task task = Task::Reconstruct;
  int epochs = 500;
  double lr = 0.01;
  double lr_min = -1.0;  // < 0: constant lr; otherwise linear decay to lr_min
  double curvature_lr = 1e-4;
  double weight_decay = 0.0;
  double dropout = 0.0;
  std::uint64_t seed = 0;
  // link prediction edge split
  double edge_train_frac = 0.85, edge_val_frac = 0.05, edge_test_frac = 0.10;
  // node classification masks
  double node_train_frac = 0.70, node_val_frac = 0.15, node_test_frac = 0.15;
  int patience = 100;   // epochs without val improvement before stopping
  int val_every = 10;   // validation cadence (epochs)
  int max_full_batch_edges = 5000;  // full-batch below, minibatched above
  int minibatch_edges = 1024;
  std::string warm_start;  // checkpoint path; link-pred weights seed node classification
};

// Deterministic derived stream for a (seed, purpose/epoch) pair.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

struct Split {
  std::vector<std::pair<int, int>> train_edges, val_edges, test_edges;
  std::vector<std::pair<int, int>> val_neg, test_neg;  // disjoint from all true edges
  std::vector<int> train_nodes, val_nodes, test_nodes;
};

Split make_edge_split(const Graph& g, double train_frac, double val_frac, double test_frac,
                      std::uint64_t seed);
Split make_node_split(const Graph& g, double train_frac, double val_frac, double test_frac,
                      std::uint64_t seed);

struct AdamState {
  std::vector<Eigen::MatrixXd> m, v;
  long long step = 0;
};

// Standard Adam with bias correction. Curvature parameters use curvature_lr
// and are exempt from weight decay.
void adam_step(const std::vector<ParamRef>& params, const std::vector<Eigen::MatrixXd>& grads,
               AdamState& state, double lr, double curvature_lr, double weight_decay);

// k distinct non-neighbors of u (all of them if fewer than k exist); sorted.
// Throws if u has no non-neighbor.
std::vector<int> negative_sample(const Graph& g, int u, int k, Rng& rng);

struct EpochRecord {
  int epoch;
  double loss;
  double val_metric;
};

struct TrainResult {
  QgcnModel model;  // best-validation parameters
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  double final_loss = std::numeric_limits<double>::quiet_NaN();
  int epochs_run = 0;
  bool full_batch = true;
  // task metrics (NaN when not applicable)
  double map = std::numeric_limits<double>::quiet_NaN();
  double init_map = std::numeric_limits<double>::quiet_NaN();
  double auc = std::numeric_limits<double>::quiet_NaN();
  double micro_f1 = std::numeric_limits<double>::quiet_NaN();
  double macro_f1 = std::numeric_limits<double>::quiet_NaN();
  double graph_distortion = std::numeric_limits<double>::quiet_NaN();
};

struct DivergenceError : std::runtime_error {
  int epoch;
  DivergenceError(int e, const std::string& msg) : std::runtime_error(msg), epoch(e) {}
};

TrainResult train(const Graph& g, const ModelConfig& mcfg, const TrainConfig& tcfg);

// Flat-space reference model through the same trainer.
TrainResult euclidean_gcn_baseline(const Graph& g, ModelConfig mcfg, const TrainConfig& tcfg);

// Eager inference.
std::vector<Eigen::VectorXd> embed_nodes(const QgcnModel& model, const Graph& g);
Eigen::MatrixXd pairwise_distances(const QgcnModel& model,
                                   const std::vector<Eigen::VectorXd>& emb);
long long parameter_count(const QgcnModel& model);

}  // namespace qpseudo
