#include "qpseudo/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <set>

#include "qpseudo/analysis.hpp"
#include "qpseudo/checkpoint.hpp"

namespace qpseudo {

Task parse_task(const std::string& name) {
  if (name == "reconstruct") return Task::Reconstruct;
  if (name == "linkpred") return Task::LinkPred;
  if (name == "nodeclass") return Task::NodeClass;
  throw std::invalid_argument("unknown task: " + name);
}

std::string task_name(Task t) {
  switch (t) {
    case Task::Reconstruct: return "reconstruct";
    case Task::LinkPred: return "linkpred";
    case Task::NodeClass: return "nodeclass";
  }
  return "reconstruct";
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Split make_edge_split(const Graph& g, double train_frac, double val_frac, double test_frac,
                      std::uint64_t seed) {
  if (std::fabs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
    throw std::invalid_argument("edge split fractions must sum to 1");
  Rng rng(mix_seed(seed, 101));
  std::vector<std::pair<int, int>> edges = g.edges;
  for (int i = static_cast<int>(edges.size()) - 1; i > 0; --i)
    std::swap(edges[i], edges[rng.uniform_int(i + 1)]);
  const int n_edges = static_cast<int>(edges.size());
  const int n_val = static_cast<int>(std::floor(val_frac * n_edges));
  const int n_test = static_cast<int>(std::floor(test_frac * n_edges));
  Split s;
  s.val_edges.assign(edges.begin(), edges.begin() + n_val);
  s.test_edges.assign(edges.begin() + n_val, edges.begin() + n_val + n_test);
  s.train_edges.assign(edges.begin() + n_val + n_test, edges.end());

  auto sample_negatives = [&](int count) {
    std::vector<std::pair<int, int>> neg;
    std::set<std::pair<int, int>> used;
    long long guard = 0;
    while (static_cast<int>(neg.size()) < count) {
      if (++guard > 1000LL * count + 10000)
        throw std::runtime_error("negative edge sampling stalled (graph too dense)");
      int u = rng.uniform_int(g.n_nodes);
      int v = rng.uniform_int(g.n_nodes);
      if (u == v) continue;
      if (u > v) std::swap(u, v);
      if (g.has_edge(u, v)) continue;
      if (!used.insert({u, v}).second) continue;
      neg.emplace_back(u, v);
    }
    return neg;
  };
  s.val_neg = sample_negatives(static_cast<int>(s.val_edges.size()));
  s.test_neg = sample_negatives(static_cast<int>(s.test_edges.size()));
  return s;
}

Split make_node_split(const Graph& g, double train_frac, double val_frac, double test_frac,
                      std::uint64_t seed) {
  if (std::fabs(train_frac + val_frac + test_frac - 1.0) > 1e-9)
    throw std::invalid_argument("node split fractions must sum to 1");
  Rng rng(mix_seed(seed, 102));
  std::vector<int> nodes;
  for (int u = 0; u < g.n_nodes; ++u)
    if (g.labels.empty() || g.labels[u] >= 0) nodes.push_back(u);
  for (int i = static_cast<int>(nodes.size()) - 1; i > 0; --i)
    std::swap(nodes[i], nodes[rng.uniform_int(i + 1)]);
  const int n = static_cast<int>(nodes.size());
  const int n_train = static_cast<int>(std::floor(train_frac * n));
  const int n_val = static_cast<int>(std::floor(val_frac * n));
  Split s;
  s.train_nodes.assign(nodes.begin(), nodes.begin() + n_train);
  s.val_nodes.assign(nodes.begin() + n_train, nodes.begin() + n_train + n_val);
  s.test_nodes.assign(nodes.begin() + n_train + n_val, nodes.end());
  std::sort(s.train_nodes.begin(), s.train_nodes.end());
  std::sort(s.val_nodes.begin(), s.val_nodes.end());
  std::sort(s.test_nodes.begin(), s.test_nodes.end());
  return s;
}

void adam_step(const std::vector<ParamRef>& params, const std::vector<Eigen::MatrixXd>& grads,
               AdamState& state, double lr, double curvature_lr, double weight_decay) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  if (params.size() != grads.size()) throw DimensionError("adam_step: param/grad count mismatch");
  if (state.m.empty()) {
    for (const ParamRef& p : params) {
      state.m.push_back(Eigen::MatrixXd::Zero(p.value->rows(), p.value->cols()));
      state.v.push_back(Eigen::MatrixXd::Zero(p.value->rows(), p.value->cols()));
    }
  }
  ++state.step;
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    Eigen::MatrixXd g = grads[k];
    if (!params[k].is_curvature && weight_decay != 0.0) g += weight_decay * (*params[k].value);
    state.m[k] = b1 * state.m[k] + (1.0 - b1) * g;
    state.v[k] = b2 * state.v[k] + (1.0 - b2) * g.cwiseProduct(g);
    const double step_lr = params[k].is_curvature ? curvature_lr : lr;
    Eigen::MatrixXd mhat = state.m[k] / c1;
    Eigen::MatrixXd vhat = state.v[k] / c2;
    *params[k].value -=
        step_lr * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + eps).matrix());
  }
}

std::vector<int> negative_sample(const Graph& g, int u, int k, Rng& rng) {
  if (k < 1) throw std::invalid_argument("negative_sample: k must be >= 1");
  std::vector<int> nn;
  nn.reserve(g.n_nodes);
  for (int w = 0; w < g.n_nodes; ++w)
    if (w != u && !g.has_edge(u, w)) nn.push_back(w);
  if (nn.empty())
    throw std::runtime_error("negative_sample: node " + std::to_string(u) +
                             " has no non-neighbors");
  if (static_cast<int>(nn.size()) <= k) return nn;
  for (int i = 0; i < k; ++i) {
    const int j = i + rng.uniform_int(static_cast<int>(nn.size()) - i);
    std::swap(nn[i], nn[j]);
  }
  nn.resize(k);
  std::sort(nn.begin(), nn.end());
  return nn;
}

std::vector<Eigen::VectorXd> embed_nodes(const QgcnModel& model, const Graph& g) {
  LiftedModel<Eager> M = lift_eager(model);
  const ModelConfig& cfg = model.cfg;
  std::vector<Eigen::VectorXd> feats;
  feats.reserve(g.n_nodes);
  if (g.has_features()) {
    for (int i = 0; i < g.n_nodes; ++i) feats.push_back(g.features.row(i).transpose());
  } else {
    for (int i = 0; i < g.n_nodes; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(cfg.feature_dim);
      if (i < cfg.feature_dim) e(i) = 1.0;
      feats.push_back(std::move(e));
    }
  }
  std::vector<Eigen::VectorXd> noise;
  noise.reserve(g.n_nodes);
  for (int i = 0; i < g.n_nodes; ++i) noise.push_back(model.feature_noise.row(i).transpose());
  return model_embed<Eager>(M, cfg, g, feats, noise);
}

Eigen::MatrixXd pairwise_distances(const QgcnModel& model,
                                   const std::vector<Eigen::VectorXd>& emb) {
  const int n = static_cast<int>(emb.size());
  LiftedModel<Eager> M = lift_eager(model);
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      d(i, j) = pair_distance<Eager>(emb[i], emb[j], model.cfg, M);
      d(j, i) = d(i, j);
    }
  return d;
}

long long parameter_count(const QgcnModel& model) {
  long long c = 0;
  QgcnModel& m = const_cast<QgcnModel&>(model);
  for (const ParamRef& p : param_refs(m)) c += p.value->size();
  return c;
}

namespace {

struct TaskContext {
  Split split;
  Graph message_graph;  // aggregation graph (train edges only for link prediction)
  std::vector<std::vector<int>> negatives;  // reconstruction anchors
  bool resample_negatives = false;
};

std::vector<Eigen::VectorXd> raw_features(const Graph& g, const ModelConfig& cfg) {
  std::vector<Eigen::VectorXd> feats;
  feats.reserve(g.n_nodes);
  if (g.has_features()) {
    for (int i = 0; i < g.n_nodes; ++i) feats.push_back(g.features.row(i).transpose());
  } else {
    for (int i = 0; i < g.n_nodes; ++i) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(cfg.feature_dim);
      if (i < cfg.feature_dim) e(i) = 1.0;
      feats.push_back(std::move(e));
    }
  }
  return feats;
}

double evaluate_validation(const QgcnModel& model, const Graph& g, const TaskContext& ctx,
                           Task task) {
  std::vector<Eigen::VectorXd> emb = embed_nodes(model, ctx.message_graph);
  LiftedModel<Eager> M = lift_eager(model);
  switch (task) {
    case Task::Reconstruct: {
      Eigen::MatrixXd d = pairwise_distances(model, emb);
      return map_metric(d, g).map;
    }
    case Task::LinkPred: {
      std::vector<double> scores;
      std::vector<int> labels;
      for (auto [u, v] : ctx.split.val_edges) {
        scores.push_back(core::fermi_dirac<Eager>(
            pair_distance<Eager>(emb[u], emb[v], model.cfg, M), model.cfg.fd_r,
            model.cfg.fd_temp));
        labels.push_back(1);
      }
      for (auto [u, v] : ctx.split.val_neg) {
        scores.push_back(core::fermi_dirac<Eager>(
            pair_distance<Eager>(emb[u], emb[v], model.cfg, M), model.cfg.fd_r,
            model.cfg.fd_temp));
        labels.push_back(0);
      }
      return roc_auc(scores, labels);
    }
    case Task::NodeClass: {
      std::vector<Eigen::VectorXd> logits = nc_logits<Eager>(emb, model.cfg, M);
      std::vector<int> pred, truth;
      for (int u : ctx.split.val_nodes) {
        int arg = 0;
        logits[u].maxCoeff(&arg);
        pred.push_back(arg);
        truth.push_back(g.labels[u]);
      }
      if (pred.empty()) return 0.0;
      return f1_scores(pred, truth, model.cfg.n_classes).micro;
    }
  }
  return 0.0;
}

void finalize_metrics(TrainResult& res, const Graph& g, const TaskContext& ctx, Task task) {
  const QgcnModel& model = res.model;
  std::vector<Eigen::VectorXd> emb = embed_nodes(model, ctx.message_graph);
  LiftedModel<Eager> M = lift_eager(model);
  switch (task) {
    case Task::Reconstruct: {
      Eigen::MatrixXd d = pairwise_distances(model, emb);
      res.map = map_metric(d, g).map;
      std::vector<int> comp = largest_component(g);
      if (static_cast<int>(comp.size()) == g.n_nodes)
        res.graph_distortion = distortion([&d](int u, int v) { return d(u, v); }, g).value;
      break;
    }
    case Task::LinkPred: {
      std::vector<double> scores;
      std::vector<int> labels;
      for (auto [u, v] : ctx.split.test_edges) {
        scores.push_back(core::fermi_dirac<Eager>(
            pair_distance<Eager>(emb[u], emb[v], model.cfg, M), model.cfg.fd_r,
            model.cfg.fd_temp));
        labels.push_back(1);
      }
      for (auto [u, v] : ctx.split.test_neg) {
        scores.push_back(core::fermi_dirac<Eager>(
            pair_distance<Eager>(emb[u], emb[v], model.cfg, M), model.cfg.fd_r,
            model.cfg.fd_temp));
        labels.push_back(0);
      }
      if (!scores.empty()) res.auc = roc_auc(scores, labels);
      break;
    }
    case Task::NodeClass: {
      std::vector<Eigen::VectorXd> logits = nc_logits<Eager>(emb, model.cfg, M);
      std::vector<int> pred, truth;
      for (int u : ctx.split.test_nodes) {
        int arg = 0;
        logits[u].maxCoeff(&arg);
        pred.push_back(arg);
        truth.push_back(g.labels[u]);
      }
      if (!pred.empty()) {
        F1Result f1 = f1_scores(pred, truth, model.cfg.n_classes);
        res.micro_f1 = f1.micro;
        res.macro_f1 = f1.macro;
      }
      break;
    }
  }
}

}  // namespace

TrainResult train(const Graph& g, const ModelConfig& mcfg_in, const TrainConfig& tcfg) {
  ModelConfig mcfg = mcfg_in;
  if (mcfg.feature_dim == 0)
    mcfg.feature_dim = g.has_features() ? static_cast<int>(g.features.cols()) : g.n_nodes;
  if (tcfg.task == Task::NodeClass) {
    if (!g.has_labels()) throw std::invalid_argument("nodeclass: graph has no labels");
    mcfg.n_classes = g.n_classes();
  }

  TaskContext ctx;
  ctx.message_graph = g;
  switch (tcfg.task) {
    case Task::Reconstruct: {
      ctx.resample_negatives = g.n_nodes > 2000;
      if (!ctx.resample_negatives) {
        Rng rng(mix_seed(tcfg.seed, 11));
        ctx.negatives.resize(g.n_nodes);
        for (int u = 0; u < g.n_nodes; ++u)
          if (!g.adj[u].empty())
            ctx.negatives[u] = negative_sample(g, u, g.n_nodes, rng);  // all non-neighbors
      }
      break;
    }
    case Task::LinkPred: {
      ctx.split = make_edge_split(g, tcfg.edge_train_frac, tcfg.edge_val_frac,
                                  tcfg.edge_test_frac, tcfg.seed);
      ctx.message_graph = make_graph(g.n_nodes, ctx.split.train_edges);
      ctx.message_graph.features = g.features;
      ctx.message_graph.labels = g.labels;
      break;
    }
    case Task::NodeClass: {
      ctx.split = make_node_split(g, tcfg.node_train_frac, tcfg.node_val_frac,
                                  tcfg.node_test_frac, tcfg.seed);
      break;
    }
  }

  TrainResult res;
  res.model = init_model(mcfg, g, mix_seed(tcfg.seed, 1));
  if (!tcfg.warm_start.empty()) warm_start_model(res.model, tcfg.warm_start);

  if (tcfg.task == Task::Reconstruct)
    res.init_map = evaluate_validation(res.model, g, ctx, Task::Reconstruct);

  const std::vector<Eigen::VectorXd> feats = raw_features(g, mcfg);
  const std::vector<std::pair<int, int>>* train_edges =
      tcfg.task == Task::LinkPred ? &ctx.split.train_edges : &g.edges;
  const long long n_directed = 2LL * static_cast<long long>(train_edges->size());
  res.full_batch =
      tcfg.task == Task::NodeClass || n_directed <= tcfg.max_full_batch_edges;
  if (!res.full_batch)
    std::cerr << "[train] " << n_directed << " directed edges: minibatched updates of "
              << tcfg.minibatch_edges << "\n";

  std::vector<ParamRef> refs = param_refs(res.model);
  AdamState adam;
  QgcnModel best = res.model;
  double last_val = -std::numeric_limits<double>::infinity();

  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    // negatives for this epoch
    std::vector<std::vector<int>> negatives;
    std::vector<std::pair<int, int>> lp_neg;
    Rng neg_rng(mix_seed(tcfg.seed, 1000) ^ mix_seed(epoch, 7));
    if (tcfg.task == Task::Reconstruct) {
      if (ctx.resample_negatives) {
        negatives.resize(g.n_nodes);
        for (int u = 0; u < g.n_nodes; ++u)
          if (!g.adj[u].empty())
            negatives[u] = negative_sample(g, u, mcfg.negative_samples, neg_rng);
      }
    } else if (tcfg.task == Task::LinkPred) {
      const int want = static_cast<int>(train_edges->size());
      long long guard = 0;
      while (static_cast<int>(lp_neg.size()) < want) {
        if (++guard > 1000LL * want + 10000)
          throw std::runtime_error("link-pred negative sampling stalled");
        int u = neg_rng.uniform_int(g.n_nodes);
        int v = neg_rng.uniform_int(g.n_nodes);
        if (u == v || g.has_edge(u, v)) continue;
        lp_neg.emplace_back(u, v);
      }
    }

    // dropout masks for this epoch (inverted dropout; eval path uses none)
    std::vector<std::vector<Eigen::VectorXd>> masks_eager;
    if (tcfg.dropout > 0.0) {
      Rng drng(mix_seed(tcfg.seed, 2000) ^ mix_seed(epoch, 13));
      masks_eager.resize(mcfg.layer_count());
      for (int l = 0; l < mcfg.layer_count(); ++l) {
        const int d = mcfg.layer_sigs[l + 1].ambient_dim();
        masks_eager[l].reserve(g.n_nodes);
        for (int i = 0; i < g.n_nodes; ++i) {
          Eigen::VectorXd m(d);
          for (int k = 0; k < d; ++k)
            m(k) = drng.uniform() < tcfg.dropout ? 0.0 : 1.0 / (1.0 - tcfg.dropout);
          masks_eager[l].push_back(std::move(m));
        }
      }
    }

    // batch construction: one full batch, or edge chunks after a shuffle
    std::vector<std::pair<int, int>> rec_pairs, lp_pos;
    if (tcfg.task == Task::Reconstruct) rec_pairs = directed_edges(g);
    if (tcfg.task == Task::LinkPred) lp_pos = ctx.split.train_edges;
    int n_batches = 1;
    int batch_size = 0;
    if (!res.full_batch) {
      Rng brng(mix_seed(tcfg.seed, 3000) ^ mix_seed(epoch, 17));
      auto shuffle_pairs = [&brng](std::vector<std::pair<int, int>>& v) {
        for (int i = static_cast<int>(v.size()) - 1; i > 0; --i)
          std::swap(v[i], v[brng.uniform_int(i + 1)]);
      };
      if (tcfg.task == Task::Reconstruct) {
        shuffle_pairs(rec_pairs);
        batch_size = tcfg.minibatch_edges;
        n_batches = (static_cast<int>(rec_pairs.size()) + batch_size - 1) / batch_size;
      } else if (tcfg.task == Task::LinkPred) {
        shuffle_pairs(lp_pos);
        shuffle_pairs(lp_neg);
        batch_size = tcfg.minibatch_edges;
        n_batches = (static_cast<int>(lp_pos.size()) + batch_size - 1) / batch_size;
      }
    }

    double loss_v = 0.0;
    for (int b = 0; b < n_batches; ++b) {
      ad::Tape tape;
      std::vector<ad::Var> params;
      LiftedModel<Taped> M = lift_taped(res.model, tape, params);
      std::vector<ad::Var> tfeats, tnoise;
      tfeats.reserve(g.n_nodes);
      tnoise.reserve(g.n_nodes);
      for (int i = 0; i < g.n_nodes; ++i) {
        tfeats.push_back(tape.constant(Eigen::MatrixXd(feats[i])));
        tnoise.push_back(
            tape.constant(Eigen::MatrixXd(res.model.feature_noise.row(i).transpose())));
      }
      std::vector<std::vector<ad::Var>> tmasks;
      if (!masks_eager.empty()) {
        tmasks.resize(masks_eager.size());
        for (std::size_t l = 0; l < masks_eager.size(); ++l)
          for (const Eigen::VectorXd& m : masks_eager[l])
            tmasks[l].push_back(tape.constant(Eigen::MatrixXd(m)));
      }
      std::vector<ad::Var> emb = model_embed<Taped>(M, mcfg, ctx.message_graph, tfeats, tnoise,
                                                    tmasks.empty() ? nullptr : &tmasks);
      auto slice = [&](const std::vector<std::pair<int, int>>& v) {
        if (res.full_batch) return v;
        const int lo = b * batch_size;
        const int hi = std::min<int>(lo + batch_size, static_cast<int>(v.size()));
        return std::vector<std::pair<int, int>>(v.begin() + lo, v.begin() + hi);
      };
      ad::Var loss;
      try {
        switch (tcfg.task) {
          case Task::Reconstruct:
            loss = reconstruction_loss_pairs<Taped>(
                emb, slice(rec_pairs), ctx.resample_negatives ? negatives : ctx.negatives, mcfg,
                M);
            break;
          case Task::LinkPred:
            loss = linkpred_loss<Taped>(emb, slice(lp_pos), slice(lp_neg), mcfg, M);
            break;
          case Task::NodeClass: {
            std::vector<ad::Var> logits = nc_logits<Taped>(emb, mcfg, M);
            loss = nc_loss<Taped>(logits, g.labels, ctx.split.train_nodes);
            break;
          }
        }
      } catch (const DisconnectedError&) {
        // the loss branches are total on finite inputs; a disconnectedness
        // failure can only come from overflow upstream
        throw DivergenceError(epoch, "training diverged at epoch " + std::to_string(epoch) +
                                         " (non-finite forward values)");
      }
      const double batch_loss = loss.scalar();
      if (!std::isfinite(batch_loss))
        throw DivergenceError(epoch, "training diverged at epoch " + std::to_string(epoch) +
                                         " (non-finite loss)");
      loss_v += batch_loss;
      tape.backward(loss);
      std::vector<Eigen::MatrixXd> grads;
      grads.reserve(params.size());
      for (const ad::Var& p : params) grads.push_back(p.grad());
      double lr = tcfg.lr;
      if (tcfg.lr_min >= 0.0 && tcfg.epochs > 1)
        lr = tcfg.lr + (tcfg.lr_min - tcfg.lr) * (static_cast<double>(epoch) / (tcfg.epochs - 1));
      adam_step(refs, grads, adam, lr, tcfg.curvature_lr, tcfg.weight_decay);
    }

    if (epoch % tcfg.val_every == 0 || epoch + 1 == tcfg.epochs) {
      last_val = evaluate_validation(res.model, g, ctx, tcfg.task);
      if (last_val > res.best_val) {
        res.best_val = last_val;
        res.best_epoch = epoch;
        best = res.model;
      }
    }
    res.history.push_back({epoch, loss_v, last_val});
    res.final_loss = loss_v;
    res.epochs_run = epoch + 1;
    if (epoch - res.best_epoch > tcfg.patience) break;
  }

  if (tcfg.epochs > 0 && res.best_val > -std::numeric_limits<double>::infinity())
    res.model = best;
  finalize_metrics(res, g, ctx, tcfg.task);
  return res;
}

TrainResult euclidean_gcn_baseline(const Graph& g, ModelConfig mcfg, const TrainConfig& tcfg) {
  mcfg.euclidean = true;
  return train(g, mcfg, tcfg);
}

}  // namespace qpseudo
