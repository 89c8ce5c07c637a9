#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "qpseudo/core_ops.hpp"
#include "qpseudo/graph.hpp"
#include "qpseudo/manifold.hpp"
#include "qpseudo/rng.hpp"

namespace qpseudo {

Activation parse_activation(const std::string& name);
std::string activation_name(Activation a);

// Architecture of the network. layer_sigs[l] is the manifold of h^l, so a
// model with L layers carries L+1 signatures; the beta field of each entry
// seeds the corresponding learnable curvature.
struct ModelConfig {
  std::vector<Signature> layer_sigs;
  int feature_dim = 0;  // raw input width F; a learned projection bridges F != s+t+1
  Activation act = Activation::Identity;
  bool skip_connections = false;
  bool mean_aggregation = false;  // Eq-style literal neighbor sum when false
  bool self_only = false;         // Q-NN variant: N(i) treated as empty
  bool euclidean = false;         // flat-space reference model
  double fd_r = 2.0;
  double fd_temp = 1.0;
  int negative_samples = 10;  // per-anchor cap when the graph is large
  double eps = 0.02;          // feature perturbation half-width
  double init_scale = 1.0;    // multiplier on the Glorot weight init
  int n_classes = 0;

  int layer_count() const { return static_cast<int>(layer_sigs.size()) - 1; }
  const Signature& in_sig() const { return layer_sigs.front(); }
  const Signature& out_sig() const { return layer_sigs.back(); }
};

// Uniform-width config: every layer on Q_beta^{s,t}.
ModelConfig make_config(const Signature& sig, int n_layers, int feature_dim);

// Learnable state. All parameters are dense double matrices so the optimizer
// and checkpoint formats can treat them uniformly. feature_noise is the fixed
// epsilon-perturbation drawn at init (not a parameter, but checkpointed so a
// restored model reproduces its forward pass exactly).
struct QgcnModel {
  ModelConfig cfg;
  Eigen::MatrixXd input_proj;  // d0 x F, 0 x 0 when F == d0
  struct Layer {
    Eigen::MatrixXd W;       // d_{l+1} x d_l
    Eigen::MatrixXd b_free;  // (d-1) x 1 tangent coords at o (full d x 1 for euclidean)
  };
  std::vector<Layer> layers;
  Eigen::MatrixXd beta_raw;  // (L+1) x 1, beta_l = -softplus(raw_l)
  Eigen::MatrixXd head_W;    // C x d (node classification)
  Eigen::MatrixXd head_b;    // C x 1
  Eigen::MatrixXd feature_noise;  // n x d0

  double abs_beta(int l) const { return softplus(beta_raw(l, 0)); }
};

QgcnModel init_model(const ModelConfig& cfg, const Graph& g, std::uint64_t seed);

struct ParamRef {
  std::string name;
  Eigen::MatrixXd* value;
  bool is_curvature;
};
std::vector<ParamRef> param_refs(QgcnModel& m);

// --- spec-level single ops (eager) ---------------------------------------

// Uniform perturbation in [-eps, eps] per coordinate, then the double
// projection onto the manifold. Retries on an all-zero time block.
PseudoPoint init_features(const Eigen::VectorXd& x_raw, const Signature& sig, double eps,
                          Rng& rng);

// W (x)^beta h := diff_exp_o'(W diff_log_o(h)), with the leading time
// coordinate of the mapped tangent re-zeroed for tangency at o'.
PseudoPoint tangential_transform(const Eigen::MatrixXd& W, const PseudoPoint& h,
                                 const Signature& out_sig);

// h (+)^beta b via parallel transport of b from o, with the antipodal branch
// of the addition rule for g-disconnected h.
PseudoPoint bias_translate(const PseudoPoint& h_tilde, const Eigen::VectorXd& b_at_o);

double fermi_dirac(double d, double r, double temp);

// Mean of the per-layer tangent lifts at o, mapped back at the last layer's
// south pole. All outputs must share the decoder signature.
PseudoPoint skip_combine(const std::vector<PseudoPoint>& layer_outputs);

// Q-NN forward for a single point (no neighbor aggregation).
PseudoPoint qnn_forward(const PseudoPoint& x, const QgcnModel& model);

// --- lifted parameters (shared eager/taped forward) ----------------------

template <class B>
struct LiftedModel {
  bool has_proj = false;
  typename B::Mat input_proj;
  struct Layer {
    typename B::Mat W;
    typename B::Vec b_free;
  };
  std::vector<Layer> layers;
  std::vector<typename B::Sca> abs_beta;  // softplus(raw), length L+1
  bool has_head = false;
  typename B::Mat head_W;
  typename B::Vec head_b;
};

LiftedModel<Eager> lift_eager(const QgcnModel& m);

// Registers every parameter (in param_refs order) as a tape input and
// returns the lifted views plus the input Vars for gradient readback.
LiftedModel<Taped> lift_taped(const QgcnModel& m, ad::Tape& tape, std::vector<ad::Var>& params);

// --- forward templates ----------------------------------------------------

// Bias b given by its free coordinates: prepend the fixed zero time coord.
template <class B>
typename B::Vec assemble_bias(const typename B::Vec& b_free) {
  typename B::Sca zero = 0.0 * B::at(b_free, 0);
  return B::concat2(B::vec1(zero), b_free);
}

template <class B>
typename B::Vec transform_point(const typename B::Mat& W, const typename B::Vec& h,
                                const Signature& in_sig, const Signature& out_sig,
                                const typename B::Sca& abs_beta) {
  typename B::Vec xi = core::diff_log_pole<B>(h, in_sig, abs_beta);
  typename B::Vec eta = B::zero_first(B::matvec(W, xi));
  return core::diff_exp_pole<B>(eta, out_sig, abs_beta);
}

// south pole of `sig` with zeros borrowed from a same-length vector
template <class B>
typename B::Vec pole_like(const typename B::Vec& h, const Signature& sig,
                          const typename B::Sca& abs_beta) {
  using std::sqrt;
  typename B::Sca sqrtB = sqrt(abs_beta);
  return B::concat2(B::vec1(sqrtB), 0.0 * B::segment(h, 1, sig.ambient_dim() - 1));
}

template <class B>
typename B::Vec translate_point(const typename B::Vec& h, const typename B::Vec& b,
                                const Signature& sig, const typename B::Sca& abs_beta) {
  using std::sqrt;
  typename B::Vec o = pole_like<B>(h, sig, abs_beta);
  const double sb = B::val(sqrt(abs_beta));
  const double prod = -sb * B::val(B::at(h, 0));  // <o, h>_t
  const double absB = B::val(abs_beta);
  if (prod < absB) {
    auto [pb, fb] = core::parallel_transport<B>(o, h, b, sig, abs_beta);
    return core::exp_map<B>(h, pb, sig, abs_beta);
  }
  typename B::Vec minus_h = -h;
  if (std::fabs(prod - absB) <= 1e-12 * absB) {
    // exact antipode h = -o: the transported vector is -b by convention
    return -core::exp_map<B>(minus_h, typename B::Vec(-b), sig, abs_beta);
  }
  auto [pb, fb] = core::parallel_transport<B>(o, minus_h, b, sig, abs_beta);
  return -core::exp_map<B>(minus_h, pb, sig, abs_beta);
}

// One Q-GCN layer (Eq-style): per-node transform + bias, tangent aggregation
// over N(i) and i, activation, re-zeroed time coordinate, exp at the next
// curvature. dropout_masks, when given, multiply the aggregated tangent.
template <class B>
std::vector<typename B::Vec> qgcn_layer(const std::vector<typename B::Vec>& H, const Graph& g,
                                        const typename B::Mat& W, const typename B::Vec& b_free,
                                        Activation act, bool mean_agg, bool self_only,
                                        const Signature& in_sig, const Signature& out_sig,
                                        const typename B::Sca& beta_in,
                                        const typename B::Sca& beta_out,
                                        const std::vector<typename B::Vec>* dropout_masks) {
  const int n = static_cast<int>(H.size());
  typename B::Vec b = assemble_bias<B>(b_free);
  std::vector<typename B::Vec> tangents;
  tangents.reserve(n);
  for (int i = 0; i < n; ++i) {
    typename B::Vec z = transform_point<B>(W, H[i], in_sig, out_sig, beta_in);
    z = translate_point<B>(z, b, out_sig, beta_in);
    tangents.push_back(core::diff_log_pole<B>(z, out_sig, beta_in));
  }
  std::vector<typename B::Vec> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    typename B::Vec acc = tangents[i];
    if (!self_only)
      for (int j : g.adj[i]) acc = acc + tangents[j];
    if (mean_agg && !self_only) acc = (1.0 / (1.0 + g.degree(i))) * acc;
    if (dropout_masks) acc = B::cwise_mul(acc, (*dropout_masks)[i]);
    typename B::Vec u = B::zero_first(B::activation(acc, act));
    out.push_back(core::diff_exp_pole<B>(u, out_sig, beta_out));
  }
  return out;
}

// Euclidean reference layer: sum_{j in N(i) u {i}} (W h_j + b), activation.
template <class B>
std::vector<typename B::Vec> euclidean_layer(const std::vector<typename B::Vec>& H, const Graph& g,
                                             const typename B::Mat& W,
                                             const typename B::Vec& b, Activation act,
                                             bool mean_agg, bool self_only,
                                             const std::vector<typename B::Vec>* dropout_masks) {
  const int n = static_cast<int>(H.size());
  std::vector<typename B::Vec> lin;
  lin.reserve(n);
  for (int i = 0; i < n; ++i) lin.push_back(B::matvec(W, H[i]) + b);
  std::vector<typename B::Vec> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    typename B::Vec acc = lin[i];
    if (!self_only)
      for (int j : g.adj[i]) acc = acc + lin[j];
    if (mean_agg && !self_only) acc = (1.0 / (1.0 + g.degree(i))) * acc;
    if (dropout_masks) acc = B::cwise_mul(acc, (*dropout_masks)[i]);
    out.push_back(B::activation(acc, act));
  }
  return out;
}

// Full forward pass: projection + perturbation + manifold init, L layers,
// optional skip combination. Returns final node embeddings.
template <class B>
std::vector<typename B::Vec> model_embed(
    const LiftedModel<B>& M, const ModelConfig& cfg, const Graph& g,
    const std::vector<typename B::Vec>& feats, const std::vector<typename B::Vec>& noise,
    const std::vector<std::vector<typename B::Vec>>* dropout_masks = nullptr) {
  const int n = g.n_nodes;
  const int L = cfg.layer_count();
  std::vector<typename B::Vec> h;
  h.reserve(n);
  for (int i = 0; i < n; ++i) {
    typename B::Vec x = M.has_proj ? typename B::Vec(B::matvec(M.input_proj, feats[i])) : feats[i];
    x = x + noise[i];
    if (cfg.euclidean)
      h.push_back(x);
    else
      h.push_back(core::phi_project<B>(x, cfg.layer_sigs[0], M.abs_beta[0]));
  }
  std::vector<std::vector<typename B::Vec>> per_layer;
  for (int l = 0; l < L; ++l) {
    const std::vector<typename B::Vec>* masks =
        dropout_masks ? &(*dropout_masks)[l] : nullptr;
    if (cfg.euclidean) {
      typename B::Vec b = M.layers[l].b_free;  // full-length bias in flat space
      h = euclidean_layer<B>(h, g, M.layers[l].W, b, cfg.act, cfg.mean_aggregation,
                             cfg.self_only, masks);
    } else {
      h = qgcn_layer<B>(h, g, M.layers[l].W, M.layers[l].b_free, cfg.act, cfg.mean_aggregation,
                        cfg.self_only, cfg.layer_sigs[l], cfg.layer_sigs[l + 1], M.abs_beta[l],
                        M.abs_beta[l + 1], masks);
    }
    if (cfg.skip_connections) per_layer.push_back(h);
  }
  if (!cfg.skip_connections || L <= 1) return h;
  // mean of the per-layer tangent lifts, re-mapped at the last south pole
  std::vector<typename B::Vec> out;
  out.reserve(n);
  for (int i = 0; i < n; ++i) {
    typename B::Vec acc = cfg.euclidean
                              ? per_layer[0][i]
                              : core::diff_log_pole<B>(per_layer[0][i], cfg.layer_sigs[1],
                                                       M.abs_beta[1]);
    for (int l = 1; l < L; ++l) {
      typename B::Vec t = cfg.euclidean
                              ? per_layer[l][i]
                              : core::diff_log_pole<B>(per_layer[l][i], cfg.layer_sigs[l + 1],
                                                       M.abs_beta[l + 1]);
      acc = acc + t;
    }
    acc = (1.0 / L) * acc;
    if (cfg.euclidean)
      out.push_back(acc);
    else
      out.push_back(core::diff_exp_pole<B>(acc, cfg.out_sig(), M.abs_beta[L]));
  }
  return out;
}

template <class B>
typename B::Sca pair_distance(const typename B::Vec& a, const typename B::Vec& b,
                              const ModelConfig& cfg, const LiftedModel<B>& M) {
  using std::sqrt;
  if (cfg.euclidean) {
    typename B::Vec d = a - b;
    return sqrt(B::dot(d, d));
  }
  return core::distance<B>(a, b, cfg.out_sig(), M.abs_beta.back());
}

// Negative log-likelihood of the listed directed pairs (u, v) against u's
// negative set, softmax over exp(-d) with the positive in the denominator.
template <class B>
typename B::Sca reconstruction_loss_pairs(const std::vector<typename B::Vec>& emb,
                                          const std::vector<std::pair<int, int>>& pairs,
                                          const std::vector<std::vector<int>>& negatives,
                                          const ModelConfig& cfg, const LiftedModel<B>& M) {
  using std::exp;
  using std::log;
  const int n = static_cast<int>(emb.size());
  std::unordered_map<long long, typename B::Sca> cache;
  auto dist = [&](int u, int v) -> typename B::Sca {
    const long long key = static_cast<long long>(std::min(u, v)) * n + std::max(u, v);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    typename B::Sca d = pair_distance<B>(emb[u], emb[v], cfg, M);
    cache.emplace(key, d);
    return d;
  };
  std::optional<typename B::Sca> loss;
  for (auto [u, v] : pairs) {
    typename B::Sca pos = dist(u, v);
    // log-sum-exp over {v} u E(u) of -d, shifted by the detached max
    double m = -B::val(pos);
    for (int w : negatives[u]) m = std::max(m, -B::val(dist(u, w)));
    typename B::Sca se = exp(-pos - m);
    for (int w : negatives[u]) se = se + exp(-dist(u, w) - m);
    typename B::Sca term = pos + (m + log(se));
    loss = loss ? typename B::Sca(*loss + term) : term;
  }
  if (!loss) throw DegenerateInputError("reconstruction_loss: no pairs");
  return *loss;
}

// All directed versions of the graph's edges.
inline std::vector<std::pair<int, int>> directed_edges(const Graph& g) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(2 * g.edges.size());
  for (auto [u, v] : g.edges) {
    pairs.emplace_back(u, v);
    pairs.emplace_back(v, u);
  }
  return pairs;
}

template <class B>
typename B::Sca reconstruction_loss(const std::vector<typename B::Vec>& emb, const Graph& g,
                                    const std::vector<std::vector<int>>& negatives,
                                    const ModelConfig& cfg, const LiftedModel<B>& M) {
  return reconstruction_loss_pairs<B>(emb, directed_edges(g), negatives, cfg, M);
}

// Binary cross-entropy of Fermi-Dirac probabilities over positive and
// negative edge lists, in the softplus form.
template <class B>
typename B::Sca linkpred_loss(const std::vector<typename B::Vec>& emb,
                              const std::vector<std::pair<int, int>>& pos,
                              const std::vector<std::pair<int, int>>& neg,
                              const ModelConfig& cfg, const LiftedModel<B>& M) {
  std::optional<typename B::Sca> loss;
  auto add = [&](const typename B::Sca& t) {
    loss = loss ? typename B::Sca(*loss + t) : t;
  };
  for (auto [u, v] : pos) {
    typename B::Sca z = (cfg.fd_r - pair_distance<B>(emb[u], emb[v], cfg, M)) * (1.0 / cfg.fd_temp);
    add(softplus(-z));
  }
  for (auto [u, v] : neg) {
    typename B::Sca z = (cfg.fd_r - pair_distance<B>(emb[u], emb[v], cfg, M)) * (1.0 / cfg.fd_temp);
    add(softplus(z));
  }
  if (!loss) throw DegenerateInputError("linkpred_loss: no pairs");
  return *loss;
}

// Class logits: Euclidean linear map of the tangent lift at the last south
// pole (or of the embedding itself in flat space).
template <class B>
std::vector<typename B::Vec> nc_logits(const std::vector<typename B::Vec>& emb,
                                       const ModelConfig& cfg, const LiftedModel<B>& M) {
  std::vector<typename B::Vec> out;
  out.reserve(emb.size());
  for (const typename B::Vec& e : emb) {
    typename B::Vec x =
        cfg.euclidean ? e : core::diff_log_pole<B>(e, cfg.out_sig(), M.abs_beta.back());
    out.push_back(B::matvec(M.head_W, x) + M.head_b);
  }
  return out;
}

// Cross-entropy over the masked nodes.
template <class B>
typename B::Sca nc_loss(const std::vector<typename B::Vec>& logits, const std::vector<int>& labels,
                        const std::vector<int>& nodes) {
  using std::exp;
  using std::log;
  std::optional<typename B::Sca> loss;
  for (int i : nodes) {
    const typename B::Vec& z = logits[i];
    const double m = B::max_coeff(z);
    typename B::Sca lse = m + log(B::sum(B::exp_elem(B::add_scalar(z, -m))));
    typename B::Sca term = lse - B::at(z, labels[i]);
    loss = loss ? typename B::Sca(*loss + term) : term;
  }
  if (!loss) throw DegenerateInputError("nc_loss: empty node set");
  return *loss;
}

}  // namespace qpseudo
