#include "qpseudo/qgcn.hpp"

#include <cmath>

namespace qpseudo {

Activation parse_activation(const std::string& name) {
  if (name == "identity" || name == "id" || name == "none") return Activation::Identity;
  if (name == "relu") return Activation::Relu;
  if (name == "tanh") return Activation::Tanh;
  if (name == "sigmoid") return Activation::Sigmoid;
  if (name == "elu") return Activation::Elu;
  throw std::invalid_argument("unknown activation: " + name);
}

std::string activation_name(Activation a) {
  switch (a) {
    case Activation::Identity: return "identity";
    case Activation::Relu: return "relu";
    case Activation::Tanh: return "tanh";
    case Activation::Sigmoid: return "sigmoid";
    case Activation::Elu: return "elu";
  }
  return "identity";
}

ModelConfig make_config(const Signature& sig, int n_layers, int feature_dim) {
  if (n_layers < 1) throw DimensionError("make_config: need at least one layer");
  ModelConfig cfg;
  cfg.layer_sigs.assign(n_layers + 1, sig);
  cfg.feature_dim = feature_dim;
  return cfg;
}

QgcnModel init_model(const ModelConfig& cfg, const Graph& g, std::uint64_t seed) {
  Rng rng(seed);
  QgcnModel m;
  m.cfg = cfg;
  const int d0 = cfg.layer_sigs.front().ambient_dim();
  const int L = cfg.layer_count();

  auto glorot = [&rng, &cfg](int rows, int cols) {
    Eigen::MatrixXd w(rows, cols);
    const double s = cfg.init_scale * std::sqrt(2.0 / (rows + cols));
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) w(i, j) = s * rng.normal();
    return w;
  };

  if (cfg.feature_dim != d0) {
    if (cfg.feature_dim <= 0) throw DimensionError("init_model: feature_dim must be positive");
    m.input_proj = glorot(d0, cfg.feature_dim);
  }
  for (int l = 0; l < L; ++l) {
    const int din = cfg.layer_sigs[l].ambient_dim();
    const int dout = cfg.layer_sigs[l + 1].ambient_dim();
    QgcnModel::Layer layer;
    layer.W = glorot(dout, din);
    layer.b_free = Eigen::MatrixXd::Zero(cfg.euclidean ? dout : dout - 1, 1);
    m.layers.push_back(std::move(layer));
  }
  m.beta_raw.resize(L + 1, 1);
  for (int l = 0; l <= L; ++l)
    m.beta_raw(l, 0) = softplus_inverse(cfg.layer_sigs[l].abs_beta());
  if (cfg.n_classes > 0) {
    m.head_W = glorot(cfg.n_classes, cfg.out_sig().ambient_dim());
    m.head_b = Eigen::MatrixXd::Zero(cfg.n_classes, 1);
  }
  m.feature_noise.resize(g.n_nodes, d0);
  for (int i = 0; i < g.n_nodes; ++i)
    for (int j = 0; j < d0; ++j) m.feature_noise(i, j) = rng.uniform(-cfg.eps, cfg.eps);
  return m;
}

std::vector<ParamRef> param_refs(QgcnModel& m) {
  std::vector<ParamRef> refs;
  if (m.input_proj.size() > 0) refs.push_back({"input_proj", &m.input_proj, false});
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    refs.push_back({"layer" + std::to_string(l) + ".W", &m.layers[l].W, false});
    refs.push_back({"layer" + std::to_string(l) + ".b", &m.layers[l].b_free, false});
  }
  if (m.head_W.size() > 0) {
    refs.push_back({"head.W", &m.head_W, false});
    refs.push_back({"head.b", &m.head_b, false});
  }
  if (!m.cfg.euclidean) refs.push_back({"beta_raw", &m.beta_raw, true});
  return refs;
}

PseudoPoint init_features(const Eigen::VectorXd& x_raw, const Signature& sig, double eps,
                          Rng& rng) {
  if (x_raw.size() != sig.ambient_dim())
    throw DimensionError("init_features: raw feature length mismatch");
  for (;;) {
    Eigen::VectorXd x = x_raw;
    for (int i = 0; i < x.size(); ++i) x(i) += rng.uniform(-eps, eps);
    if (x.head(sig.t + 1).squaredNorm() > 0.0) return project_to_manifold(x, sig);
    if (eps == 0.0)
      throw DegenerateInputError("init_features: zero time block and eps = 0");
  }
}

PseudoPoint tangential_transform(const Eigen::MatrixXd& W, const PseudoPoint& h,
                                 const Signature& out_sig) {
  if (W.cols() != h.sig.ambient_dim() || W.rows() != out_sig.ambient_dim())
    throw DimensionError("tangential_transform: W shape mismatch");
  return PseudoPoint{transform_point<Eager>(W, h.coords, h.sig, out_sig, h.sig.abs_beta()),
                     out_sig};
}

PseudoPoint bias_translate(const PseudoPoint& h_tilde, const Eigen::VectorXd& b_at_o) {
  if (b_at_o.size() != h_tilde.sig.ambient_dim())
    throw DimensionError("bias_translate: bias length mismatch");
  return PseudoPoint{
      translate_point<Eager>(h_tilde.coords, b_at_o, h_tilde.sig, h_tilde.sig.abs_beta()),
      h_tilde.sig};
}

double fermi_dirac(double d, double r, double temp) {
  if (!(temp > 0.0)) throw std::invalid_argument("fermi_dirac: temperature must be positive");
  return core::fermi_dirac<Eager>(d, r, temp);
}

PseudoPoint skip_combine(const std::vector<PseudoPoint>& layer_outputs) {
  if (layer_outputs.empty()) throw DimensionError("skip_combine: empty input");
  const Signature& sig = layer_outputs.back().sig;
  for (const PseudoPoint& p : layer_outputs)
    if (p.sig.s != sig.s || p.sig.t != sig.t)
      throw DimensionError("skip_combine: layer outputs disagree on signature");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(sig.ambient_dim());
  for (const PseudoPoint& p : layer_outputs)
    acc += core::diff_log_pole<Eager>(p.coords, p.sig, p.sig.abs_beta());
  acc /= static_cast<double>(layer_outputs.size());
  return PseudoPoint{core::diff_exp_pole<Eager>(acc, sig, sig.abs_beta()), sig};
}

PseudoPoint qnn_forward(const PseudoPoint& x, const QgcnModel& model) {
  Graph single;
  single.n_nodes = 1;
  single.adj.assign(1, {});
  LiftedModel<Eager> M = lift_eager(model);
  std::vector<Eigen::VectorXd> feats{x.coords};
  std::vector<Eigen::VectorXd> noise{Eigen::VectorXd::Zero(x.coords.size())};
  ModelConfig cfg = model.cfg;
  cfg.self_only = true;
  cfg.feature_dim = x.sig.ambient_dim();
  if (M.has_proj) throw DimensionError("qnn_forward: expects manifold-dimensional input");
  std::vector<Eigen::VectorXd> out = model_embed<Eager>(M, cfg, single, feats, noise);
  return PseudoPoint{out[0], cfg.out_sig()};
}

LiftedModel<Eager> lift_eager(const QgcnModel& m) {
  LiftedModel<Eager> M;
  if (m.input_proj.size() > 0) {
    M.has_proj = true;
    M.input_proj = m.input_proj;
  }
  for (const auto& l : m.layers)
    M.layers.push_back({l.W, Eigen::VectorXd(l.b_free.col(0))});
  const int L = static_cast<int>(m.layers.size());
  for (int l = 0; l <= L; ++l) M.abs_beta.push_back(m.abs_beta(l));
  if (m.head_W.size() > 0) {
    M.has_head = true;
    M.head_W = m.head_W;
    M.head_b = m.head_b.col(0);
  }
  return M;
}

LiftedModel<Taped> lift_taped(const QgcnModel& m, ad::Tape& tape, std::vector<ad::Var>& params) {
  LiftedModel<Taped> M;
  params.clear();
  auto reg = [&](const Eigen::MatrixXd& v) {
    ad::Var in = tape.input(v);
    params.push_back(in);
    return in;
  };
  if (m.input_proj.size() > 0) {
    M.has_proj = true;
    M.input_proj = reg(m.input_proj);
  }
  for (const auto& l : m.layers) M.layers.push_back({reg(l.W), reg(l.b_free)});
  if (m.head_W.size() > 0) {
    M.has_head = true;
    M.head_W = reg(m.head_W);
    M.head_b = reg(m.head_b);
  }
  const int L = static_cast<int>(m.layers.size());
  if (!m.cfg.euclidean) {
    ad::Var raw = reg(m.beta_raw);
    for (int l = 0; l <= L; ++l) M.abs_beta.push_back(ad::softplus(ad::segment(raw, l, 1)));
  } else {
    for (int l = 0; l <= L; ++l) M.abs_beta.push_back(tape.constant(1.0));
  }
  return M;
}

}  // namespace qpseudo
