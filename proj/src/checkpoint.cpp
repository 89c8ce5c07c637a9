#include "qpseudo/checkpoint.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace qpseudo {

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

void write_matrix(std::ostream& out, const std::string& name, const Eigen::MatrixXd& m) {
  out << "param " << name << " " << m.rows() << " " << m.cols() << "\n";
  char buf[40];
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%a", m(i, j));
      out << buf << (j + 1 == m.cols() ? "" : " ");
    }
    out << "\n";
  }
}

Eigen::MatrixXd read_matrix(std::istream& in, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  std::string tok;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      if (!(in >> tok)) throw std::runtime_error("checkpoint: truncated matrix");
      m(i, j) = std::strtod(tok.c_str(), nullptr);
    }
  return m;
}

}  // namespace

void save_checkpoint(const std::string& path, const QgcnModel& model,
                     std::uint64_t config_hash) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  const ModelConfig& cfg = model.cfg;
  out << "qpseudo-checkpoint v1\n";
  out << "config_hash " << config_hash << "\n";
  out << "layers " << cfg.layer_count() << "\n";
  char buf[40];
  for (const Signature& s : cfg.layer_sigs) {
    std::snprintf(buf, sizeof(buf), "%a", s.beta);
    out << "sig " << s.s << " " << s.t << " " << buf << "\n";
  }
  out << "feature_dim " << cfg.feature_dim << "\n";
  out << "activation " << activation_name(cfg.act) << "\n";
  out << "skip " << (cfg.skip_connections ? 1 : 0) << "\n";
  out << "mean_agg " << (cfg.mean_aggregation ? 1 : 0) << "\n";
  out << "self_only " << (cfg.self_only ? 1 : 0) << "\n";
  out << "euclidean " << (cfg.euclidean ? 1 : 0) << "\n";
  std::snprintf(buf, sizeof(buf), "%a", cfg.fd_r);
  out << "fd_r " << buf << "\n";
  std::snprintf(buf, sizeof(buf), "%a", cfg.fd_temp);
  out << "fd_temp " << buf << "\n";
  out << "negative_samples " << cfg.negative_samples << "\n";
  std::snprintf(buf, sizeof(buf), "%a", cfg.eps);
  out << "eps " << buf << "\n";
  out << "n_classes " << cfg.n_classes << "\n";

  QgcnModel& m = const_cast<QgcnModel&>(model);
  for (const ParamRef& p : param_refs(m)) write_matrix(out, p.name, *p.value);
  write_matrix(out, "feature_noise", model.feature_noise);
  out << "end\n";
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  std::string magic, version;
  in >> magic >> version;
  if (magic != "qpseudo-checkpoint" || version != "v1")
    throw std::runtime_error("not a qpseudo checkpoint: " + path);

  LoadedCheckpoint out;
  ModelConfig cfg;
  std::map<std::string, Eigen::MatrixXd> params;
  int n_layers = 0;
  std::string key;
  while (in >> key) {
    if (key == "end") break;
    if (key == "config_hash") {
      in >> out.config_hash;
    } else if (key == "layers") {
      in >> n_layers;
    } else if (key == "sig") {
      int s, t;
      std::string beta_tok;
      in >> s >> t >> beta_tok;
      cfg.layer_sigs.emplace_back(s, t, std::strtod(beta_tok.c_str(), nullptr));
    } else if (key == "feature_dim") {
      in >> cfg.feature_dim;
    } else if (key == "activation") {
      std::string name;
      in >> name;
      cfg.act = parse_activation(name);
    } else if (key == "skip") {
      int v;
      in >> v;
      cfg.skip_connections = v != 0;
    } else if (key == "mean_agg") {
      int v;
      in >> v;
      cfg.mean_aggregation = v != 0;
    } else if (key == "self_only") {
      int v;
      in >> v;
      cfg.self_only = v != 0;
    } else if (key == "euclidean") {
      int v;
      in >> v;
      cfg.euclidean = v != 0;
    } else if (key == "fd_r") {
      std::string tok;
      in >> tok;
      cfg.fd_r = std::strtod(tok.c_str(), nullptr);
    } else if (key == "fd_temp") {
      std::string tok;
      in >> tok;
      cfg.fd_temp = std::strtod(tok.c_str(), nullptr);
    } else if (key == "negative_samples") {
      in >> cfg.negative_samples;
    } else if (key == "eps") {
      std::string tok;
      in >> tok;
      cfg.eps = std::strtod(tok.c_str(), nullptr);
    } else if (key == "n_classes") {
      in >> cfg.n_classes;
    } else if (key == "param") {
      std::string name;
      int rows, cols;
      in >> name >> rows >> cols;
      params[name] = read_matrix(in, rows, cols);
    } else {
      throw std::runtime_error("checkpoint: unknown key '" + key + "'");
    }
  }
  if (static_cast<int>(cfg.layer_sigs.size()) != n_layers + 1)
    throw std::runtime_error("checkpoint: signature count mismatch");

  QgcnModel& model = out.model;
  model.cfg = cfg;
  const int L = n_layers;
  for (int l = 0; l < L; ++l) {
    QgcnModel::Layer layer;
    layer.W = params.at("layer" + std::to_string(l) + ".W");
    layer.b_free = params.at("layer" + std::to_string(l) + ".b");
    model.layers.push_back(std::move(layer));
  }
  if (auto it = params.find("input_proj"); it != params.end()) model.input_proj = it->second;
  if (auto it = params.find("head.W"); it != params.end()) model.head_W = it->second;
  if (auto it = params.find("head.b"); it != params.end()) model.head_b = it->second;
  if (auto it = params.find("beta_raw"); it != params.end())
    model.beta_raw = it->second;
  else
    model.beta_raw = Eigen::MatrixXd::Zero(L + 1, 1);
  model.feature_noise = params.at("feature_noise");
  return out;
}

void warm_start_model(QgcnModel& model, const std::string& checkpoint_path) {
  LoadedCheckpoint loaded = load_checkpoint(checkpoint_path);
  auto copy_if_same_shape = [](Eigen::MatrixXd& dst, const Eigen::MatrixXd& src) {
    if (dst.rows() == src.rows() && dst.cols() == src.cols() && src.size() > 0) dst = src;
  };
  copy_if_same_shape(model.input_proj, loaded.model.input_proj);
  for (std::size_t l = 0; l < model.layers.size() && l < loaded.model.layers.size(); ++l) {
    copy_if_same_shape(model.layers[l].W, loaded.model.layers[l].W);
    copy_if_same_shape(model.layers[l].b_free, loaded.model.layers[l].b_free);
  }
  copy_if_same_shape(model.beta_raw, loaded.model.beta_raw);
  copy_if_same_shape(model.feature_noise, loaded.model.feature_noise);
}

}  // namespace qpseudo
