// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. argv[1] is the CLI binary (used by the determinism criterion).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qpseudo/analysis.hpp"
#include "qpseudo/geodesic.hpp"
#include "qpseudo/geomcheck.hpp"
#include "qpseudo/metrics.hpp"
#include "qpseudo/trainer.hpp"

using namespace qpseudo;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool passed, const std::string& what) {
  std::cout << (passed ? "[PASS] " : "[FAIL] ") << criterion << ": " << what << std::endl;
  if (!passed) ++g_failures;
}

double now_seconds(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const std::vector<Signature> kSigs = {
    Signature(2, 1, -1.0), Signature(1, 2, -1.0), Signature(5, 5, -1.0),
    Signature(3, 0, -1.0), Signature(0, 3, -1.0)};
const std::vector<double> kBetas = {-4.0, -1.0, -0.25};

// --- criteria 1-3: geometry invariants, degenerations, rescaling ----------

void criteria_1_to_3() {
  const auto t0 = std::chrono::steady_clock::now();
  double max_membership = 0.0, max_roundtrip = 0.0, max_diff_roundtrip = 0.0;
  long long coverage_violations = 0;
  double max_hyp = 0.0, max_sph = 0.0, max_rescale = 0.0;
  bool all_ok = true;
  std::uint64_t seed = 20240501;
  for (const Signature& base : kSigs)
    for (double beta : kBetas) {
      Signature sig(base.s, base.t, beta);
      std::vector<GeomCheckResult> res = run_geometry_checks(sig, seed++, 10000, 100000);
      for (const GeomCheckResult& r : res) {
        if (r.name == "membership" || r.name == "exp_membership")
          max_membership = std::max(max_membership, r.max_err);
        if (r.name == "exp_log_roundtrip") max_roundtrip = std::max(max_roundtrip, r.max_err);
        if (r.name == "diff_roundtrip_global")
          max_diff_roundtrip = std::max(max_diff_roundtrip, r.max_err);
        if (r.name == "antipodal_coverage") coverage_violations += r.violations;
        if (r.name == "hyperbolic_degeneration") max_hyp = std::max(max_hyp, r.max_err);
        if (r.name == "spherical_degeneration") max_sph = std::max(max_sph, r.max_err);
        if (r.name == "rescale_distance") max_rescale = std::max(max_rescale, r.max_err);
        if (!r.passed) {
          all_ok = false;
          std::cout << "  geometry check failed: " << r.name << " sig=(" << sig.s << ","
                    << sig.t << ") beta=" << beta << " max_err=" << r.max_err << "\n";
        }
      }
    }
  const double secs = now_seconds(t0);
  {
    std::ostringstream msg;
    msg << "geometry invariants: membership " << max_membership << " <= 1e-9, exp/log "
        << max_roundtrip << " <= 1e-8, diff round trip " << max_diff_roundtrip
        << " <= 1e-8, coverage violations " << coverage_violations << ", " << secs << " s";
    report(1, all_ok && max_membership <= 1e-9 && max_roundtrip <= 1e-8 &&
                  max_diff_roundtrip <= 1e-8 && coverage_violations == 0 && secs <= 60.0,
           msg.str());
  }
  {
    std::ostringstream msg;
    msg << "degeneration: hyperbolic slice " << max_hyp << " <= 1e-8, great circle " << max_sph
        << " <= 1e-8";
    report(2, max_hyp <= 1e-8 && max_sph <= 1e-8, msg.str());
  }
  report(3, max_rescale <= 1e-8,
         "curvature rescaling at the distance level: max err " + std::to_string(max_rescale) +
             " <= 1e-8");
}

// --- criterion 4: gradient suite ------------------------------------------

bool grad_distance(std::uint64_t seed) {
  Signature sig(2, 1, -1.0);
  Rng rng(seed);
  auto expr = [&sig](ad::Tape& t, const std::vector<ad::Var>& in) {
    return core::distance<Taped>(in[0], in[1], sig, t.constant(sig.abs_beta()));
  };
  int connected = 0, broken = 0;
  while (connected < 1 || broken < 1) {
    PseudoPoint x = random_point(sig, rng);
    PseudoPoint y = random_point(sig, rng);
    const double p = time_product(x.coords, y.coords, sig);
    if (std::fabs(p - sig.abs_beta()) < 1e-2) continue;
    const double c = p / sig.beta;
    if (std::fabs(c - 1.0) < 1e-2 || std::fabs(c + 1.0) < 1e-2) continue;
    if (!ad::grad_check(expr, {Eigen::MatrixXd(x.coords), Eigen::MatrixXd(y.coords)}, 1e-5,
                        1e-4)
             .passed)
      return false;
    (p < sig.abs_beta() ? connected : broken)++;
  }
  return true;
}

bool grad_fermi_distance(std::uint64_t seed) {
  Signature sig(2, 1, -1.0);
  Rng rng(seed);
  auto expr = [&sig](ad::Tape& t, const std::vector<ad::Var>& in) {
    ad::Var d = core::distance<Taped>(in[0], in[1], sig, t.constant(sig.abs_beta()));
    return core::fermi_dirac<Taped>(d, 2.0, 1.0);
  };
  for (int done = 0; done < 2;) {
    PseudoPoint x = random_point(sig, rng);
    PseudoPoint y = random_point(sig, rng);
    const double p = time_product(x.coords, y.coords, sig);
    if (std::fabs(p - sig.abs_beta()) < 1e-2) continue;
    const double c = p / sig.beta;
    if (std::fabs(c - 1.0) < 1e-2 || std::fabs(c + 1.0) < 1e-2) continue;
    if (!ad::grad_check(expr, {Eigen::MatrixXd(x.coords), Eigen::MatrixXd(y.coords)}, 1e-5,
                        1e-4)
             .passed)
      return false;
    ++done;
  }
  return true;
}

// layer pass with both bias-translation branches live
bool grad_layer(std::uint64_t seed) {
  Signature sig(2, 1, -1.0);
  Graph g = make_graph(3, {{0, 1}, {1, 2}});
  Rng rng(seed);
  Eigen::MatrixXd W = Eigen::MatrixXd::Identity(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) W(i, j) += 0.05 * rng.normal();
  Eigen::MatrixXd b(3, 1);
  for (int i = 0; i < 3; ++i) b(i, 0) = 0.2 * rng.normal();

  // nodes 0-1 near o (connected branch), node 2 on the far side of o
  auto near_point = [&]() {
    Eigen::VectorXd v(4);
    v << 1.0 + 0.3 * rng.uniform(), 0.3 * rng.normal(), 0.3 * rng.normal(), 0.3 * rng.normal();
    return Eigen::MatrixXd(project_to_manifold(v, sig).coords);
  };
  auto far_point = [&]() {
    Eigen::VectorXd v(4);
    const double s0 = 0.8 + 0.4 * rng.uniform();
    v << -std::sqrt(1.0 + s0 * s0 + 0.04), 0.1 * rng.normal(), s0, 0.2 * rng.normal();
    return Eigen::MatrixXd(project_to_manifold(v, sig).coords);
  };
  std::vector<Eigen::MatrixXd> inputs{W, b, near_point(), near_point(), far_point()};
  Eigen::MatrixXd probe(4, 1);
  for (int i = 0; i < 4; ++i) probe(i, 0) = rng.normal();

  // require both branches with margin on the discriminant <o,h~>_t - |beta|
  int branch_conn = 0, branch_anti = 0;
  for (int i = 2; i < 5; ++i) {
    Eigen::VectorXd h = inputs[i].col(0);
    Eigen::VectorXd z = transform_point<Eager>(W, h, sig, sig, sig.abs_beta());
    const double disc = -sig.radius() * z(0) - sig.abs_beta();
    if (std::fabs(disc) < 1e-3) return grad_layer(seed + 1000);  // retry off the margin
    (disc < 0 ? branch_conn : branch_anti)++;
  }
  if (branch_conn == 0 || branch_anti == 0) return grad_layer(seed + 1000);

  auto expr = [&](ad::Tape& t, const std::vector<ad::Var>& in) {
    std::vector<ad::Var> H{in[2], in[3], in[4]};
    ad::Var beta = t.constant(1.0);
    std::vector<ad::Var> out = qgcn_layer<Taped>(H, g, in[0], in[1], Activation::Tanh, false,
                                                 false, sig, sig, beta, beta, nullptr);
    ad::Var s = ad::dot(out[0], t.constant(probe));
    s = s + ad::dot(out[1], t.constant(probe));
    return s + ad::dot(out[2], t.constant(probe));
  };
  return ad::grad_check(expr, inputs, 1e-5, 1e-4).passed;
}

bool grad_reconstruction(std::uint64_t seed) {
  Signature sig(2, 1, -1.0);
  Graph g = make_graph(4, {{0, 1}, {1, 2}, {2, 3}});
  ModelConfig cfg = make_config(sig, 1, 4);
  Rng rng(seed);
  std::vector<std::vector<int>> negs(4);
  for (int i = 0; i < 4; ++i)
    for (int w = 0; w < 4; ++w)
      if (w != i && !g.has_edge(i, w)) negs[i].push_back(w);
  for (;;) {
    std::vector<Eigen::MatrixXd> inputs;
    for (int i = 0; i < 4; ++i) inputs.push_back(Eigen::MatrixXd(random_point(sig, rng).coords));
    bool margin_ok = true;
    for (int i = 0; i < 4 && margin_ok; ++i)
      for (int j = i + 1; j < 4 && margin_ok; ++j) {
        const double p = time_product(inputs[i].col(0), inputs[j].col(0), sig);
        if (std::fabs(p - sig.abs_beta()) < 1e-2) margin_ok = false;
        const double c = p / sig.beta;
        if (std::fabs(c - 1.0) < 1e-2 || std::fabs(c + 1.0) < 1e-2) margin_ok = false;
      }
    if (!margin_ok) continue;
    auto expr = [&](ad::Tape& t, const std::vector<ad::Var>& in) {
      LiftedModel<Taped> MT;
      MT.abs_beta.push_back(t.constant(1.0));
      MT.abs_beta.push_back(t.constant(1.0));
      return reconstruction_loss<Taped>(in, g, negs, cfg, MT);
    };
    return ad::grad_check(expr, inputs, 1e-5, 1e-4).passed;
  }
}

bool grad_nc_head(std::uint64_t seed) {
  Signature sig(2, 1, -1.0);
  const int C = 3;
  ModelConfig cfg = make_config(sig, 1, 4);
  cfg.n_classes = C;
  Rng rng(seed);
  Eigen::MatrixXd Wh(C, 4), bh(C, 1);
  for (int i = 0; i < C; ++i) {
    bh(i, 0) = 0.3 * rng.normal();
    for (int j = 0; j < 4; ++j) Wh(i, j) = 0.5 * rng.normal();
  }
  std::vector<Eigen::MatrixXd> inputs{Wh, bh};
  for (int i = 0; i < 4; ++i) inputs.push_back(Eigen::MatrixXd(random_point(sig, rng).coords));
  std::vector<int> labels{0, 2, 1, 0};
  std::vector<int> nodes{0, 1, 2, 3};
  auto expr = [&](ad::Tape& t, const std::vector<ad::Var>& in) {
    LiftedModel<Taped> MT;
    MT.has_head = true;
    MT.head_W = in[0];
    MT.head_b = in[1];
    MT.abs_beta.push_back(t.constant(1.0));
    MT.abs_beta.push_back(t.constant(1.0));
    std::vector<ad::Var> emb{in[2], in[3], in[4], in[5]};
    std::vector<ad::Var> logits = nc_logits<Taped>(emb, cfg, MT);
    return nc_loss<Taped>(logits, labels, nodes);
  };
  return ad::grad_check(expr, inputs, 1e-5, 1e-4).passed;
}

void criterion_4() {
  struct Item {
    const char* name;
    bool (*fn)(std::uint64_t);
  };
  const Item items[] = {{"distance", grad_distance},
                        {"fermi_dirac o distance", grad_fermi_distance},
                        {"layer_forward (both bias branches)", grad_layer},
                        {"reconstruction_loss", grad_reconstruction},
                        {"nc_head", grad_nc_head}};
  bool ok = true;
  std::ostringstream detail;
  for (const Item& item : items) {
    int passed = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed)
      if (item.fn(seed)) ++passed;
    detail << item.name << " " << passed << "/20  ";
    ok &= passed == 20;
  }
  report(4, ok, "gradient suite (rel_tol 1e-4, step 1e-5, 20 seeds): " + detail.str());
}

// --- criterion 5: mAP oracle equivalence -----------------------------------

double brute_force_map(const Eigen::MatrixXd& dist, const Graph& g) {
  const int n = g.n_nodes;
  double total = 0.0;
  int counted = 0;
  for (int u = 0; u < n; ++u) {
    if (g.adj[u].empty()) continue;
    double ap = 0.0;
    for (int v : g.adj[u]) {
      const double dv = dist(u, v);
      long long rank = 1, hits = 1;
      for (int w = 0; w < n; ++w) {
        if (w == u || w == v) continue;
        if (dist(u, w) < dv) {
          ++rank;
          if (g.has_edge(u, w)) ++hits;
        } else if (dist(u, w) == dv && !g.has_edge(u, w)) {
          ++rank;
        }
      }
      ap += static_cast<double>(hits) / static_cast<double>(rank);
    }
    total += ap / g.degree(u);
    ++counted;
  }
  return counted ? total / counted : 0.0;
}

void criterion_5() {
  Rng rng(404);
  int agree = 0;
  const int trials = 50;
  for (int trial = 0; trial < trials; ++trial) {
    const int n = 5 + rng.uniform_int(26);
    std::vector<std::pair<int, int>> e;
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v)
        if (rng.uniform() < 0.3) e.emplace_back(u, v);
    Graph g = make_graph(n, e);
    bool any = false;
    for (int u = 0; u < n; ++u) any |= !g.adj[u].empty();
    if (!any) {
      ++agree;  // nothing to rank; trivially consistent
      continue;
    }
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int u = 0; u < n; ++u)
      for (int v = u + 1; v < n; ++v) {
        const double val = 1 + rng.uniform_int(6);  // coarse values force ties
        d(u, v) = val;
        d(v, u) = val;
      }
    if (map_metric(d, g).map == brute_force_map(d, g)) ++agree;
  }
  report(5, agree == trials,
         "mAP equals the brute-force ranking oracle on " + std::to_string(agree) + "/" +
             std::to_string(trials) + " random graphs (exact equality)");
}

// --- criterion 6: desk-scale reconstruction --------------------------------

TrainConfig desk_train_config(std::uint64_t seed) {
  TrainConfig t;
  t.task = Task::Reconstruct;
  t.epochs = 500;
  t.lr = 0.01;
  t.lr_min = 0.001;
  t.curvature_lr = 0.001;
  t.seed = seed;
  t.val_every = 1;
  t.patience = 600;
  return t;
}

ModelConfig desk_model_config(const Signature& sig) {
  ModelConfig m = make_config(sig, 2, 0);
  m.act = Activation::Tanh;
  m.skip_connections = true;
  m.mean_aggregation = true;
  m.eps = 0.1;
  return m;
}

void criterion_6(const fs::path& artifacts) {
  const auto t0 = std::chrono::steady_clock::now();
  struct Case {
    const char* name;
    Graph graph;
  };
  std::vector<Case> cases;
  cases.push_back({"tree63", balanced_binary_tree(5)});
  cases.push_back({"tree95", cycle_augmented_tree(5, 32)});
  cases.push_back({"cycle30", cycle_graph(30)});

  const Signature sig73(7, 3, -1.0);
  bool ok = true;
  std::ostringstream detail;
  double tree_map = 0.0;
  for (const Case& c : cases) {
    double map_sum = 0.0, gain_sum = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      TrainResult r = train(c.graph, desk_model_config(sig73), desk_train_config(seed));
      map_sum += r.map;
      gain_sum += r.map - r.init_map;
    }
    const double mean_map = map_sum / 5.0, mean_gain = gain_sum / 5.0;
    detail << c.name << " mAP " << mean_map << " gain " << mean_gain << "  ";
    if (std::string(c.name) == "tree63") tree_map = mean_map;
    ok &= mean_gain >= 0.3;
  }
  ok &= tree_map >= 0.90;

  // per-signature sweep emitted as a CSV (one seed per cell; no ordering
  // among signatures is asserted)
  const std::vector<Signature> sweep = {Signature(9, 1, -1.0), Signature(7, 3, -1.0),
                                        Signature(5, 5, -1.0), Signature(3, 7, -1.0),
                                        Signature(0, 10, -1.0)};
  fs::create_directories(artifacts);
  std::ofstream csv(artifacts / "signature_map.csv");
  csv << "signature";
  for (const Case& c : cases) csv << "," << c.name;
  csv << "\n";
  for (const Signature& s : sweep) {
    csv << s.s << ":" << s.t;
    for (const Case& c : cases) {
      TrainResult r = train(c.graph, desk_model_config(s), desk_train_config(0));
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%.6f", r.map);
      csv << "," << buf;
    }
    csv << "\n";
  }
  const double secs = now_seconds(t0);
  ok &= secs <= 600.0;
  std::ostringstream msg;
  msg << "desk-scale reconstruction (Q^{7,3}, 500 epochs, 5 seeds): " << detail.str()
      << "tree63 mean >= 0.90, runtime " << secs << " s <= 600; signature sweep written to "
      << (artifacts / "signature_map.csv").string();
  report(6, ok, msg.str());
}

// --- criterion 7: delta-hyperbolicity --------------------------------------

void criterion_7() {
  Rng rng(777);
  bool trees_ok = true;
  std::vector<Graph> trees{path_graph(100), star_graph(99), balanced_binary_tree(5)};
  for (int k = 0; k < 4; ++k) {
    const int n = 10 + rng.uniform_int(91);
    std::vector<std::pair<int, int>> e;
    for (int v = 1; v < n; ++v) e.emplace_back(v, rng.uniform_int(v));
    trees.push_back(make_graph(n, e));
  }
  for (const Graph& t : trees)
    if (delta_hyperbolicity_exact(t).max_delta != 0.0) trees_ok = false;

  // sampled mode under exhaustive sampling equals exact mode
  bool sampled_ok = true;
  for (const Graph& g : {cycle_graph(12), cycle_augmented_tree(3, 10), cycle_graph(50)}) {
    const long long n = g.n_nodes;
    const long long all = n * (n - 1) * (n - 2) * (n - 3) / 24;
    HyperbolicityReport exact = delta_hyperbolicity_exact(g);
    HyperbolicityReport sampled = delta_hyperbolicity_sampled(g, all, rng);
    sampled_ok &= sampled.max_delta == exact.max_delta;
    sampled_ok &= sampled.histogram == exact.histogram;
  }
  report(7, trees_ok && sampled_ok,
         "delta-hyperbolicity: exact 0 on trees <= 100 nodes; exhaustive sampling equals exact "
         "(published dataset values are reported by `analyze` when those datasets are supplied)");
}

// --- criterion 8: no-collapse ----------------------------------------------

void criterion_8() {
  const Signature sig(2, 1, -1.0);
  Graph g1 = make_graph(1, {});
  int distinct = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ModelConfig cfg2 = make_config(sig, 2, 4);
    QgcnModel m2 = init_model(cfg2, g1, seed);
    Rng rng(seed * 31 + 7);
    for (auto& l : m2.layers)
      for (int i = 0; i < l.b_free.rows(); ++i) l.b_free(i, 0) = 0.4 + 0.3 * rng.uniform();
    PseudoPoint x = random_point(sig, rng);
    PseudoPoint stacked = qnn_forward(x, m2);

    ModelConfig cfg1 = make_config(sig, 1, 4);
    QgcnModel m1 = init_model(cfg1, g1, seed);
    m1.layers[0].W = m2.layers[1].W * m2.layers[0].W;
    m1.layers[0].b_free.setZero();
    PseudoPoint merged = qnn_forward(x, m1);
    if ((stacked.coords - merged.coords).cwiseAbs().maxCoeff() > 1e-6) ++distinct;
  }
  report(8, distinct == 20,
         "no-collapse: stacked biased layers differ from the merged transform on " +
             std::to_string(distinct) + "/20 seeds (max-norm > 1e-6)");
}

// --- criterion 9: CLI determinism ------------------------------------------

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_wall_clock(const std::string& json_text) {
  std::string out;
  std::istringstream in(json_text);
  std::string line;
  while (std::getline(in, line))
    if (line.find("wall_clock_seconds") == std::string::npos) out += line + "\n";
  return out;
}

void criterion_9(const std::string& cli, const fs::path& artifacts) {
  fs::create_directories(artifacts);
  const fs::path edges = artifacts / "det_tree.txt";
  save_edge_list(balanced_binary_tree(4), edges.string());

  auto run = [&](const std::string& args, const fs::path& out) {
    const std::string cmd = cli + " " + args + " --out " + out.string() + " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };
  bool ok = true;
  const std::string rec_args = "reconstruct --edges " + edges.string() +
                               " --signature 3,2 --epochs 30 --seed 42 --val-every 5";
  ok &= run(rec_args, artifacts / "det_a");
  ok &= run(rec_args, artifacts / "det_b");
  ok &= strip_wall_clock(read_file(artifacts / "det_a" / "metrics.json")) ==
        strip_wall_clock(read_file(artifacts / "det_b" / "metrics.json"));
  ok &= read_file(artifacts / "det_a" / "history.csv") ==
        read_file(artifacts / "det_b" / "history.csv");
  ok &= read_file(artifacts / "det_a" / "model.ckpt") ==
        read_file(artifacts / "det_b" / "model.ckpt");

  const std::string an_args = "analyze --edges " + edges.string() + " --samples 2000 --seed 7";
  ok &= run(an_args, artifacts / "det_c");
  ok &= run(an_args, artifacts / "det_d");
  ok &= strip_wall_clock(read_file(artifacts / "det_c" / "metrics.json")) ==
        strip_wall_clock(read_file(artifacts / "det_d" / "metrics.json"));
  ok &= read_file(artifacts / "det_c" / "delta_hist.csv") ==
        read_file(artifacts / "det_d" / "delta_hist.csv");

  report(9, ok,
         "determinism: repeated CLI runs are byte-identical (metrics.json modulo the wall-clock "
         "field, history.csv, checkpoint, histograms)");
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "./qpseudo";
  const fs::path artifacts = "acceptance_artifacts";
  try {
    criteria_1_to_3();
    criterion_4();
    criterion_5();
    criterion_6(artifacts);
    criterion_7();
    criterion_8();
    criterion_9(cli, artifacts);
  } catch (const std::exception& e) {
    std::cout << "[FAIL] acceptance suite aborted: " << e.what() << std::endl;
    return 99;
  }
  std::cout << (g_failures == 0
                    ? std::string("acceptance: all criteria passed")
                    : "acceptance: " + std::to_string(g_failures) + " criteria failed")
            << std::endl;
  return g_failures;
}
