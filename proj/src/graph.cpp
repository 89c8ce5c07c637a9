#include "qpseudo/graph.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "qpseudo/types.hpp"

namespace qpseudo {

bool Graph::has_edge(int u, int v) const {
  if (u < 0 || u >= n_nodes) return false;
  return std::binary_search(adj[u].begin(), adj[u].end(), v);
}

int Graph::n_classes() const {
  int c = 0;
  for (int l : labels) c = std::max(c, l + 1);
  return c;
}

Graph make_graph(int n_nodes, const std::vector<std::pair<int, int>>& raw_edges) {
  Graph g;
  g.n_nodes = n_nodes;
  std::set<std::pair<int, int>> seen;
  for (auto [u, v] : raw_edges) {
    if (u < 0 || v < 0 || u >= n_nodes || v >= n_nodes)
      throw DimensionError("make_graph: edge endpoint out of range");
    if (u == v) {
      ++g.dropped_self_loops;
      continue;
    }
    if (u > v) std::swap(u, v);
    if (!seen.insert({u, v}).second) ++g.dropped_duplicates;
  }
  g.edges.assign(seen.begin(), seen.end());
  g.adj.assign(n_nodes, {});
  for (auto [u, v] : g.edges) {
    g.adj[u].push_back(v);
    g.adj[v].push_back(u);
  }
  for (auto& a : g.adj) std::sort(a.begin(), a.end());
  return g;
}

namespace {

std::vector<std::pair<int, int>> parse_edge_file(const std::string& path, int& max_id) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open edge file: " + path);
  std::vector<std::pair<int, int>> edges;
  std::string line;
  int lineno = 0;
  max_id = -1;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    long u, v;
    if (!(ss >> u)) continue;  // blank line
    std::string extra;
    if (!(ss >> v) || (ss >> extra) || u < 0 || v < 0)
      throw std::runtime_error("malformed edge line " + std::to_string(lineno) + " in " + path);
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    max_id = std::max(max_id, static_cast<int>(std::max(u, v)));
  }
  return edges;
}

bool looks_numeric(const std::string& tok) {
  if (tok.empty()) return false;
  char* end = nullptr;
  std::strtod(tok.c_str(), &end);
  while (end && *end == ' ') ++end;
  return end && *end == '\0';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Graph load_graph(const std::string& edge_path, const std::string& feature_path,
                 const std::string& label_path) {
  int max_id = -1;
  std::vector<std::pair<int, int>> raw = parse_edge_file(edge_path, max_id);

  Eigen::MatrixXd features;
  if (!feature_path.empty()) {
    std::ifstream in(feature_path);
    if (!in) throw std::runtime_error("cannot open feature file: " + feature_path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> toks = split_csv(line);
      if (first && !looks_numeric(toks[0])) {  // header row
        first = false;
        continue;
      }
      first = false;
      std::vector<double> row;
      row.reserve(toks.size());
      for (const std::string& t : toks) {
        if (!looks_numeric(t))
          throw std::runtime_error("malformed feature value '" + t + "' in " + feature_path);
        row.push_back(std::stod(t));
      }
      if (!rows.empty() && row.size() != rows.front().size())
        throw std::runtime_error("ragged feature rows in " + feature_path);
      rows.push_back(std::move(row));
    }
    features.resize(static_cast<int>(rows.size()),
                    rows.empty() ? 0 : static_cast<int>(rows.front().size()));
    for (int i = 0; i < features.rows(); ++i)
      for (int j = 0; j < features.cols(); ++j) features(i, j) = rows[i][j];
  }

  int n = max_id + 1;
  if (features.size() > 0) {
    if (features.rows() < n)
      throw std::runtime_error("feature row count " + std::to_string(features.rows()) +
                               " < node count " + std::to_string(n));
    n = static_cast<int>(features.rows());
  }
  if (n <= 0) throw std::runtime_error("empty graph: " + edge_path);

  Graph g = make_graph(n, raw);
  g.features = std::move(features);

  if (!label_path.empty()) {
    std::ifstream in(label_path);
    if (!in) throw std::runtime_error("cannot open label file: " + label_path);
    g.labels.assign(g.n_nodes, -1);
    std::string line;
    int lineno = 0;
    bool first = true;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      std::vector<std::string> toks = split_csv(line);
      if (first && !looks_numeric(toks[0])) {
        first = false;
        continue;
      }
      first = false;
      if (toks.size() != 2 || !looks_numeric(toks[0]) || !looks_numeric(toks[1]))
        throw std::runtime_error("malformed label line " + std::to_string(lineno) + " in " +
                                 label_path);
      const int id = std::stoi(toks[0]);
      const int label = std::stoi(toks[1]);
      if (id < 0 || id >= g.n_nodes)
        throw std::runtime_error("label id out of range at line " + std::to_string(lineno));
      if (label < 0) throw std::runtime_error("negative label at line " + std::to_string(lineno));
      g.labels[id] = label;
    }
  }
  return g;
}

void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write edge file: " + path);
  for (auto [u, v] : g.edges) out << u << " " << v << "\n";
}

Graph path_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return make_graph(n, e);
}

Graph cycle_graph(int n) {
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return make_graph(n, e);
}

Graph star_graph(int n_leaves) {
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= n_leaves; ++i) e.emplace_back(0, i);
  return make_graph(n_leaves + 1, e);
}

Graph balanced_binary_tree(int depth) {
  const int n = (1 << (depth + 1)) - 1;
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) {
    if (2 * i + 1 < n) e.emplace_back(i, 2 * i + 1);
    if (2 * i + 2 < n) e.emplace_back(i, 2 * i + 2);
  }
  return make_graph(n, e);
}

Graph cycle_augmented_tree(int depth, int cycle_len) {
  Graph tree = balanced_binary_tree(depth);
  const int nt = tree.n_nodes;
  std::vector<std::pair<int, int>> e = tree.edges;
  for (int i = 0; i < cycle_len; ++i) e.emplace_back(nt + i, nt + (i + 1) % cycle_len);
  e.emplace_back(0, nt);  // bridge the cycle to the root
  return make_graph(nt + cycle_len, e);
}

}  // namespace qpseudo
