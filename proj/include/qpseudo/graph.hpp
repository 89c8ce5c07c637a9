#pragma once

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace qpseudo {

// Undirected simple graph with optional dense node features and integer
// labels. Edges are stored once with u < v; adjacency lists are sorted.
struct Graph {
  int n_nodes = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<std::vector<int>> adj;
  Eigen::MatrixXd features;  // n x F, 0 x 0 when absent
  std::vector<int> labels;   // empty when absent; -1 marks unlabeled nodes
  int dropped_self_loops = 0;
  int dropped_duplicates = 0;

  bool has_features() const { return features.size() > 0; }
  bool has_labels() const { return !labels.empty(); }
  int degree(int u) const { return static_cast<int>(adj[u].size()); }
  bool has_edge(int u, int v) const;
  int n_classes() const;  // 1 + max label, 0 when unlabeled
};

// Symmetrizes, deduplicates and drops self-loops (counted in the result).
Graph make_graph(int n_nodes, const std::vector<std::pair<int, int>>& raw_edges);

// Edge file: whitespace-delimited "u v" lines. Feature file: CSV, one row per
// node (an optional non-numeric header row is skipped). Label file: CSV
// "id,label". Throws on malformed lines, out-of-range ids, or a feature row
// count that disagrees with the edge file.
Graph load_graph(const std::string& edge_path, const std::string& feature_path = "",
                 const std::string& label_path = "");

void save_edge_list(const Graph& g, const std::string& path);

// Deterministic generators for experiments and self-tests.
Graph path_graph(int n);
Graph cycle_graph(int n);
Graph star_graph(int n_leaves);
Graph balanced_binary_tree(int depth);  // 2^(depth+1) - 1 nodes
// Balanced binary tree of `depth` plus a cycle of `cycle_len` extra nodes,
// bridged to the root: a mixed hierarchical/cyclic testbed.
Graph cycle_augmented_tree(int depth, int cycle_len);

}  // namespace qpseudo
