#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>

#include "qpseudo/rng.hpp"

#include "qpseudo/graph.hpp"

using namespace qpseudo;

namespace {
struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content) : path(name) {
    std::ofstream(path) << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};
}  // namespace

TEST_CASE("edge files parse into symmetric simple graphs") {
  TempFile edges("t_edges.txt", "0 1\n1 2\n");
  Graph g = load_graph(edges.path);
  CHECK(g.n_nodes == 3);
  CHECK(g.edges.size() == 2);
  CHECK(g.has_edge(1, 0));
  CHECK(g.has_edge(2, 1));
}

TEST_CASE("duplicate edges collapse and self-loops are dropped with a count") {
  TempFile edges("t_dups.txt", "0 1\n0 1\n1 0\n1 1\n2 0\n");
  Graph g = load_graph(edges.path);
  CHECK(g.edges.size() == 2);
  CHECK(g.dropped_duplicates == 2);
  CHECK(g.dropped_self_loops == 1);
}

TEST_CASE("malformed inputs raise errors") {
  TempFile bad("t_bad.txt", "0 1\n2 x\n");
  CHECK_THROWS(load_graph(bad.path));

  TempFile three("t_three.txt", "0 1 2\n");
  CHECK_THROWS(load_graph(three.path));

  TempFile edges("t_e.txt", "0 1\n1 2\n");
  TempFile feats("t_f.csv", "1.0,2.0\n3.0,4.0\n");  // 2 rows for 3 nodes
  CHECK_THROWS(load_graph(edges.path, feats.path));
}

TEST_CASE("feature and label files attach to the graph") {
  TempFile edges("t_e2.txt", "0 1\n1 2\n");
  TempFile feats("t_f2.csv", "f0,f1\n1.0,2.0\n3.0,4.0\n5.0,6.0\n");  // header skipped
  TempFile labels("t_l2.csv", "id,label\n0,1\n2,0\n");
  Graph g = load_graph(edges.path, feats.path, labels.path);
  CHECK(g.features.rows() == 3);
  CHECK(g.features(2, 1) == 6.0);
  CHECK(g.labels == std::vector<int>{1, -1, 0});
  CHECK(g.n_classes() == 2);

  // extra feature rows extend the node set (isolated nodes)
  TempFile feats2("t_f3.csv", "1.0\n2.0\n3.0\n4.0\n");
  Graph g2 = load_graph(edges.path, feats2.path);
  CHECK(g2.n_nodes == 4);
  CHECK(g2.degree(3) == 0);
}

TEST_CASE("edge lists round-trip through save") {
  Graph g = cycle_augmented_tree(3, 5);
  save_edge_list(g, "t_roundtrip.txt");
  Graph g2 = load_graph("t_roundtrip.txt");
  CHECK(g2.n_nodes == g.n_nodes);
  CHECK(g2.edges == g.edges);
  std::remove("t_roundtrip.txt");
}

TEST_CASE("doubles round-trip through 17-significant-digit text") {
  // the CLI writes embeddings with %.17g; spot-check the format contract
  Rng rng(5);
  for (int k = 0; k < 1000; ++k) {
    const double v = std::exp(10.0 * rng.normal());
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    CHECK(std::strtod(buf, nullptr) == v);
  }
}
