#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "cityrel/network.hpp"

using namespace cityrel;

namespace {

Gazetteer grid_gazetteer(int n) {
  std::vector<City> cities;
  for (int i = 0; i < n; ++i)
    cities.push_back({"City" + std::to_string(i), {}, "XX", double(i), double(i), i + 1});
  return Gazetteer(std::move(cities));
}

WeightedGraph graph_from_edges(int n, const std::map<CityPair, double>& edges) {
  WeightedGraph g;
  for (int i = 0; i < n; ++i) g.nodes.push_back(i);
  g.edges = edges;
  return g;
}

// All-simple-paths minimax oracle: minimum over paths of the maximum edge
// dissimilarity (d = 1/w), by exhaustive DFS.
double minimax_oracle(const WeightedGraph& g, CityId s, CityId t) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<CityId> stack{s};
  std::set<CityId> visited{s};
  std::function<void(CityId, double)> dfs = [&](CityId u, double path_max) {
    if (u == t) {
      best = std::min(best, path_max);
      return;
    }
    for (const auto& [pair, w] : g.edges) {
      CityId v;
      if (pair.a == u) v = pair.b;
      else if (pair.b == u) v = pair.a;
      else continue;
      if (visited.contains(v)) continue;
      visited.insert(v);
      dfs(v, std::max(path_max, 1.0 / w));
      visited.erase(v);
    }
  };
  dfs(s, 0.0);
  return best;
}

std::set<CityPair> prune_oracle(const WeightedGraph& g) {
  std::set<CityPair> kept;
  for (const auto& [pair, w] : g.edges)
    if (1.0 / w == minimax_oracle(g, pair.a, pair.b)) kept.insert(pair);
  return kept;
}

std::set<CityPair> edge_set(const PrunedNetwork& n) {
  std::set<CityPair> out;
  for (const auto& [pair, w] : n.graph.edges) out.insert(pair);
  return out;
}

// Kruskal, for the distinct-weight MST comparison.
std::set<CityPair> mst_oracle(const WeightedGraph& g) {
  std::vector<std::pair<double, CityPair>> edges;
  for (const auto& [pair, w] : g.edges) edges.push_back({1.0 / w, pair});
  std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
    return a.first < b.first;
  });
  std::map<CityId, CityId> rep;
  for (CityId n : g.nodes) rep[n] = n;
  std::function<CityId(CityId)> find = [&](CityId x) {
    return rep[x] == x ? x : rep[x] = find(rep[x]);
  };
  std::set<CityPair> mst;
  for (const auto& [d, pair] : edges) {
    if (find(pair.a) != find(pair.b)) {
      rep[find(pair.a)] = find(pair.b);
      mst.insert(pair);
    }
  }
  return mst;
}

WeightedGraph random_graph(std::mt19937_64& rng, bool distinct_weights) {
  std::uniform_int_distribution<int> size(3, 8);
  std::uniform_real_distribution<double> weight(0.1, 10.0);
  int n = size(rng);
  std::map<CityPair, double> edges;
  std::set<double> used;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (rng() % 2) continue;  // ~50% density
      double w = weight(rng);
      if (distinct_weights)
        while (!used.insert(w).second) w = weight(rng);
      edges[CityPair(i, j)] = w;
    }
  return graph_from_edges(n, edges);
}

}  // namespace

TEST_CASE("graph_from_matrix") {
  TopicMatrix zero{"t", Eigen::MatrixXd::Zero(3, 3)};
  WeightedGraph g = graph_from_matrix(zero);
  CHECK(g.nodes.size() == 3);
  CHECK(g.edges.empty());

  TopicMatrix one{"t", Eigen::MatrixXd::Zero(3, 3)};
  one.values(0, 2) = one.values(2, 0) = 4.0;
  g = graph_from_matrix(one);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges.at(CityPair(0, 2)) == 4.0);

  TopicMatrix tri{"t", Eigen::MatrixXd::Constant(3, 3, 2.0)};
  tri.values.diagonal().setZero();
  g = graph_from_matrix(tri);
  CHECK(g.edges.size() == 3);

  TopicMatrix bad{"t", Eigen::MatrixXd::Zero(2, 2)};
  bad.values(0, 1) = 1.0;
  CHECK_THROWS_AS(graph_from_matrix(bad), std::runtime_error);
}

TEST_CASE("pathfinder leaves trees and uniform complete graphs unchanged") {
  // Path 0-1-2-3.
  WeightedGraph tree = graph_from_edges(
      4, {{CityPair(0, 1), 3.0}, {CityPair(1, 2), 1.0}, {CityPair(2, 3), 2.0}});
  CHECK(edge_set(pathfinder_prune(tree)) == edge_set({tree, {}}));

  std::map<CityPair, double> complete;
  for (int i = 0; i < 5; ++i)
    for (int j = i + 1; j < 5; ++j) complete[CityPair(i, j)] = 2.0;
  WeightedGraph k5 = graph_from_edges(5, complete);
  CHECK(pathfinder_prune(k5).graph.edges.size() == complete.size());
}

TEST_CASE("pathfinder prunes the weak edge of a triangle") {
  WeightedGraph tri = graph_from_edges(
      3, {{CityPair(0, 1), 3.0}, {CityPair(1, 2), 2.0}, {CityPair(0, 2), 1.0}});
  PrunedNetwork pruned = pathfinder_prune(tri);
  CHECK(edge_set(pruned) == std::set<CityPair>{CityPair(0, 1), CityPair(1, 2)});
}

TEST_CASE("pathfinder equals the all-simple-paths minimax oracle on random graphs") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 120; ++trial) {
    WeightedGraph g = random_graph(rng, false);
    CHECK(edge_set(pathfinder_prune(g)) == prune_oracle(g));
  }
}

TEST_CASE("distinct weights give the unique MST; ties give MST unions") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 60; ++trial) {
    WeightedGraph g = random_graph(rng, true);
    // Restrict to connected graphs: compare component-wise via the oracle.
    auto pruned = edge_set(pathfinder_prune(g));
    auto mst = mst_oracle(g);
    CHECK(pruned == mst);
    CHECK(std::includes(pruned.begin(), pruned.end(), mst.begin(), mst.end()));
  }
}

TEST_CASE("monotone transform of weights leaves the pruned edge set unchanged") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    WeightedGraph g = random_graph(rng, false);
    WeightedGraph cubed = g;
    for (auto& [pair, w] : cubed.edges) w = w * w * w;
    CHECK(edge_set(pathfinder_prune(g)) == edge_set(pathfinder_prune(cubed)));
  }
}

TEST_CASE("weighted degree sums retained similarity weights") {
  WeightedGraph g = graph_from_edges(
      4, {{CityPair(0, 1), 5.0}, {CityPair(0, 2), 7.0}});
  PrunedNetwork pruned = pathfinder_prune(g);
  CHECK(weighted_degree(pruned, 0) == 12.0);
  CHECK(weighted_degree(pruned, 3) == 0.0);
  CHECK_THROWS_AS(weighted_degree(pruned, 42), std::runtime_error);

  // Star center with k unit edges.
  std::map<CityPair, double> star;
  for (int i = 1; i <= 5; ++i) star[CityPair(0, i)] = 1.0;
  PrunedNetwork s = pathfinder_prune(graph_from_edges(6, star));
  CHECK(weighted_degree(s, 0) == 5.0);
}

TEST_CASE("top_k_subgraph induces on the highest-degree nodes") {
  Gazetteer gaz = grid_gazetteer(4);
  // Path 0-1-2-3 with unit weights: degrees 1, 2, 2, 1.
  WeightedGraph path = graph_from_edges(
      4, {{CityPair(0, 1), 1.0}, {CityPair(1, 2), 1.0}, {CityPair(2, 3), 1.0}});
  PrunedNetwork pruned = pathfinder_prune(path);

  PrunedNetwork two = top_k_subgraph(pruned, 2, gaz);
  CHECK(std::set<CityId>(two.graph.nodes.begin(), two.graph.nodes.end()) ==
        std::set<CityId>{1, 2});
  CHECK(two.graph.edges.size() == 1);
  // Degrees describe the full pruned network, not the subgraph.
  CHECK(two.weighted_degree.at(1) == 2.0);

  CHECK(top_k_subgraph(pruned, 99, gaz).graph.nodes.size() == 4);
  PrunedNetwork one = top_k_subgraph(pruned, 1, gaz);
  CHECK(one.graph.nodes.size() == 1);
  CHECK(one.graph.edges.empty());
}

TEST_CASE("gexf export round-trips node and edge counts") {
  Gazetteer gaz = grid_gazetteer(3);
  auto count = [](const std::string& text, const std::string& needle) {
    std::size_t n = 0, pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
      ++n;
      pos += needle.size();
    }
    return n;
  };
  auto read_all = [](const std::filesystem::path& p) {
    std::ifstream in(p);
    return std::string((std::istreambuf_iterator<char>(in)), {});
  };

  auto path = std::filesystem::temp_directory_path() / "cityrel_net.gexf";
  PrunedNetwork empty;
  export_gexf(empty, gaz, path);
  std::string xml = read_all(path);
  CHECK(count(xml, "<node ") == 0);
  CHECK(count(xml, "<gexf") == 1);

  WeightedGraph g = graph_from_edges(2, {{CityPair(0, 1), 2.5}});
  PrunedNetwork pruned = pathfinder_prune(g);
  export_gexf(pruned, gaz, path);
  xml = read_all(path);
  CHECK(count(xml, "<node ") == 2);
  CHECK(count(xml, "<edge ") == 1);
  CHECK(xml.find("weight=\"2.5\"") != std::string::npos);
}
