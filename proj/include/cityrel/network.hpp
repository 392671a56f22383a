#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cityrel/corpus.hpp"
#include "cityrel/relatedness.hpp"

namespace cityrel {

// Undirected graph over city ids with positive similarity weights.
struct WeightedGraph {
  std::vector<CityId> nodes;
  std::map<CityPair, double> edges;
};

struct PrunedNetwork {
  WeightedGraph graph;
  std::map<CityId, double> weighted_degree;  // over retained edges
};

// Edge for every strictly positive off-diagonal entry. Throws on asymmetric
// input.
WeightedGraph graph_from_matrix(const TopicMatrix& matrix);

// Pathfinder scaling with q = n-1, r = infinity: similarities are converted
// to dissimilarities (d = 1/w) and an edge is kept iff its dissimilarity
// equals the minimax path dissimilarity between its endpoints. Minimax
// distances come from iterated max/min relaxation over all nodes.
PrunedNetwork pathfinder_prune(const WeightedGraph& graph);

double weighted_degree(const PrunedNetwork& network, CityId node);

// Induced subgraph on the k nodes with highest weighted degree, ties broken
// by city rank. Degrees are carried over from the full pruned network.
PrunedNetwork top_k_subgraph(const PrunedNetwork& network, int k, const Gazetteer& gaz);

void export_gexf(const PrunedNetwork& network, const Gazetteer& gaz,
                 const std::filesystem::path& path);
void export_edge_list(const PrunedNetwork& network, const Gazetteer& gaz,
                      const std::filesystem::path& path);

}  // namespace cityrel
