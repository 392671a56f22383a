#include "cityrel/network.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "cityrel/csv.hpp"

namespace cityrel {

WeightedGraph graph_from_matrix(const TopicMatrix& matrix) {
  const Eigen::MatrixXd& m = matrix.values;
  if (m.rows() != m.cols()) throw std::runtime_error("matrix not square");
  WeightedGraph g;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    g.nodes.push_back(static_cast<CityId>(i));
    if (m(i, i) != 0.0) throw std::runtime_error("matrix diagonal not zero");
    for (Eigen::Index j = i + 1; j < m.cols(); ++j) {
      if (m(i, j) != m(j, i)) throw std::runtime_error("matrix not symmetric");
      if (m(i, j) > 0.0)
        g.edges[CityPair(static_cast<CityId>(i), static_cast<CityId>(j))] = m(i, j);
    }
  }
  return g;
}

PrunedNetwork pathfinder_prune(const WeightedGraph& graph) {
  const int n = static_cast<int>(graph.nodes.size());
  std::unordered_map<CityId, int> index;
  for (int i = 0; i < n; ++i) index[graph.nodes[i]] = i;

  const double inf = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd d = Eigen::MatrixXd::Constant(n, n, inf);
  for (int i = 0; i < n; ++i) d(i, i) = 0.0;
  for (const auto& [pair, w] : graph.edges) {
    int i = index.at(pair.a), j = index.at(pair.b);
    d(i, j) = d(j, i) = 1.0 / w;
  }

  // All-pairs minimax: relax through every intermediate node.
  Eigen::MatrixXd minimax = d;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        double via = std::max(minimax(i, k), minimax(k, j));
        if (via < minimax(i, j)) minimax(i, j) = via;
      }

  PrunedNetwork out;
  out.graph.nodes = graph.nodes;
  for (CityId node : graph.nodes) out.weighted_degree[node] = 0.0;
  for (const auto& [pair, w] : graph.edges) {
    int i = index.at(pair.a), j = index.at(pair.b);
    if (d(i, j) == minimax(i, j)) {
      out.graph.edges[pair] = w;
      out.weighted_degree[pair.a] += w;
      out.weighted_degree[pair.b] += w;
    }
  }
  return out;
}

double weighted_degree(const PrunedNetwork& network, CityId node) {
  auto it = network.weighted_degree.find(node);
  if (it == network.weighted_degree.end())
    throw std::runtime_error("node not in network: " + std::to_string(node));
  return it->second;
}

PrunedNetwork top_k_subgraph(const PrunedNetwork& network, int k, const Gazetteer& gaz) {
  if (k < 1) throw std::runtime_error("k must be >= 1");
  std::vector<CityId> order = network.graph.nodes;
  std::stable_sort(order.begin(), order.end(), [&](CityId a, CityId b) {
    double da = network.weighted_degree.at(a), db = network.weighted_degree.at(b);
    if (da != db) return da > db;
    return gaz.city(a).rank < gaz.city(b).rank;
  });
  if (static_cast<int>(order.size()) > k) order.resize(k);
  std::set<CityId> keep(order.begin(), order.end());

  PrunedNetwork out;
  out.graph.nodes = order;
  for (CityId node : order) out.weighted_degree[node] = network.weighted_degree.at(node);
  for (const auto& [pair, w] : network.graph.edges)
    if (keep.contains(pair.a) && keep.contains(pair.b)) out.graph.edges[pair] = w;
  return out;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

void export_gexf(const PrunedNetwork& network, const Gazetteer& gaz,
                 const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write gexf: " + path.string());
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n"
      << "  <graph mode=\"static\" defaultedgetype=\"undirected\">\n"
      << "    <attributes class=\"node\">\n"
      << "      <attribute id=\"0\" title=\"weighted_degree\" type=\"double\"/>\n"
      << "    </attributes>\n"
      << "    <nodes>\n";
  for (CityId node : network.graph.nodes) {
    out << "      <node id=\"" << node << "\" label=\""
        << xml_escape(gaz.city(node).name) << "\">\n"
        << "        <attvalues><attvalue for=\"0\" value=\""
        << network.weighted_degree.at(node) << "\"/></attvalues>\n"
        << "      </node>\n";
  }
  out << "    </nodes>\n    <edges>\n";
  int edge_id = 0;
  for (const auto& [pair, w] : network.graph.edges) {
    out << "      <edge id=\"" << edge_id++ << "\" source=\"" << pair.a
        << "\" target=\"" << pair.b << "\" weight=\"" << w << "\"/>\n";
  }
  out << "    </edges>\n  </graph>\n</gexf>\n";
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void export_edge_list(const PrunedNetwork& network, const Gazetteer& gaz,
                      const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write edge list: " + path.string());
  out << "city_a,city_b,weight\n";
  for (const auto& [pair, w] : network.graph.edges)
    out << csv_escape(gaz.city(pair.a).name) << ',' << csv_escape(gaz.city(pair.b).name)
        << ',' << w << '\n';
}

}  // namespace cityrel
