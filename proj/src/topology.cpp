#include "ltac/topology.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "ltac/errors.hpp"

namespace ltac {

namespace {

void check_connected(int n, const std::vector<std::pair<int, int>>& edges) {
  std::vector<std::vector<int>> adj(n);
  for (auto [i, j] : edges) {
    adj[i].push_back(j);
    adj[j].push_back(i);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int count = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = 1;
        ++count;
        stack.push_back(v);
      }
    }
  }
  if (count != n) throw TopologyError("graph is disconnected");
}

}  // namespace

Graph make_graph(int n, std::vector<std::pair<int, int>> edges) {
  if (n < 2) throw TopologyError("graph needs at least 2 nodes");
  for (auto& [i, j] : edges) {
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw TopologyError("edge endpoint out of range: (" + std::to_string(i) +
                          "," + std::to_string(j) + ")");
    if (i == j)
      throw TopologyError("self-loop at node " + std::to_string(i));
    if (i > j) std::swap(i, j);
  }
  std::sort(edges.begin(), edges.end());
  if (std::adjacent_find(edges.begin(), edges.end()) != edges.end())
    throw TopologyError("duplicate edge");
  check_connected(n, edges);
  return Graph{n, std::move(edges)};
}

Graph ring_graph(int n) {
  if (n < 3) throw TopologyError("ring needs at least 3 nodes");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
  return make_graph(n, std::move(edges));
}

Graph complete_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return make_graph(n, std::move(edges));
}

Graph path_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return make_graph(n, std::move(edges));
}

Graph graph_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("graph", "must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (key != "type" && key != "n" && key != "edges")
      throw ConfigError("graph." + key, "unknown key");
  }
  const std::string type = j.value("type", std::string{});
  if (!j.contains("n") || !j["n"].is_number_integer())
    throw ConfigError("graph.n", "required integer");
  const int n = j["n"].get<int>();
  if (type == "ring") {
    if (j.contains("edges"))
      throw ConfigError("graph.edges", "not allowed for type 'ring'");
    return ring_graph(n);
  }
  if (type == "edges") {
    if (!j.contains("edges") || !j["edges"].is_array())
      throw ConfigError("graph.edges", "required array of [i,j] pairs");
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j["edges"]) {
      if (!e.is_array() || e.size() != 2)
        throw ConfigError("graph.edges", "each edge must be a [i,j] pair");
      edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    return make_graph(n, std::move(edges));
  }
  throw ConfigError("graph.type", "must be 'ring' or 'edges'");
}

nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (auto [i, j] : g.edges) edges.push_back({i, j});
  return {{"type", "edges"}, {"n", g.n}, {"edges", edges}};
}

int GraphStructures::slot_index(int i, int j) const {
  for (int s = slot_offset[i]; s < slot_offset[i + 1]; ++s)
    if (slots[s].second == j) return s;
  return -1;
}

GraphStructures build_structures(const Graph& g) {
  GraphStructures gs;
  gs.n = g.n;
  std::vector<std::vector<int>> neighbors(g.n);
  for (auto [i, j] : g.edges) {
    neighbors[i].push_back(j);
    neighbors[j].push_back(i);
  }
  for (auto& nb : neighbors) std::sort(nb.begin(), nb.end());

  gs.slot_offset.assign(g.n + 1, 0);
  for (int i = 0; i < g.n; ++i) {
    gs.slot_offset[i + 1] =
        gs.slot_offset[i] + static_cast<int>(neighbors[i].size());
    for (int j : neighbors[i]) gs.slots.emplace_back(i, j);
    gs.degree.push_back(static_cast<int>(neighbors[i].size()));
  }
  gs.m = static_cast<int>(gs.slots.size());

  gs.twin.resize(gs.m);
  for (int s = 0; s < gs.m; ++s) {
    auto [i, j] = gs.slots[s];
    gs.twin[s] = gs.slot_index(j, i);
  }

  gs.incidence = Eigen::MatrixXd::Zero(gs.m, gs.n);
  for (int s = 0; s < gs.m; ++s) gs.incidence(s, gs.slots[s].first) = 1.0;
  gs.permutation = Eigen::MatrixXd::Zero(gs.m, gs.m);
  for (int s = 0; s < gs.m; ++s) gs.permutation(s, gs.twin[s]) = 1.0;

  gs.degree_matrix = gs.incidence.transpose() * gs.incidence;
  gs.adjacency = gs.incidence.transpose() * gs.permutation * gs.incidence;
  gs.signless = gs.adjacency - gs.degree_matrix;
  gs.laplacian = gs.degree_matrix - gs.adjacency;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gs.laplacian);
  gs.spectrum = solver.eigenvalues();
  return gs;
}

LambdaBounds lambda_bounds(const GraphStructures& gs) {
  const double lambda_max = gs.spectrum(gs.spectrum.size() - 1);
  const double tol = 1e-9 * std::max(1.0, lambda_max);
  if (gs.spectrum.size() < 2 || gs.spectrum(1) <= tol)
    throw TopologyError("zero Laplacian eigenvalue is not simple");
  return LambdaBounds{gs.spectrum(1), lambda_max};
}

LambdaBounds lambda_bounds(const Graph& g) {
  return lambda_bounds(build_structures(g));
}

}  // namespace ltac
