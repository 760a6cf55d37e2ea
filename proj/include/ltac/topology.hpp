#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

namespace ltac {

// Undirected connected communication graph. Edges are stored canonically as
// (i, j) with i < j, sorted lexicographically.
struct Graph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;

  int edge_count() const { return static_cast<int>(edges.size()); }
};

// Validates node range, self-loops, duplicates, and connectivity.
Graph make_graph(int n, std::vector<std::pair<int, int>> edges);
Graph ring_graph(int n);
Graph complete_graph(int n);
Graph path_graph(int n);

// Accepts {"type":"ring","n":5} or {"type":"edges","n":N,"edges":[[i,j],...]}.
Graph graph_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const Graph& g);

// Directed-slot matrices used by the compact-form recursions. Slots are the
// rows of the incidence matrix: one per directed pair (i, j), grouped by
// source node i, neighbors ascending. slot (i,j) with i < j precedes (j,i).
struct GraphStructures {
  int n = 0;
  int m = 0;  // number of directed slots, equals 2|E|
  std::vector<std::pair<int, int>> slots;
  std::vector<int> slot_offset;  // per-node block start, size n+1
  std::vector<int> twin;         // twin[slot(i,j)] == slot(j,i)
  std::vector<int> degree;
  Eigen::MatrixXd incidence;      // A, m x n, blocks of ones-columns
  Eigen::MatrixXd permutation;    // P, m x m, swaps (i,j) and (j,i)
  Eigen::MatrixXd adjacency;      // A^T P A
  Eigen::MatrixXd degree_matrix;  // A^T A
  Eigen::MatrixXd signless;       // adjacency - degree_matrix (negated Laplacian)
  Eigen::MatrixXd laplacian;      // degree_matrix - adjacency
  Eigen::VectorXd spectrum;       // Laplacian eigenvalues, ascending

  int slot_index(int i, int j) const;  // -1 when (i,j) is not an edge slot
};

GraphStructures build_structures(const Graph& g);

struct LambdaBounds {
  double lambda_min_nonzero = 0.0;
  double lambda_max = 0.0;
};

// Smallest nonzero and largest Laplacian eigenvalue. Throws on a spectrum
// whose zero eigenvalue is not simple (disconnected graph).
LambdaBounds lambda_bounds(const Graph& g);
LambdaBounds lambda_bounds(const GraphStructures& gs);

}  // namespace ltac
