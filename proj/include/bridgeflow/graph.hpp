#pragma once

// Directed graphs, the nonnegative kernels built from them, and the
// structural checks (path counts, primitivity) the solvers rely on.
//
// Node labels are 1-based in every document and report and 0-based in this
// API. Use node_from_label()/label_of() at the boundary.

#include <compare>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bridgeflow/matrix.hpp"

namespace bridgeflow {

using Node = std::size_t;

struct Edge {
  Node from;
  Node to;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// How the optional third column of an edge list is read.
enum class ValueMode { weight, energy };

class Graph {
 public:
  // Unweighted graph. Throws ValidationError on out-of-range endpoints or
  // duplicate edges.
  Graph(std::size_t n, std::vector<Edge> edges);

  // Per-edge energies U_ij >= 0, parallel to `edges`.
  static Graph with_energies(std::size_t n, std::vector<Edge> edges, std::vector<double> energies);
  // Per-edge multiplicative weights in (0, 1], parallel to `edges`.
  static Graph with_weights(std::size_t n, std::vector<Edge> edges, std::vector<double> weights);

  std::size_t size() const noexcept { return n_; }
  // Sorted lexicographically.
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  bool has_costs() const noexcept { return weighted_; }
  bool has_edge(Node from, Node to) const;

  // Parallel to edges(); empty for unweighted graphs.
  std::span<const double> energies() const noexcept { return energies_; }
  std::span<const double> weights() const noexcept { return weights_; }

  // Returns a copy with (from,to) added at zero energy. No-op if present.
  Graph with_edge(Node from, Node to) const;
  Graph without_edge(Node from, Node to) const;

 private:
  Graph() = default;
  void sort_and_validate();

  std::size_t n_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> energies_;
  std::vector<double> weights_;
  bool weighted_ = false;
};

Node node_from_label(long long label, std::size_t n);
inline long long label_of(Node node) { return static_cast<long long>(node) + 1; }

// Accepts the edge-list grammar or, when the document starts with '{', the
// JSON form. ';' is accepted as a line separator in edge lists.
Graph parse_graph(std::string_view text);
Graph parse_edge_list(std::string_view text);
Graph parse_graph_json(std::string_view text);
Graph read_graph_file(const std::string& path);

// Square matrix with nonnegative finite entries. Rows need not be stochastic.
class NonnegativeKernel {
 public:
  explicit NonnegativeKernel(Matrix entries);

  std::size_t size() const noexcept { return m_.rows(); }
  const Matrix& matrix() const noexcept { return m_; }
  double operator()(Node i, Node j) const { return m_(i, j); }
  bool has_support(Node i, Node j) const { return m_(i, j) > 0.0; }

  // U_ij = -log m_ij, +inf on zero entries.
  Matrix energies() const;

 private:
  Matrix m_;
};

NonnegativeKernel adjacency_kernel(const Graph& g);
NonnegativeKernel weighted_kernel(const Graph& g);
// exp(-U_ij) on edges, exp(-teleport_energy) on every non-edge (self-loops
// included), so the result is strictly positive.
NonnegativeKernel teleport_kernel(const Graph& g, double teleport_energy);

// Edge energies (0 for unweighted graphs), +inf off the edge set.
Matrix edge_energy_matrix(const Graph& g);

Graph ensure_sink_loop(const Graph& g, Node sink);

struct Feasibility {
  double path_weight;  // (M^N)_{source,sink}; a path count for 0/1 kernels
  bool feasible;
};

Feasibility feasibility(const NonnegativeKernel& m, Node source, Node sink, std::size_t steps);

// Boolean support of M^steps.
std::vector<std::vector<bool>> reachability(const NonnegativeKernel& m, std::size_t steps);

struct Primitivity {
  bool primitive;
  std::size_t exponent;  // smallest k with M^k > 0, 0 when not primitive
};

Primitivity is_primitive(const NonnegativeKernel& m);

inline std::size_t wielandt_bound(std::size_t n) { return n * n - 2 * n + 2; }

}  // namespace bridgeflow
