#pragma once

// Shared fixtures and brute-force oracles for the test suites. Nothing here
// calls into the solvers it is used to check.

#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <vector>

#include "bridgeflow/graph.hpp"
#include "bridgeflow/matrix.hpp"

namespace bridgeflow::testing {

// The nine-node example network (node 9 with its self-loop), 0/1 rows.
inline std::vector<std::vector<double>> example_adjacency() {
  return {{0, 1, 1, 1, 0, 0, 0, 0, 0}, {0, 0, 1, 0, 1, 0, 1, 0, 0}, {0, 0, 0, 1, 0, 0, 0, 1, 0},
          {0, 0, 0, 0, 0, 0, 0, 1, 0}, {0, 0, 0, 0, 0, 1, 1, 0, 0}, {0, 0, 0, 0, 0, 0, 0, 0, 1},
          {0, 0, 0, 0, 0, 0, 0, 0, 1}, {0, 0, 0, 0, 0, 0, 0, 0, 1}, {1, 0, 0, 0, 0, 0, 0, 0, 1}};
}

inline std::vector<Edge> edges_of(const std::vector<std::vector<double>>& a) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < a.size(); ++j)
      if (a[i][j] != 0.0) edges.push_back({i, j});
  return edges;
}

inline Graph example_graph() { return Graph(9, edges_of(example_adjacency())); }

// Weight 0.5 on 7->9, 1 elsewhere.
inline Graph example_weighted_graph() {
  auto edges = edges_of(example_adjacency());
  std::vector<double> w;
  for (const Edge& e : edges) w.push_back(e.from == 6 && e.to == 8 ? 0.5 : 1.0);
  return Graph::with_weights(9, edges, w);
}

// Weight 0.7 everywhere, 0.5 on 7->9, 0.9 on the sink loop.
inline Graph example_weighted_graph_2() {
  auto edges = edges_of(example_adjacency());
  std::vector<double> w;
  for (const Edge& e : edges) w.push_back(e.from == 6 && e.to == 8 ? 0.5 : (e.from == 8 && e.to == 8 ? 0.9 : 0.7));
  return Graph::with_weights(9, edges, w);
}

// Example network without 1->4, 2->7 and 9->1 (not strongly connected).
inline Graph example_subgraph() {
  return example_graph().without_edge(0, 3).without_edge(1, 6).without_edge(8, 0);
}

// ---------------------------------------------------------------------------
// Oracles

// Visits every walk x0..xN with x0 = from, xN = to and positive weight.
inline void for_each_walk(const Matrix& m, std::size_t from, std::size_t to, std::size_t steps,
                          const std::function<void(const std::vector<std::size_t>&, double)>& visit) {
  std::vector<std::size_t> path{from};
  std::function<void(double)> rec = [&](double w) {
    if (path.size() == steps + 1) {
      if (path.back() == to) visit(path, w);
      return;
    }
    for (std::size_t y = 0; y < m.rows(); ++y) {
      const double e = m(path.back(), y);
      if (e == 0.0) continue;
      path.push_back(y);
      rec(w * e);
      path.pop_back();
    }
  };
  rec(1.0);
}

inline double dfs_path_count(const Matrix& m, std::size_t from, std::size_t to, std::size_t steps) {
  double count = 0.0;
  for_each_walk(m, from, to, steps, [&](const auto&, double) { count += 1.0; });
  return count;
}

// Smallest k <= bound with M^k entrywise positive, by plain matrix powers.
inline std::size_t direct_primitive_exponent(const Matrix& m) {
  const std::size_t n = m.rows();
  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = m(i, j) > 0 ? 1.0 : 0.0;
  Matrix p = s;
  for (std::size_t k = 1; k <= n * n - 2 * n + 2; ++k) {
    bool all = true;
    for (std::size_t i = 0; i < n && all; ++i)
      for (std::size_t j = 0; j < n && all; ++j) all = p(i, j) > 0;
    if (all) return k;
    p = multiply(p, s);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) p(i, j) = p(i, j) > 0 ? 1.0 : 0.0;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// Generators

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  std::size_t index(std::size_t lo, std::size_t hi) { return std::uniform_int_distribution<std::size_t>(lo, hi)(gen_); }
  bool coin(double p) { return std::bernoulli_distribution(p)(gen_); }

  Matrix positive_matrix(std::size_t n, double lo, double hi) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = uniform(lo, hi);
    return m;
  }

  Vector positive_vector(std::size_t n, double lo = 0.1, double hi = 1.0) {
    Vector v(n);
    for (double& x : v) x = uniform(lo, hi);
    return v;
  }

  Vector probability(std::size_t n) {
    Vector v = positive_vector(n, 0.05, 1.0);
    double s = 0.0;
    for (double x : v) s += x;
    for (double& x : v) x /= s;
    return v;
  }

  // Random 0/1 support with the given density.
  Matrix support(std::size_t n, double density) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m(i, j) = coin(density) ? 1.0 : 0.0;
    return m;
  }

 private:
  std::mt19937_64 gen_;
};

inline Graph graph_from_support(const Matrix& s) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < s.rows(); ++i)
    for (std::size_t j = 0; j < s.cols(); ++j)
      if (s(i, j) > 0) edges.push_back({i, j});
  return Graph(s.rows(), edges);
}

}  // namespace bridgeflow::testing
