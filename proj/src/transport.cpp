#include "bridgeflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>

#include "bridgeflow/errors.hpp"

namespace bridgeflow {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTol = 1e-12;

bool same_cost(double a, double b) {
  if (std::isinf(a) || std::isinf(b)) return a == b;
  return std::abs(a - b) <= kTieTol * std::max(1.0, std::max(std::abs(a), std::abs(b)));
}
}  // namespace

PriorMode parse_prior_mode(std::string_view name) {
  if (name == "adjacency") return PriorMode::adjacency;
  if (name == "weighted") return PriorMode::weighted;
  if (name == "teleport") return PriorMode::teleport;
  throw ValidationError("unknown prior mode '" + std::string(name) + "'");
}

std::string_view to_string(PriorMode mode) {
  switch (mode) {
    case PriorMode::adjacency: return "adjacency";
    case PriorMode::weighted: return "weighted";
    case PriorMode::teleport: return "teleport";
  }
  return "?";
}

NonnegativeKernel prior_kernel(const Graph& g, const PriorSpec& spec) {
  switch (spec.mode) {
    case PriorMode::adjacency: return adjacency_kernel(g);
    case PriorMode::weighted: return weighted_kernel(g);
    case PriorMode::teleport: return teleport_kernel(g, spec.teleport_energy);
  }
  throw ValidationError("unknown prior mode");
}

Matrix prior_energies(const Graph& g, const PriorSpec& spec) {
  const std::size_t n = g.size();
  switch (spec.mode) {
    case PriorMode::adjacency: {
      Matrix u(n, n, kInf);
      for (const Edge& e : g.edges()) u(e.from, e.to) = 0.0;
      return u;
    }
    case PriorMode::weighted:
      if (!g.has_costs()) throw PreconditionError("weighted prior needs edge weights or energies");
      return edge_energy_matrix(g);
    case PriorMode::teleport: {
      Matrix u = edge_energy_matrix(g);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
          if (!g.has_edge(i, j)) u(i, j) = spec.teleport_energy;
      return u;
    }
  }
  throw ValidationError("unknown prior mode");
}

double path_cost(const Matrix& energies, std::span<const Node> path) {
  double c = 0.0;
  for (std::size_t t = 0; t + 1 < path.size(); ++t) c += energies(path[t], path[t + 1]);
  return c;
}

// ---------------------------------------------------------------------------
// Ensembles

PathEnsemble enumerate_ensemble(const TransitionSchedule& ts, const Matrix& energies, std::size_t max_paths) {
  const std::size_t n = ts.size();
  const std::size_t N = ts.horizon();
  PathEnsemble out;
  Path path(N + 1);

  auto dfs = [&](auto&& self, std::size_t t, double prob) -> void {
    if (t == N) {
      if (out.paths.size() >= max_paths)
        throw CapacityError("more than " + std::to_string(max_paths) + " paths carry mass");
      out.paths.push_back(path);
      out.probs.push_back(prob);
      out.costs.push_back(path_cost(energies, path));
      return;
    }
    const Matrix& pi = ts.steps[t];
    for (Node j = 0; j < n; ++j) {
      const double p = pi(path[t], j);
      if (p <= 0.0) continue;
      path[t + 1] = j;
      self(self, t + 1, prob * p);
    }
  };
  for (Node i = 0; i < n; ++i) {
    if (ts.nu0[i] <= 0.0) continue;
    path[0] = i;
    dfs(dfs, 0, ts.nu0[i]);
  }
  return out;
}

RobustPlan robust_plan(const Graph& g, Node source, Node sink, std::size_t steps, const PlanOptions& options) {
  if (source >= g.size() || sink >= g.size()) throw ValidationError("source/sink outside 1.." + std::to_string(g.size()));
  if (steps == 0) throw DomainError("number of steps must be >= 1");
  Graph work = options.add_sink_loop ? ensure_sink_loop(g, sink) : g;
  NonnegativeKernel kernel = prior_kernel(work, options.prior);
  Matrix energies = prior_energies(work, options.prior);

  const Feasibility feas = feasibility(kernel, source, sink, steps);
  if (!feas.feasible)
    throw FeasibilityError("(M^N)_{" + std::to_string(label_of(source)) + "," + std::to_string(label_of(sink)) +
                           "} = 0: no path of length " + std::to_string(steps) + " joins the source and the sink");

  const std::size_t n = work.size();
  BridgeProblem problem{kernel, steps, delta_distribution(n, source), delta_distribution(n, sink)};
  BridgeSolution bridge = solve_and_schedule(problem, options.solve);

  Matrix support(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) support(i, j) = kernel.has_support(i, j) ? 1.0 : 0.0;
  const double path_count = feasibility(NonnegativeKernel(std::move(support)), source, sink, steps).path_weight;

  std::optional<PathEnsemble> ensemble;
  if (path_count <= static_cast<double>(options.max_enumerated_paths))
    ensemble = enumerate_ensemble(bridge.schedule, energies, options.max_enumerated_paths);

  return RobustPlan{std::move(work), std::move(kernel), std::move(energies), source, sink, steps, feas,
                    std::move(bridge), std::move(ensemble), options.prior};
}

PathEnsemble oracle_bridge(const NonnegativeKernel& m, Node source, Node sink, std::size_t steps, const Matrix* energies) {
  const std::size_t n = m.size();
  if (n > kOracleMaxNodes || steps > kOracleMaxSteps)
    throw CapacityError("oracle enumeration is limited to n <= " + std::to_string(kOracleMaxNodes) +
                        " and N <= " + std::to_string(kOracleMaxSteps));
  if (source >= n || sink >= n) throw ValidationError("source/sink outside the kernel");
  if (steps == 0) throw DomainError("number of steps must be >= 1");

  // can_finish[r][x]: x reaches the sink in exactly r steps. Prunes the DFS
  // without touching path weights.
  std::vector<std::vector<bool>> can_finish(steps + 1, std::vector<bool>(n, false));
  can_finish[0][sink] = true;
  for (std::size_t r = 1; r <= steps; ++r)
    for (Node x = 0; x < n; ++x)
      for (Node y = 0; y < n && !can_finish[r][x]; ++y) can_finish[r][x] = m.has_support(x, y) && can_finish[r - 1][y];

  const Matrix own_energies = energies ? Matrix() : m.energies();
  const Matrix& u = energies ? *energies : own_energies;

  PathEnsemble out;
  std::vector<double> weights;
  Path path(steps + 1);
  path[0] = source;
  auto dfs = [&](auto&& self, std::size_t t, double w) -> void {
    if (t == steps) {
      out.paths.push_back(path);
      weights.push_back(w);
      out.costs.push_back(path_cost(u, path));
      return;
    }
    for (Node y = 0; y < n; ++y) {
      if (!m.has_support(path[t], y) || !can_finish[steps - t - 1][y]) continue;
      path[t + 1] = y;
      self(self, t + 1, w * m(path[t], y));
    }
  };
  if (can_finish[steps][source]) dfs(dfs, 0, 1.0);

  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  out.probs.reserve(weights.size());
  for (double w : weights) out.probs.push_back(w / total);
  return out;
}

// ---------------------------------------------------------------------------
// Min-cost paths

CostMatrix cost_matrix(const Matrix& energies, std::size_t steps) {
  const std::size_t n = energies.rows();
  if (!energies.square()) throw DomainError("energy matrix must be square");
  CostMatrix c;
  c.energies = energies;
  c.steps = steps;
  Matrix layer(n, n, kInf);
  for (std::size_t i = 0; i < n; ++i) layer(i, i) = 0.0;
  c.cost = layer;
  c.layers.push_back(layer);
  for (std::size_t k = 1; k <= steps; ++k) {
    Matrix next(n, n, kInf);
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < n; ++y) {
        const double head = layer(x, y);
        if (std::isinf(head)) continue;
        for (std::size_t z = 0; z < n; ++z) next(x, z) = std::min(next(x, z), head + energies(y, z));
      }
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t z = 0; z < n; ++z) c.cost(x, z) = std::min(c.cost(x, z), next(x, z));
    c.layers.push_back(next);
    layer = std::move(next);
  }
  return c;
}

std::vector<Path> minimizing_paths(const CostMatrix& c, Node from, Node to, std::size_t max_paths) {
  const std::size_t n = c.cost.rows();
  const double best = c.cost(from, to);
  if (std::isinf(best)) return {};

  std::set<Path> found;
  Path reversed;
  // Walk back from `node` using exactly k real edges, keeping every
  // predecessor that attains the layer value.
  auto back = [&](auto&& self, std::size_t k, Node node) -> void {
    reversed.push_back(node);
    if (k == 0) {
      if (node == from) {
        Path p(reversed.rbegin(), reversed.rend());
        p.resize(c.steps + 1, to);
        found.insert(std::move(p));
        if (found.size() > max_paths) throw CapacityError("too many minimizing paths");
      }
    } else {
      const double target = c.layers[k](from, node);
      for (Node prev = 0; prev < n; ++prev) {
        const double via = c.layers[k - 1](from, prev) + c.energies(prev, node);
        if (!std::isinf(via) && same_cost(via, target)) self(self, k - 1, prev);
      }
    }
    reversed.pop_back();
  };
  for (std::size_t k = 0; k <= c.steps; ++k)
    if (same_cost(c.layers[k](from, to), best)) back(back, k, to);
  return {found.begin(), found.end()};
}

MinCostPaths min_cost_paths(const Matrix& energies, Node source, Node sink, std::size_t steps) {
  if (source >= energies.rows() || sink >= energies.rows()) throw ValidationError("source/sink outside the graph");
  MinCostPaths out{cost_matrix(energies, steps), 0.0, {}};
  out.cost = out.costs.cost(source, sink);
  out.paths = minimizing_paths(out.costs, source, sink);
  return out;
}

MinCostPaths min_cost_paths(const Graph& g, Node source, Node sink, std::size_t steps) {
  return min_cost_paths(edge_energy_matrix(g), source, sink, steps);
}

// ---------------------------------------------------------------------------
// OMT: successive shortest paths on source -> rows -> cols -> sink.

namespace {

struct Arc {
  std::size_t to;
  double cap;
  double cost;
  std::size_t rev;
};

class FlowNetwork {
 public:
  explicit FlowNetwork(std::size_t nodes) : adj_(nodes) {}

  std::size_t add(std::size_t from, std::size_t to, double cap, double cost) {
    adj_[from].push_back({to, cap, cost, adj_[to].size()});
    adj_[to].push_back({from, 0.0, -cost, adj_[from].size() - 1});
    return adj_[from].size() - 1;
  }

  std::vector<std::vector<Arc>>& arcs() { return adj_; }

 private:
  std::vector<std::vector<Arc>> adj_;
};

constexpr double kFlowEps = 1e-15;

}  // namespace

OmtCoupling omt_plan(const Matrix& cost, const Distribution& nu0, const Distribution& nuN) {
  const std::size_t n = cost.rows();
  if (!cost.square() || nu0.size() != n || nuN.size() != n) throw DomainError("OMT dimension mismatch");
  check_probability(nu0);
  check_probability(nuN);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (cost(i, j) < 0.0) throw DomainError("OMT costs must be >= 0");

  const std::size_t S = 2 * n;
  const std::size_t T = 2 * n + 1;
  FlowNetwork net(2 * n + 2);
  std::vector<std::vector<std::size_t>> pair_arc(n, std::vector<std::size_t>(n, SIZE_MAX));
  for (std::size_t i = 0; i < n; ++i) {
    if (nu0[i] > 0.0) net.add(S, i, nu0[i], 0.0);
    if (nuN[i] > 0.0) net.add(n + i, T, nuN[i], 0.0);
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (nu0[i] <= 0.0) continue;
    for (std::size_t j = 0; j < n; ++j)
      if (nuN[j] > 0.0 && std::isfinite(cost(i, j))) pair_arc[i][j] = net.add(i, n + j, 2.0, cost(i, j));
  }

  auto& adj = net.arcs();
  const std::size_t V = adj.size();
  std::vector<double> h(V, 0.0);
  const double total = std::min(std::accumulate(nu0.begin(), nu0.end(), 0.0), std::accumulate(nuN.begin(), nuN.end(), 0.0));
  double pushed = 0.0;
  OmtCoupling out;

  while (pushed < total - kFlowEps) {
    if (out.augmentations > 4 * n * n + 16) throw ConvergenceError("min-cost flow did not terminate", total - pushed);
    std::vector<double> dist(V, kInf);
    std::vector<std::size_t> prev_node(V, SIZE_MAX), prev_arc(V, SIZE_MAX);
    std::vector<bool> done(V, false);
    dist[S] = 0.0;
    for (;;) {
      std::size_t u = SIZE_MAX;
      for (std::size_t v = 0; v < V; ++v)
        if (!done[v] && dist[v] < kInf && (u == SIZE_MAX || dist[v] < dist[u])) u = v;
      if (u == SIZE_MAX) break;
      done[u] = true;
      for (std::size_t a = 0; a < adj[u].size(); ++a) {
        const Arc& arc = adj[u][a];
        if (arc.cap <= kFlowEps) continue;
        const double reduced = std::max(0.0, arc.cost + h[u] - h[arc.to]);
        if (dist[u] + reduced < dist[arc.to]) {
          dist[arc.to] = dist[u] + reduced;
          prev_node[arc.to] = u;
          prev_arc[arc.to] = a;
        }
      }
    }
    if (std::isinf(dist[T])) {
      if (pushed >= total - 1e-12) break;
      throw FeasibilityError("no finite-cost coupling of the two marginals exists");
    }
    for (std::size_t v = 0; v < V; ++v) h[v] += std::min(dist[v], dist[T]);

    double bottleneck = total - pushed;
    for (std::size_t v = T; v != S; v = prev_node[v]) bottleneck = std::min(bottleneck, adj[prev_node[v]][prev_arc[v]].cap);
    for (std::size_t v = T; v != S; v = prev_node[v]) {
      Arc& arc = adj[prev_node[v]][prev_arc[v]];
      arc.cap -= bottleneck;
      adj[v][arc.rev].cap += bottleneck;
    }
    pushed += bottleneck;
    ++out.augmentations;
  }

  out.q = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (pair_arc[i][j] == SIZE_MAX) continue;
      const Arc& arc = adj[i][pair_arc[i][j]];
      const double flow = adj[n + j][arc.rev].cap;
      if (flow > kFlowEps) {
        out.q(i, j) = flow;
        out.total_cost += flow * cost(i, j);
      }
    }

  // Certificate: shortest distances in the residual bipartite graph (Bellman
  // -Ford from a virtual root) give duals alpha_i = -d_i, beta_j = d_j'.
  std::vector<double> d(2 * n, 0.0);
  for (std::size_t round = 0; round < 2 * n + 1; ++round) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (pair_arc[i][j] == SIZE_MAX) continue;
        if (d[i] + cost(i, j) < d[n + j] - 1e-15) {
          d[n + j] = d[i] + cost(i, j);
          changed = true;
        }
        if (out.q(i, j) > 0.0 && d[n + j] - cost(i, j) < d[i] - 1e-15) {
          d[i] = d[n + j] - cost(i, j);
          changed = true;
        }
      }
    if (!changed) break;
  }
  out.row_potential.resize(n);
  out.col_potential.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.row_potential[i] = -d[i];
    out.col_potential[i] = d[n + i];
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (pair_arc[i][j] == SIZE_MAX) continue;
      const double slack = cost(i, j) - out.row_potential[i] - out.col_potential[j];
      out.slackness_residual = std::max(out.slackness_residual, std::max(0.0, -slack));
      if (out.q(i, j) > 0.0) out.slackness_residual = std::max(out.slackness_residual, std::abs(slack));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Comparison

Comparison compare(const PathEnsemble& bridge, const MinCostPaths& mc, const OmtCoupling& omt) {
  Comparison out;
  out.min_cost = mc.cost;
  out.min_cost_path_count = mc.paths.size();

  std::vector<std::size_t> order(bridge.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return bridge.costs[a] < bridge.costs[b]; });
  for (std::size_t k : order) {
    if (bridge.probs[k] <= 0.0) continue;
    ++out.bridge_paths;
    const double p = bridge.probs[k];
    if (out.levels.empty() || !same_cost(out.levels.back().cost, bridge.costs[k])) {
      out.levels.push_back({bridge.costs[k], 0, p, p, 0.0});
    }
    CostLevel& level = out.levels.back();
    ++level.path_count;
    level.min_probability = std::min(level.min_probability, p);
    level.max_probability = std::max(level.max_probability, p);
    level.total_probability += p;
  }
  for (std::size_t l = 0; l < out.levels.size(); ++l) {
    out.max_equal_cost_spread = std::max(out.max_equal_cost_spread, out.levels[l].max_probability - out.levels[l].min_probability);
    if (l > 0 && !(out.levels[l].max_probability < out.levels[l - 1].min_probability)) out.probability_decreasing_in_cost = false;
  }

  // p = K exp(-cost) with one K for the whole ensemble.
  double kmin = kInf;
  double kmax = 0.0;
  for (std::size_t k = 0; k < bridge.size(); ++k) {
    if (bridge.probs[k] <= 0.0) continue;
    const double scaled = bridge.probs[k] * std::exp(bridge.costs[k] - (out.levels.empty() ? 0.0 : out.levels.front().cost));
    kmin = std::min(kmin, scaled);
    kmax = std::max(kmax, scaled);
  }
  out.boltzmann_residual = kmax > 0.0 ? (kmax - kmin) / kmax : 0.0;

  const std::set<Path> minimizers(mc.paths.begin(), mc.paths.end());
  double entropy = 0.0;
  for (std::size_t k = 0; k < bridge.size(); ++k) {
    const double p = bridge.probs[k];
    if (p <= 0.0) continue;
    entropy -= p * std::log(p);
    if (minimizers.count(bridge.paths[k])) out.min_cost_mass += p;
  }
  out.effective_support = std::exp(entropy);

  for (std::size_t i = 0; i < omt.q.rows(); ++i)
    for (std::size_t j = 0; j < omt.q.cols(); ++j)
      if (omt.q(i, j) > 0.0) ++out.omt_paths;
  return out;
}

double virtual_edge_mass(const Graph& g, const TransitionSchedule& ts, const MarginalFlow& flow) {
  const std::size_t n = g.size();
  double mass = 0.0;
  for (std::size_t t = 0; t < ts.horizon(); ++t)
    for (std::size_t i = 0; i < n; ++i) {
      const double here = flow.rows(t, i);
      if (here <= 0.0) continue;
      for (std::size_t j = 0; j < n; ++j)
        if (!g.has_edge(i, j)) mass += here * ts.steps[t](i, j);
    }
  return mass;
}

}  // namespace bridgeflow
