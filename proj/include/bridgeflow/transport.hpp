#pragma once

// Robust source-to-sink transport plans built on Schrodinger bridges, an
// enumeration oracle for them, and the classical optimal-mass-transport
// baseline (min-cost paths plus a transportation LP) they are compared with.

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "bridgeflow/bridge.hpp"
#include "bridgeflow/graph.hpp"
#include "bridgeflow/matrix.hpp"

namespace bridgeflow {

enum class PriorMode { adjacency, weighted, teleport };

PriorMode parse_prior_mode(std::string_view name);
std::string_view to_string(PriorMode mode);

struct PriorSpec {
  PriorMode mode = PriorMode::adjacency;
  double teleport_energy = 8.0;
};

NonnegativeKernel prior_kernel(const Graph& g, const PriorSpec& spec);

// Energies consistent with prior_kernel: 0 on edges in adjacency mode, edge
// energies in weighted mode, plus the teleport energy on non-edges in
// teleport mode; +inf wherever the kernel is zero.
Matrix prior_energies(const Graph& g, const PriorSpec& spec);

struct PathEnsemble {
  std::vector<Path> paths;  // lexicographic order
  std::vector<double> probs;
  std::vector<double> costs;

  std::size_t size() const { return paths.size(); }
  bool empty() const { return paths.empty(); }
};

double path_cost(const Matrix& energies, std::span<const Node> path);

// Every path of positive probability under the schedule, by DFS from
// supp(nu0). Throws CapacityError past max_paths.
PathEnsemble enumerate_ensemble(const TransitionSchedule& ts, const Matrix& energies, std::size_t max_paths);

struct PlanOptions {
  PriorSpec prior;
  bool add_sink_loop = true;
  SolveOptions solve;
  // The path table is skipped when the number of feasible paths exceeds this.
  std::size_t max_enumerated_paths = 200000;
};

struct RobustPlan {
  Graph graph;  // after the optional sink loop
  NonnegativeKernel kernel;
  Matrix energies;
  Node source;
  Node sink;
  std::size_t steps;
  Feasibility feasibility;
  BridgeSolution bridge;
  std::optional<PathEnsemble> ensemble;
  PriorSpec prior;
};

// Bridge from delta(source) to delta(sink) in `steps` steps with the chosen
// prior kernel. Throws FeasibilityError when (M^N)_{source,sink} = 0.
RobustPlan robust_plan(const Graph& g, Node source, Node sink, std::size_t steps, const PlanOptions& options = {});

inline constexpr std::size_t kOracleMaxNodes = 12;
inline constexpr std::size_t kOracleMaxSteps = 8;

// Ground truth for delta marginals: enumerate all length-N source->sink
// paths in the kernel support and weight each by the product of its
// entries. Empty ensemble when no path exists. `energies` defaults to
// -log m.
PathEnsemble oracle_bridge(const NonnegativeKernel& m, Node source, Node sink, std::size_t steps,
                           const Matrix* energies = nullptr);

// End-to-end minimal costs over at most N steps (zero-cost self-loops at
// every node). layers[k](x,y) is the minimal cost of a walk with exactly k
// real edges, which is enough to rebuild every minimizer.
struct CostMatrix {
  Matrix cost;
  std::vector<Matrix> layers;
  Matrix energies;
  std::size_t steps = 0;
};

CostMatrix cost_matrix(const Matrix& energies, std::size_t steps);

// All cost-minimizing walks from `from` to `to`, padded with trailing `to`
// repeats to N+1 nodes, deduplicated and sorted. Throws CapacityError past
// max_paths.
std::vector<Path> minimizing_paths(const CostMatrix& c, Node from, Node to, std::size_t max_paths = 200000);

struct MinCostPaths {
  CostMatrix costs;
  double cost;  // +inf when unreachable
  std::vector<Path> paths;
};

MinCostPaths min_cost_paths(const Matrix& energies, Node source, Node sink, std::size_t steps);
MinCostPaths min_cost_paths(const Graph& g, Node source, Node sink, std::size_t steps);

struct OmtCoupling {
  Matrix q;
  double total_cost = 0.0;
  // Dual potentials: row_potential[i] + col_potential[j] <= C_ij, with
  // equality wherever q_ij > 0.
  Vector row_potential;
  Vector col_potential;
  double slackness_residual = 0.0;
  std::size_t augmentations = 0;
};

// Transportation LP over node pairs, solved exactly by successive shortest
// paths. Throws FeasibilityError when no finite-cost coupling exists.
OmtCoupling omt_plan(const Matrix& cost, const Distribution& nu0, const Distribution& nuN);

struct CostLevel {
  double cost;
  std::size_t path_count;
  double min_probability;
  double max_probability;
  double total_probability;
};

struct Comparison {
  std::vector<CostLevel> levels;  // ascending cost
  bool probability_decreasing_in_cost = true;
  double max_equal_cost_spread = 0.0;  // max over levels of (max - min) probability
  // max relative deviation of p * exp(cost) from its mean over the ensemble
  double boltzmann_residual = 0.0;
  double min_cost = 0.0;
  double min_cost_mass = 0.0;  // bridge mass on OMT-minimizing paths
  std::size_t bridge_paths = 0;
  std::size_t min_cost_path_count = 0;
  std::size_t omt_paths = 0;  // pairs with positive OMT mass, one path each
  double effective_support = 0.0;  // exp of the path-distribution entropy
};

Comparison compare(const PathEnsemble& bridge, const MinCostPaths& mc, const OmtCoupling& omt);

// Mass that crosses non-edges of `g` over the horizon.
double virtual_edge_mass(const Graph& g, const TransitionSchedule& ts, const MarginalFlow& flow);

}  // namespace bridgeflow
