#pragma once

// Discrete Schrodinger bridges over a nonnegative prior kernel: the
// potentials solving the forward/backward system with product boundary
// conditions, the resulting time-varying transition schedule, and the flow
// of one-time marginals.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "bridgeflow/graph.hpp"
#include "bridgeflow/matrix.hpp"

namespace bridgeflow {

using Distribution = Vector;
using Path = std::vector<Node>;

Distribution delta_distribution(std::size_t n, Node at);
Distribution uniform_distribution(std::size_t n);
// Throws DomainError unless entries are >= 0 and sum to 1 within tol.
void check_probability(std::span<const double> d, double tol = 1e-12);

struct BridgeProblem {
  NonnegativeKernel prior;
  std::size_t horizon;  // N >= 1
  Distribution nu0;
  Distribution nuN;
  // Strictly positive initial weights of the prior; empty means uniform.
  Distribution mu0 = {};
};

struct SolveOptions {
  double tol = 1e-12;  // Hilbert gap between successive phihat(0) iterates
  std::size_t max_iter = 10000;
};

// phi(t,i) = phi_scaled(t,i) * exp(phi_log_scale[t]); likewise for phihat.
// The per-time log scales keep the sweeps free of under/overflow for large
// lambda^N while the recursions stay exact in the scaled representation.
struct PotentialSchedule {
  Matrix phi_scaled;     // (N+1) x n
  Matrix phihat_scaled;  // (N+1) x n
  Vector phi_log_scale;
  Vector phihat_log_scale;

  std::size_t iterations = 0;
  std::vector<double> gap_history;  // Hilbert gap after each iteration

  std::size_t horizon() const { return phi_scaled.rows() - 1; }
  std::size_t size() const { return phi_scaled.cols(); }
  double phi(std::size_t t, Node i) const;
  double phihat(std::size_t t, Node i) const;

  // (c phi, phihat / c): the same bridge.
  PotentialSchedule rescaled(double c) const;
};

// Iterates phihat(0) -> phihat(N) -> phi(N) -> phi(0) -> phihat(0) until the
// Hilbert gap on supp(nu0) drops below tol. Throws FeasibilityError when
// some boundary state cannot be matched within N steps and ConvergenceError
// when max_iter is exhausted.
PotentialSchedule solve_bridge(const BridgeProblem& problem, SolveOptions options = {});

struct TransitionSchedule {
  Distribution nu0;
  std::vector<Matrix> steps;  // Pi(0) .. Pi(N-1)

  std::size_t horizon() const { return steps.size(); }
  std::size_t size() const { return nu0.size(); }
};

// pi_ij(t) = m_ij phi(t+1,j) / phi(t,i), with 0/0 = 0.
TransitionSchedule transition_schedule(const PotentialSchedule& s, const NonnegativeKernel& m,
                                       const Distribution& nu0);

// Row t is nu_t; nu_{t+1} = Pi(t)^T nu_t.
struct MarginalFlow {
  Matrix rows;
};

MarginalFlow marginal_flow(const TransitionSchedule& ts);

// nu0(x0) pi_{x0 x1}(0) ... pi_{x_{N-1} x_N}(N-1). Throws DomainError on a
// length mismatch or an out-of-range node.
double path_probability(const TransitionSchedule& ts, std::span<const Node> path);

// sum p log(p/q) with 0 log 0 = 0; +inf when supp(p) escapes supp(q).
double relative_entropy(const std::map<Path, double>& p, const std::map<Path, double>& q);

// Convenience: solve, build the schedule and the flow in one go.
struct BridgeSolution {
  PotentialSchedule potentials;
  TransitionSchedule schedule;
  MarginalFlow flow;
};

BridgeSolution solve_and_schedule(const BridgeProblem& problem, SolveOptions options = {});

}  // namespace bridgeflow
