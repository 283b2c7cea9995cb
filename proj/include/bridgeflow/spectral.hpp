#pragma once

// Perron-Frobenius data of primitive kernels and the walks built from it.

#include <cstddef>
#include <span>

#include "bridgeflow/graph.hpp"
#include "bridgeflow/matrix.hpp"

namespace bridgeflow {

struct PerronData {
  double lambda = 0.0;
  Vector right;  // M right = lambda right, max component 1 before the joint rescale
  Vector left;   // M^T left = lambda left, <left, right> = 1
  std::size_t iterations = 0;
};

struct PerronOptions {
  double tol = 1e-14;  // Hilbert distance between successive iterates
  std::size_t max_iter = 100000;
};

// Power iteration from the all-ones vector. Throws PreconditionError for
// non-primitive kernels and ConvergenceError when max_iter is exhausted.
PerronData perron(const NonnegativeKernel& m, PerronOptions options = {});

// log(max_i(x_i/y_i) / min_i(x_i/y_i)). Throws DomainError unless both
// vectors are strictly positive and of equal length.
double hilbert_distance(std::span<const double> x, std::span<const double> y);

// Row-stochastic kernel together with an invariant probability vector.
struct StationaryWalk {
  Matrix kernel;
  Vector stationary;
  double lambda = 0.0;
};

// r_ij = m_ij v_j / (lambda v_i), stationary u_i v_i. For a 0/1 adjacency
// kernel this is the maximal-entropy walk that makes equal-length paths
// between two nodes equiprobable.
StationaryWalk rb_walk(const NonnegativeKernel& m, PerronOptions options = {});

// lambda^{-1} diag(phi)^{-1} M diag(phi) with invariant measure phi o phihat:
// the only marginal whose bridge is time-homogeneous. Same construction as
// rb_walk.
StationaryWalk homogeneous_bridge(const NonnegativeKernel& m, PerronOptions options = {});

struct EntropyEnergyRates {
  double entropy;  // S = -sum_i nu_i sum_j r_ij log r_ij
  double energy;   // Ubar = sum_i nu_i sum_j r_ij U_ij
};

// Throws DomainError if the walk puts mass on an infinite-energy transition.
EntropyEnergyRates entropy_energy_rates(const StationaryWalk& w, const Matrix& energies);

}  // namespace bridgeflow
