#include "bridgeflow/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bridgeflow/errors.hpp"
#include "bridgeflow/simd/kernels.hpp"

namespace bridgeflow {

double hilbert_distance(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DomainError("hilbert_distance: length mismatch");
  if (x.empty()) throw DomainError("hilbert_distance: empty vectors");
  const auto& k = simd::active_kernels();
  if (!(k.min_element(x.data(), x.size()) > 0.0) || !(k.min_element(y.data(), y.size()) > 0.0))
    throw DomainError("hilbert_distance: vectors must be strictly positive");
  const auto b = k.ratio_bounds(x.data(), y.data(), x.size());
  return std::log(b.max / b.min);
}

namespace {

// Normalized power iteration; returns the iterate and the sweep count.
Vector dominant_vector(const Matrix& m, bool transposed, const PerronOptions& options, std::size_t& sweeps) {
  const auto& k = simd::active_kernels();
  const std::size_t n = m.rows();
  Vector x(n, 1.0);
  Vector y(n);
  double gap = std::numeric_limits<double>::infinity();
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    if (transposed)
      k.matvec_transposed(m.data(), n, x.data(), y.data());
    else
      k.matvec(m.data(), n, x.data(), y.data());
    k.scale(y.data(), 1.0 / k.max_element(y.data(), n), n);
    gap = hilbert_distance(x, y);
    x.swap(y);
    if (gap < options.tol) {
      sweeps = it;
      return x;
    }
  }
  throw ConvergenceError("power iteration did not converge in " + std::to_string(options.max_iter) +
                             " iterations (last Hilbert gap " + std::to_string(gap) + ")",
                         gap);
}

}  // namespace

PerronData perron(const NonnegativeKernel& m, PerronOptions options) {
  if (!is_primitive(m).primitive) throw PreconditionError("Perron data requires a primitive kernel");
  const auto& k = simd::active_kernels();
  const std::size_t n = m.size();

  PerronData out;
  std::size_t right_sweeps = 0;
  std::size_t left_sweeps = 0;
  out.right = dominant_vector(m.matrix(), false, options, right_sweeps);
  out.left = dominant_vector(m.matrix(), true, options, left_sweeps);
  out.iterations = std::max(right_sweeps, left_sweeps);

  k.scale(out.right.data(), 1.0 / k.max_element(out.right.data(), n), n);
  const Vector mv = product(m.matrix(), out.right);
  const double uv = k.dot(out.left.data(), out.right.data(), n);
  out.lambda = k.dot(out.left.data(), mv.data(), n) / uv;
  k.scale(out.left.data(), 1.0 / uv, n);
  return out;
}

StationaryWalk rb_walk(const NonnegativeKernel& m, PerronOptions options) {
  const PerronData p = perron(m, options);
  const std::size_t n = m.size();
  StationaryWalk w;
  w.lambda = p.lambda;
  w.kernel = Matrix(n, n);
  w.stationary.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double denom = p.lambda * p.right[i];
    for (std::size_t j = 0; j < n; ++j) w.kernel(i, j) = m(i, j) * p.right[j] / denom;
    w.stationary[i] = p.left[i] * p.right[i];
  }
  return w;
}

StationaryWalk homogeneous_bridge(const NonnegativeKernel& m, PerronOptions options) {
  return rb_walk(m, options);
}

EntropyEnergyRates entropy_energy_rates(const StationaryWalk& w, const Matrix& energies) {
  const std::size_t n = w.kernel.rows();
  if (energies.rows() != n || energies.cols() != n) throw DomainError("energy matrix size mismatch");
  EntropyEnergyRates r{0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    double u = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double p = w.kernel(i, j);
      if (p <= 0.0) continue;
      if (!std::isfinite(energies(i, j)))
        throw DomainError("walk uses transition (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                          ") whose energy is infinite");
      s -= p * std::log(p);
      u += p * energies(i, j);
    }
    r.entropy += w.stationary[i] * s;
    r.energy += w.stationary[i] * u;
  }
  return r;
}

}  // namespace bridgeflow
