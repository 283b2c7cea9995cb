#pragma once

// Data-parallel inner loops used by the power iteration and the Schrodinger
// sweeps. Each instruction set provides one KernelTable; the scalar table is
// the reference every other variant is tested against.

#include <cstddef>
#include <string_view>

namespace bridgeflow::simd {

struct RatioBounds {
  double min;
  double max;
};

struct KernelTable {
  std::string_view name;

  // y[i] = sum_j m[i*n + j] * x[j]   (m is n x n, row-major)
  void (*matvec)(const double* m, std::size_t n, const double* x, double* y);
  // y[j] = sum_i m[i*n + j] * x[i]
  void (*matvec_transposed)(const double* m, std::size_t n, const double* x, double* y);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // min/max of x[i]/y[i]; y must be nonzero.
  RatioBounds (*ratio_bounds)(const double* x, const double* y, std::size_t n);
  double (*max_element)(const double* x, std::size_t n);
  double (*min_element)(const double* x, std::size_t n);
  void (*scale)(double* x, double c, std::size_t n);
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Best supported table, unless BRIDGEFLOW_SIMD=scalar forces the reference
// path. Resolved once per process.
const KernelTable& active_kernels();

}  // namespace bridgeflow::simd
