#include "bridgeflow/simd/kernels.hpp"

#include <algorithm>
#include <limits>

namespace bridgeflow::simd {
namespace {

void matvec(const double* m, std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = m + i * n;
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += row[j] * x[j];
    y[i] = acc;
  }
}

void matvec_transposed(const double* m, std::size_t n, const double* x, double* y) {
  std::fill(y, y + n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = m + i * n;
    for (std::size_t j = 0; j < n; ++j) y[j] += row[j] * xi;
  }
}

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

RatioBounds ratio_bounds(const double* x, const double* y, std::size_t n) {
  RatioBounds b{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < n; ++i) {
    const double r = x[i] / y[i];
    b.min = std::min(b.min, r);
    b.max = std::max(b.max, r);
  }
  return b;
}

double max_element(const double* x, std::size_t n) {
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) best = std::max(best, x[i]);
  return best;
}

double min_element(const double* x, std::size_t n) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) best = std::min(best, x[i]);
  return best;
}

void scale(double* x, double c, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= c;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", matvec, matvec_transposed, dot,
                                 ratio_bounds, max_element, min_element, scale};
  return table;
}

}  // namespace bridgeflow::simd
