#include "bridgeflow/simd/kernels.hpp"

#include <arm_neon.h>

#include <algorithm>
#include <limits>

namespace bridgeflow::simd {
namespace {

double dot(const double* x, const double* y, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(x + i), vld1q_f64(y + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(x + i + 2), vld1q_f64(y + i + 2));
  }
  double acc = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void matvec(const double* m, std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = dot(m + i * n, x, n);
}

void matvec_transposed(const double* m, std::size_t n, const double* x, double* y) {
  std::fill(y, y + n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* row = m + i * n;
    std::size_t j = 0;
    for (; j + 2 <= n; j += 2) vst1q_f64(y + j, vfmaq_n_f64(vld1q_f64(y + j), vld1q_f64(row + j), xi));
    for (; j < n; ++j) y[j] += row[j] * xi;
  }
}

RatioBounds ratio_bounds(const double* x, const double* y, std::size_t n) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  float64x2_t lo = vdupq_n_f64(inf);
  float64x2_t hi = vdupq_n_f64(-inf);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t r = vdivq_f64(vld1q_f64(x + i), vld1q_f64(y + i));
    lo = vminq_f64(lo, r);
    hi = vmaxq_f64(hi, r);
  }
  RatioBounds b{vminvq_f64(lo), vmaxvq_f64(hi)};
  for (; i < n; ++i) {
    const double r = x[i] / y[i];
    b.min = std::min(b.min, r);
    b.max = std::max(b.max, r);
  }
  return b;
}

double max_element(const double* x, std::size_t n) {
  float64x2_t hi = vdupq_n_f64(-std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) hi = vmaxq_f64(hi, vld1q_f64(x + i));
  double best = vmaxvq_f64(hi);
  for (; i < n; ++i) best = std::max(best, x[i]);
  return best;
}

double min_element(const double* x, std::size_t n) {
  float64x2_t lo = vdupq_n_f64(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) lo = vminq_f64(lo, vld1q_f64(x + i));
  double best = vminvq_f64(lo);
  for (; i < n; ++i) best = std::min(best, x[i]);
  return best;
}

void scale(double* x, double c, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, vmulq_n_f64(vld1q_f64(x + i), c));
  for (; i < n; ++i) x[i] *= c;
}

}  // namespace

const KernelTable& neon_table() {
  static const KernelTable table{"neon", matvec, matvec_transposed, dot,
                                 ratio_bounds, max_element, min_element, scale};
  return table;
}

}  // namespace bridgeflow::simd
