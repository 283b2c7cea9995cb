// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include "bridgeflow/simd/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <limits>

namespace bridgeflow::simd {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  return std::max(_mm_cvtsd_f64(lo), _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo)));
}

inline double hmin(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_min_pd(lo, hi);
  return std::min(_mm_cvtsd_f64(lo), _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo)));
}

double dot(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
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
    const __m256d s = _mm256_set1_pd(xi);
    std::size_t j = 0;
    for (; j + 4 <= n; j += 4) {
      __m256d acc = _mm256_loadu_pd(y + j);
      _mm256_storeu_pd(y + j, _mm256_fmadd_pd(_mm256_loadu_pd(row + j), s, acc));
    }
    for (; j < n; ++j) y[j] += row[j] * xi;
  }
}

RatioBounds ratio_bounds(const double* x, const double* y, std::size_t n) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  __m256d lo = _mm256_set1_pd(inf);
  __m256d hi = _mm256_set1_pd(-inf);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_div_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    lo = _mm256_min_pd(lo, r);
    hi = _mm256_max_pd(hi, r);
  }
  RatioBounds b{hmin(lo), hmax(hi)};
  for (; i < n; ++i) {
    const double r = x[i] / y[i];
    b.min = std::min(b.min, r);
    b.max = std::max(b.max, r);
  }
  return b;
}

double max_element(const double* x, std::size_t n) {
  __m256d hi = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) hi = _mm256_max_pd(hi, _mm256_loadu_pd(x + i));
  double best = hmax(hi);
  for (; i < n; ++i) best = std::max(best, x[i]);
  return best;
}

double min_element(const double* x, std::size_t n) {
  __m256d lo = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) lo = _mm256_min_pd(lo, _mm256_loadu_pd(x + i));
  double best = hmin(lo);
  for (; i < n; ++i) best = std::min(best, x[i]);
  return best;
}

void scale(double* x, double c, std::size_t n) {
  const __m256d s = _mm256_set1_pd(c);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), s));
  for (; i < n; ++i) x[i] *= c;
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable table{"avx2", matvec, matvec_transposed, dot,
                                 ratio_bounds, max_element, min_element, scale};
  return table;
}

}  // namespace bridgeflow::simd
