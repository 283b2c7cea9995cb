#include <cstdlib>
#include <string_view>

#include "bridgeflow/simd/kernels.hpp"

namespace bridgeflow::simd {

#if defined(BRIDGEFLOW_HAVE_AVX2)
const KernelTable& avx2_table();
#endif
#if defined(BRIDGEFLOW_HAVE_NEON)
const KernelTable& neon_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(BRIDGEFLOW_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_kernels() {
#if defined(BRIDGEFLOW_HAVE_NEON)
  // Advanced SIMD is mandatory on AArch64.
  return &neon_table();
#else
  return nullptr;
#endif
}

const KernelTable& active_kernels() {
  static const KernelTable& table = []() -> const KernelTable& {
    const char* forced = std::getenv("BRIDGEFLOW_SIMD");
    if (forced && std::string_view(forced) == "scalar") return scalar_kernels();
    if (const KernelTable* t = avx2_kernels()) return *t;
    if (const KernelTable* t = neon_kernels()) return *t;
    return scalar_kernels();
  }();
  return table;
}

}  // namespace bridgeflow::simd
