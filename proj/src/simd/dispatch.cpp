// SPDX-License-Identifier: Apache-2.0
#include <atomic>
#include <cstdlib>
#include <string>

#include "acap/errors.hpp"
#include "acap/simd/kernels.hpp"

namespace acap::simd {
namespace {

bool cpu_has_avx2() {
#if defined(ACAP_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

Backend detect_best() {
#if defined(ACAP_HAVE_NEON)
  return Backend::Neon;
#else
  return cpu_has_avx2() ? Backend::Avx2 : Backend::Scalar;
#endif
}

Backend initial_backend() {
  if (const char* env = std::getenv("ACAP_SIMD")) {
    const std::string want(env);
    for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
      if (want == backend_name(b) && supported(b)) return b;
    }
  }
  return detect_best();
}

struct ActiveState {
  std::atomic<Backend> backend;
  std::atomic<const KernelTable*> table;
  ActiveState() {
    const Backend b = initial_backend();
    backend.store(b);
    table.store(&kernels_for(b));
  }
};

ActiveState& state() {
  static ActiveState s;
  return s;
}

}  // namespace

bool supported(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return true;
    case Backend::Avx2:
      return cpu_has_avx2();
    case Backend::Neon:
#if defined(ACAP_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::vector<Backend> available_backends() {
  std::vector<Backend> out;
  for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
    if (supported(b)) out.push_back(b);
  }
  return out;
}

std::string_view backend_name(Backend backend) {
  switch (backend) {
    case Backend::Scalar:
      return "scalar";
    case Backend::Avx2:
      return "avx2";
    case Backend::Neon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& kernels_for(Backend backend) {
  if (!supported(backend)) {
    throw ConfigError("SIMD backend not available: " + std::string(backend_name(backend)));
  }
  switch (backend) {
#if defined(ACAP_HAVE_AVX2)
    case Backend::Avx2:
      return avx2_kernels();
#endif
#if defined(ACAP_HAVE_NEON)
    case Backend::Neon:
      return neon_kernels();
#endif
    default:
      return scalar_kernels();
  }
}

const KernelTable& kernels() { return *state().table.load(std::memory_order_acquire); }

Backend active_backend() { return state().backend.load(); }

void set_backend(Backend backend) {
  const KernelTable& table = kernels_for(backend);
  state().backend.store(backend);
  state().table.store(&table, std::memory_order_release);
}

}  // namespace acap::simd
