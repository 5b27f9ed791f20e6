// SPDX-License-Identifier: Apache-2.0
//
// Dense double-precision inner loops used by the feature extractor and the
// tensor engine. Each ISA provides the same table of kernels; the active one
// is picked once at startup from CPU features and can be overridden with the
// ACAP_SIMD environment variable (scalar, avx2, neon) or set_backend().
#pragma once

#include <cstddef>
#include <span>
#include <string_view>
#include <vector>

namespace acap::simd {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  const char* name;
  /// sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  /// y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  /// y[r] = sum_c a[r * cols + c] * x[c] for r < rows (a is row-major)
  void (*gemv)(const double* a, std::size_t rows, std::size_t cols,
               const double* x, double* y);
};

const KernelTable& scalar_kernels();
#if defined(ACAP_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif
#if defined(ACAP_HAVE_NEON)
const KernelTable& neon_kernels();
#endif

bool supported(Backend backend);
std::vector<Backend> available_backends();
std::string_view backend_name(Backend backend);

/// Kernel table for a specific backend; throws ConfigError if this CPU or
/// build cannot run it.
const KernelTable& kernels_for(Backend backend);

/// Currently active kernel table.
const KernelTable& kernels();
Backend active_backend();
void set_backend(Backend backend);

/// Restores a backend on scope exit. Used by equivalence tests.
class ScopedBackend {
 public:
  explicit ScopedBackend(Backend backend) : previous_(active_backend()) {
    set_backend(backend);
  }
  ~ScopedBackend() { set_backend(previous_); }
  ScopedBackend(const ScopedBackend&) = delete;
  ScopedBackend& operator=(const ScopedBackend&) = delete;

 private:
  Backend previous_;
};

inline double dot(std::span<const double> a, std::span<const double> b) {
  return kernels().dot(a.data(), b.data(), a.size());
}

inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  kernels().axpy(alpha, x.data(), y.data(), x.size());
}

}  // namespace acap::simd
