#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>

namespace convpow::kernels {

using cplx = std::complex<double>;

/// Vectorizable inner loops shared by the convolution, spectral-grid and
/// quadrature code. Every entry point has a scalar reference implementation
/// and, on x86-64, an AVX2+FMA variant; the two are equivalence-tested and
/// selected once at startup.
struct Impl {
  const char* name;

  /// dst[i] = a[i] * b[i]
  void (*cmul)(cplx* dst, const cplx* a, const cplx* b, std::size_t n);
  /// dst[i] += s * x[i]
  void (*caxpy)(cplx* dst, cplx s, const cplx* x, std::size_t n);
  /// dst[i] = |a[i]|^2
  void (*abs2)(double* dst, const cplx* a, std::size_t n);
  /// max_i |a[i]|^2  (0 for empty input)
  double (*max_abs2)(const cplx* a, std::size_t n);
  /// max_i |a[i] - b[i]|^2
  double (*max_abs2_diff)(const cplx* a, const cplx* b, std::size_t n);
  /// Blocked sum with a fixed accumulation order independent of length.
  cplx (*sum)(const cplx* a, std::size_t n);
  /// dst[i] = a[i]^e by binary exponentiation, element-wise. e = 0 gives 1.
  void (*pow_u64)(cplx* dst, const cplx* a, std::uint64_t e, std::size_t n);
};

const Impl& scalar_impl();

#if defined(CONVPOW_HAVE_AVX2)
const Impl& avx2_impl();
bool avx2_supported();
#endif

/// Implementation chosen from CPU features, overridable with
/// CONVPOW_SIMD=scalar|avx2|auto (bad values fall back to auto).
const Impl& active();

inline void cmul(cplx* dst, const cplx* a, const cplx* b, std::size_t n) {
  active().cmul(dst, a, b, n);
}
inline void caxpy(cplx* dst, cplx s, const cplx* x, std::size_t n) {
  active().caxpy(dst, s, x, n);
}
inline void abs2(double* dst, const cplx* a, std::size_t n) {
  active().abs2(dst, a, n);
}
inline double max_abs2(const cplx* a, std::size_t n) {
  return active().max_abs2(a, n);
}
inline double max_abs2_diff(const cplx* a, const cplx* b, std::size_t n) {
  return active().max_abs2_diff(a, b, n);
}
inline cplx sum(const cplx* a, std::size_t n) { return active().sum(a, n); }
inline void pow_u64(cplx* dst, const cplx* a, std::uint64_t e, std::size_t n) {
  active().pow_u64(dst, a, e, n);
}

}  // namespace convpow::kernels
