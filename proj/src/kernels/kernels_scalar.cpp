#include "convpow/kernels.hpp"

#include <algorithm>

namespace convpow::kernels {
namespace {

void s_cmul(cplx* dst, const cplx* a, const cplx* b, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = a[i] * b[i];
}

void s_caxpy(cplx* dst, cplx s, const cplx* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] += s * x[i];
}

void s_abs2(double* dst, const cplx* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    dst[i] = a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
}

double s_max_abs2(const cplx* a, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
    m = std::max(m, v);
  }
  return m;
}

double s_max_abs2_diff(const cplx* a, const cplx* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double re = a[i].real() - b[i].real();
    const double im = a[i].imag() - b[i].imag();
    m = std::max(m, re * re + im * im);
  }
  return m;
}

// Four interleaved accumulators, combined pairwise. The AVX2 lane uses the
// same structure, which keeps the two implementations within a few ulp of
// each other on long inputs.
cplx s_sum(const cplx* a, std::size_t n) {
  cplx c0 = 0.0, c1 = 0.0, c2 = 0.0, c3 = 0.0;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    c0 += a[i];
    c1 += a[i + 1];
    c2 += a[i + 2];
    c3 += a[i + 3];
  }
  for (; i < n; ++i) c0 += a[i];
  return (c0 + c2) + (c1 + c3);
}

void s_pow_u64(cplx* dst, const cplx* a, std::uint64_t e, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    cplx base = a[i];
    cplx acc = 1.0;
    std::uint64_t k = e;
    while (k) {
      if (k & 1) acc *= base;
      k >>= 1;
      if (k) base *= base;
    }
    dst[i] = acc;
  }
}

}  // namespace

const Impl& scalar_impl() {
  static const Impl impl{
      "scalar", s_cmul, s_caxpy, s_abs2, s_max_abs2, s_max_abs2_diff,
      s_sum,    s_pow_u64,
  };
  return impl;
}

}  // namespace convpow::kernels
