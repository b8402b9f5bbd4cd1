// AVX2+FMA variants of the array kernels. Complex values are interleaved
// (re, im), so one 256-bit register carries two complex numbers. This file is
// compiled with -mavx2 -mfma and only reached through the runtime dispatcher.

#include "convpow/kernels.hpp"

#if defined(CONVPOW_HAVE_AVX2)

#include <immintrin.h>

#include <algorithm>

namespace convpow::kernels {
namespace {

// [ar,ai] * [br,bi] for two packed complex numbers.
inline __m256d cmul2(__m256d a, __m256d b) {
  const __m256d b_re = _mm256_movedup_pd(b);
  const __m256d b_im = _mm256_unpackhi_pd(b, b);
  const __m256d a_sw = _mm256_permute_pd(a, 0x5);
  return _mm256_fmaddsub_pd(a, b_re, _mm256_mul_pd(a_sw, b_im));
}

void v_cmul(cplx* dst, const cplx* a, const cplx* b, std::size_t n) {
  std::size_t i = 0;
  auto* d = reinterpret_cast<double*>(dst);
  const auto* pa = reinterpret_cast<const double*>(a);
  const auto* pb = reinterpret_cast<const double*>(b);
  for (; i + 2 <= n; i += 2) {
    const __m256d va = _mm256_loadu_pd(pa + 2 * i);
    const __m256d vb = _mm256_loadu_pd(pb + 2 * i);
    _mm256_storeu_pd(d + 2 * i, cmul2(va, vb));
  }
  for (; i < n; ++i) dst[i] = a[i] * b[i];
}

void v_caxpy(cplx* dst, cplx s, const cplx* x, std::size_t n) {
  const __m256d s_re = _mm256_set1_pd(s.real());
  const __m256d s_im = _mm256_set1_pd(s.imag());
  auto* d = reinterpret_cast<double*>(dst);
  const auto* px = reinterpret_cast<const double*>(x);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d vx = _mm256_loadu_pd(px + 2 * i);
    const __m256d x_sw = _mm256_permute_pd(vx, 0x5);
    const __m256d prod =
        _mm256_fmaddsub_pd(vx, s_re, _mm256_mul_pd(x_sw, s_im));
    const __m256d vd = _mm256_loadu_pd(d + 2 * i);
    _mm256_storeu_pd(d + 2 * i, _mm256_add_pd(vd, prod));
  }
  for (; i < n; ++i) dst[i] += s * x[i];
}

void v_abs2(double* dst, const cplx* a, std::size_t n) {
  const auto* pa = reinterpret_cast<const double*>(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d a0 = _mm256_loadu_pd(pa + 2 * i);
    const __m256d a1 = _mm256_loadu_pd(pa + 2 * i + 4);
    const __m256d h =
        _mm256_hadd_pd(_mm256_mul_pd(a0, a0), _mm256_mul_pd(a1, a1));
    // h = [|a0|^2, |a2|^2, |a1|^2, |a3|^2]; restore element order.
    _mm256_storeu_pd(dst + i, _mm256_permute4x64_pd(h, _MM_SHUFFLE(3, 1, 2, 0)));
  }
  for (; i < n; ++i)
    dst[i] = a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
}

double v_max_abs2(const cplx* a, std::size_t n) {
  const auto* pa = reinterpret_cast<const double*>(a);
  __m256d vmax = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v = _mm256_loadu_pd(pa + 2 * i);
    const __m256d sq = _mm256_mul_pd(v, v);
    vmax = _mm256_max_pd(vmax, _mm256_hadd_pd(sq, sq));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vmax);
  double m = std::max(lanes[0], lanes[2]);
  for (; i < n; ++i) {
    const double v = a[i].real() * a[i].real() + a[i].imag() * a[i].imag();
    m = std::max(m, v);
  }
  return m;
}

double v_max_abs2_diff(const cplx* a, const cplx* b, std::size_t n) {
  const auto* pa = reinterpret_cast<const double*>(a);
  const auto* pb = reinterpret_cast<const double*>(b);
  __m256d vmax = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const __m256d v =
        _mm256_sub_pd(_mm256_loadu_pd(pa + 2 * i), _mm256_loadu_pd(pb + 2 * i));
    const __m256d sq = _mm256_mul_pd(v, v);
    vmax = _mm256_max_pd(vmax, _mm256_hadd_pd(sq, sq));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vmax);
  double m = std::max(lanes[0], lanes[2]);
  for (; i < n; ++i) {
    const double re = a[i].real() - b[i].real();
    const double im = a[i].imag() - b[i].imag();
    m = std::max(m, re * re + im * im);
  }
  return m;
}

cplx v_sum(const cplx* a, std::size_t n) {
  const auto* pa = reinterpret_cast<const double*>(a);
  __m256d acc01 = _mm256_setzero_pd();  // complex slots c0, c1
  __m256d acc23 = _mm256_setzero_pd();  // complex slots c2, c3
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc01 = _mm256_add_pd(acc01, _mm256_loadu_pd(pa + 2 * i));
    acc23 = _mm256_add_pd(acc23, _mm256_loadu_pd(pa + 2 * i + 4));
  }
  alignas(32) double l01[4], l23[4];
  _mm256_store_pd(l01, acc01);
  _mm256_store_pd(l23, acc23);
  cplx c0(l01[0], l01[1]), c1(l01[2], l01[3]);
  cplx c2(l23[0], l23[1]), c3(l23[2], l23[3]);
  for (; i < n; ++i) c0 += a[i];
  return (c0 + c2) + (c1 + c3);
}

void v_pow_u64(cplx* dst, const cplx* a, std::uint64_t e, std::size_t n) {
  const auto* pa = reinterpret_cast<const double*>(a);
  auto* d = reinterpret_cast<double*>(dst);
  const __m256d one = _mm256_setr_pd(1.0, 0.0, 1.0, 0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    __m256d base = _mm256_loadu_pd(pa + 2 * i);
    __m256d acc = one;
    std::uint64_t k = e;
    while (k) {
      if (k & 1) acc = cmul2(acc, base);
      k >>= 1;
      if (k) base = cmul2(base, base);
    }
    _mm256_storeu_pd(d + 2 * i, acc);
  }
  for (; i < n; ++i) {
    cplx base = a[i], acc = 1.0;
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

bool avx2_supported() {
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

const Impl& avx2_impl() {
  static const Impl impl{
      "avx2", v_cmul, v_caxpy, v_abs2, v_max_abs2, v_max_abs2_diff,
      v_sum,  v_pow_u64,
  };
  return impl;
}

}  // namespace convpow::kernels

#endif  // CONVPOW_HAVE_AVX2
