#include <cstdlib>
#include <cstring>

#include "convpow/kernels.hpp"

namespace convpow::kernels {

namespace {

const Impl& pick() {
  const char* env = std::getenv("CONVPOW_SIMD");
  if (env && std::strcmp(env, "scalar") == 0) return scalar_impl();
#if defined(CONVPOW_HAVE_AVX2)
  if (env && std::strcmp(env, "avx2") == 0 && avx2_supported())
    return avx2_impl();
  if ((!env || std::strcmp(env, "auto") == 0 || std::strcmp(env, "avx2") == 0) &&
      avx2_supported())
    return avx2_impl();
#endif
  return scalar_impl();
}

}  // namespace

const Impl& active() {
  static const Impl& impl = pick();
  return impl;
}

}  // namespace convpow::kernels
