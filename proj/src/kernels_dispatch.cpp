#include <cstdlib>
#include <cstring>
#include <string>

#include "shallowbound/errors.hpp"
#include "shallowbound/kernels.hpp"

namespace shallowbound {

#ifndef SHALLOWBOUND_HAVE_AVX2
const KernelTable* avx2_kernels() { return nullptr; }
#endif

namespace {

const KernelTable& select() {
  const char* env = std::getenv("SHALLOWBOUND_SIMD");
  std::string mode = env ? env : "auto";
  if (mode == "scalar") return scalar_kernels();
  if (mode == "avx2") {
    if (const KernelTable* t = avx2_kernels()) return *t;
    throw InvalidArgument("SHALLOWBOUND_SIMD=avx2 but AVX2/FMA kernels are unavailable");
  }
  if (mode != "auto" && !mode.empty())
    throw InvalidArgument("SHALLOWBOUND_SIMD must be auto, scalar or avx2, got " + mode);
  if (const KernelTable* t = avx2_kernels()) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable& kernels() {
  static const KernelTable& k = select();
  return k;
}

}  // namespace shallowbound
