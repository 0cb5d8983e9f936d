#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>
#include <thread>

#include "kernel_impl.hpp"

namespace clab::kernels {

namespace {

bool simd_runs_here() {
#if defined(CLAB_KERNEL_AVX2)
  // This build compiled the SIMD translation unit for AVX2; gate it.
  return __builtin_cpu_supports("avx2");
#else
  // Compiled at the baseline architecture (e.g. NEON on aarch64): always safe.
  return true;
#endif
}

const Kernel kScalar{"scalar", &detail::eval_batch_scalar};
const Kernel kSimd{"simd", &detail::eval_batch_simd};

const Kernel& pick_active() {
  const char* want = std::getenv("COLOMBEAU_LAB_KERNEL");
  if (want && std::strcmp(want, "scalar") == 0) return kScalar;
  if (want && std::strcmp(want, "simd") == 0) {
    if (!simd_runs_here())
      throw std::runtime_error(
          "COLOMBEAU_LAB_KERNEL=simd but this CPU cannot run the SIMD kernel");
    return kSimd;
  }
  return simd_runs_here() ? kSimd : kScalar;
}

}  // namespace

const Kernel& scalar_kernel() { return kScalar; }

const Kernel* simd_kernel() { return simd_runs_here() ? &kSimd : nullptr; }

const Kernel& active_kernel() {
  static const Kernel& k = pick_active();
  return k;
}

int thread_cap() {
  static const int cap = [] {
    const char* env = std::getenv("COLOMBEAU_LAB_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    if (v < 1) return 1;
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    return std::min<int>(v, static_cast<int>(hw));
  }();
  return cap;
}

void BatchEval::eval_lattice(double eps,
                             std::span<const std::vector<double>> coords,
                             std::size_t n, double* out) const {
  const int vc = tape_.var_count();
  if (static_cast<int>(coords.size()) < vc)
    throw std::invalid_argument("eval_lattice: missing coordinate arrays");
  std::vector<const double*> ptrs(static_cast<std::size_t>(vc));
  std::vector<std::uint8_t> scalar(static_cast<std::size_t>(vc), 0);
  for (int v = 0; v < vc; ++v) {
    ptrs[v] = coords[v].data();
    if (coords[v].size() == 1 && n > 1) scalar[v] = 1;
  }
  active_kernel().fn(tape_, n, &eps, true, ptrs.data(), scalar.data(), out);
}

void BatchEval::eval_eps(std::span<const double> eps, double* out) const {
  if (tape_.var_count() > 0)
    throw std::invalid_argument("eval_eps: expression has spatial variables");
  active_kernel().fn(tape_, eps.size(), eps.data(), false, nullptr, nullptr,
                     out);
}

}  // namespace clab::kernels
