#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "clab/tape.hpp"

namespace clab::kernels {

// Batch evaluation of a compiled tape over n bindings laid out
// structure-of-arrays. Inputs flagged scalar are broadcast. Kernels never
// throw; off-domain lanes produce IEEE NaN/Inf, which callers surface through
// the tree evaluator when a precise diagnostic is wanted.
//
// There is one scalar reference kernel and one SIMD kernel
// (std::experimental::simd; the x86 build compiles it for AVX2 and gates it
// behind a runtime CPUID check). Both call the same per-lane primitives for
// transcendentals, so results agree bit-for-bit; this is equivalence-tested.
using KernelFn = void (*)(const Tape&, std::size_t n, const double* eps,
                          bool eps_scalar, const double* const* vars,
                          const std::uint8_t* var_scalar, double* out);

struct Kernel {
  const char* name;
  KernelFn fn;
};

const Kernel& scalar_kernel();
// Null when the SIMD kernel cannot run on this machine.
const Kernel* simd_kernel();
// Env override COLOMBEAU_LAB_KERNEL=scalar|simd|auto, read once.
const Kernel& active_kernel();

// Worker cap for lattice sweeps; COLOMBEAU_LAB_THREADS, read once, >= 1.
int thread_cap();

// Convenience front end used by the sweep code.
class BatchEval {
 public:
  explicit BatchEval(const Expr& e) : tape_(Tape::compile(e)) {}
  explicit BatchEval(Tape t) : tape_(std::move(t)) {}

  const Tape& tape() const { return tape_; }

  // eps broadcast, coordinates per-lane. coords[v] has n entries for each
  // variable v in 1..var_count (missing higher vars are zero).
  void eval_lattice(double eps, std::span<const std::vector<double>> coords,
                    std::size_t n, double* out) const;

  // eps per-lane, no coordinates (eps-only nets).
  void eval_eps(std::span<const double> eps, double* out) const;

 private:
  Tape tape_;
};

}  // namespace clab::kernels
