#include <cmath>
#include <experimental/simd>
#include <vector>

#include "clab/scalar_ops.hpp"
#include "kernel_impl.hpp"

namespace stdx = std::experimental;

namespace clab::kernels::detail {

namespace {

using vd = stdx::native_simd<double>;
constexpr std::size_t W = vd::size();

// Transcendentals run per lane through the shared scalar primitives, so the
// SIMD path is bit-identical to the reference kernel; the win is on the
// arithmetic ops, which dominate differentiated representatives.
template <typename F>
inline vd per_lane(const vd& x, F&& f) {
  alignas(stdx::memory_alignment_v<vd>) double buf[W];
  x.copy_to(buf, stdx::vector_aligned);
  for (std::size_t i = 0; i < W; ++i) buf[i] = f(buf[i]);
  vd r;
  r.copy_from(buf, stdx::vector_aligned);
  return r;
}

// Mirrors scalar_ops::pow_int operation-for-operation.
inline vd pow_int_simd(const vd& base, std::int64_t e) {
  if (e == 0) return vd(1.0);
  const bool inv = e < 0;
  std::uint64_t n = inv ? static_cast<std::uint64_t>(-(e + 1)) + 1
                        : static_cast<std::uint64_t>(e);
  vd acc(1.0);
  vd b = base;
  while (n > 0) {
    if (n & 1u) acc *= b;
    n >>= 1u;
    if (n) b *= b;
  }
  return inv ? vd(1.0) / acc : acc;
}

}  // namespace

void eval_batch_simd(const Tape& tape, std::size_t n, const double* eps,
                     bool eps_scalar, const double* const* vars,
                     const std::uint8_t* var_scalar, double* out) {
  using namespace clab::scalar_ops;
  std::vector<vd> regs(static_cast<std::size_t>(tape.slot_count()));
  const auto& code = tape.code();

  std::size_t base = 0;
  for (; base + W <= n; base += W) {
    for (const TapeInstr& in : code) {
      vd* dst = &regs[in.dst];
      switch (in.op) {
        case TapeOp::LoadConst: *dst = vd(in.imm); break;
        case TapeOp::LoadEps:
          *dst = eps_scalar ? vd(eps[0]) : vd(eps + base, stdx::element_aligned);
          break;
        case TapeOp::LoadVar: {
          const double* v = vars[in.i - 1];
          *dst = var_scalar[in.i - 1] ? vd(v[0])
                                      : vd(v + base, stdx::element_aligned);
          break;
        }
        case TapeOp::Neg: *dst = -regs[in.a]; break;
        case TapeOp::Exp:
          *dst = per_lane(regs[in.a], [](double x) { return std::exp(x); });
          break;
        case TapeOp::Log:
          *dst = per_lane(regs[in.a], [](double x) { return std::log(x); });
          break;
        case TapeOp::Sin:
          *dst = per_lane(regs[in.a], [](double x) { return std::sin(x); });
          break;
        case TapeOp::Cos:
          *dst = per_lane(regs[in.a], [](double x) { return std::cos(x); });
          break;
        case TapeOp::Atan:
          *dst = per_lane(regs[in.a], [](double x) { return std::atan(x); });
          break;
        case TapeOp::Abs: *dst = stdx::abs(regs[in.a]); break;
        case TapeOp::Smoothstep:
          *dst = per_lane(regs[in.a], [](double x) { return smoothstep_val(x); });
          break;
        case TapeOp::FlatExp: {
          const int p = static_cast<int>(in.i);
          *dst = per_lane(regs[in.a],
                          [p](double x) { return flatexp_val(x, p); });
          break;
        }
        case TapeOp::Add: *dst = regs[in.a] + regs[in.b]; break;
        case TapeOp::Sub: *dst = regs[in.a] - regs[in.b]; break;
        case TapeOp::Mul: *dst = regs[in.a] * regs[in.b]; break;
        case TapeOp::Div: *dst = regs[in.a] / regs[in.b]; break;
        case TapeOp::PowInt: *dst = pow_int_simd(regs[in.a], in.i); break;
        case TapeOp::PowRat: {
          const double q = in.imm;
          *dst = per_lane(regs[in.a], [q](double x) { return pow_rat(x, q); });
          break;
        }
      }
    }
    regs[tape.out_slot()].copy_to(out + base, stdx::element_aligned);
  }

  if (base < n) {
    // Remainder lanes go through the reference kernel; inputs that are not
    // broadcast need their pointers advanced.
    const int vc = tape.var_count();
    std::vector<const double*> tail_vars(static_cast<std::size_t>(vc));
    for (int v = 0; v < vc; ++v)
      tail_vars[v] = var_scalar[v] ? vars[v] : vars[v] + base;
    eval_batch_scalar(tape, n - base, eps_scalar ? eps : eps + base,
                      eps_scalar, tail_vars.data(), var_scalar, out + base);
  }
}

}  // namespace clab::kernels::detail
