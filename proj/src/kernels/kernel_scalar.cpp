#include <cmath>
#include <vector>

#include "clab/scalar_ops.hpp"
#include "kernel_impl.hpp"

namespace clab::kernels::detail {

// Reference kernel: one lane at a time, straight IEEE semantics.
void eval_batch_scalar(const Tape& tape, std::size_t n, const double* eps,
                       bool eps_scalar, const double* const* vars,
                       const std::uint8_t* var_scalar, double* out) {
  using namespace clab::scalar_ops;
  std::vector<double> regs(static_cast<std::size_t>(tape.slot_count()));
  const auto& code = tape.code();
  for (std::size_t lane = 0; lane < n; ++lane) {
    for (const TapeInstr& in : code) {
      double* dst = &regs[in.dst];
      switch (in.op) {
        case TapeOp::LoadConst: *dst = in.imm; break;
        case TapeOp::LoadEps: *dst = eps_scalar ? eps[0] : eps[lane]; break;
        case TapeOp::LoadVar: {
          const double* v = vars[in.i - 1];
          *dst = var_scalar[in.i - 1] ? v[0] : v[lane];
          break;
        }
        case TapeOp::Neg: *dst = -regs[in.a]; break;
        case TapeOp::Exp: *dst = std::exp(regs[in.a]); break;
        case TapeOp::Log: *dst = std::log(regs[in.a]); break;
        case TapeOp::Sin: *dst = std::sin(regs[in.a]); break;
        case TapeOp::Cos: *dst = std::cos(regs[in.a]); break;
        case TapeOp::Atan: *dst = std::atan(regs[in.a]); break;
        case TapeOp::Abs: *dst = std::fabs(regs[in.a]); break;
        case TapeOp::Smoothstep: *dst = smoothstep_val(regs[in.a]); break;
        case TapeOp::FlatExp:
          *dst = flatexp_val(regs[in.a], static_cast<int>(in.i));
          break;
        case TapeOp::Add: *dst = regs[in.a] + regs[in.b]; break;
        case TapeOp::Sub: *dst = regs[in.a] - regs[in.b]; break;
        case TapeOp::Mul: *dst = regs[in.a] * regs[in.b]; break;
        case TapeOp::Div: *dst = regs[in.a] / regs[in.b]; break;
        case TapeOp::PowInt: *dst = pow_int(regs[in.a], in.i); break;
        case TapeOp::PowRat: *dst = pow_rat(regs[in.a], in.imm); break;
      }
    }
    out[lane] = regs[tape.out_slot()];
  }
}

}  // namespace clab::kernels::detail
