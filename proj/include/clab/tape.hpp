#pragma once

#include <cstdint>
#include <vector>

#include "clab/expr.hpp"

namespace clab {

// Flat register program compiled from an Expr. Common subexpressions are
// merged (structural hash-consing) and registers are recycled by liveness, so
// lattice sweeps evaluate each distinct subtree once per point.
enum class TapeOp : std::uint8_t {
  LoadConst,
  LoadEps,
  LoadVar,
  Neg,
  Exp,
  Log,
  Sin,
  Cos,
  Atan,
  Abs,
  Smoothstep,
  FlatExp,
  Add,
  Sub,
  Mul,
  Div,
  PowInt,
  PowRat,
};

struct TapeInstr {
  TapeOp op;
  std::uint16_t dst = 0;
  std::uint16_t a = 0;
  std::uint16_t b = 0;
  std::int64_t i = 0;  // var index, flatexp order, or integer exponent
  double imm = 0.0;    // constant value or fractional exponent
};

class Tape {
 public:
  static Tape compile(const Expr& e);

  const std::vector<TapeInstr>& code() const { return code_; }
  int slot_count() const { return slots_; }
  int var_count() const { return max_var_; }
  std::uint16_t out_slot() const { return out_; }

 private:
  std::vector<TapeInstr> code_;
  int slots_ = 0;
  int max_var_ = 0;
  std::uint16_t out_ = 0;
};

}  // namespace clab
