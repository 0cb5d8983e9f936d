#include "clab/tape.hpp"

#include <stdexcept>
#include <unordered_map>

namespace clab {

namespace {

struct Ssa {
  TapeOp op;
  int a = -1, b = -1;
  std::int64_t i = 0;
  double imm = 0.0;
  std::size_t key_hash = 0;
  const detail::ExprNode* src = nullptr;
  int last_use = -1;
};

struct Builder {
  std::vector<Ssa> ssa;
  // CSE on expression structure: node pointer first (cheap for shared
  // subtrees), then structural hash buckets.
  std::unordered_map<const detail::ExprNode*, int> by_node;
  std::unordered_map<std::size_t, std::vector<std::pair<Expr, int>>> by_hash;
  int max_var = 0;

  int emit(Ssa s) {
    ssa.push_back(s);
    return static_cast<int>(ssa.size()) - 1;
  }

  int visit(const Expr& e) {
    auto hit = by_node.find(e.raw());
    if (hit != by_node.end()) return hit->second;
    auto& bucket = by_hash[e.hash()];
    for (auto& [prev, id] : bucket) {
      if (equal(prev, e)) {
        by_node.emplace(e.raw(), id);
        return id;
      }
    }

    Ssa s;
    switch (e.op()) {
      case Op::Const:
        s.op = TapeOp::LoadConst;
        s.imm = e.value().to_double();
        break;
      case Op::Eps:
        s.op = TapeOp::LoadEps;
        break;
      case Op::Var:
        s.op = TapeOp::LoadVar;
        s.i = e.var_index();
        max_var = std::max(max_var, e.var_index());
        break;
      case Op::Neg: s.op = TapeOp::Neg; break;
      case Op::Exp: s.op = TapeOp::Exp; break;
      case Op::Log: s.op = TapeOp::Log; break;
      case Op::Sin: s.op = TapeOp::Sin; break;
      case Op::Cos: s.op = TapeOp::Cos; break;
      case Op::Atan: s.op = TapeOp::Atan; break;
      case Op::Abs: s.op = TapeOp::Abs; break;
      case Op::Smoothstep: s.op = TapeOp::Smoothstep; break;
      case Op::FlatExp:
        s.op = TapeOp::FlatExp;
        s.i = e.flatexp_order();
        break;
      case Op::Add: s.op = TapeOp::Add; break;
      case Op::Sub: s.op = TapeOp::Sub; break;
      case Op::Mul: s.op = TapeOp::Mul; break;
      case Op::Div: s.op = TapeOp::Div; break;
      case Op::Pow:
        if (e.value().is_integer()) {
          s.op = TapeOp::PowInt;
          s.i = e.value().num();
        } else {
          s.op = TapeOp::PowRat;
          s.imm = e.value().to_double();
        }
        break;
    }
    if (e.raw()->a) s.a = visit(e.child_a());
    if (e.raw()->b) s.b = visit(e.child_b());
    int id = emit(s);
    by_node.emplace(e.raw(), id);
    bucket.emplace_back(e, id);
    return id;
  }
};

}  // namespace

Tape Tape::compile(const Expr& e) {
  Builder builder;
  int root = builder.visit(e);
  auto& ssa = builder.ssa;

  for (int i = 0; i < static_cast<int>(ssa.size()); ++i) {
    if (ssa[i].a >= 0) ssa[ssa[i].a].last_use = i;
    if (ssa[i].b >= 0) ssa[ssa[i].b].last_use = i;
  }
  ssa[root].last_use = static_cast<int>(ssa.size());

  Tape tape;
  tape.max_var_ = builder.max_var;
  std::vector<std::uint16_t> slot_of(ssa.size());
  std::vector<std::uint16_t> free_slots;
  int next_slot = 0;

  for (int i = 0; i < static_cast<int>(ssa.size()); ++i) {
    const Ssa& s = ssa[i];
    if (s.last_use < 0) continue;  // dead (possible after CSE merges)
    // Operand slots may be released before allocating the destination: an
    // in-place overwrite is fine because every op reads operands first.
    std::uint16_t sa = s.a >= 0 ? slot_of[s.a] : 0;
    std::uint16_t sb = s.b >= 0 ? slot_of[s.b] : 0;
    if (s.a >= 0 && ssa[s.a].last_use == i) free_slots.push_back(sa);
    if (s.b >= 0 && ssa[s.b].last_use == i && (s.a < 0 || sb != sa))
      free_slots.push_back(sb);
    std::uint16_t dst;
    if (!free_slots.empty()) {
      dst = free_slots.back();
      free_slots.pop_back();
    } else {
      if (next_slot >= 65535) throw std::runtime_error("tape: too many slots");
      dst = static_cast<std::uint16_t>(next_slot++);
    }
    slot_of[i] = dst;
    tape.code_.push_back({s.op, dst, sa, sb, s.i, s.imm});
  }
  tape.slots_ = next_slot;
  tape.out_ = slot_of[root];
  return tape;
}

}  // namespace clab
