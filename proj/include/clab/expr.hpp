#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "clab/rational.hpp"

namespace clab {

// Expression language for representatives: smooth closed-form functions of
// eps in (0,1] and coordinates x1..xn.
//
// Surface grammar (UTF-8 s-expressions, the on-disk format everywhere):
//   atom := decimal | rational "p/q" | "eps" | "x"<digit>+
//   form := "(" op form* ")"
//   ops  := + - * / neg exp log sin cos atan abs smoothstep pow flatexp
// pow takes a rational-constant exponent; flatexp takes a non-negative
// integer order. flatexp(t,p) = exp(-1/t)/t^p for t>0 and 0 otherwise; it is
// the flat building block that keeps smoothstep's symbolic derivatives inside
// the language (d/dt flatexp(t,p) = flatexp(t,p+2) - p*flatexp(t,p+1)).
enum class Op : std::uint8_t {
  Const,
  Eps,
  Var,
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
  Pow,
};

bool op_is_unary(Op op);
bool op_is_binary(Op op);
const char* op_token(Op op);

struct ExprError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : ExprError {
  ParseError(const std::string& msg, std::size_t at)
      : ExprError(msg + " (byte " + std::to_string(at) + ")"), offset(at) {}
  std::size_t offset;
};
// Domain failures during evaluation carry the offending subexpression.
struct EvalError : ExprError {
  EvalError(const std::string& msg, std::string sub)
      : ExprError(msg + " in " + sub), subexpr(std::move(sub)) {}
  std::string subexpr;
};
struct NonSmoothError : ExprError {
  NonSmoothError(const std::string& msg, std::string sub)
      : ExprError(msg + ": " + sub), subexpr(std::move(sub)) {}
  std::string subexpr;
};

class Expr;

namespace detail {
struct ExprFactory;
struct ExprNode {
  Op op = Op::Const;
  Rational value;  // Const payload, Pow exponent, FlatExp order (in num()).
  int var = 0;     // Var index, 1-based.
  std::shared_ptr<const ExprNode> a, b;
  // Structure caches.
  std::size_t hash = 0;
  std::uint32_t var_mask = 0;  // bit i-1 set if x_i occurs (i <= 32).
  int max_var = 0;
  std::uint32_t size = 1;
  bool has_eps = false;
  bool has_abs = false;
};
}  // namespace detail

// Immutable value-semantic expression handle. Subtrees are shared; all
// operations build new nodes. Safe for unrestricted concurrent reads.
class Expr {
 public:
  using Node = detail::ExprNode;

  Expr() : Expr(constant(0)) {}

  Op op() const { return node_->op; }
  const Rational& value() const { return node_->value; }
  int var_index() const { return node_->var; }
  Expr child_a() const { return Expr(node_->a); }
  Expr child_b() const { return Expr(node_->b); }
  bool has_child_b() const { return node_->b != nullptr; }
  int flatexp_order() const { return static_cast<int>(node_->value.num()); }

  std::size_t hash() const { return node_->hash; }
  std::uint32_t size() const { return node_->size; }
  bool uses_eps() const { return node_->has_eps; }
  bool contains_abs() const { return node_->has_abs; }
  int max_var() const { return node_->max_var; }
  // v == 0 means eps, v >= 1 means x_v.
  bool depends_on(int v) const;

  bool is_const() const { return node_->op == Op::Const; }
  bool is_const(const Rational& r) const {
    return node_->op == Op::Const && node_->value == r;
  }

  const Node* raw() const { return node_.get(); }

  // Factories.
  static Expr constant(Rational r);
  static Expr eps();
  static Expr var(int index);  // 1-based
  static Expr unary(Op op, Expr a);
  static Expr binary(Op op, Expr a, Expr b);
  static Expr pow(Expr base, Rational exponent);
  static Expr flatexp(Expr t, int order);

  friend Expr operator+(const Expr& a, const Expr& b) {
    return binary(Op::Add, a, b);
  }
  friend Expr operator-(const Expr& a, const Expr& b) {
    return binary(Op::Sub, a, b);
  }
  friend Expr operator*(const Expr& a, const Expr& b) {
    return binary(Op::Mul, a, b);
  }
  friend Expr operator/(const Expr& a, const Expr& b) {
    return binary(Op::Div, a, b);
  }
  friend Expr operator-(const Expr& a) { return unary(Op::Neg, a); }

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;

  friend struct detail::ExprFactory;
  friend bool same_node(const Expr& a, const Expr& b);
};

inline bool same_node(const Expr& a, const Expr& b) {
  return a.node_ == b.node_;
}

bool equal(const Expr& a, const Expr& b);
// Deterministic structural total order (op, payload, children); used for
// canonical term ordering without printing.
int compare(const Expr& a, const Expr& b);

struct VarBinding {
  double eps = 1.0;
  std::vector<double> coords;
};

std::string print(const Expr& e);
Expr parse(std::string_view text);

double evaluate(const Expr& e, const VarBinding& b);

// d/dv, v == 0 for eps, v >= 1 for x_v. Rejects abs nodes whose subtree
// depends on v (non-smooth fragment).
Expr differentiate(const Expr& e, int v);

// Exact pointwise-equal rewriting: rational constant folding, 0/1 identities,
// and additive/multiplicative collection with exact coefficients.
Expr simplify(const Expr& e);

// Replaces eps and/or coordinates by expressions. var_subs[i] substitutes
// x_{i+1}; empty entries keep the variable.
Expr substitute(const Expr& e, const Expr* eps_sub,
                std::span<const Expr> var_subs);

inline Expr substitute_vars(const Expr& e, std::span<const Expr> var_subs) {
  return substitute(e, nullptr, var_subs);
}

// Doubles are dyadic rationals; exact conversion when mantissa and scale fit
// int64 (any double of ordinary magnitude).
std::optional<Rational> rational_from_double(double v);
// Throws for values outside the exact range.
Expr const_from_double(double v);

// Convenience builders used across the library.
inline Expr c_int(std::int64_t v) { return Expr::constant(Rational(v)); }
inline Expr c_rat(std::int64_t n, std::int64_t d) {
  return Expr::constant(Rational(n, d));
}
inline Expr smoothstep(Expr t) { return Expr::unary(Op::Smoothstep, std::move(t)); }
inline Expr eps_pow(Rational q) { return Expr::pow(Expr::eps(), q); }

}  // namespace clab
