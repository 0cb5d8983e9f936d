#include "clab/expr.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "clab/scalar_ops.hpp"

namespace clab {

namespace {

std::size_t hash_mix(std::size_t h, std::size_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

std::size_t node_hash(const detail::ExprNode& n) {
  std::size_t h = static_cast<std::size_t>(n.op) * 0x100000001b3ULL;
  h = hash_mix(h, static_cast<std::size_t>(n.value.num()));
  h = hash_mix(h, static_cast<std::size_t>(n.value.den()));
  h = hash_mix(h, static_cast<std::size_t>(n.var));
  if (n.a) h = hash_mix(h, n.a->hash);
  if (n.b) h = hash_mix(h, n.b->hash);
  return h;
}

using NodePtr = std::shared_ptr<const detail::ExprNode>;

NodePtr finish(detail::ExprNode n) {
  n.var_mask = 0;
  n.max_var = 0;
  n.has_eps = n.op == Op::Eps;
  n.has_abs = n.op == Op::Abs;
  n.size = 1;
  if (n.op == Op::Var) {
    n.max_var = n.var;
    if (n.var >= 1 && n.var <= 32) n.var_mask = 1u << (n.var - 1);
  }
  for (const auto& c : {n.a, n.b}) {
    if (!c) continue;
    n.var_mask |= c->var_mask;
    n.max_var = std::max(n.max_var, c->max_var);
    n.has_eps = n.has_eps || c->has_eps;
    n.has_abs = n.has_abs || c->has_abs;
    n.size += c->size;
  }
  n.hash = node_hash(n);
  return std::make_shared<const detail::ExprNode>(std::move(n));
}

}  // namespace

namespace detail {
struct ExprFactory {
  static Expr wrap(NodePtr n) { return Expr(std::move(n)); }
  static NodePtr ptr(const Expr& e) { return e.node_; }
};
}  // namespace detail
using ExprAccess = detail::ExprFactory;

bool op_is_unary(Op op) {
  switch (op) {
    case Op::Neg:
    case Op::Exp:
    case Op::Log:
    case Op::Sin:
    case Op::Cos:
    case Op::Atan:
    case Op::Abs:
    case Op::Smoothstep:
      return true;
    default:
      return false;
  }
}

bool op_is_binary(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
    case Op::Mul:
    case Op::Div:
      return true;
    default:
      return false;
  }
}

const char* op_token(Op op) {
  switch (op) {
    case Op::Const: return "<const>";
    case Op::Eps: return "eps";
    case Op::Var: return "<var>";
    case Op::Neg: return "neg";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Atan: return "atan";
    case Op::Abs: return "abs";
    case Op::Smoothstep: return "smoothstep";
    case Op::FlatExp: return "flatexp";
    case Op::Add: return "+";
    case Op::Sub: return "-";
    case Op::Mul: return "*";
    case Op::Div: return "/";
    case Op::Pow: return "pow";
  }
  return "?";
}

Expr Expr::constant(Rational r) {
  detail::ExprNode n;
  n.op = Op::Const;
  n.value = r;
  return ExprAccess::wrap(finish(std::move(n)));
}

Expr Expr::eps() {
  detail::ExprNode n;
  n.op = Op::Eps;
  return ExprAccess::wrap(finish(std::move(n)));
}

Expr Expr::var(int index) {
  if (index < 1) throw ExprError("variable index must be >= 1");
  detail::ExprNode n;
  n.op = Op::Var;
  n.var = index;
  return ExprAccess::wrap(finish(std::move(n)));
}

Expr Expr::unary(Op op, Expr a) {
  if (!op_is_unary(op)) throw ExprError("not a unary op");
  detail::ExprNode n;
  n.op = op;
  n.a = ExprAccess::ptr(a);
  return ExprAccess::wrap(finish(std::move(n)));
}

Expr Expr::binary(Op op, Expr a, Expr b) {
  if (!op_is_binary(op)) throw ExprError("not a binary op");
  detail::ExprNode n;
  n.op = op;
  n.a = ExprAccess::ptr(a);
  n.b = ExprAccess::ptr(b);
  return ExprAccess::wrap(finish(std::move(n)));
}

Expr Expr::pow(Expr base, Rational exponent) {
  // Construction-time slice of the pow domain invariant: a constant base must
  // already satisfy it.
  if (base.is_const()) {
    const Rational& c = base.value();
    if (!exponent.is_integer() && c.num() <= 0)
      throw ExprError("pow domain violation: non-positive constant base " +
                      c.str() + " with exponent " + exponent.str());
    if (exponent.is_integer() && exponent.num() < 0 && c.is_zero())
      throw ExprError("pow domain violation: zero base with negative exponent");
  }
  detail::ExprNode n;
  n.op = Op::Pow;
  n.value = exponent;
  n.a = ExprAccess::ptr(base);
  return ExprAccess::wrap(finish(std::move(n)));
}

Expr Expr::flatexp(Expr t, int order) {
  if (order < 0) throw ExprError("flatexp order must be >= 0");
  detail::ExprNode n;
  n.op = Op::FlatExp;
  n.value = Rational(order);
  n.a = ExprAccess::ptr(t);
  return ExprAccess::wrap(finish(std::move(n)));
}

bool Expr::depends_on(int v) const {
  if (v == 0) return node_->has_eps;
  if (v >= 1 && v <= 32) return (node_->var_mask >> (v - 1)) & 1u;
  // Rare deep indices: fall back to max_var scan.
  if (node_->max_var < v) return false;
  if (node_->op == Op::Var) return node_->var == v;
  return (node_->a && Expr(node_->a).depends_on(v)) ||
         (node_->b && Expr(node_->b).depends_on(v));
}

bool equal(const Expr& a, const Expr& b) {
  if (same_node(a, b)) return true;
  if (a.hash() != b.hash()) return false;
  return compare(a, b) == 0;
}

int compare(const Expr& a, const Expr& b) {
  if (same_node(a, b)) return 0;
  if (a.op() != b.op())
    return static_cast<int>(a.op()) < static_cast<int>(b.op()) ? -1 : 1;
  if (a.value() != b.value()) return a.value() < b.value() ? -1 : 1;
  if (a.var_index() != b.var_index())
    return a.var_index() < b.var_index() ? -1 : 1;
  const bool ha = a.raw()->a != nullptr, hb = b.raw()->a != nullptr;
  if (ha != hb) return ha ? 1 : -1;
  if (ha) {
    int c = compare(a.child_a(), b.child_a());
    if (c != 0) return c;
  }
  const bool ha2 = a.raw()->b != nullptr, hb2 = b.raw()->b != nullptr;
  if (ha2 != hb2) return ha2 ? 1 : -1;
  if (ha2) return compare(a.child_b(), b.child_b());
  return 0;
}

// ---------------------------------------------------------------------------
// Printing

namespace {
void print_rec(const Expr& e, std::string& out) {
  switch (e.op()) {
    case Op::Const:
      out += e.value().str();
      return;
    case Op::Eps:
      out += "eps";
      return;
    case Op::Var:
      out += "x";
      out += std::to_string(e.var_index());
      return;
    case Op::Pow:
      out += "(pow ";
      print_rec(e.child_a(), out);
      out += ' ';
      out += e.value().str();
      out += ')';
      return;
    case Op::FlatExp:
      out += "(flatexp ";
      print_rec(e.child_a(), out);
      out += ' ';
      out += std::to_string(e.flatexp_order());
      out += ')';
      return;
    default:
      break;
  }
  out += '(';
  out += op_token(e.op());
  out += ' ';
  print_rec(e.child_a(), out);
  if (e.has_child_b()) {
    out += ' ';
    print_rec(e.child_b(), out);
  }
  out += ')';
}
}  // namespace

std::string print(const Expr& e) {
  std::string out;
  out.reserve(e.size() * 6);
  print_rec(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Parser {
  std::string_view s;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
      ++pos;
  }
  bool atom_char(char c) const {
    return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')';
  }

  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw ParseError(msg, at);
  }

  Rational parse_number(std::string_view tok, std::size_t at) {
    // sign, integer/fraction "p/q", or decimal with optional exponent.
    auto slash = tok.find('/');
    if (slash != std::string_view::npos) {
      std::int64_t p = 0, q = 0;
      try {
        p = std::stoll(std::string(tok.substr(0, slash)));
        q = std::stoll(std::string(tok.substr(slash + 1)));
      } catch (...) {
        fail("bad rational literal '" + std::string(tok) + "'", at);
      }
      if (q == 0) fail("rational literal with zero denominator", at);
      return Rational(p, q);
    }
    bool negative = false;
    std::size_t i = 0;
    if (i < tok.size() && (tok[i] == '+' || tok[i] == '-')) {
      negative = tok[i] == '-';
      ++i;
    }
    __int128 num = 0;
    __int128 den = 1;
    bool digits = false, frac = false;
    long expo = 0;
    for (; i < tok.size(); ++i) {
      char c = tok[i];
      if (c >= '0' && c <= '9') {
        num = num * 10 + (c - '0');
        if (frac) den *= 10;
        digits = true;
        if (num > (__int128)1 << 100) fail("constant too large", at);
      } else if (c == '.' && !frac) {
        frac = true;
      } else if ((c == 'e' || c == 'E') && digits) {
        try {
          expo = std::stol(std::string(tok.substr(i + 1)));
        } catch (...) {
          fail("bad exponent in '" + std::string(tok) + "'", at);
        }
        break;
      } else {
        fail("bad numeric literal '" + std::string(tok) + "'", at);
      }
    }
    if (!digits) fail("bad numeric literal '" + std::string(tok) + "'", at);
    if (expo > 30 || expo < -30) fail("exponent out of range", at);
    for (long k = 0; k < expo; ++k) num *= 10;
    for (long k = 0; k > expo; --k) den *= 10;
    if (negative) num = -num;
    auto r = Rational::make_checked(num, den);
    if (!r) fail("constant does not fit exact rational range", at);
    return *r;
  }

  Expr parse_atom(std::string_view tok, std::size_t at) {
    if (tok == "eps") return Expr::eps();
    if (tok.size() >= 2 && tok[0] == 'x' &&
        std::all_of(tok.begin() + 1, tok.end(),
                    [](char c) { return c >= '0' && c <= '9'; })) {
      int idx = 0;
      try {
        idx = std::stoi(std::string(tok.substr(1)));
      } catch (...) {
        fail("bad variable '" + std::string(tok) + "'", at);
      }
      if (idx < 1) fail("variable index must be >= 1", at);
      return Expr::var(idx);
    }
    return Expr::constant(parse_number(tok, at));
  }

  Expr parse_expr() {
    skip_ws();
    if (pos >= s.size()) fail("unexpected end of input", pos);
    if (s[pos] != '(') {
      std::size_t start = pos;
      while (pos < s.size() && atom_char(s[pos])) ++pos;
      if (pos == start) fail("unexpected character", pos);
      return parse_atom(s.substr(start, pos - start), start);
    }
    std::size_t open = pos++;
    skip_ws();
    std::size_t op_start = pos;
    while (pos < s.size() && atom_char(s[pos])) ++pos;
    std::string op(s.substr(op_start, pos - op_start));
    if (op.empty()) fail("missing operator after '('", open);

    std::vector<Expr> args;
    std::vector<std::size_t> arg_pos;
    while (true) {
      skip_ws();
      if (pos >= s.size()) fail("missing ')'", open);
      if (s[pos] == ')') {
        ++pos;
        break;
      }
      arg_pos.push_back(pos);
      args.push_back(parse_expr());
    }

    auto need = [&](std::size_t n) {
      if (args.size() != n)
        fail("operator '" + op + "' expects " + std::to_string(n) +
                 " argument(s), got " + std::to_string(args.size()),
             open);
    };

    if (op == "+") { need(2); return args[0] + args[1]; }
    if (op == "-") { need(2); return args[0] - args[1]; }
    if (op == "*") { need(2); return args[0] * args[1]; }
    if (op == "/") { need(2); return args[0] / args[1]; }
    if (op == "pow") {
      need(2);
      if (!args[1].is_const())
        fail("pow exponent must be a rational constant", arg_pos[1]);
      try {
        return Expr::pow(args[0], args[1].value());
      } catch (const ExprError& e) {
        fail(e.what(), open);
      }
    }
    if (op == "flatexp") {
      need(2);
      if (!args[1].is_const() || !args[1].value().is_integer() ||
          args[1].value().num() < 0)
        fail("flatexp order must be a non-negative integer", arg_pos[1]);
      return Expr::flatexp(args[0], static_cast<int>(args[1].value().num()));
    }
    static const std::pair<const char*, Op> unaries[] = {
        {"neg", Op::Neg},   {"exp", Op::Exp},
        {"log", Op::Log},   {"sin", Op::Sin},
        {"cos", Op::Cos},   {"atan", Op::Atan},
        {"abs", Op::Abs},   {"smoothstep", Op::Smoothstep}};
    for (auto& [tok, o] : unaries) {
      if (op == tok) {
        need(1);
        return Expr::unary(o, args[0]);
      }
    }
    fail("unknown operator '" + op + "'", open);
  }
};

}  // namespace

Expr parse(std::string_view text) {
  Parser p{text};
  Expr e = p.parse_expr();
  p.skip_ws();
  if (p.pos != text.size())
    throw ParseError("trailing input after expression", p.pos);
  return e;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {
double eval_rec(const Expr& e, const VarBinding& b) {
  using namespace scalar_ops;
  switch (e.op()) {
    case Op::Const:
      return e.value().to_double();
    case Op::Eps:
      return b.eps;
    case Op::Var: {
      int i = e.var_index();
      if (i > static_cast<int>(b.coords.size()))
        throw EvalError("unbound variable", print(e));
      return b.coords[i - 1];
    }
    case Op::Neg:
      return -eval_rec(e.child_a(), b);
    case Op::Exp:
      return std::exp(eval_rec(e.child_a(), b));
    case Op::Log: {
      double v = eval_rec(e.child_a(), b);
      if (!(v > 0.0)) throw EvalError("log of non-positive value", print(e));
      return std::log(v);
    }
    case Op::Sin:
      return std::sin(eval_rec(e.child_a(), b));
    case Op::Cos:
      return std::cos(eval_rec(e.child_a(), b));
    case Op::Atan:
      return std::atan(eval_rec(e.child_a(), b));
    case Op::Abs:
      return std::fabs(eval_rec(e.child_a(), b));
    case Op::Smoothstep:
      return smoothstep_val(eval_rec(e.child_a(), b));
    case Op::FlatExp:
      return flatexp_val(eval_rec(e.child_a(), b), e.flatexp_order());
    case Op::Add:
      return eval_rec(e.child_a(), b) + eval_rec(e.child_b(), b);
    case Op::Sub:
      return eval_rec(e.child_a(), b) - eval_rec(e.child_b(), b);
    case Op::Mul:
      return eval_rec(e.child_a(), b) * eval_rec(e.child_b(), b);
    case Op::Div: {
      double num = eval_rec(e.child_a(), b);
      double den = eval_rec(e.child_b(), b);
      if (den == 0.0) throw EvalError("division by zero", print(e));
      return num / den;
    }
    case Op::Pow: {
      double base = eval_rec(e.child_a(), b);
      const Rational& q = e.value();
      if (q.is_integer()) {
        if (base == 0.0 && q.num() < 0)
          throw EvalError("zero base with negative exponent", print(e));
        return pow_int(base, q.num());
      }
      if (!(base > 0.0))
        throw EvalError("non-positive base with fractional exponent",
                        print(e));
      return pow_rat(base, q.to_double());
    }
  }
  throw EvalError("corrupt expression", "?");
}
}  // namespace

double evaluate(const Expr& e, const VarBinding& b) {
  if (!(b.eps > 0.0)) throw EvalError("eps must be positive", "binding");
  return eval_rec(e, b);
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

// s'(t) expressed with the flatexp family; total and smooth everywhere.
Expr smoothstep_derivative(const Expr& t) {
  Expr one = c_int(1);
  Expr h0a = Expr::flatexp(t, 0);
  Expr h0b = Expr::flatexp(one - t, 0);
  Expr h2a = Expr::flatexp(t, 2);
  Expr h2b = Expr::flatexp(one - t, 2);
  Expr num = h2a * h0b + h0a * h2b;
  Expr den = Expr::pow(h0a + h0b, Rational(2));
  return num / den;
}

Expr diff_rec(const Expr& e, int v,
              std::unordered_map<const detail::ExprNode*, Expr>& memo) {
  if (!e.depends_on(v)) return c_int(0);
  auto it = memo.find(e.raw());
  if (it != memo.end()) return it->second;

  Expr result = c_int(0);
  switch (e.op()) {
    case Op::Eps:
    case Op::Var:
      result = c_int(1);
      break;
    case Op::Neg:
      result = -diff_rec(e.child_a(), v, memo);
      break;
    case Op::Exp:
      result = e * diff_rec(e.child_a(), v, memo);
      break;
    case Op::Log:
      result = diff_rec(e.child_a(), v, memo) / e.child_a();
      break;
    case Op::Sin:
      result = Expr::unary(Op::Cos, e.child_a()) * diff_rec(e.child_a(), v, memo);
      break;
    case Op::Cos:
      result = -(Expr::unary(Op::Sin, e.child_a()) *
                 diff_rec(e.child_a(), v, memo));
      break;
    case Op::Atan:
      result = diff_rec(e.child_a(), v, memo) /
               (c_int(1) + Expr::pow(e.child_a(), Rational(2)));
      break;
    case Op::Abs:
      throw NonSmoothError(
          v == 0 ? std::string("cannot differentiate abs in eps")
                 : "cannot differentiate abs in x" + std::to_string(v),
          print(e));
    case Op::Smoothstep:
      result = smoothstep_derivative(e.child_a()) *
               diff_rec(e.child_a(), v, memo);
      break;
    case Op::FlatExp: {
      int p = e.flatexp_order();
      Expr d = Expr::flatexp(e.child_a(), p + 2);
      if (p > 0)
        d = d - c_int(p) * Expr::flatexp(e.child_a(), p + 1);
      result = d * diff_rec(e.child_a(), v, memo);
      break;
    }
    case Op::Add:
      result = diff_rec(e.child_a(), v, memo) + diff_rec(e.child_b(), v, memo);
      break;
    case Op::Sub:
      result = diff_rec(e.child_a(), v, memo) - diff_rec(e.child_b(), v, memo);
      break;
    case Op::Mul:
      result = diff_rec(e.child_a(), v, memo) * e.child_b() +
               e.child_a() * diff_rec(e.child_b(), v, memo);
      break;
    case Op::Div: {
      Expr da = diff_rec(e.child_a(), v, memo);
      Expr db = diff_rec(e.child_b(), v, memo);
      result = (da * e.child_b() - e.child_a() * db) /
               Expr::pow(e.child_b(), Rational(2));
      break;
    }
    case Op::Pow: {
      const Rational& q = e.value();
      Expr da = diff_rec(e.child_a(), v, memo);
      auto qm1 = Rational::try_sub(q, Rational(1));
      if (!qm1) throw ExprError("pow exponent overflow in derivative");
      result = Expr::constant(q) * Expr::pow(e.child_a(), *qm1) * da;
      break;
    }
    case Op::Const:
      break;
  }
  memo.emplace(e.raw(), result);
  return result;
}

}  // namespace

Expr differentiate(const Expr& e, int v) {
  std::unordered_map<const detail::ExprNode*, Expr> memo;
  return diff_rec(e, v, memo);
}

// ---------------------------------------------------------------------------
// Simplification

namespace {

struct Term {
  Rational coeff;
  Expr core;
};

// Collects an additive tree (through Add/Sub/Neg and constant multiples)
// into exact rational-coefficient terms plus a constant.
struct AdditiveCollector {
  std::vector<Term> terms;
  Rational constant = Rational(0);
  bool exact = true;

  void add_const(const Rational& c) {
    auto r = Rational::try_add(constant, c);
    if (r)
      constant = *r;
    else
      exact = false;
  }

  void add_term(Rational coeff, const Expr& core) {
    for (auto& t : terms) {
      if (equal(t.core, core)) {
        auto r = Rational::try_add(t.coeff, coeff);
        if (r) {
          t.coeff = *r;
          return;
        }
      }
    }
    terms.push_back({coeff, core});
  }

  void walk(const Expr& e, const Rational& coeff) {
    switch (e.op()) {
      case Op::Add:
        walk(e.child_a(), coeff);
        walk(e.child_b(), coeff);
        return;
      case Op::Sub:
        walk(e.child_a(), coeff);
        walk(e.child_b(), -coeff);
        return;
      case Op::Neg:
        walk(e.child_a(), -coeff);
        return;
      case Op::Const: {
        auto r = Rational::try_mul(coeff, e.value());
        if (r)
          add_const(*r);
        else
          add_term(coeff, e);
        return;
      }
      case Op::Mul: {
        if (e.child_a().is_const()) {
          auto r = Rational::try_mul(coeff, e.child_a().value());
          if (r) {
            walk(e.child_b(), *r);
            return;
          }
        }
        if (e.child_b().is_const()) {
          auto r = Rational::try_mul(coeff, e.child_b().value());
          if (r) {
            walk(e.child_a(), *r);
            return;
          }
        }
        add_term(coeff, e);
        return;
      }
      default:
        add_term(coeff, e);
        return;
    }
  }

  Expr rebuild() {
    std::erase_if(terms, [](const Term& t) { return t.coeff.is_zero(); });
    std::sort(terms.begin(), terms.end(), [](const Term& a, const Term& b) {
      return compare(a.core, b.core) < 0;
    });
    std::optional<Expr> acc;
    for (const auto& t : terms) {
      Rational mag = t.coeff.negative() ? -t.coeff : t.coeff;
      Expr piece = mag == Rational(1)
                       ? t.core
                       : Expr::constant(mag) * t.core;
      if (!acc) {
        acc = t.coeff.negative() ? -piece : piece;
      } else {
        acc = t.coeff.negative() ? (*acc - piece) : (*acc + piece);
      }
    }
    if (!constant.is_zero() || !acc) {
      Expr k = Expr::constant(constant);
      if (!acc)
        acc = k;
      else if (constant.negative())
        acc = *acc - Expr::constant(-constant);
      else
        acc = *acc + k;
    }
    return *acc;
  }
};

// Collects a multiplicative tree (through Mul/Div/Pow/Neg) into factors with
// exact rational exponents and a rational coefficient. Exponents of equal
// bases combine; this is exact on the common domain (fractional exponents
// already require a positive base by the pow invariant).
struct FactorCollector {
  struct Factor {
    Expr base;
    Rational exponent;
  };
  std::vector<Factor> factors;
  Rational coeff = Rational(1);
  bool zero = false;
  bool failed = false;  // fall back to the original node

  void mul_coeff(const Rational& c) {
    auto r = Rational::try_mul(coeff, c);
    if (r)
      coeff = *r;
    else
      failed = true;
  }

  void add_factor(const Expr& base, const Rational& exponent) {
    if (exponent.is_zero()) return;
    for (auto& f : factors) {
      if (equal(f.base, base)) {
        auto r = Rational::try_add(f.exponent, exponent);
        if (r) {
          f.exponent = *r;
          return;
        }
      }
    }
    factors.push_back({base, exponent});
  }

  void walk(const Expr& e, const Rational& expo) {
    if (failed) return;
    switch (e.op()) {
      case Op::Mul:
        walk(e.child_a(), expo);
        walk(e.child_b(), expo);
        return;
      case Op::Div:
        walk(e.child_a(), expo);
        walk(e.child_b(), -expo);
        return;
      case Op::Neg:
        if (expo.is_integer()) {
          if (expo.num() % 2 != 0) mul_coeff(Rational(-1));
          walk(e.child_a(), expo);
        } else {
          add_factor(e, expo);
        }
        return;
      case Op::Pow: {
        // Descending through pow is exact only when the outer exponent is
        // +-1 (whole-factor inversion) or everything stays integral;
        // otherwise (x^2)^(1/2) style rewrites would change values.
        const bool sound = expo == Rational(1) || expo == Rational(-1) ||
                           (expo.is_integer() && e.value().is_integer());
        auto q = Rational::try_mul(expo, e.value());
        if (sound && q) {
          walk(e.child_a(), *q);
        } else {
          add_factor(e, expo);
        }
        return;
      }
      case Op::Const: {
        if (e.value().is_zero()) {
          if (expo.negative())
            failed = true;  // keep the division-by-zero structure
          else if (!expo.is_zero())
            zero = true;
          return;
        }
        if (expo.is_integer()) {
          auto r = Rational::try_pow_int(e.value(), expo.num());
          if (r) {
            mul_coeff(*r);
            return;
          }
        }
        if (e.value() == Rational(1)) return;
        add_factor(e, expo);
        return;
      }
      default:
        add_factor(e, expo);
        return;
    }
  }

  Expr rebuild(const Expr& original) {
    if (failed) return original;
    if (zero) return c_int(0);
    std::erase_if(factors,
                  [](const Factor& f) { return f.exponent.is_zero(); });
    std::sort(factors.begin(), factors.end(),
              [](const Factor& a, const Factor& b) {
                return compare(a.base, b.base) < 0;
              });
    std::optional<Expr> acc;
    for (const auto& f : factors) {
      Expr piece;
      if (f.exponent == Rational(1)) {
        piece = f.base;
      } else {
        // Rebuilding a pow may hit the constant-base domain guard (e.g. a
        // stray (-2)^(1/2) that the source spelled differently); keep the
        // original instead of throwing.
        if (f.base.is_const() && !f.exponent.is_integer() &&
            f.base.value().num() <= 0)
          return original;
        if (f.base.is_const() && f.base.value().is_zero() &&
            f.exponent.negative())
          return original;
        piece = Expr::pow(f.base, f.exponent);
      }
      acc = acc ? (*acc * piece) : piece;
    }
    if (!acc) return Expr::constant(coeff);
    if (coeff == Rational(1)) return *acc;
    if (coeff == Rational(-1)) return -*acc;
    return Expr::constant(coeff) * *acc;
  }
};

Expr simp_rec(const Expr& e,
              std::unordered_map<const detail::ExprNode*, Expr>& memo) {
  auto it = memo.find(e.raw());
  if (it != memo.end()) return it->second;

  Expr out = e;
  switch (e.op()) {
    case Op::Const:
    case Op::Eps:
    case Op::Var:
      break;

    case Op::Neg: {
      Expr a = simp_rec(e.child_a(), memo);
      if (a.is_const())
        out = Expr::constant(-a.value());
      else if (a.op() == Op::Neg)
        out = a.child_a();
      else
        out = -a;
      break;
    }
    case Op::Abs: {
      Expr a = simp_rec(e.child_a(), memo);
      if (a.is_const()) {
        Rational v = a.value();
        out = Expr::constant(v.negative() ? -v : v);
      } else if (a.op() == Op::Abs) {
        out = a;
      } else if (a.op() == Op::Neg) {
        out = Expr::unary(Op::Abs, a.child_a());
      } else {
        out = Expr::unary(Op::Abs, a);
      }
      break;
    }
    case Op::Exp: {
      Expr a = simp_rec(e.child_a(), memo);
      out = a.is_const(Rational(0)) ? c_int(1) : Expr::unary(Op::Exp, a);
      break;
    }
    case Op::Log: {
      Expr a = simp_rec(e.child_a(), memo);
      out = a.is_const(Rational(1)) ? c_int(0) : Expr::unary(Op::Log, a);
      break;
    }
    case Op::Sin: {
      Expr a = simp_rec(e.child_a(), memo);
      out = a.is_const(Rational(0)) ? c_int(0) : Expr::unary(Op::Sin, a);
      break;
    }
    case Op::Cos: {
      Expr a = simp_rec(e.child_a(), memo);
      out = a.is_const(Rational(0)) ? c_int(1) : Expr::unary(Op::Cos, a);
      break;
    }
    case Op::Atan: {
      Expr a = simp_rec(e.child_a(), memo);
      out = a.is_const(Rational(0)) ? c_int(0) : Expr::unary(Op::Atan, a);
      break;
    }
    case Op::Smoothstep: {
      Expr a = simp_rec(e.child_a(), memo);
      if (a.is_const()) {
        if (a.value() <= Rational(0))
          out = c_int(0);
        else if (a.value() >= Rational(1))
          out = c_int(1);
        else
          out = smoothstep(a);
      } else {
        out = smoothstep(a);
      }
      break;
    }
    case Op::FlatExp: {
      Expr a = simp_rec(e.child_a(), memo);
      if (a.is_const() && a.value() <= Rational(0))
        out = c_int(0);
      else
        out = Expr::flatexp(a, e.flatexp_order());
      break;
    }

    case Op::Pow: {
      Expr base = simp_rec(e.child_a(), memo);
      Rational q = e.value();
      if (q.is_zero()) {
        out = c_int(1);
      } else if (q == Rational(1)) {
        out = base;
      } else if (base.is_const() && q.is_integer()) {
        auto r = Rational::try_pow_int(base.value(), q.num());
        out = r ? Expr::constant(*r) : Expr::pow(base, q);
      } else if (base.op() == Op::Pow && q.is_integer()) {
        auto combined = Rational::try_mul(base.value(), q);
        if (combined && *combined == Rational(1))
          out = base.child_a();
        else
          out = combined ? Expr::pow(base.child_a(), *combined)
                         : Expr::pow(base, q);
      } else if (base.is_const(Rational(1))) {
        out = c_int(1);
      } else {
        out = Expr::pow(base, q);
      }
      break;
    }

    case Op::Add:
    case Op::Sub: {
      Expr a = simp_rec(e.child_a(), memo);
      Expr b = simp_rec(e.child_b(), memo);
      Expr node = Expr::binary(e.op(), a, b);
      AdditiveCollector col;
      col.walk(node, Rational(1));
      out = col.exact ? col.rebuild() : node;
      break;
    }

    case Op::Mul:
    case Op::Div: {
      Expr a = simp_rec(e.child_a(), memo);
      Expr b = simp_rec(e.child_b(), memo);
      Expr node = Expr::binary(e.op(), a, b);
      FactorCollector col;
      col.walk(node, Rational(1));
      out = col.rebuild(node);
      break;
    }
  }

  memo.emplace(e.raw(), out);
  return out;
}

}  // namespace

Expr simplify(const Expr& e) {
  std::unordered_map<const detail::ExprNode*, Expr> memo;
  return simp_rec(e, memo);
}

// ---------------------------------------------------------------------------
// Substitution

namespace {
Expr subst_rec(const Expr& e, const Expr* eps_sub,
               std::span<const Expr> var_subs,
               std::unordered_map<const detail::ExprNode*, Expr>& memo) {
  if (e.op() == Op::Eps) return eps_sub ? *eps_sub : e;
  if (e.op() == Op::Var) {
    int i = e.var_index();
    if (i >= 1 && static_cast<std::size_t>(i) <= var_subs.size())
      return var_subs[i - 1];
    return e;
  }
  if (e.op() == Op::Const) return e;
  auto it = memo.find(e.raw());
  if (it != memo.end()) return it->second;

  Expr out = e;
  Expr a = subst_rec(e.child_a(), eps_sub, var_subs, memo);
  if (e.op() == Op::Pow) {
    out = Expr::pow(a, e.value());
  } else if (e.op() == Op::FlatExp) {
    out = Expr::flatexp(a, e.flatexp_order());
  } else if (op_is_unary(e.op())) {
    out = Expr::unary(e.op(), a);
  } else {
    Expr b = subst_rec(e.child_b(), eps_sub, var_subs, memo);
    out = Expr::binary(e.op(), a, b);
  }
  memo.emplace(e.raw(), out);
  return out;
}
}  // namespace

Expr substitute(const Expr& e, const Expr* eps_sub,
                std::span<const Expr> var_subs) {
  std::unordered_map<const detail::ExprNode*, Expr> memo;
  return subst_rec(e, eps_sub, var_subs, memo);
}

std::optional<Rational> rational_from_double(double v) {
  if (!std::isfinite(v)) return std::nullopt;
  if (v == 0.0) return Rational(0);
  int e = 0;
  double m = std::frexp(v, &e);  // v = m * 2^e, |m| in [0.5, 1)
  std::int64_t mant = static_cast<std::int64_t>(std::ldexp(m, 53));
  int shift = e - 53;
  __int128 num = mant, den = 1;
  if (shift >= 0) {
    if (shift > 62) return std::nullopt;
    num <<= shift;
  } else {
    if (-shift > 62) return std::nullopt;
    den <<= -shift;
  }
  return Rational::make_checked(num, den);
}

Expr const_from_double(double v) {
  auto r = rational_from_double(v);
  if (!r)
    throw ExprError("value not exactly representable as a rational: " +
                    std::to_string(v));
  return Expr::constant(*r);
}

}  // namespace clab
