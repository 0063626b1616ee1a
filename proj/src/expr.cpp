#include "rdafront/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <numbers>

#include "rdafront/error.hpp"

namespace rdafront {

namespace {

constexpr std::array<const char*, kVarCount> kVarNames = {"x", "y", "z", "u", "t"};

struct FuncName {
  const char* name;
  Expr::Func func;
};
constexpr std::array<FuncName, 9> kFuncs = {{{"sin", Expr::Func::Sin},
                                             {"cos", Expr::Func::Cos},
                                             {"tan", Expr::Func::Tan},
                                             {"tanh", Expr::Func::Tanh},
                                             {"exp", Expr::Func::Exp},
                                             {"log", Expr::Func::Log},
                                             {"sqrt", Expr::Func::Sqrt},
                                             {"abs", Expr::Func::Abs},
                                             {"neg", Expr::Func::Neg}}};

const char* func_name(Expr::Func f) {
  for (const auto& fn : kFuncs)
    if (fn.func == f) return fn.name;
  return "?";
}

double apply_unary(Expr::Func f, double a) {
  switch (f) {
    case Expr::Func::Sin: return std::sin(a);
    case Expr::Func::Cos: return std::cos(a);
    case Expr::Func::Tan: return std::tan(a);
    case Expr::Func::Tanh: return std::tanh(a);
    case Expr::Func::Exp: return std::exp(a);
    case Expr::Func::Log: return std::log(a);
    case Expr::Func::Sqrt: return std::sqrt(a);
    case Expr::Func::Abs: return std::fabs(a);
    case Expr::Func::Neg: return -a;
  }
  return 0.0;
}

double apply_binary(char op, double a, double b) {
  switch (op) {
    case '+': return a + b;
    case '-': return a - b;
    case '*': return a * b;
    case '/': return a / b;
    case '^': return std::pow(a, b);
  }
  return 0.0;
}

// ---------------------------------------------------------------- parser

class Parser {
 public:
  explicit Parser(std::string_view s) : s_(s) {}

  Expr parse_all() {
    skip_ws();
    if (pos_ >= s_.size()) fail("empty expression");
    Expr e = parse_sum();
    skip_ws();
    if (pos_ != s_.size()) fail(std::string("unexpected '") + s_[pos_] + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorKind::Syntax, "expr.parse", "syntax error at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  Expr parse_sum() {
    Expr lhs = parse_product();
    for (;;) {
      if (accept('+')) lhs = Expr::binary('+', lhs, parse_product());
      else if (accept('-')) lhs = Expr::binary('-', lhs, parse_product());
      else return lhs;
    }
  }

  Expr parse_product() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = Expr::binary('*', lhs, parse_unary());
      else if (accept('/')) lhs = Expr::binary('/', lhs, parse_unary());
      else return lhs;
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::unary(Expr::Func::Neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  // '^' binds tighter than unary minus and associates to the left.
  Expr parse_power() {
    Expr lhs = parse_primary();
    while (accept('^')) lhs = Expr::binary('^', lhs, parse_exponent());
    return lhs;
  }

  Expr parse_exponent() {
    if (accept('-')) return Expr::unary(Expr::Func::Neg, parse_exponent());
    return parse_primary();
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of input");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_sum();
      if (!accept(')')) fail("expected ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    fail(std::string("unexpected '") + c + "'");
  }

  Expr parse_number() {
    const std::string rest(s_.substr(pos_));
    char* end = nullptr;
    const double v = std::strtod(rest.c_str(), &end);
    if (end == rest.c_str()) fail("malformed number");
    pos_ += static_cast<std::size_t>(end - rest.c_str());
    return Expr::constant(v);
  }

  Expr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) ++pos_;
    const std::string_view name = s_.substr(start, pos_ - start);
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == '(') {
      for (const auto& fn : kFuncs) {
        if (name == fn.name) {
          ++pos_;
          Expr arg = parse_sum();
          if (!accept(')')) fail("expected ')' after function argument");
          return Expr::unary(fn.func, arg);
        }
      }
      throw Error(ErrorKind::UnknownIdentifier, "expr.parse",
                  "unknown function '" + std::string(name) + "' at offset " + std::to_string(start));
    }
    if (name == "pi") return Expr::constant(std::numbers::pi);
    if (auto v = var_from_name(name)) return Expr::variable(*v);
    throw Error(ErrorKind::UnknownIdentifier, "expr.parse",
                "unknown identifier '" + std::string(name) + "' at offset " + std::to_string(start));
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

double eval_node(const Expr::Node& n, const Bindings& b) {
  switch (n.kind) {
    case Expr::Kind::Const: return n.value;
    case Expr::Kind::Variable: {
      const int slot = static_cast<int>(n.var);
      if (!(b.bound & (1u << slot))) {
        throw Error(ErrorKind::UnboundVariable, "expr.eval", std::string("variable '") + var_name(n.var) + "' is unbound");
      }
      return b.value[slot];
    }
    case Expr::Kind::Unary: {
      const double a = eval_node(*n.lhs, b);
      if (n.func == Expr::Func::Log && !(a > 0.0)) {
        throw Error(ErrorKind::Domain, "expr.eval", "log of non-positive value " + std::to_string(a));
      }
      if (n.func == Expr::Func::Sqrt && a < 0.0) {
        throw Error(ErrorKind::Domain, "expr.eval", "sqrt of negative value " + std::to_string(a));
      }
      return apply_unary(n.func, a);
    }
    case Expr::Kind::Binary: {
      const double a = eval_node(*n.lhs, b);
      const double c = eval_node(*n.rhs, b);
      if (n.op == '/' && c == 0.0) throw Error(ErrorKind::Domain, "expr.eval", "division by zero");
      const double r = apply_binary(n.op, a, c);
      if (!std::isfinite(r)) throw Error(ErrorKind::Domain, "expr.eval", std::string("non-finite result of '") + n.op + "'");
      return r;
    }
  }
  return 0.0;
}

void print(const Expr& e, std::string& out) {
  const auto& n = e.node();
  switch (n.kind) {
    case Expr::Kind::Const: {
      if (n.value == std::numbers::pi) {
        out += "pi";
        return;
      }
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      if (n.value < 0) {
        out += "(";
        out += buf;
        out += ")";
      } else {
        out += buf;
      }
      return;
    }
    case Expr::Kind::Variable: out += var_name(n.var); return;
    case Expr::Kind::Unary:
      if (n.func == Expr::Func::Neg) {
        out += "(-";
        print(e.lhs(), out);
        out += ")";
      } else {
        out += func_name(n.func);
        out += "(";
        print(e.lhs(), out);
        out += ")";
      }
      return;
    case Expr::Kind::Binary:
      out += "(";
      print(e.lhs(), out);
      out += n.op;
      print(e.rhs(), out);
      out += ")";
      return;
  }
}

}  // namespace

const char* var_name(Var v) { return kVarNames[static_cast<int>(v)]; }

std::optional<Var> var_from_name(std::string_view name) {
  for (int i = 0; i < kVarCount; ++i)
    if (name == kVarNames[i]) return static_cast<Var>(i);
  return std::nullopt;
}

// Constructors fold constants and the 0/1 identities so derivative trees
// stay small.

Expr Expr::constant(double c) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Const;
  n->value = c;
  return Expr(n);
}

Expr Expr::variable(Var v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->var = v;
  return Expr(n);
}

Expr Expr::unary(Func f, const Expr& arg) {
  if (arg.is_constant()) {
    const double r = apply_unary(f, arg.node().value);
    if (std::isfinite(r)) return constant(r);
  }
  if (f == Func::Neg && arg.kind() == Kind::Unary && arg.node().func == Func::Neg) return arg.lhs();
  auto n = std::make_shared<Node>();
  n->kind = Kind::Unary;
  n->func = f;
  n->lhs = arg.node_;
  return Expr(n);
}

Expr Expr::binary(char op, const Expr& lhs, const Expr& rhs) {
  if (lhs.is_constant() && rhs.is_constant()) {
    const double r = apply_binary(op, lhs.node().value, rhs.node().value);
    if (std::isfinite(r)) return constant(r);
  }
  switch (op) {
    case '+':
      if (lhs.is_constant(0.0)) return rhs;
      if (rhs.is_constant(0.0)) return lhs;
      break;
    case '-':
      if (rhs.is_constant(0.0)) return lhs;
      if (lhs.is_constant(0.0)) return unary(Func::Neg, rhs);
      break;
    case '*':
      if (lhs.is_constant(0.0) || rhs.is_constant(0.0)) return constant(0.0);
      if (lhs.is_constant(1.0)) return rhs;
      if (rhs.is_constant(1.0)) return lhs;
      break;
    case '/':
      if (lhs.is_constant(0.0) && !rhs.is_constant(0.0)) return constant(0.0);
      if (rhs.is_constant(1.0)) return lhs;
      break;
    case '^':
      if (rhs.is_constant(1.0)) return lhs;
      if (rhs.is_constant(0.0)) return constant(1.0);
      break;
    default:
      throw Error(ErrorKind::InvalidArgument, "expr.binary", std::string("unknown operator '") + op + "'");
  }
  auto n = std::make_shared<Node>();
  n->kind = Kind::Binary;
  n->op = op;
  n->lhs = lhs.node_;
  n->rhs = rhs.node_;
  return Expr(n);
}

bool Expr::depends_on(Var v) const {
  switch (node_->kind) {
    case Kind::Const: return false;
    case Kind::Variable: return node_->var == v;
    case Kind::Unary: return lhs().depends_on(v);
    case Kind::Binary: return lhs().depends_on(v) || rhs().depends_on(v);
  }
  return false;
}

std::size_t Expr::size() const {
  switch (node_->kind) {
    case Kind::Const:
    case Kind::Variable: return 1;
    case Kind::Unary: return 1 + lhs().size();
    case Kind::Binary: return 1 + lhs().size() + rhs().size();
  }
  return 1;
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::binary('+', a, b); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::binary('-', a, b); }
Expr operator*(const Expr& a, const Expr& b) { return Expr::binary('*', a, b); }
Expr operator/(const Expr& a, const Expr& b) { return Expr::binary('/', a, b); }
Expr operator-(const Expr& a) { return Expr::unary(Expr::Func::Neg, a); }

Expr parse(std::string_view text) { return Parser(text).parse_all(); }

double eval(const Expr& e, const Bindings& b) { return eval_node(e.node(), b); }

double eval(const Expr& e, const std::map<std::string, double>& bindings) {
  Bindings b;
  for (const auto& [name, value] : bindings) {
    auto v = var_from_name(name);
    if (!v) throw Error(ErrorKind::UnknownIdentifier, "expr.eval", "unknown variable '" + name + "'");
    b.set(*v, value);
  }
  return eval(e, b);
}

Expr differentiate(const Expr& e, Var v) {
  using F = Expr::Func;
  const auto& n = e.node();
  switch (n.kind) {
    case Expr::Kind::Const: return Expr::constant(0.0);
    case Expr::Kind::Variable: return Expr::constant(n.var == v ? 1.0 : 0.0);
    case Expr::Kind::Unary: {
      const Expr a = e.lhs();
      const Expr da = differentiate(a, v);
      if (da.is_constant(0.0)) return Expr::constant(0.0);
      switch (n.func) {
        case F::Neg: return -da;
        case F::Sin: return Expr::unary(F::Cos, a) * da;
        case F::Cos: return -(Expr::unary(F::Sin, a) * da);
        case F::Tan: {
          const Expr t = Expr::unary(F::Tan, a);
          return (Expr::constant(1.0) + t * t) * da;
        }
        case F::Tanh: {
          const Expr t = Expr::unary(F::Tanh, a);
          return (Expr::constant(1.0) - t * t) * da;
        }
        case F::Exp: return e * da;
        case F::Log: return da / a;
        case F::Sqrt: return da / (Expr::constant(2.0) * e);
        case F::Abs: return (a / e) * da;
      }
      break;
    }
    case Expr::Kind::Binary: {
      const Expr a = e.lhs(), b = e.rhs();
      const Expr da = differentiate(a, v), db = differentiate(b, v);
      switch (n.op) {
        case '+': return da + db;
        case '-': return da - db;
        case '*': return da * b + a * db;
        case '/': return (da * b - a * db) / (b * b);
        case '^':
          if (!b.depends_on(v)) {
            return b * Expr::binary('^', a, b - Expr::constant(1.0)) * da;
          }
          // d(a^b) = a^b (b' log a + b a'/a)
          return e * (db * Expr::unary(F::Log, a) + b * da / a);
      }
      break;
    }
  }
  return Expr::constant(0.0);
}

std::string to_string(const Expr& e) {
  std::string out;
  print(e, out);
  return out;
}

// ---------------------------------------------------------------- compiled

CompiledExpr::CompiledExpr(const Expr& e) {
  emit(e);
  int depth = 0;
  for (const auto& ins : code_) {
    switch (ins.op) {
      case Op::Const:
      case Op::Var: ++depth; break;
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
      case Op::Pow: --depth; break;
      default: break;
    }
    max_depth_ = std::max(max_depth_, depth);
  }
}

void CompiledExpr::emit(const Expr& e) {
  const auto& n = e.node();
  switch (n.kind) {
    case Expr::Kind::Const: code_.push_back({Op::Const, 0, n.value}); return;
    case Expr::Kind::Variable:
      code_.push_back({Op::Var, static_cast<std::uint8_t>(n.var), 0.0});
      uses_ |= 1u << static_cast<int>(n.var);
      return;
    case Expr::Kind::Unary: {
      emit(e.lhs());
      static constexpr Op map[] = {Op::Sin, Op::Cos, Op::Tan, Op::Tanh, Op::Exp, Op::Log, Op::Sqrt, Op::Abs, Op::Neg};
      code_.push_back({map[static_cast<int>(n.func)], 0, 0.0});
      return;
    }
    case Expr::Kind::Binary: {
      emit(e.lhs());
      emit(e.rhs());
      Op op = Op::Add;
      switch (n.op) {
        case '+': op = Op::Add; break;
        case '-': op = Op::Sub; break;
        case '*': op = Op::Mul; break;
        case '/': op = Op::Div; break;
        case '^': op = Op::Pow; break;
      }
      code_.push_back({op, 0, 0.0});
      return;
    }
  }
}

double CompiledExpr::operator()(const double* vars) const {
  constexpr int kInline = 64;
  double inline_stack[kInline];
  std::vector<double> heap;
  double* st = inline_stack;
  if (max_depth_ > kInline) {
    heap.resize(static_cast<std::size_t>(max_depth_));
    st = heap.data();
  }
  int sp = 0;
  for (const auto& ins : code_) {
    switch (ins.op) {
      case Op::Const: st[sp++] = ins.value; break;
      case Op::Var: st[sp++] = vars[ins.var]; break;
      case Op::Sin: st[sp - 1] = std::sin(st[sp - 1]); break;
      case Op::Cos: st[sp - 1] = std::cos(st[sp - 1]); break;
      case Op::Tan: st[sp - 1] = std::tan(st[sp - 1]); break;
      case Op::Tanh: st[sp - 1] = std::tanh(st[sp - 1]); break;
      case Op::Exp: st[sp - 1] = std::exp(st[sp - 1]); break;
      case Op::Log: st[sp - 1] = std::log(st[sp - 1]); break;
      case Op::Sqrt: st[sp - 1] = std::sqrt(st[sp - 1]); break;
      case Op::Abs: st[sp - 1] = std::fabs(st[sp - 1]); break;
      case Op::Neg: st[sp - 1] = -st[sp - 1]; break;
      case Op::Add: --sp; st[sp - 1] += st[sp]; break;
      case Op::Sub: --sp; st[sp - 1] -= st[sp]; break;
      case Op::Mul: --sp; st[sp - 1] *= st[sp]; break;
      case Op::Div: --sp; st[sp - 1] /= st[sp]; break;
      case Op::Pow: --sp; st[sp - 1] = std::pow(st[sp - 1], st[sp]); break;
    }
  }
  const double r = code_.empty() ? 0.0 : st[0];
  if (!std::isfinite(r)) throw Error(ErrorKind::Domain, "expr.eval", "non-finite expression value");
  return r;
}

}  // namespace rdafront
