#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rdafront {

/// The five variables an expression may reference.
enum class Var : std::uint8_t { X = 0, Y = 1, Z = 2, U = 3, T = 4 };
inline constexpr int kVarCount = 5;

const char* var_name(Var v);
std::optional<Var> var_from_name(std::string_view name);

/// Variable values by slot; `bound` marks which slots carry a value.
struct Bindings {
  std::array<double, kVarCount> value{};
  unsigned bound = 0;

  Bindings& set(Var v, double x) {
    value[static_cast<int>(v)] = x;
    bound |= 1u << static_cast<int>(v);
    return *this;
  }
  static Bindings xyz(double x, double y, double z) {
    return Bindings{}.set(Var::X, x).set(Var::Y, y).set(Var::Z, z);
  }
  static Bindings uxyz(double u, double x, double y, double z) { return xyz(x, y, z).set(Var::U, u); }
};

/// Immutable expression tree. Copies share nodes.
class Expr {
 public:
  enum class Kind : std::uint8_t { Const, Variable, Unary, Binary };
  enum class Func : std::uint8_t { Sin, Cos, Tan, Tanh, Exp, Log, Sqrt, Abs, Neg };

  struct Node {
    Kind kind;
    double value = 0.0;      // Const
    Var var = Var::X;        // Variable
    Func func = Func::Neg;   // Unary
    char op = 0;             // Binary: + - * / ^
    std::shared_ptr<const Node> lhs, rhs;
  };

  Expr() : Expr(constant(0.0)) {}

  static Expr constant(double c);
  static Expr variable(Var v);
  static Expr unary(Func f, const Expr& arg);
  static Expr binary(char op, const Expr& lhs, const Expr& rhs);

  Kind kind() const { return node_->kind; }
  const Node& node() const { return *node_; }
  Expr lhs() const { return Expr(node_->lhs); }
  Expr rhs() const { return Expr(node_->rhs); }

  bool is_constant() const { return node_->kind == Kind::Const; }
  bool is_constant(double c) const { return is_constant() && node_->value == c; }
  bool depends_on(Var v) const;
  /// Number of nodes in the tree.
  std::size_t size() const;

 private:
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

/// Parses the grammar documented in docs/expressions.md.
/// Throws Syntax (with byte offset) or UnknownIdentifier.
Expr parse(std::string_view text);

/// Throws UnboundVariable or Domain.
double eval(const Expr& e, const Bindings& b);
double eval(const Expr& e, const std::map<std::string, double>& bindings);

/// Exact symbolic derivative with constant folding.
Expr differentiate(const Expr& e, Var v);

/// Fully parenthesised text that parse() reads back to an equivalent tree.
std::string to_string(const Expr& e);

/// Flattened postfix form of an Expr for evaluation in hot loops.
class CompiledExpr {
 public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& e);

  /// vars must hold kVarCount values indexed by Var. Unbound slots are the
  /// caller's responsibility; a non-finite result raises a Domain error.
  double operator()(const double* vars) const;
  double operator()(const Bindings& b) const { return (*this)(b.value.data()); }
  double operator()(double x, double y, double z) const {
    const double v[kVarCount] = {x, y, z, 0.0, 0.0};
    return (*this)(v);
  }
  double operator()(double u, double x, double y, double z) const {
    const double v[kVarCount] = {x, y, z, u, 0.0};
    return (*this)(v);
  }

  bool is_constant() const { return code_.size() == 1 && code_[0].op == Op::Const; }
  /// Bit mask of variables referenced by the program.
  unsigned uses() const { return uses_; }

 private:
  enum class Op : std::uint8_t { Const, Var, Sin, Cos, Tan, Tanh, Exp, Log, Sqrt, Abs, Neg, Add, Sub, Mul, Div, Pow };
  struct Instr {
    Op op;
    std::uint8_t var = 0;
    double value = 0.0;
  };
  void emit(const Expr& e);

  std::vector<Instr> code_;
  int max_depth_ = 0;
  unsigned uses_ = 0;
};

}  // namespace rdafront
