#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>

#include "fracvar/errors.hpp"

namespace fracvar {

// Grammar (whitespace ignored):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | variable | func '(' expr ')' | '(' expr ')'
//   func    := sin | cos | exp | log | sqrt
//   variable:= x | y<i> | D[y<i>] | lam<j>   i = 1..N, j = 1..r
//
// y<i> is the i-th trajectory component, D[y<i>] its combined Caputo
// derivative. In positional notation the Lagrangian's argument list is
// (x, y1..yN, D[y1]..D[yN]), so the partial with index i + 1 is y<i> and
// the partial with index N + 1 + i is D[y<i>].

enum class VarKind { x, y, dy, lam };

struct VarId {
  VarKind kind = VarKind::x;
  std::size_t index = 0;  // 1-based for y, dy and lam; 0 for x

  static VarId x() { return {VarKind::x, 0}; }
  static VarId y(std::size_t i) { return {VarKind::y, i}; }
  static VarId dy(std::size_t i) { return {VarKind::dy, i}; }
  static VarId lam(std::size_t j) { return {VarKind::lam, j}; }

  std::string name() const;
  friend bool operator==(const VarId&, const VarId&) = default;
};

enum class UnaryOp { neg, sin, cos, exp, log, sqrt };
enum class BinaryOp { add, sub, mul, div, pow };

struct ExprNode;

/// Immutable expression tree. Copies share structure.
class Expr {
 public:
  static Expr constant(double value);
  static Expr variable(VarId id);
  static Expr unary(UnaryOp op, Expr child);
  static Expr binary(BinaryOp op, Expr lhs, Expr rhs);

  const ExprNode& node() const noexcept { return *node_; }

  /// Largest index of the given kind used anywhere in the tree (0 if none).
  std::size_t max_index(VarKind kind) const;
  bool depends_on(VarId id) const;

 private:
  explicit Expr(std::shared_ptr<const ExprNode> node) : node_(std::move(node)) {}
  std::shared_ptr<const ExprNode> node_;
};

struct Constant {
  double value;
};
struct Variable {
  VarId id;
};
struct Unary {
  UnaryOp op;
  Expr child;
};
struct Binary {
  BinaryOp op;
  Expr lhs;
  Expr rhs;
};

struct ExprNode {
  std::variant<Constant, Variable, Unary, Binary> v;
};

/// Values bound to the variables. y, dy have N entries; lam has r.
struct EvalEnv {
  double x = 0.0;
  std::span<const double> y;
  std::span<const double> dy;
  std::span<const double> lam;
};

/// Raised for log/sqrt of negative arguments, division by zero and other
/// non-finite results.
class EvalError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// Throws ParseError (with byte offset) on syntax errors, unknown
/// identifiers, and indices outside 1..n_components / 1..n_multipliers.
Expr parse(std::string_view text, std::size_t n_components,
           std::size_t n_multipliers);

/// Throws EvalError on domain errors and PreconditionError when a variable
/// index exceeds the environment.
double eval(const Expr& e, const EvalEnv& env);

/// Symbolic derivative with respect to `var`, with constant folding only.
Expr partial(const Expr& e, VarId var);

/// Minimal-parenthesis rendering that parses back to the same tree.
std::string to_string(const Expr& e);

bool structurally_equal(const Expr& a, const Expr& b);

}  // namespace fracvar
