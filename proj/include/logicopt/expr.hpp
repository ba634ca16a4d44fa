// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace logicopt {

/// Raised when an expression is evaluated (or differentiated) outside the
/// domain of one of its primitives. Signals a modeling bug, not a solver
/// failure.
class ExprError : public std::runtime_error {
 public:
  explicit ExprError(const std::string& what) : std::runtime_error(what) {}
};

enum class Op : std::uint8_t {
  Const,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Pow,  // constant exponent only
  Neg,
  Sin,
  Cos,
  Exp,
  Sqrt,
};

using ExprId = std::int32_t;
inline constexpr ExprId kNoExpr = -1;

struct ExprNode {
  Op op = Op::Const;
  ExprId a = kNoExpr;  // first child
  ExprId b = kNoExpr;  // second child (binary ops)
  std::int32_t var = -1;
  double value = 0.0;  // constant value, or exponent for Pow
};

/// Append-only arena of expression nodes. Children always precede parents,
/// so node order is a valid topological order. Nodes are immutable once
/// created; subgraphs may be shared freely.
class ExprArena {
 public:
  ExprId constant(double v);
  ExprId variable(int index);

  ExprId add(ExprId x, ExprId y) { return binary(Op::Add, x, y); }
  ExprId sub(ExprId x, ExprId y) { return binary(Op::Sub, x, y); }
  ExprId mul(ExprId x, ExprId y) { return binary(Op::Mul, x, y); }
  ExprId div(ExprId x, ExprId y) { return binary(Op::Div, x, y); }
  ExprId pow(ExprId x, double exponent);
  ExprId neg(ExprId x) { return unary(Op::Neg, x); }
  ExprId sin(ExprId x) { return unary(Op::Sin, x); }
  ExprId cos(ExprId x) { return unary(Op::Cos, x); }
  ExprId exp(ExprId x) { return unary(Op::Exp, x); }
  ExprId sqrt(ExprId x) { return unary(Op::Sqrt, x); }

  const ExprNode& node(ExprId id) const { return nodes_[static_cast<std::size_t>(id)]; }
  std::size_t size() const { return nodes_.size(); }

 private:
  ExprId binary(Op op, ExprId x, ExprId y);
  ExprId unary(Op op, ExprId x);
  void check(ExprId id) const;

  std::vector<ExprNode> nodes_;
};

/// Scratch space for eval/gradient. Owned by the caller so concurrent
/// evaluations of shared arenas never contend.
struct EvalWorkspace {
  std::vector<double> value;
  std::vector<double> adjoint;
  std::vector<ExprId> order;
  std::vector<ExprId> stack;
  std::vector<std::uint8_t> state;
};

/// Topological order of the nodes reachable from `root`, plus the sorted set
/// of variable indices the expression depends on. Compiling once and reusing
/// keeps repeated evaluation allocation-free.
struct CompiledExpr {
  ExprId root = kNoExpr;
  std::vector<ExprId> order;
  std::vector<int> vars;
};

CompiledExpr compile(const ExprArena& arena, ExprId root);

/// Value of the compiled expression at `x`. Only nodes reachable from the
/// root are touched.
double eval(const ExprArena& arena, const CompiledExpr& e, std::span<const double> x,
            EvalWorkspace& ws);

/// Value plus reverse-sweep gradient. Gradient entries are written only for
/// the variables in `e.vars` (after zeroing those entries); `grad` must have
/// one slot per declared variable.
double eval_gradient(const ExprArena& arena, const CompiledExpr& e, std::span<const double> x,
                     EvalWorkspace& ws, std::span<double> grad);

/// One-shot helpers that compile internally.
double eval(const ExprArena& arena, ExprId root, std::span<const double> x, EvalWorkspace& ws);
std::vector<double> gradient(const ExprArena& arena, ExprId root, std::span<const double> x,
                             EvalWorkspace& ws);

/// Lightweight handle for building expressions with operator syntax.
struct Expr {
  ExprArena* arena = nullptr;
  ExprId id = kNoExpr;
};

inline Expr wrap(ExprArena& a, ExprId id) { return Expr{&a, id}; }

namespace detail {
inline ExprArena& same_arena(const Expr& x, const Expr& y) {
  if (x.arena != y.arena) throw std::logic_error("expressions belong to different arenas");
  return *x.arena;
}
}  // namespace detail

inline Expr operator+(Expr x, Expr y) {
  auto& a = detail::same_arena(x, y);
  return {&a, a.add(x.id, y.id)};
}
inline Expr operator-(Expr x, Expr y) {
  auto& a = detail::same_arena(x, y);
  return {&a, a.sub(x.id, y.id)};
}
inline Expr operator*(Expr x, Expr y) {
  auto& a = detail::same_arena(x, y);
  return {&a, a.mul(x.id, y.id)};
}
inline Expr operator/(Expr x, Expr y) {
  auto& a = detail::same_arena(x, y);
  return {&a, a.div(x.id, y.id)};
}
inline Expr operator-(Expr x) { return {x.arena, x.arena->neg(x.id)}; }

inline Expr operator+(Expr x, double c) { return x + Expr{x.arena, x.arena->constant(c)}; }
inline Expr operator+(double c, Expr x) { return Expr{x.arena, x.arena->constant(c)} + x; }
inline Expr operator-(Expr x, double c) { return x - Expr{x.arena, x.arena->constant(c)}; }
inline Expr operator-(double c, Expr x) { return Expr{x.arena, x.arena->constant(c)} - x; }
inline Expr operator*(Expr x, double c) { return x * Expr{x.arena, x.arena->constant(c)}; }
inline Expr operator*(double c, Expr x) { return Expr{x.arena, x.arena->constant(c)} * x; }
inline Expr operator/(Expr x, double c) { return x / Expr{x.arena, x.arena->constant(c)}; }
inline Expr operator/(double c, Expr x) { return Expr{x.arena, x.arena->constant(c)} / x; }

inline Expr sin(Expr x) { return {x.arena, x.arena->sin(x.id)}; }
inline Expr cos(Expr x) { return {x.arena, x.arena->cos(x.id)}; }
inline Expr exp(Expr x) { return {x.arena, x.arena->exp(x.id)}; }
inline Expr sqrt(Expr x) { return {x.arena, x.arena->sqrt(x.id)}; }
inline Expr pow(Expr x, double e) { return {x.arena, x.arena->pow(x.id, e)}; }
inline Expr square(Expr x) { return pow(x, 2.0); }

/// Declared decision variables of a problem: name, bounds, and the finite box
/// multistart samples initial points from.
struct VariableInfo {
  std::string name;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
  double init_lo = -10.0;
  double init_hi = 10.0;
};

class VariableSet {
 public:
  int add(std::string name, double lower, double upper);
  int add(std::string name, double lower, double upper, double init_lo, double init_hi);
  int size() const { return static_cast<int>(vars_.size()); }
  const VariableInfo& operator[](int i) const { return vars_[static_cast<std::size_t>(i)]; }
  VariableInfo& operator[](int i) { return vars_[static_cast<std::size_t>(i)]; }
  const std::vector<VariableInfo>& all() const { return vars_; }
  int index_of(const std::string& name) const;  // -1 if absent

 private:
  std::vector<VariableInfo> vars_;
};

}  // namespace logicopt
