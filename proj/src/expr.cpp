// SPDX-License-Identifier: Apache-2.0
#include "logicopt/expr.hpp"

#include <algorithm>
#include <cmath>

namespace logicopt {

ExprId ExprArena::constant(double v) {
  ExprNode n;
  n.op = Op::Const;
  n.value = v;
  nodes_.push_back(n);
  return static_cast<ExprId>(nodes_.size() - 1);
}

ExprId ExprArena::variable(int index) {
  if (index < 0) throw std::invalid_argument("variable index must be nonnegative");
  ExprNode n;
  n.op = Op::Var;
  n.var = index;
  nodes_.push_back(n);
  return static_cast<ExprId>(nodes_.size() - 1);
}

ExprId ExprArena::pow(ExprId x, double exponent) {
  check(x);
  ExprNode n;
  n.op = Op::Pow;
  n.a = x;
  n.value = exponent;
  nodes_.push_back(n);
  return static_cast<ExprId>(nodes_.size() - 1);
}

ExprId ExprArena::binary(Op op, ExprId x, ExprId y) {
  check(x);
  check(y);
  ExprNode n;
  n.op = op;
  n.a = x;
  n.b = y;
  nodes_.push_back(n);
  return static_cast<ExprId>(nodes_.size() - 1);
}

ExprId ExprArena::unary(Op op, ExprId x) {
  check(x);
  ExprNode n;
  n.op = op;
  n.a = x;
  nodes_.push_back(n);
  return static_cast<ExprId>(nodes_.size() - 1);
}

void ExprArena::check(ExprId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= nodes_.size())
    throw std::logic_error("expression id out of range");
}

CompiledExpr compile(const ExprArena& arena, ExprId root) {
  if (root < 0 || static_cast<std::size_t>(root) >= arena.size())
    throw std::logic_error("compile: root id out of range");
  CompiledExpr out;
  out.root = root;
  // Children always have smaller ids than parents, so a DFS post-order is a
  // topological order of the reachable subgraph.
  std::vector<std::uint8_t> state(arena.size(), 0);
  std::vector<ExprId> stack;
  stack.push_back(root);
  while (!stack.empty()) {
    ExprId id = stack.back();
    std::uint8_t& st = state[static_cast<std::size_t>(id)];
    if (st == 2) {
      stack.pop_back();
      continue;
    }
    const ExprNode& n = arena.node(id);
    if (st == 0) {
      st = 1;
      if (n.b != kNoExpr && state[static_cast<std::size_t>(n.b)] != 2) stack.push_back(n.b);
      if (n.a != kNoExpr && state[static_cast<std::size_t>(n.a)] != 2) stack.push_back(n.a);
      continue;
    }
    st = 2;
    stack.pop_back();
    out.order.push_back(id);
    if (n.op == Op::Var) out.vars.push_back(n.var);
  }
  std::sort(out.vars.begin(), out.vars.end());
  out.vars.erase(std::unique(out.vars.begin(), out.vars.end()), out.vars.end());
  return out;
}

namespace {

void ensure_capacity(EvalWorkspace& ws, std::size_t n) {
  if (ws.value.size() < n) ws.value.resize(n);
  if (ws.adjoint.size() < n) ws.adjoint.resize(n);
}

double forward_sweep(const ExprArena& arena, const CompiledExpr& e, std::span<const double> x,
                     EvalWorkspace& ws) {
  ensure_capacity(ws, arena.size());
  auto& v = ws.value;
  for (ExprId id : e.order) {
    const ExprNode& n = arena.node(id);
    const std::size_t i = static_cast<std::size_t>(id);
    switch (n.op) {
      case Op::Const:
        v[i] = n.value;
        break;
      case Op::Var:
        if (n.var >= static_cast<int>(x.size()))
          throw ExprError("variable index " + std::to_string(n.var) +
                          " out of range for point of size " + std::to_string(x.size()));
        v[i] = x[static_cast<std::size_t>(n.var)];
        break;
      case Op::Add:
        v[i] = v[static_cast<std::size_t>(n.a)] + v[static_cast<std::size_t>(n.b)];
        break;
      case Op::Sub:
        v[i] = v[static_cast<std::size_t>(n.a)] - v[static_cast<std::size_t>(n.b)];
        break;
      case Op::Mul:
        v[i] = v[static_cast<std::size_t>(n.a)] * v[static_cast<std::size_t>(n.b)];
        break;
      case Op::Div: {
        const double den = v[static_cast<std::size_t>(n.b)];
        if (den == 0.0) throw ExprError("division by zero");
        v[i] = v[static_cast<std::size_t>(n.a)] / den;
        break;
      }
      case Op::Pow: {
        const double base = v[static_cast<std::size_t>(n.a)];
        if (base < 0.0 && n.value != std::floor(n.value))
          throw ExprError("pow: negative base with non-integer exponent");
        v[i] = std::pow(base, n.value);
        break;
      }
      case Op::Neg:
        v[i] = -v[static_cast<std::size_t>(n.a)];
        break;
      case Op::Sin:
        v[i] = std::sin(v[static_cast<std::size_t>(n.a)]);
        break;
      case Op::Cos:
        v[i] = std::cos(v[static_cast<std::size_t>(n.a)]);
        break;
      case Op::Exp:
        v[i] = std::exp(v[static_cast<std::size_t>(n.a)]);
        break;
      case Op::Sqrt: {
        const double arg = v[static_cast<std::size_t>(n.a)];
        if (arg < 0.0) throw ExprError("sqrt of negative argument");
        v[i] = std::sqrt(arg);
        break;
      }
    }
  }
  return v[static_cast<std::size_t>(e.root)];
}

}  // namespace

double eval(const ExprArena& arena, const CompiledExpr& e, std::span<const double> x,
            EvalWorkspace& ws) {
  return forward_sweep(arena, e, x, ws);
}

double eval_gradient(const ExprArena& arena, const CompiledExpr& e, std::span<const double> x,
                     EvalWorkspace& ws, std::span<double> grad) {
  const double value = forward_sweep(arena, e, x, ws);
  auto& v = ws.value;
  auto& adj = ws.adjoint;
  for (ExprId id : e.order) adj[static_cast<std::size_t>(id)] = 0.0;
  adj[static_cast<std::size_t>(e.root)] = 1.0;
  for (auto it = e.order.rbegin(); it != e.order.rend(); ++it) {
    const ExprId id = *it;
    const std::size_t i = static_cast<std::size_t>(id);
    const double a = adj[i];
    if (a == 0.0) continue;
    const ExprNode& n = arena.node(id);
    switch (n.op) {
      case Op::Const:
      case Op::Var:
        break;
      case Op::Add:
        adj[static_cast<std::size_t>(n.a)] += a;
        adj[static_cast<std::size_t>(n.b)] += a;
        break;
      case Op::Sub:
        adj[static_cast<std::size_t>(n.a)] += a;
        adj[static_cast<std::size_t>(n.b)] -= a;
        break;
      case Op::Mul:
        adj[static_cast<std::size_t>(n.a)] += a * v[static_cast<std::size_t>(n.b)];
        adj[static_cast<std::size_t>(n.b)] += a * v[static_cast<std::size_t>(n.a)];
        break;
      case Op::Div: {
        const double den = v[static_cast<std::size_t>(n.b)];
        adj[static_cast<std::size_t>(n.a)] += a / den;
        adj[static_cast<std::size_t>(n.b)] -= a * v[i] / den;
        break;
      }
      case Op::Pow: {
        const double base = v[static_cast<std::size_t>(n.a)];
        const double c = n.value;
        if (c == 0.0) break;
        if (base == 0.0 && c < 1.0)
          throw ExprError("pow: derivative unbounded at zero base with exponent < 1");
        adj[static_cast<std::size_t>(n.a)] += a * c * std::pow(base, c - 1.0);
        break;
      }
      case Op::Neg:
        adj[static_cast<std::size_t>(n.a)] -= a;
        break;
      case Op::Sin:
        adj[static_cast<std::size_t>(n.a)] += a * std::cos(v[static_cast<std::size_t>(n.a)]);
        break;
      case Op::Cos:
        adj[static_cast<std::size_t>(n.a)] -= a * std::sin(v[static_cast<std::size_t>(n.a)]);
        break;
      case Op::Exp:
        adj[static_cast<std::size_t>(n.a)] += a * v[i];
        break;
      case Op::Sqrt: {
        if (v[i] == 0.0) throw ExprError("sqrt: derivative unbounded at zero");
        adj[static_cast<std::size_t>(n.a)] += a * 0.5 / v[i];
        break;
      }
    }
  }
  for (int var : e.vars) grad[static_cast<std::size_t>(var)] = 0.0;
  for (ExprId id : e.order) {
    const ExprNode& n = arena.node(id);
    if (n.op == Op::Var) grad[static_cast<std::size_t>(n.var)] += adj[static_cast<std::size_t>(id)];
  }
  return value;
}

double eval(const ExprArena& arena, ExprId root, std::span<const double> x, EvalWorkspace& ws) {
  return eval(arena, compile(arena, root), x, ws);
}

std::vector<double> gradient(const ExprArena& arena, ExprId root, std::span<const double> x,
                             EvalWorkspace& ws) {
  std::vector<double> grad(x.size(), 0.0);
  eval_gradient(arena, compile(arena, root), x, ws, grad);
  return grad;
}

int VariableSet::add(std::string name, double lower, double upper) {
  double lo = std::isfinite(lower) ? lower : -10.0;
  double hi = std::isfinite(upper) ? upper : 10.0;
  if (lo > hi) std::swap(lo, hi);
  return add(std::move(name), lower, upper, lo, hi);
}

int VariableSet::add(std::string name, double lower, double upper, double init_lo,
                     double init_hi) {
  if (lower > upper) throw std::invalid_argument("variable bounds crossed: " + name);
  VariableInfo v;
  v.name = std::move(name);
  v.lower = lower;
  v.upper = upper;
  v.init_lo = init_lo;
  v.init_hi = init_hi;
  vars_.push_back(std::move(v));
  return static_cast<int>(vars_.size() - 1);
}

int VariableSet::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < vars_.size(); ++i)
    if (vars_[i].name == name) return static_cast<int>(i);
  return -1;
}

}  // namespace logicopt
