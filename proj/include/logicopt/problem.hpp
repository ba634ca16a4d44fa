// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "logicopt/expr.hpp"
#include "logicopt/logic.hpp"

namespace logicopt {

/// A logic-constrained problem: minimize `objective` subject to
/// equalities = 0, inequalities <= 0, variable bounds, and `formula` true.
/// Rewriting passes append auxiliary variables and predicates but never
/// modify existing entries, so `formula` stays valid as the certification
/// oracle for any point (auxiliary coordinates are simply ignored by it).
struct Problem {
  std::string name;
  ExprArena arena;
  VariableSet vars;
  ExprId objective = kNoExpr;
  std::vector<ExprId> equalities;    // h(z) = 0
  std::vector<ExprId> inequalities;  // g(z) <= 0
  PredicateTable preds;
  FormulaPtr formula;  // may be null

  Expr var(int index) { return Expr{&arena, arena.variable(index)}; }
  Expr num(double v) { return Expr{&arena, arena.constant(v)}; }
};

/// Output of the full rewriting pipeline:
/// expand_temporal -> eliminate_equalities -> to_nnf -> eliminate_negations
/// -> to_cnf.
struct LoweredLogic {
  FormulaPtr core;  // Leaf/And/Or only, inequality leaves
  CnfProgram cnf;
  std::vector<std::pair<int, PredId>> eta_vars;
  int original_var_count = 0;  // z size before eta auxiliaries
};

LoweredLogic lower_logic(Problem& p, StrictnessMode mode, std::size_t clause_limit = 10000);

}  // namespace logicopt
