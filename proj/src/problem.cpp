// SPDX-License-Identifier: Apache-2.0
#include "logicopt/problem.hpp"

namespace logicopt {

LoweredLogic lower_logic(Problem& p, StrictnessMode mode, std::size_t clause_limit) {
  LoweredLogic out;
  out.original_var_count = p.vars.size();
  if (!p.formula) return out;
  FormulaPtr f = expand_temporal(p.formula);
  f = eliminate_equalities(f, p.arena, p.preds);
  f = to_nnf(f);
  auto neg = eliminate_negations(f, mode, p.arena, p.preds, p.vars);
  out.core = neg.formula;
  out.eta_vars = std::move(neg.eta_vars);
  out.cnf = to_cnf(out.core, clause_limit);
  return out;
}

}  // namespace logicopt
