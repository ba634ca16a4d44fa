// SPDX-License-Identifier: Apache-2.0
#include "logicopt/verify.hpp"

#include <algorithm>
#include <cmath>

namespace logicopt {

namespace {

PredId random_predicate(Rng& rng, Problem& p, bool equality) {
  const int dim = p.vars.size();
  Expr body = p.num(rng.uniform(-2, 2));
  const int lin_terms = 1 + rng.uniform_int(2);
  for (int t = 0; t < lin_terms; ++t)
    body = body + rng.uniform(-2, 2) * p.var(rng.uniform_int(dim));
  if (rng.chance(0.5))
    body = body + rng.uniform(-1, 1) * p.var(rng.uniform_int(dim)) * p.var(rng.uniform_int(dim));
  const std::string name = (equality ? "q" : "p") + std::to_string(p.preds.size());
  return p.preds.add(equality ? PredicateKind::Equality : PredicateKind::Inequality, body.id,
                     name);
}

FormulaPtr random_formula(Rng& rng, Problem& p, int& leaf_budget, bool allow_eq,
                          bool allow_temporal, int depth) {
  const bool force_leaf = leaf_budget <= 1 || depth >= 5;
  const double roll = rng.uniform01();
  if (force_leaf || roll < 0.35) {
    leaf_budget -= 1;
    return leaf(random_predicate(rng, p, allow_eq && rng.chance(0.25)));
  }
  if (roll < 0.50) {
    return lnot(random_formula(rng, p, leaf_budget, allow_eq, allow_temporal, depth + 1));
  }
  if (roll < 0.90) {
    const int arity = 2 + rng.uniform_int(2);
    std::vector<FormulaPtr> args;
    for (int i = 0; i < arity && leaf_budget > 0; ++i)
      args.push_back(random_formula(rng, p, leaf_budget, allow_eq, allow_temporal, depth + 1));
    if (args.empty()) args.push_back(leaf(random_predicate(rng, p, false)));
    return roll < 0.70 ? land(std::move(args)) : lor(std::move(args));
  }
  if (roll < 0.94) {
    auto a = random_formula(rng, p, leaf_budget, allow_eq, allow_temporal, depth + 1);
    auto b = random_formula(rng, p, leaf_budget, allow_eq, allow_temporal, depth + 1);
    return implies(std::move(a), std::move(b));
  }
  if (roll < 0.96 || !allow_temporal || leaf_budget < 4) {
    auto a = random_formula(rng, p, leaf_budget, allow_eq, allow_temporal, depth + 1);
    auto b = random_formula(rng, p, leaf_budget, allow_eq, allow_temporal, depth + 1);
    return iff(std::move(a), std::move(b));
  }
  const int horizon = 1 + rng.uniform_int(2);  // N in {1,2}
  const int start = rng.uniform_int(horizon + 1);
  FormulaSeq a, b;
  for (int k = 0; k <= horizon; ++k) {
    leaf_budget -= 2;
    a.push_back(leaf(random_predicate(rng, p, false)));
    b.push_back(leaf(random_predicate(rng, p, false)));
  }
  return rng.chance(0.5) ? until(std::move(a), std::move(b), start)
                         : release(std::move(a), std::move(b), start);
}

}  // namespace

RandomLogic random_logic(Rng& rng, int dim, int max_leaves, bool allow_equalities,
                         bool allow_temporal) {
  RandomLogic out;
  out.problem.name = "random";
  for (int j = 0; j < dim; ++j)
    out.problem.vars.add("z" + std::to_string(j + 1), -10.0, 10.0, -2.0, 2.0);
  out.problem.objective = out.problem.arena.constant(0.0);
  int budget = std::max(1, max_leaves);
  out.problem.formula =
      random_formula(rng, out.problem, budget, allow_equalities, allow_temporal, 0);
  return out;
}

std::vector<double> random_point(Rng& rng, int dim) {
  std::vector<double> z(static_cast<std::size_t>(dim));
  for (double& v : z) v = rng.uniform(-2, 2);
  return z;
}

namespace {

// Extends z with values for variables appended by the passes. Eta witnesses
// are filled per-predicate: exp(eta) = p(z)/2 when the negated inequality can
// hold, else a value small enough to be inert away from boundaries.
std::vector<double> extend_point(const Problem& p, std::span<const double> z,
                                 const std::vector<std::pair<int, PredId>>& eta_vars,
                                 EvalWorkspace& ws) {
  std::vector<double> full(z.begin(), z.end());
  full.resize(static_cast<std::size_t>(p.vars.size()), 0.0);
  for (const auto& [var, src] : eta_vars) {
    const double val = eval(p.arena, p.preds[src].body, z, ws);
    full[static_cast<std::size_t>(var)] = val > 1e-9 ? std::log(val / 2.0) : -30.0;
  }
  return full;
}

bool away_from_boundaries(const Problem& p, int original_preds, std::span<const double> z,
                          EvalWorkspace& ws, double margin = 1e-9) {
  for (PredId q = 0; q < original_preds; ++q)
    if (std::abs(eval(p.arena, p.preds[q].body, z, ws)) < margin) return false;
  return true;
}

}  // namespace

SuiteResult suite_pass_soundness(int trials, std::uint64_t seed, const NnfFn& nnf_impl) {
  SuiteResult res;
  res.name = "pass-soundness";
  const NnfFn nnf = nnf_impl ? nnf_impl : [](const FormulaPtr& f) { return to_nnf(f); };
  Rng rng(seed);
  EvalWorkspace ws;
  for (int t = 0; t < trials; ++t) {
    RandomLogic rl = random_logic(rng, 3, 10, true, true);
    Problem& p = rl.problem;
    const int original_preds = p.preds.size();
    const FormulaPtr f0 = p.formula;
    const FormulaPtr f1 = expand_temporal(f0);
    const FormulaPtr f2 = eliminate_equalities(f1, p.arena, p.preds);
    const FormulaPtr f3 = nnf(f2);
    const auto closure = eliminate_negations(f3, StrictnessMode::closure(), p.arena, p.preds,
                                             p.vars);
    const auto exact = eliminate_negations(f3, StrictnessMode::exact_eta(), p.arena, p.preds,
                                           p.vars);
    bool ok = true;
    for (int s = 0; s < 10 && ok; ++s) {
      const std::vector<double> z = random_point(rng, 3);
      res.trials++;
      const bool v0 = eval_bool(f0, p.arena, p.preds, z, 0.0, ws);
      if (eval_bool(f1, p.arena, p.preds, z, 0.0, ws) != v0) ok = false;  // expand_temporal
      if (eval_bool(f2, p.arena, p.preds, z, 0.0, ws) != v0) ok = false;  // eliminate_equalities
      if (eval_bool(f3, p.arena, p.preds, z, 0.0, ws) != v0) ok = false;  // to_nnf
      if (away_from_boundaries(p, original_preds, z, ws)) {
        const std::vector<double> zc = extend_point(p, z, {}, ws);
        if (eval_bool(closure.formula, p.arena, p.preds, zc, 0.0, ws) != v0) ok = false;
        const std::vector<double> ze = extend_point(p, z, exact.eta_vars, ws);
        if (eval_bool(exact.formula, p.arena, p.preds, ze, 0.0, ws) != v0) ok = false;
      }
      if (!ok) res.failures++;
    }
  }
  return res;
}

SuiteResult suite_cnf_maxmin(int trials, std::uint64_t seed) {
  SuiteResult res;
  res.name = "cnf-maxmin";
  Rng rng(seed);
  EvalWorkspace ws;
  for (int t = 0; t < trials; ++t) {
    RandomLogic rl = random_logic(rng, 3, 12, true, false);
    Problem& p = rl.problem;
    const int original_preds = p.preds.size();
    const FormulaPtr f0 = p.formula;
    LoweredLogic low = lower_logic(p, StrictnessMode::closure());
    for (int s = 0; s < 10; ++s) {
      const std::vector<double> z = random_point(rng, 3);
      if (!away_from_boundaries(p, original_preds, z, ws)) continue;
      res.trials++;
      const std::vector<double> full = extend_point(p, z, {}, ws);
      const bool truth = eval_bool(f0, p.arena, p.preds, z, 0.0, ws);
      const bool core_truth = low.core ? eval_bool(low.core, p.arena, p.preds, full, 0.0, ws)
                                       : true;
      const double mm = eval_maxmin(low.cnf, p.arena, p.preds, full, ws);
      if (truth != (mm <= 0.0) || truth != core_truth) res.failures++;
    }
  }
  return res;
}

namespace {

// All lambda grid points of a simplex of dimension k with resolution steps.
void simplex_grid(int k, int steps, std::vector<std::vector<double>>& out) {
  out.clear();
  if (k == 1) {
    out.push_back({1.0});
    return;
  }
  if (k == 2) {
    for (int i = 0; i <= steps; ++i) {
      const double a = static_cast<double>(i) / steps;
      out.push_back({a, 1.0 - a});
    }
    return;
  }
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; j + i <= steps; ++j) {
      const double a = static_cast<double>(i) / steps;
      const double b = static_cast<double>(j) / steps;
      out.push_back({a, b, 1.0 - a - b});
    }
}

}  // namespace

SuiteResult suite_lambda_witness(int trials, std::uint64_t seed) {
  SuiteResult res;
  res.name = "lambda-witness";
  Rng rng(seed);
  EvalWorkspace ws;
  std::vector<std::vector<double>> grid;
  for (int t = 0; t < trials; ++t) {
    RandomLogic rl = random_logic(rng, 3, 8, false, false);
    Problem& p = rl.problem;
    const FormulaPtr f0 = p.formula;
    LoweredLogic low = lower_logic(p, StrictnessMode::closure());
    const bool share = rng.chance(0.5);
    SmoothingPlan plan = smooth(low.cnf, share, p);
    for (int s = 0; s < 5; ++s) {
      const std::vector<double> z = random_point(rng, 3);
      res.trials++;
      std::vector<double> full(z);
      full.resize(static_cast<std::size_t>(p.vars.size()), 0.0);
      const double mm = eval_maxmin(low.cnf, p.arena, p.preds, full, ws);
      const auto witness = recover_lambda(plan, p.arena, p.preds, full, ws);
      if (witness.has_value() != (mm <= 0.0)) {
        res.failures++;
        continue;
      }
      if (witness) {
        std::vector<double> pt = full;
        for (const auto& [var, val] : *witness) pt[static_cast<std::size_t>(var)] = val;
        for (const SmoothedConstraint& sc : plan.constraints)
          if (eval(p.arena, sc.expr, pt, ws) > 0.0) res.failures++;
      } else {
        // No lambda on a dense grid may satisfy all constraints of any block.
        bool grid_applicable = true;
        for (const SimplexBlock& b : plan.blocks)
          if (b.members.size() > 3) {
            grid_applicable = false;
            break;
          }
        if (!grid_applicable) continue;
        // Feasibility would require every block to admit a lambda satisfying
        // its member constraints, and every blockless constraint to hold.
        bool blockless_ok = true;
        for (const SmoothedConstraint& sc : plan.constraints)
          if (sc.block < 0 && eval(p.arena, sc.expr, full, ws) > 0.0) blockless_ok = false;
        bool all_blocks_ok = true;
        std::vector<double> pt = full;
        for (const SimplexBlock& b : plan.blocks) {
          simplex_grid(static_cast<int>(b.members.size()), 20, grid);
          bool block_ok = false;
          for (const auto& lam : grid) {
            for (std::size_t j = 0; j < b.members.size(); ++j)
              pt[static_cast<std::size_t>(b.members[j])] = lam[j];
            bool sat = true;
            for (const SmoothedConstraint& sc : plan.constraints)
              if (sc.block == b.id && eval(p.arena, sc.expr, pt, ws) > 0.0) {
                sat = false;
                break;
              }
            if (sat) {
              block_ok = true;
              break;
            }
          }
          if (!block_ok) {
            all_blocks_ok = false;
            break;
          }
        }
        if (blockless_ok && all_blocks_ok) res.failures++;  // grid found a feasible lambda
      }
    }
  }
  return res;
}

SuiteResult suite_temporal_enumeration(int max_horizon) {
  SuiteResult res;
  res.name = "temporal-enumeration";
  EvalWorkspace ws;
  for (int horizon = 1; horizon <= max_horizon; ++horizon) {
    for (int start = 0; start <= horizon; ++start) {
      for (int which = 0; which < 2; ++which) {
        Problem p;
        // leaf j true iff z_j <= 0; assignments use z_j = +-1
        const int dim = 2 * (horizon + 1);
        for (int j = 0; j < dim; ++j) p.vars.add("z" + std::to_string(j), -2.0, 2.0);
        p.objective = p.arena.constant(0.0);
        FormulaSeq a, b;
        for (int k = 0; k <= horizon; ++k) {
          a.push_back(leaf(p.preds.add(PredicateKind::Inequality, p.arena.variable(k),
                                       "a" + std::to_string(k))));
          b.push_back(leaf(p.preds.add(PredicateKind::Inequality,
                                       p.arena.variable(horizon + 1 + k),
                                       "b" + std::to_string(k))));
        }
        const FormulaPtr f = which == 0 ? until(a, b, start) : release(a, b, start);
        const FormulaPtr expanded = expand_temporal(f);
        const CnfProgram cnf = to_cnf(expanded);
        if (static_cast<int>(cnf.clauses.size()) != horizon - start + 1) res.failures++;
        std::vector<double> z(static_cast<std::size_t>(dim));
        for (std::uint64_t mask = 0; mask < (1ULL << dim); ++mask) {
          res.trials++;
          for (int j = 0; j < dim; ++j)
            z[static_cast<std::size_t>(j)] = (mask >> j) & 1 ? -1.0 : 1.0;
          const bool semantic = eval_bool(f, p.arena, p.preds, z, 0.0, ws);
          const bool flat = eval_bool(expanded, p.arena, p.preds, z, 0.0, ws);
          const bool cnf_truth = eval_maxmin(cnf, p.arena, p.preds, z, ws) <= 0.0;
          if (semantic != flat || semantic != cnf_truth) res.failures++;
        }
      }
    }
  }
  return res;
}

SuiteResult suite_gradient_check(int trials, std::uint64_t seed) {
  SuiteResult res;
  res.name = "gradient-check";
  Rng rng(seed);
  EvalWorkspace ws;
  for (int t = 0; t < trials; ++t) {
    ExprArena a;
    const int dim = 3;
    // A smooth composite touching every primitive, kept on safe domains.
    Expr z1 = wrap(a, a.variable(0)), z2 = wrap(a, a.variable(1)), z3 = wrap(a, a.variable(2));
    Expr poly = rng.uniform(-2, 2) + rng.uniform(-2, 2) * z1 + rng.uniform(-1, 1) * z2 * z3;
    Expr e = poly;
    switch (rng.uniform_int(6)) {
      case 0: e = sin(poly) * cos(z1) + exp(poly / 4.0); break;
      case 1: e = sqrt(square(poly) + 0.1) + z2 / (square(z3) + 2.0); break;
      case 2: e = pow(square(poly) + 0.5, 1.7); break;
      case 3: e = poly * poly - z1 * exp(-square(z2)); break;
      case 4: e = cos(z1 * z2) / (2.0 + square(sin(z3))); break;
      default: e = pow(z1, 3.0) + sqrt(exp(z2 / 3.0)) * poly; break;
    }
    std::vector<double> z = random_point(rng, dim);
    res.trials++;
    std::vector<double> g = gradient(a, e.id, z, ws);
    const double h = 1e-6;
    for (int j = 0; j < dim; ++j) {
      const double zj = z[static_cast<std::size_t>(j)];
      z[static_cast<std::size_t>(j)] = zj + h;
      const double fp = eval(a, e.id, z, ws);
      z[static_cast<std::size_t>(j)] = zj - h;
      const double fm = eval(a, e.id, z, ws);
      z[static_cast<std::size_t>(j)] = zj;
      const double fd = (fp - fm) / (2.0 * h);
      const double scale = std::max({1.0, std::abs(fd), std::abs(g[static_cast<std::size_t>(j)])});
      if (std::abs(fd - g[static_cast<std::size_t>(j)]) / scale > 1e-5) res.failures++;
    }
  }
  return res;
}

std::vector<SuiteResult> run_verification(int trials, std::uint64_t seed) {
  std::vector<SuiteResult> out;
  out.push_back(suite_pass_soundness(trials, seed));
  out.push_back(suite_cnf_maxmin(trials, seed + 1));
  out.push_back(suite_lambda_witness(trials, seed + 2));
  out.push_back(suite_temporal_enumeration(trials > 0 ? 4 : 0));
  out.push_back(suite_gradient_check(trials, seed + 3));
  return out;
}

}  // namespace logicopt
