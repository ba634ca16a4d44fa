// SPDX-License-Identifier: Apache-2.0
#include "logicopt/nlp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "logicopt/rng.hpp"

namespace logicopt {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::LocalOptimum: return "local_optimum";
    case SolveStatus::FeasiblePoint: return "feasible_point";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::IterationLimit: return "iteration_limit";
  }
  return "?";
}

const char* to_string(RunClass c) {
  switch (c) {
    case RunClass::Optimal: return "optimal";
    case RunClass::SubOptimal: return "suboptimal";
    case RunClass::Infeasible: return "infeasible";
  }
  return "?";
}

namespace {
void check_vars(const ExprArena& arena, ExprId id, int n) {
  const CompiledExpr c = compile(arena, id);
  if (!c.vars.empty() && c.vars.back() >= n)
    throw std::invalid_argument("expression references variable " +
                                std::to_string(c.vars.back()) + " but only " + std::to_string(n) +
                                " are declared");
}
}  // namespace

AssembledNlp assemble(Problem& p, const ReformResult& reform) {
  AssembledNlp nlp;
  nlp.objective = p.objective;
  nlp.equalities = p.equalities;
  nlp.inequalities = p.inequalities;
  nlp.base_eq_count = static_cast<int>(p.equalities.size());
  nlp.base_ineq_count = static_cast<int>(p.inequalities.size());

  for (ExprId e : reform.inequalities) nlp.inequalities.push_back(e);
  for (ExprId e : reform.equalities) nlp.equalities.push_back(e);

  // One unity equality per simplex block; the positivity side lives in the
  // lambda bounds.
  nlp.blocks = reform.smoothing.blocks;
  for (const SimplexBlock& b : nlp.blocks) {
    ExprId sum = kNoExpr;
    for (int v : b.members) {
      ExprId lv = p.arena.variable(v);
      sum = sum == kNoExpr ? lv : p.arena.add(sum, lv);
    }
    nlp.equalities.push_back(p.arena.sub(sum, p.arena.constant(1.0)));
    nlp.lambda_var_count += static_cast<int>(b.members.size());
  }

  nlp.problem = &p;
  nlp.n = p.vars.size();
  nlp.lower.resize(static_cast<std::size_t>(nlp.n));
  nlp.upper.resize(static_cast<std::size_t>(nlp.n));
  nlp.init_lo.resize(static_cast<std::size_t>(nlp.n));
  nlp.init_hi.resize(static_cast<std::size_t>(nlp.n));
  for (int j = 0; j < nlp.n; ++j) {
    const VariableInfo& v = p.vars[j];
    nlp.lower[static_cast<std::size_t>(j)] = v.lower;
    nlp.upper[static_cast<std::size_t>(j)] = v.upper;
    nlp.init_lo[static_cast<std::size_t>(j)] = v.init_lo;
    nlp.init_hi[static_cast<std::size_t>(j)] = v.init_hi;
  }

  if (nlp.objective == kNoExpr) throw std::invalid_argument("problem has no objective");
  check_vars(p.arena, nlp.objective, nlp.n);
  for (ExprId e : nlp.equalities) check_vars(p.arena, e, nlp.n);
  for (ExprId e : nlp.inequalities) check_vars(p.arena, e, nlp.n);
  return nlp;
}

AssembledNlp assemble(Problem& p) { return assemble(p, ReformResult{}); }

KktResiduals compute_kkt(const AssembledNlp& nlp, std::span<const double> x,
                         std::span<const double> y_eq, std::span<const double> w_ineq,
                         std::span<const double> z_lo, std::span<const double> z_up) {
  const ExprArena& arena = nlp.problem->arena;
  EvalWorkspace ws;
  const int n = nlp.n;
  std::vector<double> grad_l(static_cast<std::size_t>(n), 0.0);
  std::vector<double> row(static_cast<std::size_t>(n), 0.0);

  eval_gradient(arena, compile(arena, nlp.objective), x, ws, grad_l);

  KktResiduals out;
  double mult_sum = 0.0;
  int mult_count = 0;

  for (std::size_t i = 0; i < nlp.equalities.size(); ++i) {
    const CompiledExpr c = compile(arena, nlp.equalities[i]);
    const double v = eval_gradient(arena, c, x, ws, row);
    out.violation = std::max(out.violation, std::abs(v));
    const double yi = i < y_eq.size() ? y_eq[i] : 0.0;
    for (int var : c.vars) grad_l[static_cast<std::size_t>(var)] += yi * row[static_cast<std::size_t>(var)];
    mult_sum += std::abs(yi);
    ++mult_count;
  }
  for (std::size_t i = 0; i < nlp.inequalities.size(); ++i) {
    const CompiledExpr c = compile(arena, nlp.inequalities[i]);
    const double v = eval_gradient(arena, c, x, ws, row);
    out.violation = std::max(out.violation, std::max(0.0, v));
    const double wi = i < w_ineq.size() ? w_ineq[i] : 0.0;
    for (int var : c.vars) grad_l[static_cast<std::size_t>(var)] += wi * row[static_cast<std::size_t>(var)];
    out.complementarity = std::max(out.complementarity, std::abs(wi * v));
    mult_sum += std::abs(wi);
    ++mult_count;
  }
  for (int j = 0; j < n; ++j) {
    const std::size_t ji = static_cast<std::size_t>(j);
    const double lj = nlp.lower[ji], uj = nlp.upper[ji];
    const bool fixed = std::isfinite(lj) && std::isfinite(uj) && uj - lj < 1e-12;
    if (std::isfinite(lj)) {
      out.violation = std::max(out.violation, lj - x[ji]);
      const double z = ji < z_lo.size() ? z_lo[ji] : 0.0;
      grad_l[ji] -= z;
      if (!fixed) out.complementarity = std::max(out.complementarity, std::abs(z * (x[ji] - lj)));
      mult_sum += std::abs(z);
      ++mult_count;
    }
    if (std::isfinite(uj)) {
      out.violation = std::max(out.violation, x[ji] - uj);
      const double z = ji < z_up.size() ? z_up[ji] : 0.0;
      grad_l[ji] += z;
      if (!fixed) out.complementarity = std::max(out.complementarity, std::abs(z * (uj - x[ji])));
      mult_sum += std::abs(z);
      ++mult_count;
    }
    if (fixed) grad_l[ji] = 0.0;  // pinned coordinate: bound multipliers absorb the gradient
  }

  const double s_max = 100.0;
  const double sd = std::max(s_max, mult_sum / std::max(1, mult_count)) / s_max;
  const double sc = sd;  // same scaling for the complementarity measure
  double stat = 0.0;
  for (int j = 0; j < n; ++j) stat = std::max(stat, std::abs(grad_l[static_cast<std::size_t>(j)]));
  out.stationarity = stat / sd;
  out.complementarity /= sc;
  return out;
}

std::vector<SolveOutcome> multistart(const AssembledNlp& nlp, int runs, std::uint64_t seed,
                                     const SolverOptions& opts) {
  std::vector<SolveOutcome> out(static_cast<std::size_t>(std::max(0, runs)));
  if (runs <= 0) return out;

  auto run_one = [&](int r) {
    Rng rng = Rng::for_run(seed, static_cast<std::uint64_t>(r));
    std::vector<double> x0(static_cast<std::size_t>(nlp.n));
    for (int j = 0; j < nlp.n; ++j)
      x0[static_cast<std::size_t>(j)] =
          rng.uniform(nlp.init_lo[static_cast<std::size_t>(j)], nlp.init_hi[static_cast<std::size_t>(j)]);
    out[static_cast<std::size_t>(r)] = solve(nlp, x0, opts);
  };

  int workers = opts.workers > 0 ? opts.workers
                                 : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, runs));
  if (workers == 1) {
    for (int r = 0; r < runs; ++r) run_one(r);
    return out;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int t = 0; t < workers; ++t)
    pool.emplace_back([&] {
      for (int r = next.fetch_add(1); r < runs; r = next.fetch_add(1)) run_one(r);
    });
  for (auto& th : pool) th.join();
  return out;
}

RunClass classify(const SolveOutcome& o, double best_cost, const LogicOracle& oracle,
                  double feas_tol) {
  if (o.violation > feas_tol) return RunClass::Infeasible;
  if (oracle && !oracle(o.point)) return RunClass::Infeasible;
  if (o.objective <= best_cost * (1.0 + 1e-3) + 1e-6) return RunClass::Optimal;
  return RunClass::SubOptimal;
}

}  // namespace logicopt
