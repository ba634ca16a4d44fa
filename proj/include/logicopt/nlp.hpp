// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "logicopt/reform.hpp"

namespace logicopt {

/// Solver-ready problem: variables with bounds in deterministic order
/// (original z, then eta auxiliaries, then lambda blocks in clause order,
/// then baseline auxiliaries), one objective, and flat equality/inequality
/// rows (convention: expression <= 0, = 0).
struct AssembledNlp {
  const Problem* problem = nullptr;  // arena and variable metadata; must outlive
  int n = 0;
  std::vector<double> lower, upper;
  std::vector<double> init_lo, init_hi;  // multistart sampling box
  ExprId objective = kNoExpr;
  std::vector<ExprId> equalities;
  std::vector<ExprId> inequalities;
  std::vector<SimplexBlock> blocks;  // lambda bookkeeping (empty for baselines)
  int base_eq_count = 0;             // n_h of the base problem
  int base_ineq_count = 0;           // n_g of the base problem
  int lambda_var_count = 0;
};

/// Builds the final NLP from the base problem plus reformulated logic rows.
/// Simplex memberships become lambda bounds [0,1] plus one unity equality per
/// block. Throws if any expression references an undeclared variable.
AssembledNlp assemble(Problem& p, const ReformResult& reform);
AssembledNlp assemble(Problem& p);  // base problem only

enum class SolveStatus : std::uint8_t { LocalOptimum, FeasiblePoint, Infeasible, IterationLimit };

const char* to_string(SolveStatus s);

struct SolverOptions {
  double feas_tol = 1e-6;
  double opt_tol = 1e-6;
  int max_iter = 500;
  double mu_init = 0.1;
  int workers = 0;  // multistart parallelism; 0 = hardware concurrency
  int verbose = 0;  // 1: per-iteration trace to stderr
};

struct SolveOutcome {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> point;
  double objective = 0.0;
  double violation = 0.0;     // max constraint/bound violation, recomputed at point
  double stationarity = 0.0;  // scaled dual residual, recomputed at point
  int iterations = 0;
  double wall_ms = 0.0;
  std::string diagnostic;
  // Multipliers at the returned point, for independent KKT recomputation.
  std::vector<double> mult_eq, mult_ineq, mult_lo, mult_up;
};

struct KktResiduals {
  double stationarity = 0.0;  // scaled ||grad_L||_inf
  double violation = 0.0;     // max equality/inequality/bound violation
  double complementarity = 0.0;
};

/// Recomputes KKT residuals from scratch at a point with given multipliers;
/// solve() fills its outcome through this same routine rather than trusting
/// loop internals.
KktResiduals compute_kkt(const AssembledNlp& nlp, std::span<const double> x,
                         std::span<const double> y_eq, std::span<const double> w_ineq,
                         std::span<const double> z_lo, std::span<const double> z_up);

/// Primal-dual interior-point solve from x0 (clipped into bounds). Slack
/// variables for inequalities, log barrier with monotonically decreasing mu,
/// damped-BFGS Lagrangian Hessian model, fraction-to-boundary step rule and
/// an l1 merit line search.
SolveOutcome solve(const AssembledNlp& nlp, std::span<const double> x0,
                   const SolverOptions& opts = {});

/// Deterministic multistart: run r draws its initial point from an RNG seeded
/// by (seed, r) only, so results are reproducible bit-for-bit regardless of
/// how runs are scheduled across workers.
std::vector<SolveOutcome> multistart(const AssembledNlp& nlp, int runs, std::uint64_t seed,
                                     const SolverOptions& opts = {});

enum class RunClass : std::uint8_t { Optimal, SubOptimal, Infeasible };

const char* to_string(RunClass c);

/// Certification oracle: true iff the original logic holds at the point.
using LogicOracle = std::function<bool(std::span<const double>)>;

/// A run is Infeasible unless the solver violation is within feas_tol AND the
/// logic oracle accepts the point; feasible runs are Optimal when their cost
/// is within 0.1% (plus 1e-6 absolute) of the best feasible cost.
RunClass classify(const SolveOutcome& o, double best_cost, const LogicOracle& oracle,
                  double feas_tol);

}  // namespace logicopt
