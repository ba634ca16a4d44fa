// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "logicopt/problem.hpp"

namespace logicopt {

enum class ReformMethod { Smoothed, BigM, Complementarity };

struct ReformConfig {
  ReformMethod method = ReformMethod::Smoothed;
  bool lambda_sharing = false;
  double big_m = 1e6;  // BigM scale; also couples the complementarity selector
};

/// One probability simplex Lambda_k: member variables carry bounds [0,1] and
/// assembly adds the unity equality sum(members) = 1.
struct SimplexBlock {
  int id = 0;
  std::vector<int> members;  // lambda variable indices, in coordinate order
};

/// A clause smoothed into sum_j lambda_j p_j <= 0. Single-literal clauses
/// collapse to p <= 0 with no block (Lambda_1 = {1}).
struct SmoothedConstraint {
  int block = -1;                             // index into the block list
  std::vector<std::pair<int, PredId>> terms;  // (lambda var or -1, predicate)
  ExprId expr = kNoExpr;
  int clause = -1;  // source clause index
};

/// Clauses whose literal multisets agree everywhere except one position can
/// share a single simplex block: the shared literals occupy the leading
/// coordinates and the varying literal the last one.
struct ClauseGroup {
  std::vector<int> clause_indices;
  std::vector<PredId> shared;   // sorted; empty for singleton groups
  std::vector<PredId> varying;  // aligned with clause_indices; empty for singletons
};

std::vector<ClauseGroup> detect_shared_lambda(const CnfProgram& cnf);

struct SmoothingPlan {
  std::vector<SmoothedConstraint> constraints;
  std::vector<SimplexBlock> blocks;
};

SmoothingPlan smooth(const CnfProgram& cnf, bool share, Problem& p);

/// Indicator-lambda witness for Theorem-3 style tests: assigns each block the
/// vertex of a satisfied literal (argmin for plain clauses, a satisfied
/// shared literal if any for shared blocks, else the varying coordinate).
/// Returns the (variable, value) assignments, or nothing iff some clause has
/// all literals positive at z.
std::optional<std::vector<std::pair<int, double>>> recover_lambda(
    const SmoothingPlan& plan, const ExprArena& arena, const PredicateTable& preds,
    std::span<const double> z, EvalWorkspace& ws);

/// Baseline reformulations. Both append their auxiliary variables to the
/// problem and return the constraint rows to add.
struct BaselineConstraints {
  std::vector<ExprId> inequalities;
  std::vector<ExprId> equalities;
  std::vector<int> aux_vars;
};

/// Per clause: p_j <= mu_j * M with mu in [0,1] and prod_j mu_j = 0.
BaselineConstraints bigm(const CnfProgram& cnf, double big_m, Problem& p);

/// Per clause: selectors b_j with b_j (b_j - 1) = 0, sum b_j >= 1, and
/// p_j <= (1 - b_j) * M. Reconstructed baseline; the coupling is ours.
BaselineConstraints complementarity(const CnfProgram& cnf, double big_m, Problem& p);

/// Method dispatch used by assembly and the CLI.
struct ReformResult {
  ReformMethod method = ReformMethod::Smoothed;
  SmoothingPlan smoothing;             // Smoothed only
  BaselineConstraints baseline;        // BigM / Complementarity only
  std::vector<ExprId> inequalities;    // rows to append to g (all methods)
  std::vector<ExprId> equalities;      // rows to append to h (baselines)
};

ReformResult reformulate(const CnfProgram& cnf, const ReformConfig& cfg, Problem& p);

}  // namespace logicopt
