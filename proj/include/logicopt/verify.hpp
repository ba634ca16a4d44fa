// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "logicopt/reform.hpp"
#include "logicopt/rng.hpp"

namespace logicopt {

struct SuiteResult {
  std::string name;
  int trials = 0;
  int failures = 0;
  std::string note;
  bool passed() const { return failures == 0; }
};

/// A random logic-constrained instance: polynomial predicates (degree <= 2)
/// over `dim` variables combined by a random operator tree.
struct RandomLogic {
  Problem problem;
};

RandomLogic random_logic(Rng& rng, int dim, int max_leaves, bool allow_equalities,
                         bool allow_temporal);

/// Random evaluation point for the instance, uniform over [-2, 2]^dim.
std::vector<double> random_point(Rng& rng, int dim);

/// NNF hook so a deliberately broken rewrite can be injected by tests.
using NnfFn = std::function<FormulaPtr(const FormulaPtr&)>;

/// Boolean equivalence of the formula across every rewriting pass, checked on
/// random points (ExactEta compared through an explicit eta witness; Closure
/// and the epsilon-free passes compared away from predicate boundaries).
SuiteResult suite_pass_soundness(int trials, std::uint64_t seed, const NnfFn& nnf_impl = {});

/// eval_bool == (eval_maxmin <= 0) == CNF eval_bool on random instances.
SuiteResult suite_cnf_maxmin(int trials, std::uint64_t seed);

/// recover_lambda returns a witness iff max-min <= 0; the witness satisfies
/// every smoothed constraint; a dense simplex grid finds no feasible lambda
/// when max-min > 0 (blocks of size <= 3).
SuiteResult suite_lambda_witness(int trials, std::uint64_t seed);

/// Exhaustive Boolean agreement of the until/release expansions with their
/// quantifier semantics, plus the N-i+1 clause-count identity.
SuiteResult suite_temporal_enumeration(int max_horizon = 4);

/// Reverse-mode gradients vs central finite differences on random smooth
/// expressions.
SuiteResult suite_gradient_check(int trials, std::uint64_t seed);

std::vector<SuiteResult> run_verification(int trials, std::uint64_t seed);

}  // namespace logicopt
