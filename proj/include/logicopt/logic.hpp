// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "logicopt/expr.hpp"

namespace logicopt {

// ---------------------------------------------------------------------------
// Predicates
// ---------------------------------------------------------------------------

enum class PredicateKind : std::uint8_t {
  Inequality,  // true iff body(z) <= 0
  Equality,    // true iff body(z) == 0
};

using PredId = std::int32_t;

struct Predicate {
  PredicateKind kind = PredicateKind::Inequality;
  ExprId body = kNoExpr;
  std::string name;
  PredId derived_from = -1;  // source predicate when created by a pass
};

class PredicateTable {
 public:
  PredId add(PredicateKind kind, ExprId body, std::string name, PredId derived_from = -1);
  const Predicate& operator[](PredId id) const { return preds_[static_cast<std::size_t>(id)]; }
  int size() const { return static_cast<int>(preds_.size()); }
  const std::vector<Predicate>& all() const { return preds_; }
  /// Follows derived_from links back to the original proposition.
  PredId root_source(PredId id) const;

 private:
  std::vector<Predicate> preds_;
};

// ---------------------------------------------------------------------------
// Formulas
// ---------------------------------------------------------------------------

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;
/// Per-time-step formulas, indices 0..N.
using FormulaSeq = std::vector<FormulaPtr>;

enum class FormulaKind : std::uint8_t { Leaf, Not, And, Or, Implies, Iff, Until, Release };

/// Immutable logic AST node. And/Or are n-ary; Until/Release hold two
/// sequences over the horizon plus a start index.
struct Formula {
  FormulaKind kind = FormulaKind::Leaf;
  PredId pred = -1;
  std::vector<FormulaPtr> args;
  FormulaSeq seq_a;
  FormulaSeq seq_b;
  int start = 0;
};

FormulaPtr leaf(PredId p);
FormulaPtr lnot(FormulaPtr f);
FormulaPtr land(std::vector<FormulaPtr> fs);  // single element collapses to itself
FormulaPtr lor(std::vector<FormulaPtr> fs);
FormulaPtr implies(FormulaPtr a, FormulaPtr b);
FormulaPtr iff(FormulaPtr a, FormulaPtr b);
FormulaPtr until(FormulaSeq a, FormulaSeq b, int start);
FormulaPtr release(FormulaSeq a, FormulaSeq b, int start);

// ---------------------------------------------------------------------------
// CNF
// ---------------------------------------------------------------------------

struct Clause {
  std::vector<PredId> lits;  // nonempty, inequality predicates only
};

struct CnfProgram {
  std::vector<Clause> clauses;
  int n_and() const { return static_cast<int>(clauses.size()) - 1; }
  int n_or(int i) const { return static_cast<int>(clauses[static_cast<std::size_t>(i)].lits.size()) - 1; }
};

/// Thrown when CNF distribution would exceed the configured clause limit.
/// CNF representations are not unique; restructuring the input logic usually
/// avoids the blowup.
class ClauseExplosion : public std::runtime_error {
 public:
  explicit ClauseExplosion(std::size_t limit)
      : std::runtime_error("CNF clause count would exceed limit of " + std::to_string(limit)),
        limit(limit) {}
  std::size_t limit;
};

// ---------------------------------------------------------------------------
// Rewriting passes
// ---------------------------------------------------------------------------

struct StrictnessMode {
  enum class Kind : std::uint8_t { ExactEta, Epsilon, Closure };
  Kind kind = Kind::Epsilon;
  double eps = 1e-8;

  static StrictnessMode exact_eta() { return {Kind::ExactEta, 0.0}; }
  static StrictnessMode epsilon(double e) { return {Kind::Epsilon, e}; }
  static StrictnessMode closure() { return {Kind::Closure, 0.0}; }
};

/// Rewrites Implies/Iff/Until/Release into And/Or/Not, bottom-up, until only
/// core operators remain. Until with start i over horizon N produces the
/// N-i+1 clause form; Release produces one clause per remaining step.
FormulaPtr expand_temporal(const FormulaPtr& f);

/// Replaces every equality leaf q(z) = 0 with the pair q(z) <= 0 and
/// -q(z) <= 0. New predicates are registered in `preds` (one pair per
/// distinct equality predicate).
FormulaPtr eliminate_equalities(const FormulaPtr& f, ExprArena& arena, PredicateTable& preds);

/// Pushes negations to the leaves with De Morgan's laws. Requires a formula
/// free of equality leaves and derived operators.
FormulaPtr to_nnf(const FormulaPtr& f);

struct NegationElimination {
  FormulaPtr formula;
  /// (variable index, source predicate) for each auxiliary eta introduced in
  /// ExactEta mode.
  std::vector<std::pair<int, PredId>> eta_vars;
};

/// Removes the remaining leaf-level negations. ExactEta introduces
/// -p + exp(eta) <= 0 with a fresh bounded variable per negated predicate;
/// Epsilon uses -p + eps <= 0; Closure uses -p <= 0.
NegationElimination eliminate_negations(const FormulaPtr& f, StrictnessMode mode,
                                        ExprArena& arena, PredicateTable& preds,
                                        VariableSet& vars);

/// Distributes Or over And, flattens, and deduplicates (literals within a
/// clause and repeated clauses, by predicate identity).
CnfProgram to_cnf(const FormulaPtr& f, std::size_t clause_limit = 10000);

// ---------------------------------------------------------------------------
// Semantic oracles (independent of the rewriting passes)
// ---------------------------------------------------------------------------

/// Direct evaluation of the formula semantics at z. Leaf p <= 0 is true iff
/// eval(p, z) <= tol; equality leaves are true iff |q(z)| <= tol. Until and
/// Release use their quantifier definitions.
bool eval_bool(const FormulaPtr& f, const ExprArena& arena, const PredicateTable& preds,
               std::span<const double> z, double tol, EvalWorkspace& ws);

/// max over clauses of (min over literals); <= 0 iff the CNF is true at tol 0.
/// An empty program is vacuously true (-inf).
double eval_maxmin(const CnfProgram& cnf, const ExprArena& arena, const PredicateTable& preds,
                   std::span<const double> z, EvalWorkspace& ws);

/// Bulk predicate evaluation plus value-based variants, for test loops that
/// evaluate one point against many formulas.
std::vector<double> eval_predicates(const ExprArena& arena, const PredicateTable& preds,
                                    std::span<const double> z, EvalWorkspace& ws);
bool eval_bool_values(const FormulaPtr& f, const PredicateTable& preds,
                      std::span<const double> pred_values, double tol);
double eval_maxmin_values(const CnfProgram& cnf, std::span<const double> pred_values);

/// One clause per line, literals as "id:name".
std::string dump_cnf(const CnfProgram& cnf, const PredicateTable& preds);

}  // namespace logicopt
