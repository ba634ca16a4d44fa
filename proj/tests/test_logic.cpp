// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "logicopt/logic.hpp"
#include "logicopt/problem.hpp"
#include "logicopt/rng.hpp"
#include "logicopt/verify.hpp"

using namespace logicopt;

namespace {

// Small fixture: predicates over a single variable z.
struct OneVar {
  Problem p;
  OneVar() {
    p.vars.add("z", -10.0, 10.0);
    p.objective = p.arena.constant(0.0);
  }
  PredId le(double shift, const char* name) {  // z + shift <= 0
    return p.preds.add(PredicateKind::Inequality, (p.var(0) + shift).id, name);
  }
  PredId eq(double shift, const char* name) {  // z + shift == 0
    return p.preds.add(PredicateKind::Equality, (p.var(0) + shift).id, name);
  }
  bool holds(const FormulaPtr& f, double z, double tol = 0.0) {
    EvalWorkspace ws;
    std::vector<double> x{z};
    return eval_bool(f, p.arena, p.preds, x, tol, ws);
  }
};

}  // namespace

TEST_CASE("eliminate_equalities replaces q = 0 by a pair of inequalities") {
  OneVar f;
  PredId q = f.eq(0.0, "q");
  FormulaPtr l = leaf(q);
  FormulaPtr out = eliminate_equalities(l, f.p.arena, f.p.preds);
  REQUIRE(out->kind == FormulaKind::And);
  REQUIRE(out->args.size() == 2);
  for (const auto& a : out->args) {
    REQUIRE(a->kind == FormulaKind::Leaf);
    CHECK(f.p.preds[a->pred].kind == PredicateKind::Inequality);
    CHECK(f.p.preds[a->pred].derived_from == q);
  }
  // semantics: true iff z == 0
  CHECK(f.holds(out, 0.0));
  CHECK_FALSE(f.holds(out, 0.5));
  CHECK_FALSE(f.holds(out, -0.5));
}

TEST_CASE("eliminate_equalities returns equality-free formulas unchanged") {
  OneVar f;
  FormulaPtr l = lor({leaf(f.le(1.0, "a")), lnot(leaf(f.le(-1.0, "b")))});
  FormulaPtr out = eliminate_equalities(l, f.p.arena, f.p.preds);
  CHECK(out == l);  // structurally the same node
}

TEST_CASE("eliminate_equalities agrees with the Boolean oracle on random points") {
  OneVar f;
  // Or(q1, p1) with q1: z - 1 = 0 and p1: z <= 0
  PredId q1 = f.p.preds.add(PredicateKind::Equality, (f.p.var(0) - 1.0).id, "q1");
  PredId p1 = f.p.preds.add(PredicateKind::Inequality, f.p.var(0).id, "p1");
  FormulaPtr before = lor({leaf(q1), leaf(p1)});
  FormulaPtr after = eliminate_equalities(before, f.p.arena, f.p.preds);
  Rng rng(42);
  for (int t = 0; t < 1000; ++t) {
    const double z = rng.uniform(-3, 3);
    CHECK(f.holds(before, z) == f.holds(after, z));
  }
}

TEST_CASE("to_nnf pushes negations to the leaves") {
  OneVar f;
  FormulaPtr a = leaf(f.le(0, "a")), b = leaf(f.le(1, "b")), c = leaf(f.le(2, "c"));

  // de Morgan over And
  FormulaPtr n1 = to_nnf(lnot(land({a, b})));
  REQUIRE(n1->kind == FormulaKind::Or);
  CHECK(n1->args[0]->kind == FormulaKind::Not);
  CHECK(n1->args[1]->kind == FormulaKind::Not);

  // double negation
  FormulaPtr n2 = to_nnf(lnot(lnot(a)));
  CHECK(n2 == a);

  // nested case: expected shape And(Not a, Or(Not b, Not c))
  FormulaPtr before = lnot(lor({a, land({b, c})}));
  FormulaPtr after = to_nnf(before);
  REQUIRE(after->kind == FormulaKind::And);

  // exhaustive truth-table check with three independent variables
  Problem p3;
  p3.vars.add("z1", -2, 2);
  p3.vars.add("z2", -2, 2);
  p3.vars.add("z3", -2, 2);
  p3.objective = p3.arena.constant(0.0);
  PredId pa = p3.preds.add(PredicateKind::Inequality, p3.arena.variable(0), "a");
  PredId pb = p3.preds.add(PredicateKind::Inequality, p3.arena.variable(1), "b");
  PredId pc = p3.preds.add(PredicateKind::Inequality, p3.arena.variable(2), "c");
  FormulaPtr f3 = lnot(lor({leaf(pa), land({leaf(pb), leaf(pc)})}));
  FormulaPtr g3 = to_nnf(f3);
  EvalWorkspace ws;
  for (int mask = 0; mask < 8; ++mask) {
    std::vector<double> z{(mask & 1) ? -1.0 : 1.0, (mask & 2) ? -1.0 : 1.0,
                          (mask & 4) ? -1.0 : 1.0};
    CHECK(eval_bool(f3, p3.arena, p3.preds, z, 0.0, ws) ==
          eval_bool(g3, p3.arena, p3.preds, z, 0.0, ws));
  }
}

TEST_CASE("eliminate_negations modes") {
  SUBCASE("ExactEta introduces a bounded auxiliary variable") {
    OneVar f;
    FormulaPtr neg = lnot(leaf(f.le(0, "p")));
    const int nvars = f.p.vars.size();
    auto out = eliminate_negations(neg, StrictnessMode::exact_eta(), f.p.arena, f.p.preds,
                                   f.p.vars);
    REQUIRE(out.formula->kind == FormulaKind::Leaf);
    REQUIRE(out.eta_vars.size() == 1);
    CHECK(f.p.vars.size() == nvars + 1);
    CHECK(f.p.vars[out.eta_vars[0].first].lower == -30.0);
    CHECK(f.p.vars[out.eta_vars[0].first].upper == 10.0);
    // -z + exp(eta) <= 0 with eta = log(1): true iff z >= 1
    EvalWorkspace ws;
    std::vector<double> x{2.0, 0.0};
    CHECK(eval(f.p.arena, f.p.preds[out.formula->pred].body, x, ws) == doctest::Approx(-1.0));
  }
  SUBCASE("Epsilon shifts by the margin") {
    OneVar f;
    FormulaPtr neg = lnot(leaf(f.le(0, "p")));
    auto out = eliminate_negations(neg, StrictnessMode::epsilon(1e-8), f.p.arena, f.p.preds,
                                   f.p.vars);
    // -z + 1e-8 <= 0
    CHECK(f.holds(out.formula, 1.0));
    CHECK(f.holds(out.formula, 1e-8));
    CHECK_FALSE(f.holds(out.formula, 0.0));
    CHECK_FALSE(f.holds(out.formula, -1.0));
  }
  SUBCASE("Closure is the sign flip") {
    OneVar f;
    FormulaPtr neg = lnot(leaf(f.le(0, "p")));
    auto out = eliminate_negations(neg, StrictnessMode::closure(), f.p.arena, f.p.preds,
                                   f.p.vars);
    CHECK(f.holds(out.formula, 0.0));  // boundary collapses to >= 0
    CHECK(f.holds(out.formula, 1.0));
    CHECK_FALSE(f.holds(out.formula, -1.0));
  }
  SUBCASE("epsilon must be positive") {
    OneVar f;
    FormulaPtr neg = lnot(leaf(f.le(0, "p")));
    CHECK_THROWS_AS(eliminate_negations(neg, StrictnessMode::epsilon(0.0), f.p.arena,
                                        f.p.preds, f.p.vars),
                    std::invalid_argument);
  }
  SUBCASE("negation-free input is unchanged and adds nothing") {
    OneVar f;
    FormulaPtr plain = land({leaf(f.le(0, "p")), leaf(f.le(1, "r"))});
    const int nvars = f.p.vars.size();
    const int npreds = f.p.preds.size();
    auto out = eliminate_negations(plain, StrictnessMode::exact_eta(), f.p.arena, f.p.preds,
                                   f.p.vars);
    CHECK(out.formula == plain);
    CHECK(out.eta_vars.empty());
    CHECK(f.p.vars.size() == nvars);
    CHECK(f.p.preds.size() == npreds);
  }
}

TEST_CASE("expand_temporal: implication and equivalence") {
  OneVar f;
  FormulaPtr a = leaf(f.le(0, "a")), b = leaf(f.le(1, "b"));
  FormulaPtr imp = expand_temporal(implies(a, b));
  REQUIRE(imp->kind == FormulaKind::Or);
  CHECK(imp->args[0]->kind == FormulaKind::Not);
  CHECK(imp->args[1] == b);

  FormulaPtr eqv = expand_temporal(iff(a, b));
  REQUIRE(eqv->kind == FormulaKind::And);
  REQUIRE(eqv->args.size() == 2);
  CHECK(eqv->args[0]->kind == FormulaKind::Or);
  CHECK(eqv->args[1]->kind == FormulaKind::Or);
}

TEST_CASE("expand_temporal: until matches its semantics exhaustively (N=2)") {
  Problem p;
  const int N = 2;
  const int dim = 2 * (N + 1);
  for (int j = 0; j < dim; ++j) p.vars.add("z" + std::to_string(j), -2, 2);
  p.objective = p.arena.constant(0.0);
  FormulaSeq a, b;
  for (int k = 0; k <= N; ++k) {
    a.push_back(leaf(p.preds.add(PredicateKind::Inequality, p.arena.variable(k), "a")));
    b.push_back(leaf(p.preds.add(PredicateKind::Inequality, p.arena.variable(N + 1 + k), "b")));
  }
  FormulaPtr u = until(a, b, 0);
  FormulaPtr e = expand_temporal(u);
  // (a0|b0) & (a1|b0|b1) & (b0|b1|b2)
  CnfProgram cnf = to_cnf(e);
  CHECK(cnf.clauses.size() == 3);
  EvalWorkspace ws;
  for (int mask = 0; mask < (1 << dim); ++mask) {
    std::vector<double> z(dim);
    for (int j = 0; j < dim; ++j) z[static_cast<std::size_t>(j)] = (mask >> j) & 1 ? -1.0 : 1.0;
    CHECK(eval_bool(u, p.arena, p.preds, z, 0.0, ws) ==
          eval_bool(e, p.arena, p.preds, z, 0.0, ws));
  }
}

TEST_CASE("expand_temporal: release at the last step is the single clause b[N]") {
  OneVar f;
  FormulaSeq a, b;
  for (int k = 0; k <= 2; ++k) {
    a.push_back(leaf(f.le(static_cast<double>(k), "a")));
    b.push_back(leaf(f.le(static_cast<double>(10 + k), "b")));
  }
  FormulaPtr r = release(a, b, 2);
  FormulaPtr e = expand_temporal(r);
  CHECK(e == b[2]);
}

TEST_CASE("temporal constructors validate their index ranges") {
  OneVar f;
  FormulaSeq a{leaf(f.le(0, "a"))}, b{leaf(f.le(1, "b"))};
  CHECK_THROWS_AS(until(a, b, 1), std::invalid_argument);   // start > N
  CHECK_THROWS_AS(release(a, b, -1), std::invalid_argument);
  FormulaSeq empty;
  CHECK_THROWS_AS(until(empty, empty, 0), std::invalid_argument);
}

TEST_CASE("until clause count is N - i + 1") {
  for (int N = 1; N <= 6; ++N)
    for (int i = 0; i <= N; ++i) {
      Problem p;
      const int dim = 2 * (N + 1);
      for (int j = 0; j < dim; ++j) p.vars.add("z" + std::to_string(j), -2, 2);
      p.objective = p.arena.constant(0.0);
      FormulaSeq a, b;
      for (int k = 0; k <= N; ++k) {
        a.push_back(leaf(p.preds.add(PredicateKind::Inequality, p.arena.variable(k), "a")));
        b.push_back(
            leaf(p.preds.add(PredicateKind::Inequality, p.arena.variable(N + 1 + k), "b")));
      }
      CnfProgram cnf = to_cnf(expand_temporal(until(a, b, i)));
      CHECK(static_cast<int>(cnf.clauses.size()) == N - i + 1);
    }
}

TEST_CASE("to_cnf distributes, flattens, and deduplicates") {
  OneVar f;
  PredId p1 = f.le(0, "p1"), p2 = f.le(1, "p2"), p3 = f.le(2, "p3");

  SUBCASE("(p1 and p2) or p3") {
    CnfProgram cnf = to_cnf(lor({land({leaf(p1), leaf(p2)}), leaf(p3)}));
    REQUIRE(cnf.clauses.size() == 2);
    CHECK(cnf.clauses[0].lits == std::vector<PredId>{p1, p3});
    CHECK(cnf.clauses[1].lits == std::vector<PredId>{p2, p3});
    CHECK(cnf.n_and() == 1);
    CHECK(cnf.n_or(0) == 1);
  }
  SUBCASE("already-CNF input is preserved") {
    FormulaPtr g = land({lor({leaf(p1), leaf(p2)}), leaf(p3)});
    CnfProgram cnf = to_cnf(g);
    REQUIRE(cnf.clauses.size() == 2);
    CHECK(cnf.clauses[0].lits == std::vector<PredId>{p1, p2});
    CHECK(cnf.clauses[1].lits == std::vector<PredId>{p3});
  }
  SUBCASE("literal and clause dedup by identity") {
    // (p1 or p1) and (p1 or p1) -> one clause {p1}
    CnfProgram cnf = to_cnf(land({lor({leaf(p1), leaf(p1)}), lor({leaf(p1), leaf(p1)})}));
    REQUIRE(cnf.clauses.size() == 1);
    CHECK(cnf.clauses[0].lits == std::vector<PredId>{p1});
  }
  SUBCASE("clause explosion is reported") {
    // (a1&b1) | (a2&b2) | ... distribution doubles clauses per disjunct
    std::vector<FormulaPtr> terms;
    for (int i = 0; i < 12; ++i)
      terms.push_back(land({leaf(f.le(10.0 + i, "x")), leaf(f.le(50.0 + i, "y"))}));
    CHECK_THROWS_AS(to_cnf(lor(std::move(terms)), 1000), ClauseExplosion);
  }
  SUBCASE("core-form precondition enforced") {
    CHECK_THROWS_AS(to_cnf(lnot(leaf(p1))), std::logic_error);
  }
}

TEST_CASE("to_cnf agrees with the Boolean oracle on random formulas") {
  Rng rng(2024);
  EvalWorkspace ws;
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    RandomLogic rl = random_logic(rng, 3, 12, true, false);
    Problem& p = rl.problem;
    FormulaPtr original = p.formula;
    const int orig_preds = p.preds.size();
    LoweredLogic low = lower_logic(p, StrictnessMode::closure());
    for (int s = 0; s < 17; ++s) {
      std::vector<double> z = random_point(rng, 3);
      bool boundary = false;
      for (PredId q = 0; q < orig_preds && !boundary; ++q)
        boundary = std::abs(eval(p.arena, p.preds[q].body, z, ws)) < 1e-9;
      if (boundary) continue;
      std::vector<double> full(z);
      full.resize(static_cast<std::size_t>(p.vars.size()), 0.0);
      const bool expect = eval_bool(original, p.arena, p.preds, z, 0.0, ws);
      const bool cnf_truth = eval_maxmin(low.cnf, p.arena, p.preds, full, ws) <= 0.0;
      CHECK(cnf_truth == expect);
      checked++;
    }
  }
  CHECK(checked >= 500);
}

TEST_CASE("eval_bool basics") {
  OneVar f;
  PredId p = f.le(0, "p");
  CHECK(f.holds(leaf(p), -1.0));
  CHECK_FALSE(f.holds(leaf(p), 0.5));
  CHECK(f.holds(leaf(p), 0.0));
  // tolerance loosens leaves
  CHECK(f.holds(leaf(p), 1e-7, 1e-6));

  // until with b never true is false regardless of a
  FormulaSeq a, b;
  for (int k = 0; k <= 3; ++k) {
    a.push_back(leaf(f.le(-100.0, "at")));  // always true
    b.push_back(leaf(f.le(100.0, "bf")));   // always false at z=0
  }
  CHECK_FALSE(f.holds(until(a, b, 0), 0.0));
  // release with a never true requires b everywhere (here: true)
  FormulaSeq bt;
  for (int k = 0; k <= 3; ++k) bt.push_back(leaf(f.le(-100.0, "bt")));
  FormulaSeq af;
  for (int k = 0; k <= 3; ++k) af.push_back(leaf(f.le(100.0, "af")));
  CHECK(f.holds(release(af, bt, 0), 0.0));
}

TEST_CASE("eval_maxmin on explicit clause values") {
  // clauses {(3, -1), (2, 5)} -> max(min(3,-1), min(2,5)) = 2
  Problem p;
  p.vars.add("z", -1, 1);
  p.objective = p.arena.constant(0.0);
  auto c = [&](double v, const char* n) {
    return p.preds.add(PredicateKind::Inequality, p.arena.constant(v), n);
  };
  CnfProgram cnf;
  cnf.clauses.push_back(Clause{{c(3, "a"), c(-1, "b")}});
  cnf.clauses.push_back(Clause{{c(2, "c"), c(5, "d")}});
  EvalWorkspace ws;
  std::vector<double> z{0.0};
  CHECK(eval_maxmin(cnf, p.arena, p.preds, z, ws) == 2.0);

  CnfProgram single;
  single.clauses.push_back(Clause{{c(-0.5, "e")}});
  CHECK(eval_maxmin(single, p.arena, p.preds, z, ws) == -0.5);
}

TEST_CASE("pass soundness and Lemma-2 equivalence on random formulas") {
  auto sound = suite_pass_soundness(120, 7);
  CHECK(sound.failures == 0);
  CHECK(sound.trials > 0);
  auto lemma2 = suite_cnf_maxmin(120, 8);
  CHECK(lemma2.failures == 0);
  CHECK(lemma2.trials > 0);
}

TEST_CASE("predicate bookkeeping after the Lemma-1 passes") {
  Rng rng(11);
  for (int t = 0; t < 50; ++t) {
    RandomLogic rl = random_logic(rng, 3, 10, true, true);
    Problem& p = rl.problem;
    const int n_orig = p.preds.size();
    int n_p = 0, n_q = 0;
    for (PredId q = 0; q < n_orig; ++q)
      (p.preds[q].kind == PredicateKind::Equality ? n_q : n_p)++;
    LoweredLogic low = lower_logic(p, StrictnessMode::closure());

    // distinct base atoms used by the lowered formula
    std::set<PredId> atoms;
    std::set<PredId> used;
    std::function<void(const FormulaPtr&)> walk = [&](const FormulaPtr& f) {
      if (f->kind == FormulaKind::Leaf) {
        used.insert(f->pred);
        atoms.insert(p.preds.root_source(f->pred));
        return;
      }
      for (const auto& a : f->args) walk(a);
    };
    if (low.core) walk(low.core);
    CHECK(static_cast<int>(atoms.size()) <= n_p + 2 * n_q);
    // CNF introduces no predicates beyond the lowered formula's leaves
    for (const Clause& c : low.cnf.clauses)
      for (PredId q : c.lits) CHECK(used.count(q) == 1);
  }
}

TEST_CASE("cnf dump lists one clause per line") {
  OneVar f;
  PredId p1 = f.le(0, "p1"), p2 = f.le(1, "p2");
  CnfProgram cnf = to_cnf(land({lor({leaf(p1), leaf(p2)}), leaf(p1)}));
  const std::string dump = dump_cnf(cnf, f.p.preds);
  CHECK(dump == "0:p1 | 1:p2\n0:p1\n");
}
