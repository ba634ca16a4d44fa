// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "logicopt/bench.hpp"
#include "logicopt/reform.hpp"
#include "logicopt/rng.hpp"
#include "logicopt/verify.hpp"

using namespace logicopt;

namespace {

struct Fixture {
  Problem p;
  Fixture(int dim = 1) {
    for (int j = 0; j < dim; ++j) p.vars.add("z" + std::to_string(j + 1), -10.0, 10.0);
    p.objective = p.arena.constant(0.0);
  }
  PredId pred(Expr body, const char* name) {
    return p.preds.add(PredicateKind::Inequality, body.id, name);
  }
};

bool uses_whitelisted_ops_only(const ExprArena& arena, ExprId root) {
  const CompiledExpr c = compile(arena, root);
  for (ExprId id : c.order) {
    switch (arena.node(id).op) {
      case Op::Const:
      case Op::Var:
      case Op::Add:
      case Op::Sub:
      case Op::Mul:
      case Op::Div:
      case Op::Pow:
      case Op::Neg:
      case Op::Sin:
      case Op::Cos:
      case Op::Exp:
      case Op::Sqrt:
        break;
    }
  }
  return true;  // the arena cannot represent anything else
}

}  // namespace

TEST_CASE("smooth: two-literal clause becomes a weighted sum over one simplex") {
  Fixture f;
  PredId a = f.pred(f.p.var(0) + 1.0, "a");
  PredId b = f.pred(2.0 - f.p.var(0), "b");
  CnfProgram cnf;
  cnf.clauses.push_back(Clause{{a, b}});
  SmoothingPlan plan = smooth(cnf, false, f.p);
  REQUIRE(plan.blocks.size() == 1);
  REQUIRE(plan.blocks[0].members.size() == 2);
  REQUIRE(plan.constraints.size() == 1);
  CHECK(plan.constraints[0].block == 0);
  CHECK(plan.constraints[0].terms.size() == 2);
  // lambda variables carry [0,1] bounds
  for (int v : plan.blocks[0].members) {
    CHECK(f.p.vars[v].lower == 0.0);
    CHECK(f.p.vars[v].upper == 1.0);
  }
  // lam1*(z+1) + lam2*(2-z) at z=3, lam=(1,0) -> 4
  EvalWorkspace ws;
  std::vector<double> x{3.0, 1.0, 0.0};
  CHECK(eval(f.p.arena, plan.constraints[0].expr, x, ws) == doctest::Approx(4.0));
  CHECK(uses_whitelisted_ops_only(f.p.arena, plan.constraints[0].expr));
}

TEST_CASE("smooth: single-literal clause is the bare predicate, no block") {
  Fixture f;
  PredId a = f.pred(f.p.var(0), "a");
  CnfProgram cnf;
  cnf.clauses.push_back(Clause{{a}});
  const int nvars = f.p.vars.size();
  SmoothingPlan plan = smooth(cnf, false, f.p);
  CHECK(plan.blocks.empty());
  REQUIRE(plan.constraints.size() == 1);
  CHECK(plan.constraints[0].block == -1);
  CHECK(plan.constraints[0].expr == f.p.preds[a].body);
  CHECK(f.p.vars.size() == nvars);  // no auxiliaries
}

TEST_CASE("detect_shared_lambda groups the one-varying-literal pattern") {
  Fixture f;
  PredId g2 = f.pred(f.p.var(0) + 1.0, "g2");
  PredId g3 = f.pred(f.p.var(0) + 2.0, "g3");
  PredId r5 = f.pred(f.p.var(0) + 5.0, "r5");
  PredId r6 = f.pred(f.p.var(0) + 6.0, "r6");
  PredId r7 = f.pred(f.p.var(0) + 7.0, "r7");

  SUBCASE("quadrotor pattern: one group of three") {
    CnfProgram cnf;
    cnf.clauses.push_back(Clause{{g2, g3, r5}});
    cnf.clauses.push_back(Clause{{g2, g3, r6}});
    cnf.clauses.push_back(Clause{{g2, g3, r7}});
    auto groups = detect_shared_lambda(cnf);
    REQUIRE(groups.size() == 1);
    CHECK(groups[0].clause_indices == std::vector<int>{0, 1, 2});
    CHECK(groups[0].shared == std::vector<PredId>{g2, g3});
    CHECK(groups[0].varying == std::vector<PredId>{r5, r6, r7});
  }
  SUBCASE("no common structure: singletons") {
    CnfProgram cnf;
    cnf.clauses.push_back(Clause{{g2, g3}});
    cnf.clauses.push_back(Clause{{r5, r6}});
    auto groups = detect_shared_lambda(cnf);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].clause_indices == std::vector<int>{0});
    CHECK(groups[1].clause_indices == std::vector<int>{1});
  }
  SUBCASE("first-fit ordering: {(a,b),(a,c)} then {(d,c)}") {
    PredId a = g2, b = g3, c = r5, d = r6;
    CnfProgram cnf;
    cnf.clauses.push_back(Clause{{a, b}});
    cnf.clauses.push_back(Clause{{a, c}});
    cnf.clauses.push_back(Clause{{d, c}});
    auto groups = detect_shared_lambda(cnf);
    REQUIRE(groups.size() == 2);
    CHECK(groups[0].clause_indices == std::vector<int>{0, 1});
    CHECK(groups[1].clause_indices == std::vector<int>{2});
  }
}

TEST_CASE("shared smoothing projects onto the per-clause feasible set") {
  // clauses {(s, d1), (s, d2)} share s; feasible z iff s<=0 or (d1<=0 and d2<=0)
  Fixture f(3);
  Expr z1 = f.p.var(0), z2 = f.p.var(1), z3 = f.p.var(2);
  PredId s = f.pred(z1, "s");
  PredId d1 = f.pred(z2, "d1");
  PredId d2 = f.pred(z3, "d2");
  CnfProgram cnf;
  cnf.clauses.push_back(Clause{{s, d1}});
  cnf.clauses.push_back(Clause{{s, d2}});
  SmoothingPlan plan = smooth(cnf, true, f.p);
  REQUIRE(plan.blocks.size() == 1);
  REQUIRE(plan.constraints.size() == 2);

  Rng rng(3);
  EvalWorkspace ws;
  for (int t = 0; t < 1000; ++t) {
    std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1), 0, 0};
    const bool logical = x[0] <= 0.0 || (x[1] <= 0.0 && x[2] <= 0.0);
    // grid over the shared simplex
    bool lambda_feasible = false;
    for (int i = 0; i <= 20 && !lambda_feasible; ++i) {
      x[3] = i / 20.0;
      x[4] = 1.0 - x[3];
      bool all = true;
      for (const auto& sc : plan.constraints)
        if (eval(f.p.arena, sc.expr, x, ws) > 1e-12) all = false;
      lambda_feasible = all;
    }
    CHECK(lambda_feasible == logical);
  }
}

TEST_CASE("recover_lambda") {
  Fixture f(3);
  PredId a = f.pred(f.p.var(0), "a");
  PredId b = f.pred(f.p.var(1), "b");
  PredId c = f.pred(f.p.var(2), "c");
  CnfProgram cnf;
  cnf.clauses.push_back(Clause{{a, b, c}});
  SmoothingPlan plan = smooth(cnf, false, f.p);
  EvalWorkspace ws;

  SUBCASE("argmin literal wins") {
    std::vector<double> x{3.0, -1.0, 2.0, 0, 0, 0};
    auto wit = recover_lambda(plan, f.p.arena, f.p.preds, x, ws);
    REQUIRE(wit.has_value());
    REQUIRE(wit->size() == 3);
    CHECK((*wit)[0].second == 0.0);
    CHECK((*wit)[1].second == 1.0);
    CHECK((*wit)[2].second == 0.0);
  }
  SUBCASE("all positive literals mean no witness") {
    CnfProgram two;
    two.clauses.push_back(Clause{{a, b}});
    Fixture g(2);
    PredId ga = g.pred(g.p.var(0), "a");
    PredId gb = g.pred(g.p.var(1), "b");
    CnfProgram cnf2;
    cnf2.clauses.push_back(Clause{{ga, gb}});
    SmoothingPlan plan2 = smooth(cnf2, false, g.p);
    std::vector<double> x{0.5, 0.2, 0, 0};
    CHECK_FALSE(recover_lambda(plan2, g.p.arena, g.p.preds, x, ws).has_value());
  }
  SUBCASE("ties resolve to the lowest index") {
    std::vector<double> x{-1.0, -1.0, 5.0, 0, 0, 0};
    auto wit = recover_lambda(plan, f.p.arena, f.p.preds, x, ws);
    REQUIRE(wit.has_value());
    CHECK((*wit)[0].second == 1.0);
    CHECK((*wit)[1].second == 0.0);
  }
}

TEST_CASE("Theorem-3 exactness on random formulas (witness + grid)") {
  SuiteResult r = suite_lambda_witness(150, 5);
  CHECK(r.failures == 0);
  CHECK(r.trials > 0);
}

TEST_CASE("bigm emits slack-scaled rows plus one product row per clause") {
  Fixture f(2);
  PredId a = f.pred(f.p.var(0), "a");
  PredId b = f.pred(f.p.var(1), "b");
  PredId c = f.pred(f.p.var(0) + f.p.var(1), "c");

  SUBCASE("three-literal clause") {
    CnfProgram cnf;
    cnf.clauses.push_back(Clause{{a, b, c}});
    const int nvars = f.p.vars.size();
    BaselineConstraints out = bigm(cnf, 1e6, f.p);
    CHECK(out.aux_vars.size() == 3);
    CHECK(f.p.vars.size() == nvars + 3);
    CHECK(out.inequalities.size() == 3);
    CHECK(out.equalities.size() == 1);  // mu1*mu2*mu3 = 0
    for (int v : out.aux_vars) {
      CHECK(f.p.vars[v].lower == 0.0);
      CHECK(f.p.vars[v].upper == 1.0);
    }
  }
  SUBCASE("single literal pins mu to zero") {
    CnfProgram cnf;
    cnf.clauses.push_back(Clause{{a}});
    BaselineConstraints out = bigm(cnf, 1e6, f.p);
    REQUIRE(out.equalities.size() == 1);
    EvalWorkspace ws;
    // product row is just mu1; with mu1 = 0 the literal row becomes p <= 0
    std::vector<double> x{0.3, 0.0, 0.0};
    CHECK(eval(f.p.arena, out.equalities[0], x, ws) == 0.0);
    CHECK(eval(f.p.arena, out.inequalities[0], x, ws) == doctest::Approx(0.3));
  }
  SUBCASE("rejects non-positive M") {
    CnfProgram cnf;
    cnf.clauses.push_back(Clause{{a}});
    CHECK_THROWS_AS(bigm(cnf, 0.0, f.p), std::invalid_argument);
  }
}

TEST_CASE("bigm feasibility matches the max-min sign on samples") {
  Rng rng(17);
  EvalWorkspace ws;
  for (int t = 0; t < 200; ++t) {
    Fixture f(2);
    PredId a = f.pred(f.p.var(0) + rng.uniform(-2, 2), "a");
    PredId b = f.pred(rng.uniform(-2, 2) - f.p.var(1), "b");
    CnfProgram cnf;
    cnf.clauses.push_back(Clause{{a, b}});
    BaselineConstraints out = bigm(cnf, 1e6, f.p);
    std::vector<double> x{rng.uniform(-3, 3), rng.uniform(-3, 3), 0.0, 0.0};
    const double mm = eval_maxmin(cnf, f.p.arena, f.p.preds, x, ws);
    // feasible mu exists iff some literal holds: check the witness and the
    // zero-grid (a zero product forces one mu to 0 exactly)
    bool witness_found = false;
    for (int pick = 0; pick < 2 && !witness_found; ++pick) {
      x[2] = pick == 0 ? 0.0 : 1.0;
      x[3] = pick == 0 ? 1.0 : 0.0;
      bool ok = true;
      for (ExprId e : out.inequalities) ok = ok && eval(f.p.arena, e, x, ws) <= 1e-9;
      for (ExprId e : out.equalities) ok = ok && std::abs(eval(f.p.arena, e, x, ws)) <= 1e-12;
      witness_found = ok;
    }
    CHECK(witness_found == (mm <= 0.0));
  }
}

TEST_CASE("complementarity structure and witnesses") {
  Fixture f(2);
  PredId a = f.pred(f.p.var(0), "a");
  PredId b = f.pred(f.p.var(1), "b");

  SUBCASE("single literal forces b = 1 hence p <= 0") {
    CnfProgram cnf;
    cnf.clauses.push_back(Clause{{a}});
    BaselineConstraints out = complementarity(cnf, 1e6, f.p);
    CHECK(out.aux_vars.size() == 1);
    CHECK(out.equalities.size() == 1);    // b(b-1) = 0
    CHECK(out.inequalities.size() == 2);  // literal row + selector row
    EvalWorkspace ws;
    std::vector<double> x{-0.4, 0.0, 1.0};
    CHECK(eval(f.p.arena, out.equalities[0], x, ws) == 0.0);
    for (ExprId e : out.inequalities) CHECK(eval(f.p.arena, e, x, ws) <= 0.0);
  }
  SUBCASE("two literals admit the indicator of a satisfied one") {
    CnfProgram cnf;
    cnf.clauses.push_back(Clause{{a, b}});
    BaselineConstraints out = complementarity(cnf, 1e6, f.p);
    EvalWorkspace ws;
    // p = (-1, 5): b = (1, 0) works
    std::vector<double> x{-1.0, 5.0, 1.0, 0.0};
    for (ExprId e : out.equalities) CHECK(std::abs(eval(f.p.arena, e, x, ws)) <= 1e-12);
    for (ExprId e : out.inequalities) CHECK(eval(f.p.arena, e, x, ws) <= 0.0);
  }
  SUBCASE("projection onto z matches the max-min sign on samples") {
    Rng rng(29);
    EvalWorkspace ws;
    for (int t = 0; t < 200; ++t) {
      Fixture g(2);
      PredId ga = g.pred(g.p.var(0) + rng.uniform(-2, 2), "a");
      PredId gb = g.pred(rng.uniform(-2, 2) - g.p.var(1), "b");
      CnfProgram cnf;
      cnf.clauses.push_back(Clause{{ga, gb}});
      BaselineConstraints out = complementarity(cnf, 1e6, g.p);
      std::vector<double> x{rng.uniform(-3, 3), rng.uniform(-3, 3), 0.0, 0.0};
      const double mm = eval_maxmin(cnf, g.p.arena, g.p.preds, x, ws);
      bool witness_found = false;
      for (int mask = 1; mask < 4 && !witness_found; ++mask) {
        x[2] = mask & 1 ? 1.0 : 0.0;
        x[3] = mask & 2 ? 1.0 : 0.0;
        bool ok = true;
        for (ExprId e : out.inequalities) ok = ok && eval(g.p.arena, e, x, ws) <= 1e-9;
        for (ExprId e : out.equalities) ok = ok && std::abs(eval(g.p.arena, e, x, ws)) <= 1e-12;
        witness_found = ok;
      }
      CHECK(witness_found == (mm <= 0.0));
    }
  }
}

TEST_CASE("quadrotor clause structure shares one Lambda_3 block over five rows") {
  Problem p;
  build_quadrotor(p);
  LoweredLogic low = lower_logic(p, StrictnessMode::epsilon(1e-5));
  REQUIRE(low.cnf.clauses.size() == 5);
  for (int i = 0; i < 5; ++i) CHECK(low.cnf.clauses[static_cast<std::size_t>(i)].lits.size() == 3);
  SmoothingPlan plan = smooth(low.cnf, true, p);
  CHECK(plan.blocks.size() == 1);
  CHECK(plan.blocks[0].members.size() == 3);
  CHECK(plan.constraints.size() == 5);
  for (const auto& sc : plan.constraints) CHECK(sc.block == 0);
}

TEST_CASE("lambda-sharing exactness invariant on random groups") {
  // group {(s1,s2,d1), (s1,s2,d2), (s1,s2,d3)}: shared-lambda feasibility in z
  // must match min(s) <= 0 or max(d) <= 0, which is the per-clause CNF set.
  Rng rng(31);
  EvalWorkspace ws;
  for (int t = 0; t < 300; ++t) {
    Fixture f(5);
    PredId s1 = f.pred(f.p.var(0), "s1");
    PredId s2 = f.pred(f.p.var(1), "s2");
    PredId d1 = f.pred(f.p.var(2), "d1");
    PredId d2 = f.pred(f.p.var(3), "d2");
    PredId d3 = f.pred(f.p.var(4), "d3");
    CnfProgram cnf;
    cnf.clauses.push_back(Clause{{s1, s2, d1}});
    cnf.clauses.push_back(Clause{{s1, s2, d2}});
    cnf.clauses.push_back(Clause{{s1, s2, d3}});
    SmoothingPlan plan = smooth(cnf, true, f.p);
    REQUIRE(plan.blocks.size() == 1);

    std::vector<double> x(8);
    for (int j = 0; j < 5; ++j) x[static_cast<std::size_t>(j)] = rng.uniform(-1, 1);
    const bool per_clause = eval_maxmin(cnf, f.p.arena, f.p.preds, x, ws) <= 0.0;
    const bool direct = std::min(x[0], x[1]) <= 0.0 || std::max({x[2], x[3], x[4]}) <= 0.0;
    CHECK(per_clause == direct);
    auto wit = recover_lambda(plan, f.p.arena, f.p.preds, x, ws);
    CHECK(wit.has_value() == per_clause);
    if (wit) {
      for (const auto& [var, val] : *wit) x[static_cast<std::size_t>(var)] = val;
      for (const auto& sc : plan.constraints)
        CHECK(eval(f.p.arena, sc.expr, x, ws) <= 0.0);
    }
  }
}
