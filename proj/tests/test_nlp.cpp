// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "logicopt/bench.hpp"
#include "logicopt/nlp.hpp"
#include "logicopt/verify.hpp"

using namespace logicopt;

namespace {

AssembledNlp assemble_with_logic(Problem& p, ReformMethod method, bool share) {
  LoweredLogic low = lower_logic(p, StrictnessMode::epsilon(1e-8));
  ReformConfig rc;
  rc.method = method;
  rc.lambda_sharing = share;
  ReformResult rr = reformulate(low.cnf, rc, p);
  return assemble(p, rr);
}

}  // namespace

TEST_CASE("solve: min (z-1)^2 s.t. z <= 0 -> z*=0, objective 1") {
  Problem p;
  p.vars.add("z", -10.0, 10.0);
  Expr z = p.var(0);
  p.objective = square(z - 1.0).id;
  p.inequalities.push_back(z.id);
  AssembledNlp nlp = assemble(p);
  SolveOutcome o = solve(nlp, std::vector<double>{-3.0});
  CHECK(o.status == SolveStatus::LocalOptimum);
  CHECK(o.point[0] == doctest::Approx(0.0).epsilon(1e-5));
  CHECK(o.objective == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(o.violation <= 1e-6);
  CHECK(o.stationarity <= 1e-6);
}

TEST_CASE("solve: min z1^2+z2^2 s.t. z1+z2=2 -> (1,1), objective 2") {
  Problem p;
  p.vars.add("z1", -10.0, 10.0);
  p.vars.add("z2", -10.0, 10.0);
  Expr z1 = p.var(0), z2 = p.var(1);
  p.objective = (square(z1) + square(z2)).id;
  p.equalities.push_back((z1 + z2 - 2.0).id);
  AssembledNlp nlp = assemble(p);
  SolveOutcome o = solve(nlp, std::vector<double>{5.0, -4.0});
  CHECK(o.status == SolveStatus::LocalOptimum);
  CHECK(o.point[0] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(o.point[1] == doctest::Approx(1.0).epsilon(1e-5));
  CHECK(o.objective == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("solve: bound-constrained quadratic") {
  Problem p;
  p.vars.add("z", 2.0, 5.0);
  Expr z = p.var(0);
  p.objective = square(z).id;
  AssembledNlp nlp = assemble(p);
  SolveOutcome o = solve(nlp, std::vector<double>{4.0});
  CHECK(o.status == SolveStatus::LocalOptimum);
  CHECK(o.point[0] == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("solve: nonlinear equality with sin") {
  // min (z1-2)^2 + z2^2 s.t. z2 - sin(z1) = 0
  Problem p;
  p.vars.add("z1", -4.0, 4.0);
  p.vars.add("z2", -2.0, 2.0);
  Expr z1 = p.var(0), z2 = p.var(1);
  p.objective = (square(z1 - 2.0) + square(z2)).id;
  p.equalities.push_back((z2 - sin(z1)).id);
  AssembledNlp nlp = assemble(p);
  SolveOutcome o = solve(nlp, std::vector<double>{0.5, 0.5});
  CHECK(o.status == SolveStatus::LocalOptimum);
  CHECK(o.violation <= 1e-6);
  CHECK(std::abs(o.point[1] - std::sin(o.point[0])) <= 1e-6);
}

TEST_CASE("reported KKT residuals are recomputed and consistent") {
  Problem p;
  p.vars.add("z1", -10.0, 10.0);
  p.vars.add("z2", -10.0, 10.0);
  Expr z1 = p.var(0), z2 = p.var(1);
  p.objective = (square(z1) + square(z2)).id;
  p.equalities.push_back((z1 + z2 - 2.0).id);
  p.inequalities.push_back((1.0 - z2).id);  // z2 >= 1 active at optimum
  AssembledNlp nlp = assemble(p);
  SolveOutcome o = solve(nlp, std::vector<double>{0.0, 0.0});
  REQUIRE(o.status == SolveStatus::LocalOptimum);
  const KktResiduals kkt = compute_kkt(nlp, o.point, o.mult_eq, o.mult_ineq, o.mult_lo, o.mult_up);
  CHECK(kkt.stationarity == o.stationarity);
  CHECK(kkt.violation == o.violation);
  CHECK(o.stationarity <= 1e-6);
  CHECK(o.violation <= 1e-6);
}

TEST_CASE("assemble: no logic means the base problem") {
  Problem p;
  p.vars.add("z", -1.0, 1.0);
  p.objective = square(p.var(0)).id;
  p.inequalities.push_back(p.var(0).id);
  AssembledNlp nlp = assemble(p);
  CHECK(nlp.n == 1);
  CHECK(nlp.equalities.empty());
  CHECK(nlp.inequalities.size() == 1);
  CHECK(nlp.blocks.empty());
}

TEST_CASE("assemble: one 2-literal clause adds 2 lambdas, 1 unity row, 1 smoothed row") {
  Problem p;
  p.vars.add("z", -5.0, 5.0);
  Expr z = p.var(0);
  p.objective = square(z).id;
  PredId a = p.preds.add(PredicateKind::Inequality, (z + 1.0).id, "a");
  PredId b = p.preds.add(PredicateKind::Inequality, (2.0 - z).id, "b");
  p.formula = lor({leaf(a), leaf(b)});
  AssembledNlp nlp = assemble_with_logic(p, ReformMethod::Smoothed, false);
  CHECK(nlp.n == 3);
  CHECK(nlp.equalities.size() == 1);    // unity
  CHECK(nlp.inequalities.size() == 1);  // smoothed clause
  REQUIRE(nlp.blocks.size() == 1);
  CHECK(nlp.blocks[0].members.size() == 2);
  for (int v : nlp.blocks[0].members) {
    CHECK(nlp.lower[static_cast<std::size_t>(v)] == 0.0);
    CHECK(nlp.upper[static_cast<std::size_t>(v)] == 1.0);
  }
}

TEST_CASE("assemble: quadrotor counts") {
  Problem p;
  build_quadrotor(p);
  AssembledNlp nlp = assemble_with_logic(p, ReformMethod::Smoothed, true);
  CHECK(nlp.n == 83);  // 60 states + 20 inputs + 3 shared lambdas
  CHECK(nlp.base_eq_count == 62);
  CHECK(nlp.equalities.size() == 63);    // + unity
  CHECK(nlp.inequalities.size() == 5);   // one smoothed row per red step
  REQUIRE(nlp.blocks.size() == 1);
  CHECK(nlp.blocks[0].members.size() == 3);
}

TEST_CASE("assemble: constraint-count identity (single-literal Lambda_1 eliminated)") {
  // CNF with clause sizes 3, 2, 1 -> unshared smoothing:
  //   inequalities: n_g + (n_and + 1); unity equalities: one per clause with
  //   size >= 2; lambda variables: sum of sizes >= 2.
  Problem p;
  p.vars.add("z", -5.0, 5.0);
  Expr z = p.var(0);
  p.objective = square(z).id;
  p.inequalities.push_back((z - 4.0).id);  // n_g = 1
  PredId a = p.preds.add(PredicateKind::Inequality, (z + 1.0).id, "a");
  PredId b = p.preds.add(PredicateKind::Inequality, (z + 2.0).id, "b");
  PredId c = p.preds.add(PredicateKind::Inequality, (z + 3.0).id, "c");
  p.formula = land({lor({leaf(a), leaf(b), leaf(c)}), lor({leaf(a), leaf(c)}), leaf(b)});
  AssembledNlp nlp = assemble_with_logic(p, ReformMethod::Smoothed, false);
  CHECK(nlp.inequalities.size() == 1 + 3);
  CHECK(nlp.equalities.size() == 0 + 2);
  CHECK(nlp.lambda_var_count == 3 + 2);
  CHECK(nlp.n == 1 + 5);
}

TEST_CASE("multistart: runs=0 empty; same seed bit-identical; worker count irrelevant") {
  Problem p;
  p.vars.add("z1", -10.0, 10.0);
  p.vars.add("z2", -10.0, 10.0);
  Expr z1 = p.var(0), z2 = p.var(1);
  p.objective = (square(z1 - 1.0) + square(z2 + 2.0) + sin(z1 * z2)).id;
  AssembledNlp nlp = assemble(p);

  CHECK(multistart(nlp, 0, 7).empty());

  SolverOptions serial;
  serial.workers = 1;
  SolverOptions parallel;
  parallel.workers = 4;
  auto a = multistart(nlp, 12, 7, serial);
  auto b = multistart(nlp, 12, 7, serial);
  auto c = multistart(nlp, 12, 7, parallel);
  REQUIRE(a.size() == 12);
  for (std::size_t r = 0; r < a.size(); ++r) {
    CHECK(a[r].status == b[r].status);
    CHECK(a[r].objective == b[r].objective);  // bit-identical
    CHECK(a[r].point == b[r].point);
    CHECK(a[r].status == c[r].status);
    CHECK(a[r].objective == c[r].objective);
    CHECK(a[r].point == c[r].point);
  }
}

TEST_CASE("classify thresholds") {
  SolveOutcome o;
  o.status = SolveStatus::LocalOptimum;
  o.point = {0.0};
  o.objective = 22.0;
  o.violation = 1e-3;
  CHECK(classify(o, 22.0, {}, 1e-6) == RunClass::Infeasible);
  o.violation = 0.0;
  CHECK(classify(o, 22.0, {}, 1e-6) == RunClass::Optimal);
  o.objective = 28.0;
  CHECK(classify(o, 22.0, {}, 1e-6) == RunClass::SubOptimal);
  // logic oracle failure dominates
  o.objective = 22.0;
  CHECK(classify(o, 22.0, [](std::span<const double>) { return false; }, 1e-6) ==
        RunClass::Infeasible);
}

TEST_CASE("disjunctive toy: multistart finds both basins, classification splits them") {
  // feasible set: z <= -1 or z >= 2; objective (z-3)^2
  // optimum z*=3 (cost 0), secondary basin z=-1 (cost 16)
  Problem p;
  p.vars.add("z", -6.0, 6.0);
  Expr z = p.var(0);
  p.objective = square(z - 3.0).id;
  PredId a = p.preds.add(PredicateKind::Inequality, (z + 1.0).id, "left");
  PredId b = p.preds.add(PredicateKind::Inequality, (2.0 - z).id, "right");
  p.formula = lor({leaf(a), leaf(b)});
  const FormulaPtr original = p.formula;
  AssembledNlp nlp = assemble_with_logic(p, ReformMethod::Smoothed, false);

  auto outcomes = multistart(nlp, 40, 3);
  EvalWorkspace ws;
  auto oracle = [&](std::span<const double> pt) {
    return eval_bool(original, p.arena, p.preds, pt, 1e-6, ws);
  };
  double best = std::numeric_limits<double>::infinity();
  int feas = 0;
  for (const auto& o : outcomes)
    if (o.violation <= 1e-6 && oracle(o.point)) {
      best = std::min(best, o.objective);
      feas++;
    }
  REQUIRE(feas > 0);
  CHECK(best == doctest::Approx(0.0).epsilon(1e-4));
  int optimal = 0, subopt = 0;
  for (const auto& o : outcomes) {
    const RunClass c = classify(o, best, oracle, 1e-6);
    if (c == RunClass::Optimal) optimal++;
    if (c == RunClass::SubOptimal) subopt++;
  }
  CHECK(optimal > 0);
  // the z=-1 basin is reachable from the left end of the init box
  CHECK(subopt > 0);
  for (const auto& o : outcomes) {
    if (classify(o, best, oracle, 1e-6) == RunClass::SubOptimal)
      CHECK(o.objective == doctest::Approx(16.0).epsilon(1e-3));
  }
}

TEST_CASE("infeasible problem is reported as infeasible") {
  // z pinned to [0,0] but logic requires z <= -1 and z >= 1
  Problem p;
  p.vars.add("z", 0.0, 0.0);
  Expr z = p.var(0);
  p.objective = square(z).id;
  PredId a = p.preds.add(PredicateKind::Inequality, (z + 1.0).id, "le_m1");
  PredId b = p.preds.add(PredicateKind::Inequality, (1.0 - z).id, "ge_p1");
  p.formula = land({leaf(a), leaf(b)});
  AssembledNlp nlp = assemble_with_logic(p, ReformMethod::Smoothed, false);
  SolveOutcome o = solve(nlp, std::vector<double>{0.0});
  CHECK(o.status != SolveStatus::LocalOptimum);
  CHECK(o.violation > 1e-6);
}

TEST_CASE("LocalOptimum invariant holds on a batch of random QPs") {
  Rng rng(99);
  for (int t = 0; t < 20; ++t) {
    Problem p;
    p.vars.add("z1", -5.0, 5.0);
    p.vars.add("z2", -5.0, 5.0);
    Expr z1 = p.var(0), z2 = p.var(1);
    const double a = rng.uniform(-2, 2), b = rng.uniform(-2, 2);
    p.objective = (square(z1 - a) + square(z2 - b) + 0.3 * z1 * z2).id;
    p.equalities.push_back((z1 + 0.5 * z2 - rng.uniform(-1, 1)).id);
    AssembledNlp nlp = assemble(p);
    SolveOutcome o = solve(nlp, std::vector<double>{rng.uniform(-4, 4), rng.uniform(-4, 4)});
    if (o.status == SolveStatus::LocalOptimum) {
      CHECK(o.violation <= 1e-6);
      CHECK(o.stationarity <= 1e-6);
    }
  }
}
