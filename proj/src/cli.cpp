// SPDX-License-Identifier: Apache-2.0
#include "logicopt/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "logicopt/bench.hpp"
#include "logicopt/problem_io.hpp"
#include "logicopt/verify.hpp"

namespace logicopt {

namespace {

struct Flags {
  double tol = -1.0;  // <0: keep file/default
  int max_iter = -1;
  std::string strictness;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int runs = -1;
  std::string method;
  bool no_share = false;
  std::string report;
};

void add_common_flags(CLI::App* cmd, Flags& f) {
  cmd->add_option("--tol", f.tol, "feasibility/optimality tolerance");
  cmd->add_option("--max-iter", f.max_iter, "solver iteration limit");
  cmd->add_option("--strictness", f.strictness, "negation handling: exact|epsilon|closure")
      ->check(CLI::IsMember({"exact", "epsilon", "closure"}));
  cmd->add_option("--seed", f.seed, "multistart seed")->each([&](const std::string&) {
    f.seed_set = true;
  });
  cmd->add_option("--runs", f.runs, "number of multistart runs");
  cmd->add_option("--method", f.method, "reformulation: smoothed|bigm|compl")
      ->check(CLI::IsMember({"smoothed", "bigm", "compl"}));
  cmd->add_flag("--no-share", f.no_share, "disable lambda sharing across clauses");
  cmd->add_option("--report", f.report, "output file path");
}

StrictnessMode strictness_from(const std::string& s, double eps) {
  if (s == "exact") return StrictnessMode::exact_eta();
  if (s == "closure") return StrictnessMode::closure();
  return StrictnessMode::epsilon(eps > 0 ? eps : 1e-8);
}

void apply_flags(const Flags& f, ProblemFileOptions& o) {
  if (f.tol > 0) {
    o.solver.feas_tol = f.tol;
    o.solver.opt_tol = f.tol;
  }
  if (f.max_iter > 0) o.solver.max_iter = f.max_iter;
  if (!f.strictness.empty())
    o.strictness = strictness_from(f.strictness, o.strictness.eps);
  if (f.seed_set) o.seed = f.seed;
  if (f.runs >= 0) o.runs = f.runs;
  if (!f.method.empty()) {
    if (f.method == "smoothed") o.method = ReformMethod::Smoothed;
    if (f.method == "bigm") o.method = ReformMethod::BigM;
    if (f.method == "compl") o.method = ReformMethod::Complementarity;
  }
  if (f.no_share) o.share_lambda = false;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

std::string generic_solution_csv(const Problem& p, std::span<const double> x) {
  std::string out = "name,value\n";
  char buf[80];
  for (int j = 0; j < p.vars.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%s,%.17g\n", p.vars[j].name.c_str(),
                  x[static_cast<std::size_t>(j)]);
    out += buf;
  }
  return out;
}

int cmd_solve(const std::string& path, const Flags& flags) {
  ProblemFile pf = parse_problem_path(path);
  apply_flags(flags, pf.options);
  Problem& p = pf.problem;
  const FormulaPtr original = p.formula;

  LoweredLogic low = lower_logic(p, pf.options.strictness, pf.options.clause_limit);
  ReformConfig rc;
  rc.method = pf.options.method;
  rc.lambda_sharing = pf.options.share_lambda;
  rc.big_m = pf.options.big_m;
  ReformResult rr = reformulate(low.cnf, rc, p);
  AssembledNlp nlp = assemble(p, rr);

  const int runs = std::max(1, pf.options.runs);
  std::vector<SolveOutcome> outcomes = multistart(nlp, runs, pf.options.seed, pf.options.solver);

  EvalWorkspace ws;
  auto certified = [&](const SolveOutcome& o) {
    if (o.violation > pf.options.solver.feas_tol) return false;
    if (!original) return true;
    return eval_bool(original, p.arena, p.preds, o.point, pf.options.solver.feas_tol, ws);
  };

  int best = -1;
  int feasible_runs = 0;
  for (int r = 0; r < runs; ++r) {
    if (!certified(outcomes[static_cast<std::size_t>(r)])) continue;
    feasible_runs++;
    if (best < 0 ||
        outcomes[static_cast<std::size_t>(r)].objective < outcomes[static_cast<std::size_t>(best)].objective)
      best = r;
  }

  std::printf("problem: %s  vars=%d eq=%zu ineq=%zu clauses=%zu\n", p.name.c_str(), nlp.n,
              nlp.equalities.size(), nlp.inequalities.size(), low.cnf.clauses.size());
  for (int r = 0; r < runs; ++r) {
    const SolveOutcome& o = outcomes[static_cast<std::size_t>(r)];
    std::printf("run %3d: %-15s obj=%-12.6g viol=%-9.3g kkt=%-9.3g iters=%-4d %s\n", r,
                to_string(o.status), o.objective, o.violation, o.stationarity, o.iterations,
                certified(o) ? "certified" : "not-certified");
  }
  std::printf("feasible %d/%d\n", feasible_runs, runs);

  if (best >= 0) {
    const SolveOutcome& o = outcomes[static_cast<std::size_t>(best)];
    std::printf("best: run %d objective %.10g\n", best, o.objective);
    const std::string out_path = flags.report.empty() ? "solution.csv" : flags.report;
    if (!pf.layout.columns.empty())
      write_file(out_path, trajectory_csv(p, pf.layout, o.point));
    else
      write_file(out_path, generic_solution_csv(p, o.point));
    std::printf("solution written to %s\n", out_path.c_str());
    return 0;
  }
  std::printf("no certified feasible point found\n");
  return 1;
}

int cmd_bench(const std::string& name, int case_id, int runs, const Flags& flags) {
  BenchConfig cfg;
  cfg.runs = runs;
  if (flags.runs >= 0) cfg.runs = flags.runs;
  if (flags.seed_set) cfg.seed = flags.seed;
  if (flags.tol > 0) {
    cfg.solver.feas_tol = flags.tol;
    cfg.solver.opt_tol = flags.tol;
  }
  if (flags.max_iter > 0) cfg.solver.max_iter = flags.max_iter;
  if (!flags.strictness.empty()) cfg.strictness = strictness_from(flags.strictness, 1e-8);
  if (!flags.method.empty()) {
    if (flags.method == "bigm") cfg.method = ReformMethod::BigM;
    else if (flags.method == "compl") cfg.method = ReformMethod::Complementarity;
    else cfg.method = ReformMethod::Smoothed;
  }
  cfg.share_lambda = !flags.no_share;

  Problem p;
  StepLayout layout;
  std::string bench_name;
  if (name == "quadrotor") {
    build_quadrotor(p, &layout);
    bench_name = "quadrotor";
  } else if (name == "twotank") {
    build_two_tank(p, case_id, &layout);
    bench_name = "twotank" + std::to_string(case_id);
  } else {
    std::fprintf(stderr, "unknown benchmark '%s' (expected quadrotor|twotank)\n", name.c_str());
    return 4;
  }

  BenchReport rep = run_bench_on(p, bench_name, cfg);
  std::fputs(report_table({rep}).c_str(), stdout);
  std::printf("config: %s\n", rep.config_echo.c_str());

  const std::string report_path = flags.report.empty() ? "report.csv" : flags.report;
  write_file(report_path, report_csv({rep}));
  std::printf("report written to %s\n", report_path.c_str());

  int best = -1;
  for (std::size_t r = 0; r < rep.records.size(); ++r) {
    if (rep.records[r].cls == RunClass::Infeasible) continue;
    if (best < 0 || rep.records[r].outcome.objective <
                        rep.records[static_cast<std::size_t>(best)].outcome.objective)
      best = static_cast<int>(r);
  }
  if (best >= 0) {
    const std::string traj_path = report_path + ".traj.csv";
    write_file(traj_path, trajectory_csv(p, layout, rep.records[static_cast<std::size_t>(best)].outcome.point));
    std::printf("best trajectory (run %d) written to %s\n", best, traj_path.c_str());
  }
  return 0;
}

int cmd_verify(int trials, std::uint64_t seed) {
  const auto results = run_verification(trials, seed);
  bool all_pass = true;
  for (const SuiteResult& r : results) {
    std::printf("%-22s trials=%-7d failures=%-5d %s\n", r.name.c_str(), r.trials, r.failures,
                r.passed() ? "pass" : "FAIL");
    all_pass = all_pass && r.passed();
  }
  return all_pass ? 0 : 1;
}

int cmd_dump_cnf(const std::string& path, const Flags& flags) {
  ProblemFile pf = parse_problem_path(path);
  apply_flags(flags, pf.options);
  if (!pf.problem.formula) {
    std::printf("(no logic)\n");
    return 0;
  }
  LoweredLogic low = lower_logic(pf.problem, pf.options.strictness, pf.options.clause_limit);
  std::fputs(dump_cnf(low.cnf, pf.problem.preds).c_str(), stdout);
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"logic-constrained nonlinear optimization toolkit"};
  app.require_subcommand(1);

  Flags flags;
  std::string solve_file, bench_name, dump_file;
  int case_id = 1;
  int bench_runs = 100;
  int verify_trials = 200;
  std::uint64_t verify_seed = 1;

  CLI::App* solve = app.add_subcommand("solve", "solve a problem file");
  solve->add_option("file", solve_file, "problem file (JSON)")->required();
  add_common_flags(solve, flags);

  CLI::App* bench = app.add_subcommand("bench", "run a built-in benchmark");
  bench->add_option("name", bench_name, "quadrotor|twotank")->required();
  bench->add_option("--case", case_id, "two-tank case (1 or 2)");
  add_common_flags(bench, flags);

  CLI::App* verify = app.add_subcommand("verify", "run the randomized property suites");
  verify->add_option("--trials", verify_trials, "trials per suite");
  verify->add_option("--seed", verify_seed, "suite seed");

  CLI::App* dump = app.add_subcommand("dump-cnf", "print the lowered CNF of a problem file");
  dump->add_option("file", dump_file, "problem file (JSON)")->required();
  add_common_flags(dump, flags);

  std::vector<const char*> argv;
  argv.push_back("logicopt");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (solve->parsed()) return cmd_solve(solve_file, flags);
    if (bench->parsed()) return cmd_bench(bench_name, case_id, bench_runs, flags);
    if (verify->parsed()) return cmd_verify(verify_trials, verify_seed);
    if (dump->parsed()) return cmd_dump_cnf(dump_file, flags);
  } catch (const ClauseExplosion& e) {
    std::fprintf(stderr, "error: %s\nhint: CNF size depends on how the logic is written; "
                         "restructure the formula or raise options.clause_limit\n", e.what());
    return 3;
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 4;
}

}  // namespace logicopt
