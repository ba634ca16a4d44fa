// SPDX-License-Identifier: Apache-2.0
#include "logicopt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

namespace logicopt {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v, const char* spec = "%.17g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}
}  // namespace

void build_quadrotor(Problem& out, StepLayout* layout, const QuadrotorSpec& sp) {
  out = Problem{};
  out.name = "quadrotor";
  const int N = sp.steps;

  for (int k = 1; k <= N; ++k)
    for (int i = 1; i <= 6; ++i) {
      const std::string name = "x" + std::to_string(i) + "_" + std::to_string(k);
      double lo = -10.0, hi = 10.0;
      if (i == 1 || i == 3) {
        lo = -5.0;
        hi = 20.0;
      } else if (i == 5) {
        lo = -kPi;
        hi = kPi;
      }
      out.vars.add(name, -kInf, kInf, lo, hi);
    }
  for (int k = 1; k <= N; ++k)
    for (int i = 1; i <= 2; ++i)
      out.vars.add("u" + std::to_string(i) + "_" + std::to_string(k), sp.u_min, sp.u_max,
                   sp.u_min, sp.u_max);

  auto X = [&](int k, int i) -> Expr {
    return k == 0 ? out.num(0.0) : out.var(6 * (k - 1) + (i - 1));
  };
  auto U = [&](int k, int i) -> Expr { return out.var(6 * N + 2 * (k - 1) + (i - 1)); };

  Expr obj = out.num(0.0);
  for (int k = 1; k <= N; ++k) obj = obj + square(U(k, 1)) + square(U(k, 2));
  out.objective = obj.id;

  for (int k = 0; k < N; ++k) {
    Expr thrust = U(k + 1, 1) + U(k + 1, 2);
    out.equalities.push_back(
        (X(k + 1, 1) - X(k, 1) - sp.ts * (X(k, 2) + X(k + 1, 2)) / 2.0).id);
    out.equalities.push_back(
        (X(k + 1, 2) - X(k, 2) - sp.ts * (sin(X(k, 5)) * thrust / sp.mass)).id);
    out.equalities.push_back(
        (X(k + 1, 3) - X(k, 3) - sp.ts * (X(k, 4) + X(k + 1, 4)) / 2.0).id);
    out.equalities.push_back(
        (X(k + 1, 4) - X(k, 4) - sp.ts * (cos(X(k, 5)) * thrust / sp.mass - sp.gravity)).id);
    out.equalities.push_back(
        (X(k + 1, 5) - X(k, 5) - sp.ts * (X(k, 6) + X(k + 1, 6)) / 2.0).id);
    out.equalities.push_back(
        (X(k + 1, 6) - X(k, 6) - sp.ts * (sp.arm * (U(k + 1, 1) - U(k + 1, 2)) / sp.inertia)).id);
  }
  out.equalities.push_back((X(N, 1) - sp.terminal_r).id);
  out.equalities.push_back((X(N, 3) - sp.terminal_s).id);

  std::vector<FormulaPtr> greens, reds;
  for (int i : sp.green_steps) {
    Expr body = square(X(i, 1) - sp.green_cx) + square(X(i, 3) - sp.green_cy) -
                sp.green_r * sp.green_r;
    greens.push_back(
        leaf(out.preds.add(PredicateKind::Inequality, body.id, "g" + std::to_string(i))));
  }
  for (int i : sp.red_steps) {
    Expr body =
        square(X(i, 1) - sp.red_cx) + square(X(i, 3) - sp.red_cy) - sp.red_r * sp.red_r;
    reds.push_back(
        leaf(out.preds.add(PredicateKind::Inequality, body.id, "r" + std::to_string(i))));
  }
  out.formula = implies(lnot(lor(std::move(greens))), lnot(lor(std::move(reds))));

  if (layout) {
    layout->steps = N;
    layout->columns.clear();
    for (int i = 1; i <= 6; ++i) {
      std::vector<int> col(static_cast<std::size_t>(N + 1), -1);
      for (int k = 1; k <= N; ++k) col[static_cast<std::size_t>(k)] = 6 * (k - 1) + (i - 1);
      layout->columns.emplace_back("x" + std::to_string(i), std::move(col));
    }
    for (int i = 1; i <= 2; ++i) {
      std::vector<int> col(static_cast<std::size_t>(N + 1), -1);
      for (int k = 1; k <= N; ++k) col[static_cast<std::size_t>(k)] = 6 * N + 2 * (k - 1) + (i - 1);
      layout->columns.emplace_back("u" + std::to_string(i), std::move(col));
    }
  }
}

TwoTankSpec TwoTankSpec::for_case(int case_id) {
  TwoTankSpec s;
  if (case_id == 1) {
    s.h0_1 = 5.0;
    s.h0_2 = 5.0;
    s.hN_1 = 1.5;
    s.hN_2 = 3.5;
  } else if (case_id == 2) {
    s.h0_1 = 5.0;
    s.h0_2 = 2.0;
    s.hN_1 = 2.0;
    s.hN_2 = 4.0;
  } else {
    throw std::invalid_argument("two-tank case must be 1 or 2");
  }
  return s;
}

void build_two_tank(Problem& out, int case_id, StepLayout* layout) {
  const TwoTankSpec sp = TwoTankSpec::for_case(case_id);
  out = Problem{};
  out.name = "twotank" + std::to_string(case_id);
  const int N = sp.steps;

  for (int k = 1; k <= N; ++k) {
    out.vars.add("h1_" + std::to_string(k), 0.0, kInf, 0.0, 10.0);
    out.vars.add("h2_" + std::to_string(k), 0.0, kInf, 0.0, 10.0);
  }
  for (int k = 1; k <= N; ++k)
    out.vars.add("u_" + std::to_string(k), sp.u_min, sp.u_max, sp.u_min, sp.u_max);
  for (int k = 0; k < N; ++k) {
    out.vars.add("hb1_" + std::to_string(k), 0.0, kInf, 0.0, 10.0);
    out.vars.add("hb2_" + std::to_string(k), 0.0, kInf, 0.0, 10.0);
  }

  auto H = [&](int k, int t) -> Expr {
    if (k == 0) return out.num(t == 1 ? sp.h0_1 : sp.h0_2);
    return out.var(2 * (k - 1) + (t - 1));
  };
  auto U = [&](int k) -> Expr { return out.var(2 * N + (k - 1)); };
  auto HB = [&](int k, int t) -> Expr { return out.var(3 * N + 2 * k + (t - 1)); };

  Expr obj = out.num(0.0);
  for (int k = 1; k <= N; ++k) obj = obj + square(U(k));
  out.objective = obj.id;

  const double g2 = 2.0 * sp.gravity;
  auto outflow = [&](double area, Expr head) -> Expr {
    return area * sqrt(g2 * head + sp.sqrt_shift);
  };
  for (int k = 0; k < N; ++k) {
    Expr flow1 = outflow(sp.s1, H(k, 1));
    Expr flow12 = outflow(sp.s12, HB(k, 1));
    Expr flow2 = outflow(sp.s2, HB(k, 2));
    out.equalities.push_back(
        (H(k + 1, 1) - H(k, 1) - sp.ts * (U(k + 1) / sp.area1 - flow1 / sp.area1 - flow12 / sp.area1))
            .id);
    out.equalities.push_back(
        (H(k + 1, 2) - H(k, 2) - sp.ts * (flow12 / sp.area2 - flow2 / sp.area2)).id);
  }
  out.equalities.push_back((H(N, 1) - sp.hN_1).id);
  out.equalities.push_back((H(N, 2) - sp.hN_2).id);

  // hb = max(h - hs, 0) expressed as logic over an auxiliary variable:
  // (h >= hs and hb = h - hs) or (h <= hs and hb = 0)
  std::vector<FormulaPtr> pieces;
  for (int k = 0; k < N; ++k)
    for (int t = 1; t <= 2; ++t) {
      const double hs = t == 1 ? sp.h_s12 : sp.h_s2;
      const std::string base = "hb" + std::to_string(t) + "_" + std::to_string(k);
      PredId hi_cond =
          out.preds.add(PredicateKind::Inequality, (out.num(hs) - H(k, t)).id, base + ".hi");
      PredId hi_eq = out.preds.add(PredicateKind::Equality, (HB(k, t) - (H(k, t) - hs)).id,
                                   base + ".hieq");
      PredId lo_cond =
          out.preds.add(PredicateKind::Inequality, (H(k, t) - hs).id, base + ".lo");
      PredId lo_eq = out.preds.add(PredicateKind::Equality, HB(k, t).id, base + ".loeq");
      pieces.push_back(lor({land({leaf(hi_cond), leaf(hi_eq)}),
                            land({leaf(lo_cond), leaf(lo_eq)})}));
    }

  if (case_id == 2) {
    FormulaSeq a, b;
    for (int k = 0; k <= N; ++k) {
      a.push_back(leaf(out.preds.add(PredicateKind::Inequality,
                                     (out.num(sp.until_threshold) - H(k, 1)).id,
                                     "a_" + std::to_string(k))));
      b.push_back(leaf(out.preds.add(PredicateKind::Inequality,
                                     (out.num(sp.until_threshold) - H(k, 2)).id,
                                     "b_" + std::to_string(k))));
    }
    pieces.push_back(until(std::move(a), std::move(b), 0));
  }
  out.formula = land(std::move(pieces));

  if (layout) {
    layout->steps = N;
    layout->columns.clear();
    auto column = [&](const std::string& name, auto index_of) {
      std::vector<int> col(static_cast<std::size_t>(N + 1), -1);
      for (int k = 0; k <= N; ++k) col[static_cast<std::size_t>(k)] = index_of(k);
      layout->columns.emplace_back(name, std::move(col));
    };
    column("h1", [&](int k) { return k == 0 ? -1 : 2 * (k - 1); });
    column("h2", [&](int k) { return k == 0 ? -1 : 2 * (k - 1) + 1; });
    column("u", [&](int k) { return k == 0 ? -1 : 2 * N + (k - 1); });
    column("hb1", [&](int k) { return k == N ? -1 : 3 * N + 2 * k; });
    column("hb2", [&](int k) { return k == N ? -1 : 3 * N + 2 * k + 1; });
  }
}

namespace {
std::vector<double> midpoint_start(const AssembledNlp& nlp) {
  std::vector<double> x(static_cast<std::size_t>(nlp.n));
  for (int j = 0; j < nlp.n; ++j)
    x[static_cast<std::size_t>(j)] =
        0.5 * (nlp.init_lo[static_cast<std::size_t>(j)] + nlp.init_hi[static_cast<std::size_t>(j)]);
  return x;
}
}  // namespace

std::vector<double> quadrotor_warm_start(const AssembledNlp& nlp, const QuadrotorSpec& sp) {
  const int N = sp.steps;
  std::vector<double> x = midpoint_start(nlp);
  std::vector<std::pair<double, double>> pos(static_cast<std::size_t>(N + 1));
  pos[0] = {0.0, 0.0};
  for (int k = 1; k <= N; ++k) {
    if (k == 1)
      pos[static_cast<std::size_t>(k)] = {0.5 * sp.green_cx, 0.5 * sp.green_cy};
    else if (k == 2 || k == 3)
      pos[static_cast<std::size_t>(k)] = {sp.green_cx, sp.green_cy};
    else {
      const double t = static_cast<double>(k - 3) / (N - 3);
      pos[static_cast<std::size_t>(k)] = {sp.green_cx * (1.0 - t),
                                          sp.green_cy + (sp.terminal_s - sp.green_cy) * t};
    }
  }
  for (int k = 1; k <= N; ++k) {
    const auto [px, py] = pos[static_cast<std::size_t>(k)];
    const auto [qx, qy] = pos[static_cast<std::size_t>(k - 1)];
    x[static_cast<std::size_t>(6 * (k - 1) + 0)] = px;
    x[static_cast<std::size_t>(6 * (k - 1) + 1)] = (px - qx) / sp.ts;
    x[static_cast<std::size_t>(6 * (k - 1) + 2)] = py;
    x[static_cast<std::size_t>(6 * (k - 1) + 3)] = (py - qy) / sp.ts;
    x[static_cast<std::size_t>(6 * (k - 1) + 4)] = 0.0;
    x[static_cast<std::size_t>(6 * (k - 1) + 5)] = 0.0;
  }
  const double hover = sp.mass * sp.gravity / 2.0;
  for (int k = 1; k <= N; ++k) {
    x[static_cast<std::size_t>(6 * N + 2 * (k - 1))] = hover;
    x[static_cast<std::size_t>(6 * N + 2 * (k - 1) + 1)] = hover;
  }
  return x;
}

std::vector<double> two_tank_warm_start(const AssembledNlp& nlp, int case_id) {
  const TwoTankSpec sp = TwoTankSpec::for_case(case_id);
  const int N = sp.steps;
  std::vector<double> x = midpoint_start(nlp);
  double h1 = sp.h0_1, h2 = sp.h0_2;
  const double u = 0.5 * (sp.u_min + sp.u_max);
  for (int k = 0; k < N; ++k) {
    const double hb1 = std::max(h1 - sp.h_s12, 0.0);
    const double hb2 = std::max(h2 - sp.h_s2, 0.0);
    x[static_cast<std::size_t>(3 * N + 2 * k)] = hb1;
    x[static_cast<std::size_t>(3 * N + 2 * k + 1)] = hb2;
    x[static_cast<std::size_t>(2 * N + k)] = u;
    const double g2 = 2.0 * sp.gravity;
    const double f1 = sp.s1 * std::sqrt(g2 * h1 + sp.sqrt_shift);
    const double f12 = sp.s12 * std::sqrt(g2 * hb1 + sp.sqrt_shift);
    const double f2 = sp.s2 * std::sqrt(g2 * hb2 + sp.sqrt_shift);
    h1 = h1 + sp.ts * (u / sp.area1 - f1 / sp.area1 - f12 / sp.area1);
    h2 = h2 + sp.ts * (f12 / sp.area2 - f2 / sp.area2);
    h1 = std::max(h1, 0.0);
    h2 = std::max(h2, 0.0);
    x[static_cast<std::size_t>(2 * k)] = h1;
    x[static_cast<std::size_t>(2 * k + 1)] = h2;
  }
  return x;
}

namespace {
const char* method_name(ReformMethod m) {
  switch (m) {
    case ReformMethod::Smoothed: return "smoothed";
    case ReformMethod::BigM: return "bigm";
    case ReformMethod::Complementarity: return "compl";
  }
  return "?";
}

const char* strictness_name(StrictnessMode m) {
  switch (m.kind) {
    case StrictnessMode::Kind::ExactEta: return "exact";
    case StrictnessMode::Kind::Epsilon: return "epsilon";
    case StrictnessMode::Kind::Closure: return "closure";
  }
  return "?";
}
}  // namespace

BenchReport run_bench_on(Problem& p, const std::string& name, const BenchConfig& cfg,
                         const WarmStartBuilder& warm_builder) {
  const FormulaPtr original = p.formula;
  LoweredLogic low = lower_logic(p, cfg.strictness, cfg.clause_limit);
  ReformConfig rc;
  rc.method = cfg.method;
  rc.lambda_sharing = cfg.share_lambda;
  rc.big_m = cfg.big_m;
  ReformResult rr = reformulate(low.cnf, rc, p);
  AssembledNlp nlp = assemble(p, rr);

  std::vector<SolveOutcome> outcomes = multistart(nlp, cfg.runs, cfg.seed, cfg.solver);
  if (cfg.warm_start_first_run && warm_builder && cfg.runs > 0)
    outcomes[0] = solve(nlp, warm_builder(nlp), cfg.solver);

  EvalWorkspace ws;
  auto oracle = [&](std::span<const double> pt) {
    if (!original) return true;
    return eval_bool(original, p.arena, p.preds, pt, cfg.solver.feas_tol, ws);
  };

  BenchReport rep;
  rep.bench = name;
  rep.method = method_name(cfg.method);
  rep.runs = cfg.runs;
  rep.seed = cfg.seed;
  {
    std::ostringstream echo;
    echo << "method=" << rep.method << " share=" << (cfg.share_lambda ? 1 : 0)
         << " strictness=" << strictness_name(cfg.strictness) << " runs=" << cfg.runs
         << " seed=" << cfg.seed << " feas_tol=" << cfg.solver.feas_tol
         << " opt_tol=" << cfg.solver.opt_tol << " max_iter=" << cfg.solver.max_iter
         << " big_m=" << cfg.big_m;
    rep.config_echo = echo.str();
  }

  std::vector<bool> feasible(outcomes.size(), false);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    const SolveOutcome& o = outcomes[r];
    feasible[r] = o.violation <= cfg.solver.feas_tol && oracle(o.point);
    if (feasible[r]) best = std::min(best, o.objective);
  }
  rep.best_cost = best;

  double cost_sum = 0.0, t_sum = 0.0, t_feas_sum = 0.0;
  int feas_count = 0;
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    RunRecord rec;
    rec.outcome = std::move(outcomes[r]);
    rec.cls = classify(rec.outcome, best, oracle, cfg.solver.feas_tol);
    switch (rec.cls) {
      case RunClass::Optimal: rep.optimal++; break;
      case RunClass::SubOptimal: rep.suboptimal++; break;
      case RunClass::Infeasible: rep.infeasible++; break;
    }
    t_sum += rec.outcome.wall_ms;
    rep.max_time_ms = std::max(rep.max_time_ms, rec.outcome.wall_ms);
    if (feasible[r]) {
      cost_sum += rec.outcome.objective;
      t_feas_sum += rec.outcome.wall_ms;
      feas_count++;
    }
    rep.records.push_back(std::move(rec));
  }
  rep.avg_cost = feas_count > 0 ? cost_sum / feas_count : 0.0;
  rep.avg_time_ms = cfg.runs > 0 ? t_sum / cfg.runs : 0.0;
  rep.avg_time_feas_ms = feas_count > 0 ? t_feas_sum / feas_count : 0.0;
  return rep;
}

BenchReport run_quadrotor_bench(const BenchConfig& cfg, const QuadrotorSpec& spec) {
  Problem p;
  build_quadrotor(p, nullptr, spec);
  return run_bench_on(p, "quadrotor", cfg,
                      [&](const AssembledNlp& nlp) { return quadrotor_warm_start(nlp, spec); });
}

BenchReport run_two_tank_bench(int case_id, const BenchConfig& cfg) {
  Problem p;
  build_two_tank(p, case_id, nullptr);
  return run_bench_on(p, "twotank" + std::to_string(case_id), cfg, [&](const AssembledNlp& nlp) {
    return two_tank_warm_start(nlp, case_id);
  });
}

std::string report_table(const std::vector<BenchReport>& reports) {
  std::ostringstream os;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %-9s %6s %6s %8s %6s %10s %10s %12s %10s\n", "bench",
                "method", "runs", "opt", "subopt", "inf", "avg_cost", "avg_ms", "avg_ms_feas",
                "max_ms");
  os << line;
  for (const BenchReport& r : reports) {
    std::snprintf(line, sizeof line, "%-10s %-9s %6d %6d %8d %6d %10.4f %10.2f %12.2f %10.2f\n",
                  r.bench.c_str(), r.method.c_str(), r.runs, r.optimal, r.suboptimal,
                  r.infeasible, r.avg_cost, r.avg_time_ms, r.avg_time_feas_ms, r.max_time_ms);
    os << line;
  }
  return os.str();
}

std::string report_csv(const std::vector<BenchReport>& reports) {
  std::ostringstream os;
  os << "method,runs,opt,subopt,inf,avg_cost,avg_time_ms,avg_time_feas_ms,max_time_ms,seed\n";
  for (const BenchReport& r : reports) {
    os << r.method << "," << r.runs << "," << r.optimal << "," << r.suboptimal << ","
       << r.infeasible << "," << fmt(r.avg_cost) << "," << fmt(r.avg_time_ms, "%.3f") << ","
       << fmt(r.avg_time_feas_ms, "%.3f") << "," << fmt(r.max_time_ms, "%.3f") << "," << r.seed
       << "\n";
  }
  return os.str();
}

std::string deterministic_payload(const BenchReport& r) {
  std::ostringstream os;
  os << r.bench << "," << r.method << "," << r.runs << "," << r.optimal << "," << r.suboptimal
     << "," << r.infeasible << "," << fmt(r.best_cost) << "," << fmt(r.avg_cost) << "," << r.seed
     << "\n";
  for (const RunRecord& rec : r.records)
    os << to_string(rec.cls) << "," << to_string(rec.outcome.status) << ","
       << fmt(rec.outcome.objective) << "," << fmt(rec.outcome.violation) << ","
       << rec.outcome.iterations << "\n";
  return os.str();
}

std::string trajectory_csv(const Problem& p, const StepLayout& layout,
                           std::span<const double> point) {
  std::ostringstream os;
  std::set<int> covered;
  os << "k";
  for (const auto& [name, idx] : layout.columns) {
    os << "," << name;
    for (int v : idx)
      if (v >= 0) covered.insert(v);
  }
  os << "\n";
  for (int k = 0; k <= layout.steps; ++k) {
    os << k;
    for (const auto& [name, idx] : layout.columns) {
      const int v = idx[static_cast<std::size_t>(k)];
      os << ",";
      if (v >= 0) os << fmt(point[static_cast<std::size_t>(v)]);
    }
    os << "\n";
  }
  bool header = false;
  for (int j = 0; j < p.vars.size() && j < static_cast<int>(point.size()); ++j) {
    if (covered.count(j)) continue;
    if (!header) {
      os << "\nname,value\n";
      header = true;
    }
    os << p.vars[j].name << "," << fmt(point[static_cast<std::size_t>(j)]) << "\n";
  }
  return os.str();
}

}  // namespace logicopt
