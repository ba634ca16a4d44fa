// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "logicopt/nlp.hpp"

namespace logicopt {

/// Planar quadrotor reaching (0, 15) in N steps; entering the green circle at
/// step 2 or 3 licenses crossing the red circle at steps 5..9.
struct QuadrotorSpec {
  int steps = 10;  // N
  double ts = 0.25;
  double mass = 0.15;
  double inertia = 0.00125;
  double arm = 0.1;
  double gravity = 9.81;
  double u_min = 0.0, u_max = 2.0;
  double terminal_r = 0.0, terminal_s = 15.0;
  double green_cx = 2.0, green_cy = 1.0, green_r = 1.0;
  std::vector<int> green_steps{2, 3};
  double red_cx = 0.0, red_cy = 8.0, red_r = 5.0;
  std::vector<int> red_steps{5, 6, 7, 8, 9};
};

/// Two gravity-drained tanks; the piecewise outlet heights are modeled as
/// decision variables constrained by logic. Case 2 adds an until constraint
/// guarding tank 1's level until tank 2 fills past the threshold.
struct TwoTankSpec {
  int steps = 20;  // N
  double ts = 3.0;
  double area1 = 2.0, area2 = 1.0;
  double s1 = 0.015, s12 = 0.02, s2 = 0.02;
  double h_s12 = 2.0, h_s2 = 3.0;
  double u_min = 0.0, u_max = 0.5;
  double gravity = 9.81;
  double sqrt_shift = 1e-9;  // keeps sqrt differentiable at empty outlets
  double h0_1 = 5.0, h0_2 = 5.0;
  double hN_1 = 1.5, hN_2 = 3.5;
  double until_threshold = 4.5;

  static TwoTankSpec for_case(int case_id);
};

/// Column layout for per-step trajectory output: variable index per (column,
/// step), -1 where a column has no entry (e.g. inputs at step 0).
struct StepLayout {
  int steps = 0;  // rows are 0..steps
  std::vector<std::pair<std::string, std::vector<int>>> columns;
};

void build_quadrotor(Problem& out, StepLayout* layout = nullptr, const QuadrotorSpec& spec = {});
void build_two_tank(Problem& out, int case_id, StepLayout* layout = nullptr);

/// Hand-constructed initial guesses in a known-good basin (through the green
/// circle for the quadrotor; a forward simulation for the tanks). Auxiliary
/// variables are set to the middle of their sampling boxes. Index layout must
/// match the corresponding builder.
std::vector<double> quadrotor_warm_start(const AssembledNlp& nlp, const QuadrotorSpec& spec = {});
std::vector<double> two_tank_warm_start(const AssembledNlp& nlp, int case_id);

struct BenchConfig {
  ReformMethod method = ReformMethod::Smoothed;
  bool share_lambda = true;
  int runs = 100;
  std::uint64_t seed = 1;
  // Certification asks negated inequalities to clear the tolerance band, so
  // the benchmark epsilon sits above feas_tol (1e-8 would leave boundary
  // solutions uncertifiable).
  StrictnessMode strictness = StrictnessMode::epsilon(1e-5);
  double big_m = 1e6;
  std::size_t clause_limit = 10000;
  SolverOptions solver;
  bool warm_start_first_run = false;
};

struct RunRecord {
  SolveOutcome outcome;
  RunClass cls = RunClass::Infeasible;
};

struct BenchReport {
  std::string bench;
  std::string method;
  int runs = 0;
  int optimal = 0, suboptimal = 0, infeasible = 0;
  double best_cost = 0.0;           // over certified-feasible runs
  double avg_cost = 0.0;            // over certified-feasible runs
  double avg_time_ms = 0.0;
  double avg_time_feas_ms = 0.0;
  double max_time_ms = 0.0;
  std::uint64_t seed = 0;
  std::string config_echo;
  std::vector<RunRecord> records;
};

BenchReport run_quadrotor_bench(const BenchConfig& cfg, const QuadrotorSpec& spec = {});
BenchReport run_two_tank_bench(int case_id, const BenchConfig& cfg);

/// Generic driver: lowers the logic, reformulates with cfg.method, assembles,
/// multistarts, and certifies every run against the original formula. When
/// cfg.warm_start_first_run is set, run 0 starts from warm_builder(nlp).
using WarmStartBuilder = std::function<std::vector<double>(const AssembledNlp&)>;
BenchReport run_bench_on(Problem& p, const std::string& name, const BenchConfig& cfg,
                         const WarmStartBuilder& warm_builder = {});

/// Human-readable table and the machine-readable CSV row set
/// (method, runs, opt, subopt, inf, avg_cost, avg_time_ms, avg_time_feas_ms,
/// max_time_ms, seed).
std::string report_table(const std::vector<BenchReport>& reports);
std::string report_csv(const std::vector<BenchReport>& reports);

/// Everything deterministic about a report (counts, costs, statuses,
/// iteration counts) formatted with full precision; wall-clock fields are
/// inherently noisy and excluded.
std::string deterministic_payload(const BenchReport& report);

/// Per-step trajectory in CSV, followed by a name,value block for variables
/// outside the step layout (lambda, eta, baseline auxiliaries).
std::string trajectory_csv(const Problem& p, const StepLayout& layout,
                           std::span<const double> point);

}  // namespace logicopt
