// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "logicopt/bench.hpp"
#include "logicopt/nlp.hpp"

namespace logicopt {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

struct ProblemFileOptions {
  ReformMethod method = ReformMethod::Smoothed;
  bool share_lambda = false;
  StrictnessMode strictness = StrictnessMode::epsilon(1e-8);
  double big_m = 1e6;
  std::size_t clause_limit = 10000;
  SolverOptions solver;
  int runs = 1;
  std::uint64_t seed = 0;
};

/// Parsed problem file: the modeled problem plus solver/reformulation options.
struct ProblemFile {
  Problem problem;
  ProblemFileOptions options;
  StepLayout layout;  // optional per-step grouping for trajectory output
};

/// JSON problem format with operator-tagged expression trees, e.g.
///   ["+", ["var","z1"], ["pow", ["var","z2"], 2]]
/// Formula trees use ["not",f] / ["and",f...] / ["or",f...] / ["implies",a,b]
/// / ["iff",a,b] / ["until",[a...],[b...],start] / ["release",...]; a bare
/// string names a declared predicate. Parse errors carry position context.
ProblemFile parse_problem(const std::string& json_text);
ProblemFile parse_problem_path(const std::string& path);

/// Emits a problem (as modeled, before any rewriting passes) so that
/// parse(emit(parse(t))) is the identity on the parsed representation.
std::string emit_problem(const Problem& p, const ProblemFileOptions& options,
                         const StepLayout* layout = nullptr);

}  // namespace logicopt
