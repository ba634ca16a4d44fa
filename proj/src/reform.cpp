// SPDX-License-Identifier: Apache-2.0
#include "logicopt/reform.hpp"

#include <algorithm>
#include <string>

namespace logicopt {

namespace {

std::vector<PredId> sorted_lits(const Clause& c) {
  std::vector<PredId> s = c.lits;
  std::sort(s.begin(), s.end());
  return s;
}

// Multiset intersection of sorted vectors.
std::vector<PredId> intersect(const std::vector<PredId>& a, const std::vector<PredId>& b) {
  std::vector<PredId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

// Multiset difference a \ b (b must be a sub-multiset of a for our uses).
std::vector<PredId> subtract(const std::vector<PredId>& a, const std::vector<PredId>& b) {
  std::vector<PredId> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace

std::vector<ClauseGroup> detect_shared_lambda(const CnfProgram& cnf) {
  struct Open {
    ClauseGroup group;
    std::vector<PredId> first_sorted;  // only meaningful while the group has one member
    std::size_t arity = 0;
  };
  std::vector<Open> open;

  for (int ci = 0; ci < static_cast<int>(cnf.clauses.size()); ++ci) {
    const Clause& c = cnf.clauses[static_cast<std::size_t>(ci)];
    const std::size_t k = c.lits.size();
    std::vector<PredId> cs = sorted_lits(c);
    bool placed = false;
    if (k >= 2) {  // single-literal clauses have no simplex to share
      for (Open& o : open) {
        if (o.arity != k) continue;
        if (o.group.clause_indices.size() == 1) {
          auto common = intersect(o.first_sorted, cs);
          if (common.size() != k - 1) continue;
          o.group.shared = common;
          o.group.varying.push_back(subtract(o.first_sorted, common).front());
          o.group.varying.push_back(subtract(cs, common).front());
          o.group.clause_indices.push_back(ci);
          placed = true;
          break;
        }
        auto leftover = subtract(cs, o.group.shared);
        if (leftover.size() != 1) continue;
        if (intersect(cs, o.group.shared).size() != k - 1) continue;
        o.group.varying.push_back(leftover.front());
        o.group.clause_indices.push_back(ci);
        placed = true;
        break;
      }
    }
    if (!placed) {
      Open o;
      o.group.clause_indices.push_back(ci);
      o.first_sorted = std::move(cs);
      o.arity = k;
      open.push_back(std::move(o));
    }
  }

  std::vector<ClauseGroup> out;
  out.reserve(open.size());
  for (Open& o : open) {
    if (o.group.clause_indices.size() == 1) {
      o.group.shared.clear();
      o.group.varying.clear();
    }
    out.push_back(std::move(o.group));
  }
  return out;
}

namespace {

ExprId weighted_sum(Problem& p, const std::vector<std::pair<int, PredId>>& terms) {
  ExprId acc = kNoExpr;
  for (const auto& [lam, pred] : terms) {
    ExprId t = p.arena.mul(p.arena.variable(lam), p.preds[pred].body);
    acc = acc == kNoExpr ? t : p.arena.add(acc, t);
  }
  return acc;
}

}  // namespace

SmoothingPlan smooth(const CnfProgram& cnf, bool share, Problem& p) {
  SmoothingPlan plan;
  std::vector<ClauseGroup> groups;
  if (share) {
    groups = detect_shared_lambda(cnf);
  } else {
    groups.reserve(cnf.clauses.size());
    for (int ci = 0; ci < static_cast<int>(cnf.clauses.size()); ++ci)
      groups.push_back(ClauseGroup{{ci}, {}, {}});
  }

  for (const ClauseGroup& g : groups) {
    if (g.clause_indices.size() == 1) {
      const int ci = g.clause_indices.front();
      const Clause& c = cnf.clauses[static_cast<std::size_t>(ci)];
      if (c.lits.size() == 1) {
        SmoothedConstraint sc;
        sc.block = -1;
        sc.terms = {{-1, c.lits.front()}};
        sc.expr = p.preds[c.lits.front()].body;
        sc.clause = ci;
        plan.constraints.push_back(std::move(sc));
        continue;
      }
      SimplexBlock block;
      block.id = static_cast<int>(plan.blocks.size());
      for (std::size_t j = 0; j < c.lits.size(); ++j)
        block.members.push_back(p.vars.add(
            "lam" + std::to_string(block.id) + "_" + std::to_string(j), 0.0, 1.0, 0.0, 1.0));
      SmoothedConstraint sc;
      sc.block = block.id;
      for (std::size_t j = 0; j < c.lits.size(); ++j)
        sc.terms.emplace_back(block.members[j], c.lits[j]);
      sc.expr = weighted_sum(p, sc.terms);
      sc.clause = ci;
      plan.blocks.push_back(std::move(block));
      plan.constraints.push_back(std::move(sc));
      continue;
    }

    // Shared block: k-1 fixed coordinates plus one varying coordinate.
    const std::size_t k = g.shared.size() + 1;
    SimplexBlock block;
    block.id = static_cast<int>(plan.blocks.size());
    for (std::size_t j = 0; j < k; ++j)
      block.members.push_back(p.vars.add(
          "lam" + std::to_string(block.id) + "_" + std::to_string(j), 0.0, 1.0, 0.0, 1.0));
    for (std::size_t m = 0; m < g.clause_indices.size(); ++m) {
      SmoothedConstraint sc;
      sc.block = block.id;
      for (std::size_t j = 0; j < g.shared.size(); ++j)
        sc.terms.emplace_back(block.members[j], g.shared[j]);
      sc.terms.emplace_back(block.members.back(), g.varying[m]);
      sc.expr = weighted_sum(p, sc.terms);
      sc.clause = g.clause_indices[m];
      plan.constraints.push_back(std::move(sc));
    }
    plan.blocks.push_back(std::move(block));
  }
  return plan;
}

std::optional<std::vector<std::pair<int, double>>> recover_lambda(
    const SmoothingPlan& plan, const ExprArena& arena, const PredicateTable& preds,
    std::span<const double> z, EvalWorkspace& ws) {
  std::vector<std::pair<int, double>> out;

  // Group constraints by block; block -1 entries are plain p <= 0 checks.
  for (const SmoothedConstraint& sc : plan.constraints) {
    if (sc.block >= 0) continue;
    if (eval(arena, sc.expr, z, ws) > 0.0) return std::nullopt;
  }

  for (const SimplexBlock& block : plan.blocks) {
    std::vector<const SmoothedConstraint*> members;
    for (const SmoothedConstraint& sc : plan.constraints)
      if (sc.block == block.id) members.push_back(&sc);

    const std::size_t k = block.members.size();
    std::size_t pick = k;  // chosen coordinate

    if (members.size() == 1) {
      // Indicator of the argmin literal; ties resolve to the lowest index.
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) {
        const double v = eval(arena, preds[members[0]->terms[j].second].body, z, ws);
        if (v < best) {
          best = v;
          pick = j;
        }
      }
      if (best > 0.0) return std::nullopt;
    } else {
      // Prefer a satisfied shared literal; otherwise every varying literal
      // must hold and the varying coordinate is the common witness.
      for (std::size_t j = 0; j + 1 < k; ++j) {
        const double v = eval(arena, preds[members[0]->terms[j].second].body, z, ws);
        if (v <= 0.0) {
          pick = j;
          break;
        }
      }
      if (pick == k) {
        for (const SmoothedConstraint* sc : members)
          if (eval(arena, preds[sc->terms.back().second].body, z, ws) > 0.0)
            return std::nullopt;
        pick = k - 1;
      }
    }
    for (std::size_t j = 0; j < k; ++j)
      out.emplace_back(block.members[j], j == pick ? 1.0 : 0.0);
  }
  return out;
}

BaselineConstraints bigm(const CnfProgram& cnf, double big_m, Problem& p) {
  if (big_m <= 0.0) throw std::invalid_argument("big-M constant must be positive");
  BaselineConstraints out;
  for (int ci = 0; ci < static_cast<int>(cnf.clauses.size()); ++ci) {
    const Clause& c = cnf.clauses[static_cast<std::size_t>(ci)];
    ExprId prod = kNoExpr;
    for (std::size_t j = 0; j < c.lits.size(); ++j) {
      int mu = p.vars.add("mu" + std::to_string(ci) + "_" + std::to_string(j), 0.0, 1.0, 0.0, 1.0);
      out.aux_vars.push_back(mu);
      ExprId mv = p.arena.variable(mu);
      out.inequalities.push_back(
          p.arena.sub(p.preds[c.lits[j]].body, p.arena.mul(mv, p.arena.constant(big_m))));
      prod = prod == kNoExpr ? mv : p.arena.mul(prod, mv);
    }
    out.equalities.push_back(prod);  // prod_j mu_j = 0
  }
  return out;
}

BaselineConstraints complementarity(const CnfProgram& cnf, double big_m, Problem& p) {
  BaselineConstraints out;
  for (int ci = 0; ci < static_cast<int>(cnf.clauses.size()); ++ci) {
    const Clause& c = cnf.clauses[static_cast<std::size_t>(ci)];
    ExprId sum = kNoExpr;
    for (std::size_t j = 0; j < c.lits.size(); ++j) {
      int b = p.vars.add("b" + std::to_string(ci) + "_" + std::to_string(j), 0.0, 1.0, 0.0, 1.0);
      out.aux_vars.push_back(b);
      ExprId bv = p.arena.variable(b);
      // b (b - 1) = 0 forces binary values
      out.equalities.push_back(p.arena.mul(bv, p.arena.sub(bv, p.arena.constant(1.0))));
      // p_j <= (1 - b_j) M
      out.inequalities.push_back(p.arena.sub(
          p.preds[c.lits[j]].body,
          p.arena.mul(p.arena.sub(p.arena.constant(1.0), bv), p.arena.constant(big_m))));
      sum = sum == kNoExpr ? bv : p.arena.add(sum, bv);
    }
    // at least one selected literal: 1 - sum b <= 0
    out.inequalities.push_back(p.arena.sub(p.arena.constant(1.0), sum));
  }
  return out;
}

ReformResult reformulate(const CnfProgram& cnf, const ReformConfig& cfg, Problem& p) {
  ReformResult out;
  out.method = cfg.method;
  switch (cfg.method) {
    case ReformMethod::Smoothed: {
      out.smoothing = smooth(cnf, cfg.lambda_sharing, p);
      for (const SmoothedConstraint& sc : out.smoothing.constraints)
        out.inequalities.push_back(sc.expr);
      break;
    }
    case ReformMethod::BigM: {
      out.baseline = bigm(cnf, cfg.big_m, p);
      out.inequalities = out.baseline.inequalities;
      out.equalities = out.baseline.equalities;
      break;
    }
    case ReformMethod::Complementarity: {
      out.baseline = complementarity(cnf, cfg.big_m, p);
      out.inequalities = out.baseline.inequalities;
      out.equalities = out.baseline.equalities;
      break;
    }
  }
  return out;
}

}  // namespace logicopt
