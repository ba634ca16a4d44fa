// SPDX-License-Identifier: Apache-2.0
#include "logicopt/logic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace logicopt {

PredId PredicateTable::add(PredicateKind kind, ExprId body, std::string name,
                           PredId derived_from) {
  Predicate p;
  p.kind = kind;
  p.body = body;
  p.name = std::move(name);
  p.derived_from = derived_from;
  preds_.push_back(std::move(p));
  return static_cast<PredId>(preds_.size() - 1);
}

PredId PredicateTable::root_source(PredId id) const {
  while ((*this)[id].derived_from >= 0) id = (*this)[id].derived_from;
  return id;
}

// --- constructors ----------------------------------------------------------

FormulaPtr leaf(PredId p) {
  auto f = std::make_shared<Formula>();
  f->kind = FormulaKind::Leaf;
  f->pred = p;
  return f;
}

FormulaPtr lnot(FormulaPtr f) {
  auto n = std::make_shared<Formula>();
  n->kind = FormulaKind::Not;
  n->args.push_back(std::move(f));
  return n;
}

namespace {
FormulaPtr nary(FormulaKind kind, std::vector<FormulaPtr> fs) {
  if (fs.empty()) throw std::invalid_argument("And/Or require at least one operand");
  if (fs.size() == 1) return fs.front();
  auto n = std::make_shared<Formula>();
  n->kind = kind;
  n->args = std::move(fs);
  return n;
}

FormulaPtr binary(FormulaKind kind, FormulaPtr a, FormulaPtr b) {
  auto n = std::make_shared<Formula>();
  n->kind = kind;
  n->args.push_back(std::move(a));
  n->args.push_back(std::move(b));
  return n;
}

FormulaPtr temporal(FormulaKind kind, FormulaSeq a, FormulaSeq b, int start) {
  if (a.empty() || a.size() != b.size())
    throw std::invalid_argument("temporal sequences must be nonempty and of equal length");
  const int horizon = static_cast<int>(a.size()) - 1;
  if (start < 0 || start > horizon)
    throw std::invalid_argument("temporal start index must lie within the horizon");
  auto n = std::make_shared<Formula>();
  n->kind = kind;
  n->seq_a = std::move(a);
  n->seq_b = std::move(b);
  n->start = start;
  return n;
}
}  // namespace

FormulaPtr land(std::vector<FormulaPtr> fs) { return nary(FormulaKind::And, std::move(fs)); }
FormulaPtr lor(std::vector<FormulaPtr> fs) { return nary(FormulaKind::Or, std::move(fs)); }
FormulaPtr implies(FormulaPtr a, FormulaPtr b) {
  return binary(FormulaKind::Implies, std::move(a), std::move(b));
}
FormulaPtr iff(FormulaPtr a, FormulaPtr b) {
  return binary(FormulaKind::Iff, std::move(a), std::move(b));
}
FormulaPtr until(FormulaSeq a, FormulaSeq b, int start) {
  return temporal(FormulaKind::Until, std::move(a), std::move(b), start);
}
FormulaPtr release(FormulaSeq a, FormulaSeq b, int start) {
  return temporal(FormulaKind::Release, std::move(a), std::move(b), start);
}

// --- expand_temporal -------------------------------------------------------

FormulaPtr expand_temporal(const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Leaf:
      return f;
    case FormulaKind::Not:
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::vector<FormulaPtr> args;
      args.reserve(f->args.size());
      bool changed = false;
      for (const auto& a : f->args) {
        args.push_back(expand_temporal(a));
        changed = changed || args.back() != a;
      }
      if (!changed) return f;
      if (f->kind == FormulaKind::Not) return lnot(args.front());
      return nary(f->kind, std::move(args));
    }
    case FormulaKind::Implies: {
      auto a = expand_temporal(f->args[0]);
      auto b = expand_temporal(f->args[1]);
      return lor({lnot(a), b});
    }
    case FormulaKind::Iff: {
      auto a = expand_temporal(f->args[0]);
      auto b = expand_temporal(f->args[1]);
      return land({lor({lnot(a), b}), lor({lnot(b), a})});
    }
    case FormulaKind::Until: {
      const int horizon = static_cast<int>(f->seq_a.size()) - 1;
      const int i = f->start;
      std::vector<FormulaPtr> a(f->seq_a.size()), b(f->seq_b.size());
      for (std::size_t k = 0; k < f->seq_a.size(); ++k) a[k] = expand_temporal(f->seq_a[k]);
      for (std::size_t k = 0; k < f->seq_b.size(); ++k) b[k] = expand_temporal(f->seq_b[k]);
      std::vector<FormulaPtr> clauses;
      for (int j = i; j <= horizon - 1; ++j) {
        std::vector<FormulaPtr> lits;
        lits.push_back(a[static_cast<std::size_t>(j)]);
        for (int k = i; k <= j; ++k) lits.push_back(b[static_cast<std::size_t>(k)]);
        clauses.push_back(lor(std::move(lits)));
      }
      std::vector<FormulaPtr> final_lits(b.begin() + i, b.end());
      clauses.push_back(lor(std::move(final_lits)));
      return land(std::move(clauses));
    }
    case FormulaKind::Release: {
      const int horizon = static_cast<int>(f->seq_a.size()) - 1;
      const int i = f->start;
      std::vector<FormulaPtr> a(f->seq_a.size()), b(f->seq_b.size());
      for (std::size_t k = 0; k < f->seq_a.size(); ++k) a[k] = expand_temporal(f->seq_a[k]);
      for (std::size_t k = 0; k < f->seq_b.size(); ++k) b[k] = expand_temporal(f->seq_b[k]);
      std::vector<FormulaPtr> clauses;
      for (int j = i; j <= horizon; ++j) {
        std::vector<FormulaPtr> lits;
        lits.push_back(b[static_cast<std::size_t>(j)]);
        for (int k = i; k <= j - 1; ++k) lits.push_back(a[static_cast<std::size_t>(k)]);
        clauses.push_back(lor(std::move(lits)));
      }
      return land(std::move(clauses));
    }
  }
  throw std::logic_error("unreachable formula kind");
}

// --- eliminate_equalities ---------------------------------------------------

namespace {
FormulaPtr eliminate_eq_rec(const FormulaPtr& f, ExprArena& arena, PredicateTable& preds,
                            std::map<PredId, std::pair<PredId, PredId>>& cache) {
  switch (f->kind) {
    case FormulaKind::Leaf: {
      if (preds[f->pred].kind != PredicateKind::Equality) return f;
      auto it = cache.find(f->pred);
      if (it == cache.end()) {
        // copy before add: registering new predicates may reallocate the table
        const ExprId body = preds[f->pred].body;
        const std::string name = preds[f->pred].name;
        PredId pos = preds.add(PredicateKind::Inequality, body, name + ".le", f->pred);
        PredId neg =
            preds.add(PredicateKind::Inequality, arena.neg(body), name + ".ge", f->pred);
        it = cache.emplace(f->pred, std::make_pair(pos, neg)).first;
      }
      return land({leaf(it->second.first), leaf(it->second.second)});
    }
    case FormulaKind::Not:
    case FormulaKind::And:
    case FormulaKind::Or:
    case FormulaKind::Implies:
    case FormulaKind::Iff: {
      std::vector<FormulaPtr> args;
      bool changed = false;
      for (const auto& a : f->args) {
        args.push_back(eliminate_eq_rec(a, arena, preds, cache));
        changed = changed || args.back() != a;
      }
      if (!changed) return f;
      switch (f->kind) {
        case FormulaKind::Not:
          return lnot(args.front());
        case FormulaKind::Implies:
          return implies(args[0], args[1]);
        case FormulaKind::Iff:
          return iff(args[0], args[1]);
        default:
          return nary(f->kind, std::move(args));
      }
    }
    case FormulaKind::Until:
    case FormulaKind::Release: {
      FormulaSeq a(f->seq_a.size()), b(f->seq_b.size());
      bool changed = false;
      for (std::size_t k = 0; k < f->seq_a.size(); ++k) {
        a[k] = eliminate_eq_rec(f->seq_a[k], arena, preds, cache);
        changed = changed || a[k] != f->seq_a[k];
      }
      for (std::size_t k = 0; k < f->seq_b.size(); ++k) {
        b[k] = eliminate_eq_rec(f->seq_b[k], arena, preds, cache);
        changed = changed || b[k] != f->seq_b[k];
      }
      if (!changed) return f;
      return temporal(f->kind, std::move(a), std::move(b), f->start);
    }
  }
  throw std::logic_error("unreachable formula kind");
}
}  // namespace

FormulaPtr eliminate_equalities(const FormulaPtr& f, ExprArena& arena, PredicateTable& preds) {
  std::map<PredId, std::pair<PredId, PredId>> cache;
  return eliminate_eq_rec(f, arena, preds, cache);
}

// --- to_nnf -----------------------------------------------------------------

namespace {
FormulaPtr nnf_rec(const FormulaPtr& f, bool negate) {
  switch (f->kind) {
    case FormulaKind::Leaf:
      return negate ? lnot(f) : f;
    case FormulaKind::Not:
      return nnf_rec(f->args.front(), !negate);
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::vector<FormulaPtr> args;
      bool changed = negate;
      for (const auto& a : f->args) {
        args.push_back(nnf_rec(a, negate));
        changed = changed || args.back() != a;
      }
      const bool flip = negate;  // De Morgan
      FormulaKind kind = f->kind;
      if (flip) kind = kind == FormulaKind::And ? FormulaKind::Or : FormulaKind::And;
      if (!changed) return f;
      return nary(kind, std::move(args));
    }
    default:
      throw std::logic_error("to_nnf: derived or equality operators must be eliminated first");
  }
}
}  // namespace

FormulaPtr to_nnf(const FormulaPtr& f) { return nnf_rec(f, false); }

// --- eliminate_negations ----------------------------------------------------

namespace {
struct NegCtx {
  StrictnessMode mode;
  ExprArena& arena;
  PredicateTable& preds;
  VariableSet& vars;
  std::map<PredId, PredId> cache;
  std::vector<std::pair<int, PredId>> eta_vars;
};

PredId negated_predicate(PredId src, NegCtx& ctx) {
  auto it = ctx.cache.find(src);
  if (it != ctx.cache.end()) return it->second;
  if (ctx.preds[src].kind != PredicateKind::Inequality)
    throw std::logic_error("eliminate_negations: negated leaf must be an inequality");
  // copy before add: registering new predicates may reallocate the table
  const std::string name = ctx.preds[src].name;
  ExprId body = ctx.arena.neg(ctx.preds[src].body);
  switch (ctx.mode.kind) {
    case StrictnessMode::Kind::ExactEta: {
      // eta kept within bounds to avoid overflow in exp
      int var = ctx.vars.add("eta_" + name, -30.0, 10.0);
      body = ctx.arena.add(body, ctx.arena.exp(ctx.arena.variable(var)));
      PredId id = ctx.preds.add(PredicateKind::Inequality, body, "not_" + name, src);
      ctx.eta_vars.emplace_back(var, src);
      ctx.cache.emplace(src, id);
      return id;
    }
    case StrictnessMode::Kind::Epsilon: {
      body = ctx.arena.add(body, ctx.arena.constant(ctx.mode.eps));
      PredId id = ctx.preds.add(PredicateKind::Inequality, body, "not_" + name, src);
      ctx.cache.emplace(src, id);
      return id;
    }
    case StrictnessMode::Kind::Closure: {
      PredId id = ctx.preds.add(PredicateKind::Inequality, body, "not_" + name, src);
      ctx.cache.emplace(src, id);
      return id;
    }
  }
  throw std::logic_error("unreachable strictness mode");
}

FormulaPtr elim_neg_rec(const FormulaPtr& f, NegCtx& ctx) {
  switch (f->kind) {
    case FormulaKind::Leaf:
      if (ctx.preds[f->pred].kind != PredicateKind::Inequality)
        throw std::logic_error("eliminate_negations: equality leaves must be eliminated first");
      return f;
    case FormulaKind::Not: {
      const FormulaPtr& inner = f->args.front();
      if (inner->kind != FormulaKind::Leaf)
        throw std::logic_error("eliminate_negations: input must be in negation normal form");
      return leaf(negated_predicate(inner->pred, ctx));
    }
    case FormulaKind::And:
    case FormulaKind::Or: {
      std::vector<FormulaPtr> args;
      bool changed = false;
      for (const auto& a : f->args) {
        args.push_back(elim_neg_rec(a, ctx));
        changed = changed || args.back() != a;
      }
      if (!changed) return f;
      return nary(f->kind, std::move(args));
    }
    default:
      throw std::logic_error("eliminate_negations: derived operators must be eliminated first");
  }
}
}  // namespace

NegationElimination eliminate_negations(const FormulaPtr& f, StrictnessMode mode,
                                        ExprArena& arena, PredicateTable& preds,
                                        VariableSet& vars) {
  if (mode.kind == StrictnessMode::Kind::Epsilon && mode.eps <= 0.0)
    throw std::invalid_argument("Epsilon strictness requires eps > 0");
  NegCtx ctx{mode, arena, preds, vars, {}, {}};
  NegationElimination out;
  out.formula = elim_neg_rec(f, ctx);
  out.eta_vars = std::move(ctx.eta_vars);
  return out;
}

// --- to_cnf -----------------------------------------------------------------

namespace {
using RawClause = std::vector<PredId>;

void merge_into(RawClause& dst, const RawClause& src) {
  for (PredId p : src)
    if (std::find(dst.begin(), dst.end(), p) == dst.end()) dst.push_back(p);
}

std::vector<RawClause> cnf_rec(const FormulaPtr& f, const std::size_t limit) {
  switch (f->kind) {
    case FormulaKind::Leaf:
      return {RawClause{f->pred}};
    case FormulaKind::And: {
      std::vector<RawClause> out;
      for (const auto& a : f->args) {
        auto sub = cnf_rec(a, limit);
        if (out.size() + sub.size() > limit) throw ClauseExplosion(limit);
        for (auto& c : sub) out.push_back(std::move(c));
      }
      return out;
    }
    case FormulaKind::Or: {
      std::vector<RawClause> acc{RawClause{}};
      for (const auto& a : f->args) {
        auto sub = cnf_rec(a, limit);
        if (acc.size() * sub.size() > limit) throw ClauseExplosion(limit);
        std::vector<RawClause> next;
        next.reserve(acc.size() * sub.size());
        for (const auto& left : acc)
          for (const auto& right : sub) {
            RawClause merged = left;
            merge_into(merged, right);
            next.push_back(std::move(merged));
          }
        acc = std::move(next);
      }
      return acc;
    }
    default:
      throw std::logic_error("to_cnf: formula must contain only Leaf/And/Or");
  }
}
}  // namespace

CnfProgram to_cnf(const FormulaPtr& f, std::size_t clause_limit) {
  auto raw = cnf_rec(f, clause_limit);
  CnfProgram out;
  std::set<RawClause> seen;
  for (auto& c : raw) {
    RawClause key = c;
    std::sort(key.begin(), key.end());
    if (!seen.insert(std::move(key)).second) continue;
    out.clauses.push_back(Clause{std::move(c)});
  }
  return out;
}

// --- oracles ----------------------------------------------------------------

namespace {
struct BoolEval {
  const ExprArena* arena = nullptr;
  const PredicateTable* preds = nullptr;
  std::span<const double> z;
  std::span<const double> values;  // used instead of arena when nonempty
  double tol = 0.0;
  EvalWorkspace* ws = nullptr;

  double pred_value(PredId p) const {
    if (!values.empty()) return values[static_cast<std::size_t>(p)];
    return eval(*arena, (*preds)[p].body, z, *ws);
  }

  bool leaf_true(PredId p) const {
    const double v = pred_value(p);
    if ((*preds)[p].kind == PredicateKind::Equality) return std::abs(v) <= tol;
    return v <= tol;
  }

  bool run(const FormulaPtr& f) const {
    switch (f->kind) {
      case FormulaKind::Leaf:
        return leaf_true(f->pred);
      case FormulaKind::Not:
        return !run(f->args.front());
      case FormulaKind::And:
        for (const auto& a : f->args)
          if (!run(a)) return false;
        return true;
      case FormulaKind::Or:
        for (const auto& a : f->args)
          if (run(a)) return true;
        return false;
      case FormulaKind::Implies:
        return !run(f->args[0]) || run(f->args[1]);
      case FormulaKind::Iff:
        return run(f->args[0]) == run(f->args[1]);
      case FormulaKind::Until: {
        const int horizon = static_cast<int>(f->seq_a.size()) - 1;
        for (int j = f->start; j <= horizon; ++j) {
          if (!run(f->seq_b[static_cast<std::size_t>(j)])) continue;
          bool prefix = true;
          for (int k = f->start; k < j && prefix; ++k)
            prefix = run(f->seq_a[static_cast<std::size_t>(k)]);
          if (prefix) return true;
        }
        return false;
      }
      case FormulaKind::Release: {
        const int horizon = static_cast<int>(f->seq_a.size()) - 1;
        for (int j = f->start; j <= horizon; ++j) {
          if (run(f->seq_b[static_cast<std::size_t>(j)])) continue;
          bool released = false;
          for (int k = f->start; k < j && !released; ++k)
            released = run(f->seq_a[static_cast<std::size_t>(k)]);
          if (!released) return false;
        }
        return true;
      }
    }
    throw std::logic_error("unreachable formula kind");
  }
};
}  // namespace

bool eval_bool(const FormulaPtr& f, const ExprArena& arena, const PredicateTable& preds,
               std::span<const double> z, double tol, EvalWorkspace& ws) {
  BoolEval ev;
  ev.arena = &arena;
  ev.preds = &preds;
  ev.z = z;
  ev.tol = tol;
  ev.ws = &ws;
  return ev.run(f);
}

double eval_maxmin(const CnfProgram& cnf, const ExprArena& arena, const PredicateTable& preds,
                   std::span<const double> z, EvalWorkspace& ws) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const Clause& c : cnf.clauses) {
    double best = std::numeric_limits<double>::infinity();
    for (PredId p : c.lits) best = std::min(best, eval(arena, preds[p].body, z, ws));
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<double> eval_predicates(const ExprArena& arena, const PredicateTable& preds,
                                    std::span<const double> z, EvalWorkspace& ws) {
  std::vector<double> out(static_cast<std::size_t>(preds.size()));
  for (PredId p = 0; p < preds.size(); ++p) out[static_cast<std::size_t>(p)] = eval(arena, preds[p].body, z, ws);
  return out;
}

bool eval_bool_values(const FormulaPtr& f, const PredicateTable& preds,
                      std::span<const double> pred_values, double tol) {
  BoolEval ev;
  ev.preds = &preds;
  ev.values = pred_values;
  ev.tol = tol;
  return ev.run(f);
}

double eval_maxmin_values(const CnfProgram& cnf, std::span<const double> pred_values) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const Clause& c : cnf.clauses) {
    double best = std::numeric_limits<double>::infinity();
    for (PredId p : c.lits) best = std::min(best, pred_values[static_cast<std::size_t>(p)]);
    worst = std::max(worst, best);
  }
  return worst;
}

std::string dump_cnf(const CnfProgram& cnf, const PredicateTable& preds) {
  std::ostringstream os;
  for (const Clause& c : cnf.clauses) {
    for (std::size_t i = 0; i < c.lits.size(); ++i) {
      if (i) os << " | ";
      os << c.lits[i] << ":" << preds[c.lits[i]].name;
    }
    os << "\n";
  }
  return os.str();
}

}  // namespace logicopt
