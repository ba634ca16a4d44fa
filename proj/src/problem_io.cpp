// SPDX-License-Identifier: Apache-2.0
#include "logicopt/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace logicopt {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& ctx, const std::string& msg) {
  throw ParseError(ctx + ": " + msg);
}

double number_at(const json& j, const std::string& ctx) {
  if (!j.is_number()) fail(ctx, "expected a number");
  return j.get<double>();
}

struct Parser {
  Problem p;
  ProblemFileOptions opts;
  StepLayout layout;
  std::map<std::string, const json*> named;
  std::map<std::string, ExprId> expr_cache;
  std::set<std::string> expanding;
  std::map<std::string, PredId> pred_by_name;

  ExprId named_expr(const std::string& name, const std::string& ctx) {
    auto cached = expr_cache.find(name);
    if (cached != expr_cache.end()) return cached->second;
    auto it = named.find(name);
    if (it == named.end()) fail(ctx, "unknown expression reference '" + name + "'");
    if (!expanding.insert(name).second)
      fail(ctx, "cyclic expression reference through '" + name + "'");
    const ExprId id = parse_expr(*it->second, "expressions." + name);
    expanding.erase(name);
    expr_cache.emplace(name, id);
    return id;
  }

  ExprId parse_expr(const json& node, const std::string& ctx) {
    if (node.is_number()) return p.arena.constant(node.get<double>());
    if (node.is_string()) return named_expr(node.get<std::string>(), ctx);
    if (!node.is_array() || node.empty() || !node[0].is_string())
      fail(ctx, "expected number, expression name, or [op, ...] array");
    const std::string op = node[0].get<std::string>();
    const std::size_t argc = node.size() - 1;
    auto arg = [&](std::size_t i) { return parse_expr(node[i + 1], ctx); };
    auto need = [&](std::size_t lo, std::size_t hi) {
      if (argc < lo || argc > hi)
        fail(ctx, "operator '" + op + "' got " + std::to_string(argc) + " operands");
    };
    if (op == "var") {
      need(1, 1);
      if (!node[1].is_string()) fail(ctx, "var expects a variable name");
      const int idx = p.vars.index_of(node[1].get<std::string>());
      if (idx < 0) fail(ctx, "unknown variable '" + node[1].get<std::string>() + "'");
      return p.arena.variable(idx);
    }
    if (op == "+") {
      need(2, 64);
      ExprId acc = arg(0);
      for (std::size_t i = 1; i < argc; ++i) acc = p.arena.add(acc, arg(i));
      return acc;
    }
    if (op == "-") {
      need(1, 2);
      if (argc == 1) return p.arena.neg(arg(0));
      return p.arena.sub(arg(0), arg(1));
    }
    if (op == "*") {
      need(2, 64);
      ExprId acc = arg(0);
      for (std::size_t i = 1; i < argc; ++i) acc = p.arena.mul(acc, arg(i));
      return acc;
    }
    if (op == "/") {
      need(2, 2);
      return p.arena.div(arg(0), arg(1));
    }
    if (op == "pow") {
      need(2, 2);
      return p.arena.pow(arg(0), number_at(node[2], ctx + ".pow exponent"));
    }
    if (op == "sin" || op == "cos" || op == "exp" || op == "sqrt") {
      need(1, 1);
      const ExprId a = arg(0);
      if (op == "sin") return p.arena.sin(a);
      if (op == "cos") return p.arena.cos(a);
      if (op == "exp") return p.arena.exp(a);
      return p.arena.sqrt(a);
    }
    fail(ctx, "unknown operator '" + op + "'");
  }

  FormulaPtr parse_formula(const json& node, const std::string& ctx) {
    if (node.is_string()) {
      auto it = pred_by_name.find(node.get<std::string>());
      if (it == pred_by_name.end())
        fail(ctx, "unknown predicate '" + node.get<std::string>() + "'");
      return leaf(it->second);
    }
    if (!node.is_array() || node.empty() || !node[0].is_string())
      fail(ctx, "expected predicate name or [op, ...] array");
    const std::string op = node[0].get<std::string>();
    const std::size_t argc = node.size() - 1;
    auto arg = [&](std::size_t i) { return parse_formula(node[i + 1], ctx); };
    if (op == "not") {
      if (argc != 1) fail(ctx, "not expects one operand");
      return lnot(arg(0));
    }
    if (op == "and" || op == "or") {
      if (argc < 1) fail(ctx, op + " expects at least one operand");
      std::vector<FormulaPtr> fs;
      for (std::size_t i = 0; i < argc; ++i) fs.push_back(arg(i));
      return op == "and" ? land(std::move(fs)) : lor(std::move(fs));
    }
    if (op == "implies" || op == "iff") {
      if (argc != 2) fail(ctx, op + " expects two operands");
      return op == "implies" ? implies(arg(0), arg(1)) : iff(arg(0), arg(1));
    }
    if (op == "until" || op == "release") {
      if (argc != 3 || !node[1].is_array() || !node[2].is_array() ||
          !node[3].is_number_integer())
        fail(ctx, op + " expects [a...], [b...], start");
      FormulaSeq a, b;
      for (const json& e : node[1]) a.push_back(parse_formula(e, ctx + "." + op + ".a"));
      for (const json& e : node[2]) b.push_back(parse_formula(e, ctx + "." + op + ".b"));
      try {
        return op == "until" ? until(std::move(a), std::move(b), node[3].get<int>())
                             : release(std::move(a), std::move(b), node[3].get<int>());
      } catch (const std::invalid_argument& e) {
        fail(ctx, e.what());
      }
    }
    fail(ctx, "unknown logic operator '" + op + "'");
  }

  void parse_options(const json& o) {
    for (const auto& [key, val] : o.items()) {
      const std::string ctx = "options." + key;
      if (key == "method") {
        const std::string m = val.get<std::string>();
        if (m == "smoothed")
          opts.method = ReformMethod::Smoothed;
        else if (m == "bigm")
          opts.method = ReformMethod::BigM;
        else if (m == "compl")
          opts.method = ReformMethod::Complementarity;
        else
          fail(ctx, "expected smoothed|bigm|compl");
      } else if (key == "share_lambda") {
        opts.share_lambda = val.get<bool>();
      } else if (key == "strictness") {
        const std::string s = val.get<std::string>();
        if (s == "exact")
          opts.strictness = StrictnessMode::exact_eta();
        else if (s == "epsilon")
          opts.strictness = StrictnessMode::epsilon(opts.strictness.eps > 0 ? opts.strictness.eps
                                                                            : 1e-8);
        else if (s == "closure")
          opts.strictness = StrictnessMode::closure();
        else
          fail(ctx, "expected exact|epsilon|closure");
      } else if (key == "epsilon") {
        const double e = number_at(val, ctx);
        if (e <= 0) fail(ctx, "epsilon must be positive");
        if (opts.strictness.kind == StrictnessMode::Kind::Epsilon)
          opts.strictness = StrictnessMode::epsilon(e);
      } else if (key == "big_m") {
        opts.big_m = number_at(val, ctx);
      } else if (key == "clause_limit") {
        opts.clause_limit = val.get<std::size_t>();
      } else if (key == "feas_tol") {
        opts.solver.feas_tol = number_at(val, ctx);
      } else if (key == "opt_tol") {
        opts.solver.opt_tol = number_at(val, ctx);
      } else if (key == "max_iter") {
        opts.solver.max_iter = val.get<int>();
      } else if (key == "runs") {
        opts.runs = val.get<int>();
      } else if (key == "seed") {
        opts.seed = val.get<std::uint64_t>();
      } else if (key == "workers") {
        opts.solver.workers = val.get<int>();
      } else {
        fail(ctx, "unknown option");
      }
    }
  }

  void run(const json& root) {
    if (!root.is_object()) throw ParseError("problem file must be a JSON object");
    static const std::set<std::string> allowed{"name",       "variables",    "expressions",
                                              "objective",  "equalities",   "inequalities",
                                              "predicates", "logic",        "options",
                                              "trajectory"};
    for (const auto& [key, val] : root.items())
      if (!allowed.count(key)) fail(key, "unknown top-level section");

    if (root.contains("name")) p.name = root["name"].get<std::string>();

    if (!root.contains("variables") || !root["variables"].is_array())
      throw ParseError("missing 'variables' array");
    for (const json& v : root["variables"]) {
      const std::string ctx = "variables[" + std::to_string(p.vars.size()) + "]";
      if (!v.is_object() || !v.contains("name")) fail(ctx, "expected {name, ...}");
      const std::string name = v["name"].get<std::string>();
      if (p.vars.index_of(name) >= 0) fail(ctx, "duplicate variable '" + name + "'");
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      if (v.contains("lower") && !v["lower"].is_null()) lo = number_at(v["lower"], ctx);
      if (v.contains("upper") && !v["upper"].is_null()) hi = number_at(v["upper"], ctx);
      const int idx = p.vars.add(name, lo, hi);
      if (v.contains("init")) {
        const json& box = v["init"];
        if (!box.is_array() || box.size() != 2) fail(ctx, "init must be [lo, hi]");
        p.vars[idx].init_lo = number_at(box[0], ctx);
        p.vars[idx].init_hi = number_at(box[1], ctx);
        if (!(p.vars[idx].init_lo <= p.vars[idx].init_hi)) fail(ctx, "init box crossed");
      }
      for (const auto& [key, val] : v.items())
        if (key != "name" && key != "lower" && key != "upper" && key != "init")
          fail(ctx, "unknown variable field '" + key + "'");
    }

    if (root.contains("expressions")) {
      if (!root["expressions"].is_object()) throw ParseError("'expressions' must be an object");
      for (const auto& [key, val] : root["expressions"].items()) named.emplace(key, &val);
    }

    if (!root.contains("objective")) throw ParseError("missing 'objective'");
    p.objective = parse_expr(root["objective"], "objective");

    if (root.contains("equalities"))
      for (std::size_t i = 0; i < root["equalities"].size(); ++i)
        p.equalities.push_back(
            parse_expr(root["equalities"][i], "equalities[" + std::to_string(i) + "]"));
    if (root.contains("inequalities"))
      for (std::size_t i = 0; i < root["inequalities"].size(); ++i)
        p.inequalities.push_back(
            parse_expr(root["inequalities"][i], "inequalities[" + std::to_string(i) + "]"));

    if (root.contains("predicates")) {
      if (!root["predicates"].is_object()) throw ParseError("'predicates' must be an object");
      for (const auto& [key, val] : root["predicates"].items()) {
        const std::string ctx = "predicates." + key;
        if (!val.is_object() || !val.contains("kind") || !val.contains("body"))
          fail(ctx, "expected {kind, body}");
        const std::string kind = val["kind"].get<std::string>();
        PredicateKind pk;
        if (kind == "le")
          pk = PredicateKind::Inequality;
        else if (kind == "eq")
          pk = PredicateKind::Equality;
        else
          fail(ctx, "kind must be le|eq");
        pred_by_name.emplace(key, p.preds.add(pk, parse_expr(val["body"], ctx), key));
      }
    }

    if (root.contains("logic") && !root["logic"].is_null())
      p.formula = parse_formula(root["logic"], "logic");

    if (root.contains("options")) parse_options(root["options"]);

    if (root.contains("trajectory")) {
      const json& t = root["trajectory"];
      if (!t.is_object() || !t.contains("steps") || !t.contains("columns"))
        throw ParseError("trajectory: expected {steps, columns}");
      layout.steps = t["steps"].get<int>();
      for (const json& c : t["columns"]) {
        if (!c.is_object() || !c.contains("name") || !c.contains("vars"))
          throw ParseError("trajectory.columns: expected {name, vars}");
        std::vector<int> idx;
        for (const json& v : c["vars"]) {
          if (v.is_null()) {
            idx.push_back(-1);
            continue;
          }
          const int vi = p.vars.index_of(v.get<std::string>());
          if (vi < 0) throw ParseError("trajectory: unknown variable '" + v.get<std::string>() + "'");
          idx.push_back(vi);
        }
        if (static_cast<int>(idx.size()) != layout.steps + 1)
          throw ParseError("trajectory: column '" + c["name"].get<std::string>() +
                           "' needs steps+1 entries");
        layout.columns.emplace_back(c["name"].get<std::string>(), std::move(idx));
      }
    }
  }
};

json expr_to_json(const ExprArena& arena, const VariableSet& vars, ExprId id) {
  const ExprNode& n = arena.node(id);
  switch (n.op) {
    case Op::Const:
      return n.value;
    case Op::Var:
      return json::array({"var", vars[n.var].name});
    case Op::Add:
      return json::array({"+", expr_to_json(arena, vars, n.a), expr_to_json(arena, vars, n.b)});
    case Op::Sub:
      return json::array({"-", expr_to_json(arena, vars, n.a), expr_to_json(arena, vars, n.b)});
    case Op::Mul:
      return json::array({"*", expr_to_json(arena, vars, n.a), expr_to_json(arena, vars, n.b)});
    case Op::Div:
      return json::array({"/", expr_to_json(arena, vars, n.a), expr_to_json(arena, vars, n.b)});
    case Op::Pow:
      return json::array({"pow", expr_to_json(arena, vars, n.a), n.value});
    case Op::Neg:
      return json::array({"-", expr_to_json(arena, vars, n.a)});
    case Op::Sin:
      return json::array({"sin", expr_to_json(arena, vars, n.a)});
    case Op::Cos:
      return json::array({"cos", expr_to_json(arena, vars, n.a)});
    case Op::Exp:
      return json::array({"exp", expr_to_json(arena, vars, n.a)});
    case Op::Sqrt:
      return json::array({"sqrt", expr_to_json(arena, vars, n.a)});
  }
  throw std::logic_error("unreachable op");
}

json formula_to_json(const Problem& p, const FormulaPtr& f) {
  switch (f->kind) {
    case FormulaKind::Leaf:
      return p.preds[f->pred].name;
    case FormulaKind::Not:
      return json::array({"not", formula_to_json(p, f->args[0])});
    case FormulaKind::And:
    case FormulaKind::Or: {
      json out = json::array({f->kind == FormulaKind::And ? "and" : "or"});
      for (const auto& a : f->args) out.push_back(formula_to_json(p, a));
      return out;
    }
    case FormulaKind::Implies:
      return json::array(
          {"implies", formula_to_json(p, f->args[0]), formula_to_json(p, f->args[1])});
    case FormulaKind::Iff:
      return json::array({"iff", formula_to_json(p, f->args[0]), formula_to_json(p, f->args[1])});
    case FormulaKind::Until:
    case FormulaKind::Release: {
      json a = json::array(), b = json::array();
      for (const auto& e : f->seq_a) a.push_back(formula_to_json(p, e));
      for (const auto& e : f->seq_b) b.push_back(formula_to_json(p, e));
      return json::array(
          {f->kind == FormulaKind::Until ? "until" : "release", a, b, f->start});
    }
  }
  throw std::logic_error("unreachable formula kind");
}

}  // namespace

ProblemFile parse_problem(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("JSON parse error at byte ") + std::to_string(e.byte) + ": " +
                     e.what());
  }
  Parser parser;
  parser.run(root);
  ProblemFile out;
  out.problem = std::move(parser.p);
  out.options = parser.opts;
  out.layout = std::move(parser.layout);
  return out;
}

ProblemFile parse_problem_path(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open problem file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem(buf.str());
}

std::string emit_problem(const Problem& p, const ProblemFileOptions& o, const StepLayout* layout) {
  json root = json::object();
  if (!p.name.empty()) root["name"] = p.name;

  json vars = json::array();
  for (int j = 0; j < p.vars.size(); ++j) {
    const VariableInfo& v = p.vars[j];
    json jv = json::object();
    jv["name"] = v.name;
    if (std::isfinite(v.lower)) jv["lower"] = v.lower;
    if (std::isfinite(v.upper)) jv["upper"] = v.upper;
    jv["init"] = json::array({v.init_lo, v.init_hi});
    vars.push_back(std::move(jv));
  }
  root["variables"] = std::move(vars);

  root["objective"] = expr_to_json(p.arena, p.vars, p.objective);
  json eqs = json::array();
  for (ExprId e : p.equalities) eqs.push_back(expr_to_json(p.arena, p.vars, e));
  root["equalities"] = std::move(eqs);
  json ins = json::array();
  for (ExprId e : p.inequalities) ins.push_back(expr_to_json(p.arena, p.vars, e));
  root["inequalities"] = std::move(ins);

  json preds = json::object();
  for (PredId q = 0; q < p.preds.size(); ++q) {
    const Predicate& pred = p.preds[q];
    json jp = json::object();
    jp["kind"] = pred.kind == PredicateKind::Inequality ? "le" : "eq";
    jp["body"] = expr_to_json(p.arena, p.vars, pred.body);
    preds[pred.name] = std::move(jp);
  }
  root["predicates"] = std::move(preds);

  root["logic"] = p.formula ? formula_to_json(p, p.formula) : json();

  json jo = json::object();
  switch (o.method) {
    case ReformMethod::Smoothed: jo["method"] = "smoothed"; break;
    case ReformMethod::BigM: jo["method"] = "bigm"; break;
    case ReformMethod::Complementarity: jo["method"] = "compl"; break;
  }
  jo["share_lambda"] = o.share_lambda;
  switch (o.strictness.kind) {
    case StrictnessMode::Kind::ExactEta: jo["strictness"] = "exact"; break;
    case StrictnessMode::Kind::Epsilon:
      jo["strictness"] = "epsilon";
      jo["epsilon"] = o.strictness.eps;
      break;
    case StrictnessMode::Kind::Closure: jo["strictness"] = "closure"; break;
  }
  jo["big_m"] = o.big_m;
  jo["clause_limit"] = o.clause_limit;
  jo["feas_tol"] = o.solver.feas_tol;
  jo["opt_tol"] = o.solver.opt_tol;
  jo["max_iter"] = o.solver.max_iter;
  jo["runs"] = o.runs;
  jo["seed"] = o.seed;
  root["options"] = std::move(jo);

  if (layout && !layout->columns.empty()) {
    json t = json::object();
    t["steps"] = layout->steps;
    json cols = json::array();
    for (const auto& [name, idx] : layout->columns) {
      json c = json::object();
      c["name"] = name;
      json vs = json::array();
      for (int v : idx) {
        if (v < 0)
          vs.push_back(nullptr);
        else
          vs.push_back(p.vars[v].name);
      }
      c["vars"] = std::move(vs);
      cols.push_back(std::move(c));
    }
    t["columns"] = std::move(cols);
    root["trajectory"] = std::move(t);
  }

  return root.dump(2) + "\n";
}

}  // namespace logicopt
