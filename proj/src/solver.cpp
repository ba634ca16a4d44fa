// SPDX-License-Identifier: Apache-2.0
//
// Primal-dual interior-point solver: slacks turn inequality rows into
// equalities, a log barrier handles slacks and variable bounds with
// fraction-to-boundary steps, and an l1 merit function with Armijo
// backtracking globalizes the damped-BFGS Newton iteration. Slack floors and
// multiplier clamps keep the condensed system from degenerating when rows
// are violated; rows are rescaled to unit gradient at the start point.

#include <Eigen/Dense>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "logicopt/nlp.hpp"

namespace logicopt {

namespace {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Evaluated {
  double f = 0.0;
  Vec grad_f;
  Vec cE, cI;
  Mat JE, JI;
};

class Ipm {
 public:
  Ipm(const AssembledNlp& nlp, const SolverOptions& opts) : nlp_(nlp), opts_(opts) {
    n_ = nlp.n;
    mE_ = static_cast<int>(nlp.equalities.size());
    mI_ = static_cast<int>(nlp.inequalities.size());
    const ExprArena& arena = nlp.problem->arena;
    obj_ = compile(arena, nlp.objective);
    eqs_.reserve(static_cast<std::size_t>(mE_));
    for (ExprId e : nlp.equalities) eqs_.push_back(compile(arena, e));
    ins_.reserve(static_cast<std::size_t>(mI_));
    for (ExprId e : nlp.inequalities) ins_.push_back(compile(arena, e));
    fixed_.assign(static_cast<std::size_t>(n_), false);
    for (int j = 0; j < n_; ++j) {
      const double lj = nlp_.lower[static_cast<std::size_t>(j)];
      const double uj = nlp_.upper[static_cast<std::size_t>(j)];
      if (std::isfinite(lj) && std::isfinite(uj) && uj - lj < 1e-12) {
        fixed_[static_cast<std::size_t>(j)] = true;
        continue;
      }
      if (std::isfinite(lj)) low_.push_back(j);
      if (std::isfinite(uj)) upp_.push_back(j);
    }
    row_.assign(static_cast<std::size_t>(n_), 0.0);
  }

  SolveOutcome run(std::span<const double> x0);

 private:
  bool eval_all(const Vec& x, Evaluated& ev);
  bool eval_values(const Vec& x, double& f, Vec& cE, Vec& cI);

  double lower_of(int j) const { return nlp_.lower[static_cast<std::size_t>(j)]; }
  double upper_of(int j) const { return nlp_.upper[static_cast<std::size_t>(j)]; }

  double merit(double f, const Vec& cE, const Vec& cI, const Vec& s, const Vec& x, double mu,
               double nu) const {
    double phi = f;
    for (int i = 0; i < mI_; ++i) phi -= mu * std::log(s[i]);
    for (int j : low_) phi -= mu * std::log(x[j] - lower_of(j));
    for (int j : upp_) phi -= mu * std::log(upper_of(j) - x[j]);
    phi += nu * (cE.lpNorm<1>() + (cI + s).lpNorm<1>());
    return phi;
  }

  SolveOutcome finalize(const Vec& x, const Vec& y, const Vec& w, const Vec& zL, const Vec& zU,
                        SolveStatus status, int iters, std::string diag) const;

  const AssembledNlp& nlp_;
  SolverOptions opts_;
  int n_ = 0, mE_ = 0, mI_ = 0;
  double s_obj_ = 1.0;
  Vec s_eq_, s_in_;  // gradient-based row scalings, fixed at the start point
  CompiledExpr obj_;
  std::vector<CompiledExpr> eqs_, ins_;
  std::vector<bool> fixed_;
  std::vector<int> low_, upp_;
  EvalWorkspace ws_;
  std::vector<double> row_;
};

bool Ipm::eval_all(const Vec& x, Evaluated& ev) {
  const ExprArena& arena = nlp_.problem->arena;
  std::span<const double> xs(x.data(), static_cast<std::size_t>(n_));
  try {
    ev.grad_f = Vec::Zero(n_);
    std::span<double> rs(row_.data(), row_.size());
    ev.f = s_obj_ * eval_gradient(arena, obj_, xs, ws_, rs);
    for (int v : obj_.vars) ev.grad_f[v] = s_obj_ * row_[static_cast<std::size_t>(v)];
    if (!std::isfinite(ev.f) || !ev.grad_f.allFinite()) return false;

    ev.cE.resize(mE_);
    ev.JE = Mat::Zero(mE_, n_);
    for (int i = 0; i < mE_; ++i) {
      const CompiledExpr& c = eqs_[static_cast<std::size_t>(i)];
      ev.cE[i] = s_eq_[i] * eval_gradient(arena, c, xs, ws_, rs);
      for (int v : c.vars) ev.JE(i, v) = s_eq_[i] * row_[static_cast<std::size_t>(v)];
    }
    ev.cI.resize(mI_);
    ev.JI = Mat::Zero(mI_, n_);
    for (int i = 0; i < mI_; ++i) {
      const CompiledExpr& c = ins_[static_cast<std::size_t>(i)];
      ev.cI[i] = s_in_[i] * eval_gradient(arena, c, xs, ws_, rs);
      for (int v : c.vars) ev.JI(i, v) = s_in_[i] * row_[static_cast<std::size_t>(v)];
    }
    if (!ev.cE.allFinite() || !ev.cI.allFinite() || !ev.JE.allFinite() || !ev.JI.allFinite())
      return false;
  } catch (const ExprError&) {
    return false;
  }
  return true;
}

bool Ipm::eval_values(const Vec& x, double& f, Vec& cE, Vec& cI) {
  const ExprArena& arena = nlp_.problem->arena;
  std::span<const double> xs(x.data(), static_cast<std::size_t>(n_));
  try {
    f = s_obj_ * eval(arena, obj_, xs, ws_);
    if (!std::isfinite(f)) return false;
    cE.resize(mE_);
    for (int i = 0; i < mE_; ++i) {
      cE[i] = s_eq_[i] * eval(arena, eqs_[static_cast<std::size_t>(i)], xs, ws_);
      if (!std::isfinite(cE[i])) return false;
    }
    cI.resize(mI_);
    for (int i = 0; i < mI_; ++i) {
      cI[i] = s_in_[i] * eval(arena, ins_[static_cast<std::size_t>(i)], xs, ws_);
      if (!std::isfinite(cI[i])) return false;
    }
  } catch (const ExprError&) {
    return false;
  }
  return true;
}

SolveOutcome Ipm::finalize(const Vec& x, const Vec& y, const Vec& w, const Vec& zL,
                           const Vec& zU, SolveStatus status, int iters,
                           std::string diag) const {
  SolveOutcome out;
  out.status = status;
  out.point.assign(x.data(), x.data() + n_);
  out.mult_eq.resize(static_cast<std::size_t>(mE_));
  for (int i = 0; i < mE_; ++i) out.mult_eq[static_cast<std::size_t>(i)] = y[i] * s_eq_[i] / s_obj_;
  out.mult_ineq.resize(static_cast<std::size_t>(mI_));
  for (int i = 0; i < mI_; ++i) out.mult_ineq[static_cast<std::size_t>(i)] = w[i] * s_in_[i] / s_obj_;
  out.mult_lo.resize(static_cast<std::size_t>(n_));
  out.mult_up.resize(static_cast<std::size_t>(n_));
  for (int j = 0; j < n_; ++j) {
    out.mult_lo[static_cast<std::size_t>(j)] = zL[j] / s_obj_;
    out.mult_up[static_cast<std::size_t>(j)] = zU[j] / s_obj_;
  }
  out.iterations = iters;
  out.diagnostic = std::move(diag);
  EvalWorkspace ws;
  try {
    out.objective = eval(nlp_.problem->arena, nlp_.objective, out.point, ws);
  } catch (const ExprError&) {
    out.objective = std::numeric_limits<double>::quiet_NaN();
  }
  const KktResiduals kkt = compute_kkt(nlp_, out.point, out.mult_eq, out.mult_ineq,
                                       out.mult_lo, out.mult_up);
  out.violation = kkt.violation;
  out.stationarity = kkt.stationarity;
  // Never report optimality the recomputed residuals do not support.
  if (out.status == SolveStatus::LocalOptimum &&
      (out.violation > opts_.feas_tol || out.stationarity > opts_.opt_tol))
    out.status = SolveStatus::FeasiblePoint;
  if (out.status == SolveStatus::FeasiblePoint && out.violation > opts_.feas_tol)
    out.status = SolveStatus::IterationLimit;
  return out;
}

SolveOutcome Ipm::run(std::span<const double> x0) {
  if (static_cast<int>(x0.size()) != n_)
    throw std::invalid_argument("initial point has wrong dimension");

  // Clip into bounds, then push strictly inside.
  Vec x(n_);
  for (int j = 0; j < n_; ++j) {
    const double lj = lower_of(j), uj = upper_of(j);
    double v = std::min(std::max(x0[static_cast<std::size_t>(j)], lj), uj);
    if (fixed_[static_cast<std::size_t>(j)]) {
      x[j] = lj;
      continue;
    }
    if (std::isfinite(lj) && std::isfinite(uj)) {
      const double pad = std::min(1e-2 * (uj - lj), 1e-2);
      v = std::min(std::max(v, lj + pad), uj - pad);
    } else if (std::isfinite(lj)) {
      v = std::max(v, lj + 1e-2);
    } else if (std::isfinite(uj)) {
      v = std::min(v, uj - 1e-2);
    }
    x[j] = v;
  }

  // Gradient-based row scaling at the start point: rows with steep gradients
  // are damped toward unit scale and never amplified.
  s_eq_ = Vec::Ones(mE_);
  s_in_ = Vec::Ones(mI_);
  s_obj_ = 1.0;
  {
    const ExprArena& arena = nlp_.problem->arena;
    std::span<const double> xs(x.data(), static_cast<std::size_t>(n_));
    std::span<double> rs(row_.data(), row_.size());
    const double g_max = 100.0;
    try {
      eval_gradient(arena, obj_, xs, ws_, rs);
      double gn = 0.0;
      for (int v : obj_.vars) gn = std::max(gn, std::abs(row_[static_cast<std::size_t>(v)]));
      if (gn > g_max) s_obj_ = g_max / gn;
      for (int i = 0; i < mE_; ++i) {
        const CompiledExpr& c = eqs_[static_cast<std::size_t>(i)];
        eval_gradient(arena, c, xs, ws_, rs);
        gn = 0.0;
        for (int v : c.vars) gn = std::max(gn, std::abs(row_[static_cast<std::size_t>(v)]));
        if (gn > g_max) s_eq_[i] = g_max / gn;
      }
      for (int i = 0; i < mI_; ++i) {
        const CompiledExpr& c = ins_[static_cast<std::size_t>(i)];
        eval_gradient(arena, c, xs, ws_, rs);
        gn = 0.0;
        for (int v : c.vars) gn = std::max(gn, std::abs(row_[static_cast<std::size_t>(v)]));
        if (gn > g_max) s_in_[i] = g_max / gn;
      }
    } catch (const ExprError&) {
      // fall back to unit scaling; the first eval_all below reports failure
    }
  }

  Evaluated ev;
  if (!eval_all(x, ev))
    return finalize(x, Vec::Zero(mE_), Vec::Zero(mI_), Vec::Zero(n_), Vec::Zero(n_),
                    SolveStatus::Infeasible, 0, "evaluation failed at initial point");

  double mu = opts_.mu_init;
  const double mu_min = opts_.opt_tol / 10.0;

  Vec y = Vec::Zero(mE_);
  Vec zL = Vec::Zero(n_), zU = Vec::Zero(n_);
  Vec s(mI_), w(mI_);
  for (int i = 0; i < mI_; ++i) {
    s[i] = std::max(-ev.cI[i], mu);
    w[i] = mu / s[i];
  }
  for (int j : low_) zL[j] = std::min(std::max(mu / (x[j] - lower_of(j)), 1e-8), 1e8);
  for (int j : upp_) zU[j] = std::min(std::max(mu / (upper_of(j) - x[j]), 1e-8), 1e8);

  Mat B = Mat::Identity(n_, n_);
  double nu = 1.0;
  int resets = 0, stall = 0, centering_stuck = 0;
  double best_viol = std::numeric_limits<double>::infinity();
  double best_dual = std::numeric_limits<double>::infinity();
  double last_alpha = 0.0;

  auto soft_restart = [&](bool nudge) {
    mu = std::min(std::max(mu * 10.0, 1e-4), opts_.mu_init);
    if (nudge) {
      // Repeated stalls often mean a vertex deadlock among bounded
      // variables; pull them toward their box centers and re-evaluate.
      Vec x_try = x;
      for (int j = 0; j < n_; ++j) {
        if (fixed_[static_cast<std::size_t>(j)]) continue;
        const double lj = lower_of(j), uj = upper_of(j);
        if (std::isfinite(lj) && std::isfinite(uj))
          x_try[j] += 0.3 * (0.5 * (lj + uj) - x_try[j]);
      }
      Evaluated ev_try;
      if (eval_all(x_try, ev_try)) {
        x = x_try;
        ev = std::move(ev_try);
      }
    }
    for (int i = 0; i < mI_; ++i) {
      s[i] = std::max(-ev.cI[i], mu);
      w[i] = mu / s[i];
    }
    for (int j : low_) zL[j] = std::min(std::max(mu / (x[j] - lower_of(j)), 1e-8), 1e8);
    for (int j : upp_) zU[j] = std::min(std::max(mu / (upper_of(j) - x[j]), 1e-8), 1e8);
    B = Mat::Identity(n_, n_);
    nu = 1.0;
    stall = 0;
    best_viol = std::numeric_limits<double>::infinity();
    best_dual = std::numeric_limits<double>::infinity();
  };

  SolveStatus status = SolveStatus::IterationLimit;
  std::string diag;
  int iter = 0;
  const int nb = static_cast<int>(low_.size() + upp_.size());

  for (; iter < opts_.max_iter; ++iter) {
    // Slack floor: sigma and the centering rhs never see a crashed slack.
    const double s_floor = 1e-2 * mu;
    Vec stab(mI_);
    for (int i = 0; i < mI_; ++i) stab[i] = std::max(s[i], s_floor);

    Vec r_d = ev.grad_f;
    if (mE_ > 0) r_d += ev.JE.transpose() * y;
    if (mI_ > 0) r_d += ev.JI.transpose() * w;
    for (int j : low_) r_d[j] -= zL[j];
    for (int j : upp_) r_d[j] += zU[j];
    for (int j = 0; j < n_; ++j)
      if (fixed_[static_cast<std::size_t>(j)]) r_d[j] = 0.0;

    double viol = 0.0;  // unscaled, to match certification semantics
    for (int i = 0; i < mE_; ++i) viol = std::max(viol, std::abs(ev.cE[i]) / s_eq_[i]);
    for (int i = 0; i < mI_; ++i) viol = std::max(viol, ev.cI[i] / s_in_[i]);
    viol = std::max(viol, 0.0);
    const double slack_res = mI_ > 0 ? (ev.cI + s).lpNorm<Eigen::Infinity>() : 0.0;

    double mult_sum = y.lpNorm<1>() + w.lpNorm<1>();
    for (int j : low_) mult_sum += std::abs(zL[j]);
    for (int j : upp_) mult_sum += std::abs(zU[j]);
    const int mult_count = mE_ + mI_ + nb;
    const double sd = std::max(100.0, mult_sum / std::max(1, mult_count)) / 100.0;

    double comp0 = 0.0, comp_mu = 0.0;
    for (int i = 0; i < mI_; ++i) {
      comp0 = std::max(comp0, std::abs(s[i] * w[i]));
      comp_mu = std::max(comp_mu, std::abs(s[i] * w[i] - mu));
    }
    for (int j : low_) {
      const double dz = x[j] - lower_of(j);
      comp0 = std::max(comp0, std::abs(dz * zL[j]));
      comp_mu = std::max(comp_mu, std::abs(dz * zL[j] - mu));
    }
    for (int j : upp_) {
      const double dz = upper_of(j) - x[j];
      comp0 = std::max(comp0, std::abs(dz * zU[j]));
      comp_mu = std::max(comp_mu, std::abs(dz * zU[j] - mu));
    }

    const double dual_inf = r_d.lpNorm<Eigen::Infinity>() / sd;
    if (opts_.verbose >= 2) {
      int wi = -1;
      double worst = 0.0;
      for (int i = 0; i < mI_; ++i)
        if (std::abs(s[i] * w[i] - mu) > worst) { worst = std::abs(s[i] * w[i] - mu); wi = i; }
      int bj = -1;
      double worstb = 0.0;
      for (int j : low_)
        if (std::abs((x[j] - lower_of(j)) * zL[j] - mu) > worstb) { worstb = std::abs((x[j] - lower_of(j)) * zL[j] - mu); bj = j; }
      for (int j : upp_)
        if (std::abs((upper_of(j) - x[j]) * zU[j] - mu) > worstb) { worstb = std::abs((upper_of(j) - x[j]) * zU[j] - mu); bj = ~j; }
      std::fprintf(stderr, "   comp: worst row %d |sw-mu|=%.3g (s=%.3g w=%.3g cI=%.3g)  worst bnd %d |dz-mu|=%.3g\n",
                   wi, worst, wi >= 0 ? s[wi] : 0, wi >= 0 ? w[wi] : 0, wi >= 0 ? ev.cI[wi] : 0, bj, worstb);
    }
    // Primal and dual residuals at tolerance but complementarity pinned
    // above mu: recenter the multipliers and advance the barrier, instead
    // of polishing micro-steps for hundreds of iterations.
    if (viol <= opts_.feas_tol && slack_res <= 10.0 * mu && dual_inf <= opts_.opt_tol &&
        comp_mu / sd > 10.0 * mu && ++centering_stuck >= 10) {
      for (int i = 0; i < mI_; ++i) {
        s[i] = std::max({-ev.cI[i], s[i], 1e-2 * mu});
        w[i] = mu / s[i];
      }
      for (int j : low_) zL[j] = std::min(std::max(mu / (x[j] - lower_of(j)), 1e-10), 1e10);
      for (int j : upp_) zU[j] = std::min(std::max(mu / (upper_of(j) - x[j]), 1e-10), 1e10);
      if (mu > mu_min) mu = std::max(mu_min, 0.2 * mu);
      centering_stuck = 0;
      continue;
    }
    if (opts_.verbose)
      std::fprintf(stderr,
                   "it %3d mu=%-9.3g viol=%-9.3g slack=%-9.3g dual=%-9.3g comp=%-9.3g "
                   "nu=%-8.3g a=%-9.3g\n",
                   iter, mu, viol, slack_res, dual_inf, comp0 / sd, nu, last_alpha);
    if (dual_inf <= opts_.opt_tol && comp0 / sd <= opts_.opt_tol && viol <= opts_.feas_tol &&
        slack_res <= opts_.feas_tol) {
      status = SolveStatus::LocalOptimum;
      break;
    }

    // Progress watchdog; a soft restart precedes giving up.
    if (viol < best_viol * (1.0 - 1e-3) || dual_inf < best_dual * (1.0 - 1e-3)) {
      best_viol = std::min(best_viol, viol);
      best_dual = std::min(best_dual, dual_inf);
      stall = 0;
    } else if (++stall >= 40) {
      if (++resets <= 5) {
        soft_restart(resets >= 2);
        continue;
      }
      diag = "no measurable progress";
      status = viol <= opts_.feas_tol ? SolveStatus::FeasiblePoint : SolveStatus::Infeasible;
      break;
    }

    // Barrier update; the quasi-Newton dual residual gates it loosely.
    const double e_mu = std::max({comp_mu / sd, viol, slack_res, dual_inf / 1000.0});
    if (e_mu <= 10.0 * mu && mu > mu_min) {
      mu = std::max(mu_min, std::min(0.2 * mu, std::pow(mu, 1.5)));
      stall = 0;
    }
    const double tau = std::max(0.99, 1.0 - mu);

    // Condensed KKT system in (dx, dy).
    Mat K = Mat::Zero(n_ + mE_, n_ + mE_);
    K.topLeftCorner(n_, n_) = B;
    for (int j : low_) K(j, j) += zL[j] / (x[j] - lower_of(j));
    for (int j : upp_) K(j, j) += zU[j] / (upper_of(j) - x[j]);
    for (int i = 0; i < mI_; ++i) {
      const double sig = std::min(w[i] / stab[i], 1e12);
      const auto& sup = ins_[static_cast<std::size_t>(i)].vars;
      for (int a : sup)
        for (int b : sup) K(a, b) += sig * ev.JI(i, a) * ev.JI(i, b);
    }
    for (int j = 0; j < n_; ++j) {
      if (!fixed_[static_cast<std::size_t>(j)]) continue;
      K.row(j).setZero();
      K.col(j).setZero();
      K(j, j) = 1.0;
    }
    if (mE_ > 0) {
      K.block(n_, 0, mE_, n_) = ev.JE;
      K.block(0, n_, n_, mE_) = ev.JE.transpose();
      for (int j = 0; j < n_; ++j)
        if (fixed_[static_cast<std::size_t>(j)]) {
          K.block(n_, 0, mE_, n_).col(j).setZero();
          K.block(0, n_, n_, mE_).row(j).setZero();
        }
    }

    Vec rhs(n_ + mE_);
    {
      Vec rx = -(ev.grad_f + (mE_ > 0 ? Vec(ev.JE.transpose() * y) : Vec(Vec::Zero(n_))));
      for (int j : low_) rx[j] += mu / (x[j] - lower_of(j));
      for (int j : upp_) rx[j] -= mu / (upper_of(j) - x[j]);
      for (int i = 0; i < mI_; ++i) {
        const double coef = -mu / stab[i] - (w[i] / stab[i]) * (ev.cI[i] + s[i]);
        const auto& sup = ins_[static_cast<std::size_t>(i)].vars;
        for (int a : sup) rx[a] += coef * ev.JI(i, a);
      }
      for (int j = 0; j < n_; ++j)
        if (fixed_[static_cast<std::size_t>(j)]) rx[j] = 0.0;
      rhs.head(n_) = rx;
      if (mE_ > 0) rhs.tail(mE_) = -ev.cE;
    }

    // Factor with adaptive regularization and a residual check.
    Vec d;
    double delta_w = 0.0, delta_c = 0.0;
    bool solved = false;
    Eigen::PartialPivLU<Mat> lu;
    for (int attempt = 0; attempt < 6 && !solved; ++attempt) {
      Mat Kreg = K;
      if (delta_w > 0.0) Kreg.topLeftCorner(n_, n_).diagonal().array() += delta_w;
      if (delta_c > 0.0 && mE_ > 0)
        Kreg.bottomRightCorner(mE_, mE_).diagonal().array() -= delta_c;
      lu.compute(Kreg);
      d = lu.solve(rhs);
      if (d.allFinite()) d += lu.solve(rhs - Kreg * d);  // one refinement pass
      const double res = (Kreg * d - rhs).lpNorm<Eigen::Infinity>();
      if (d.allFinite() && res <= 1e-8 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>()))
        solved = true;
      else {
        delta_w = delta_w == 0.0 ? 1e-8 : delta_w * 100.0;
        delta_c = 1e-10;
      }
    }
    if (!solved) {
      if (++resets <= 5) {
        soft_restart(false);
        continue;
      }
      diag = "KKT factorization failed";
      status = viol <= opts_.feas_tol ? SolveStatus::FeasiblePoint : SolveStatus::Infeasible;
      break;
    }

    const Vec dx = d.head(n_);
    const Vec dy = mE_ > 0 ? Vec(d.tail(mE_)) : Vec();
    Vec ds(mI_), dw(mI_);
    for (int i = 0; i < mI_; ++i) {
      double JIdx = 0.0;
      for (int a : ins_[static_cast<std::size_t>(i)].vars) JIdx += ev.JI(i, a) * dx[a];
      ds[i] = -(ev.cI[i] + s[i]) - JIdx;
      dw[i] = -w[i] + mu / stab[i] - (w[i] / stab[i]) * ds[i];
    }
    Vec dzL = Vec::Zero(n_), dzU = Vec::Zero(n_);
    for (int j : low_) {
      const double dl = x[j] - lower_of(j);
      dzL[j] = -zL[j] + mu / dl - (zL[j] / dl) * dx[j];
    }
    for (int j : upp_) {
      const double du = upper_of(j) - x[j];
      dzU[j] = -zU[j] + mu / du + (zU[j] / du) * dx[j];
    }

    // Fraction-to-boundary limits.
    double a_pri = 1.0, a_dual = 1.0;
    for (int i = 0; i < mI_; ++i) {
      if (ds[i] < 0.0) a_pri = std::min(a_pri, -tau * s[i] / ds[i]);
      if (dw[i] < 0.0) a_dual = std::min(a_dual, -tau * w[i] / dw[i]);
    }
    for (int j : low_) {
      const double dl = x[j] - lower_of(j);
      if (dx[j] < 0.0) a_pri = std::min(a_pri, -tau * dl / dx[j]);
      if (dzL[j] < 0.0) a_dual = std::min(a_dual, -tau * zL[j] / dzL[j]);
    }
    for (int j : upp_) {
      const double du = upper_of(j) - x[j];
      if (dx[j] > 0.0) a_pri = std::min(a_pri, tau * du / dx[j]);
      if (dzU[j] < 0.0) a_dual = std::min(a_dual, -tau * zU[j] / dzU[j]);
    }

    // Penalty update and merit line search along (dx, ds).
    const double c_l1 = ev.cE.lpNorm<1>() + (mI_ > 0 ? (ev.cI + s).lpNorm<1>() : 0.0);
    double barrier_dir = ev.grad_f.dot(dx);
    for (int i = 0; i < mI_; ++i) barrier_dir -= mu * ds[i] / s[i];
    for (int j : low_) barrier_dir -= mu * dx[j] / (x[j] - lower_of(j));
    for (int j : upp_) barrier_dir += mu * dx[j] / (upper_of(j) - x[j]);
    bool nu_blown = false;
    if (c_l1 > 1e-10) {
      const double nu_req = barrier_dir / (0.5 * c_l1);
      if (nu_req > nu) nu = std::min(1e5, nu_req + 1.0);
      // A penalty weight this large means the search direction is junk
      // (usually a stale Hessian model); rebuilding beats grinding.
      if (nu_req > 1e5) nu_blown = true;
    }
    const double dphi = barrier_dir - nu * c_l1;
    if (nu_blown && resets <= 5) {
      ++resets;
      soft_restart(resets >= 2);
      continue;
    }

    const double phi0 = merit(ev.f, ev.cE, ev.cI, s, x, mu, nu);
    double alpha = a_pri;
    bool accepted = false;
    Vec x_t, s_t, cE_t, cI_t;
    double f_t = 0.0;
    const bool dual_only =
        a_pri * dx.lpNorm<Eigen::Infinity>() <= 1e-14 * (1.0 + x.lpNorm<Eigen::Infinity>()) &&
        (mI_ == 0 ||
         a_pri * ds.lpNorm<Eigen::Infinity>() <= 1e-12 * (1.0 + s.lpNorm<Eigen::Infinity>()));
    if (dual_only) {
      // Negligible primal direction: the merit function cannot measure dual
      // progress, so take the multiplier step directly.
      x_t = x + alpha * dx;
      s_t = s + alpha * ds;
      if (eval_values(x_t, f_t, cE_t, cI_t)) accepted = true;
    }
    bool soc_tried = false;
    for (int ls = 0; ls < 40 && alpha > 1e-14 && !accepted; ++ls, alpha *= 0.5) {
      x_t = x + alpha * dx;
      s_t = s + alpha * ds;
      if (!eval_values(x_t, f_t, cE_t, cI_t)) continue;
      const double phi_t = merit(f_t, cE_t, cI_t, s_t, x_t, mu, nu);
      if (std::isfinite(phi_t) &&
          phi_t <= phi0 + 1e-4 * alpha * std::min(dphi, 0.0) + 1e-12 * (1.0 + std::abs(phi0))) {
        accepted = true;
        break;
      }
      if (!soc_tried && ls == 0) {
        // Second-order correction: retry the full step with the constraint
        // curvature compensated, reusing the factorization.
        soc_tried = true;
        Vec rhs_soc = Vec::Zero(n_ + mE_);
        for (int i = 0; i < mI_; ++i) {
          const double r_soc = cI_t[i] + s_t[i];
          const double coef = -(w[i] / stab[i]) * r_soc;
          for (int a : ins_[static_cast<std::size_t>(i)].vars)
            rhs_soc[a] += coef * ev.JI(i, a);
        }
        if (mE_ > 0) rhs_soc.tail(mE_) = -cE_t;
        Vec d2 = lu.solve(rhs_soc);
        if (d2.allFinite()) {
          Vec dx2 = dx + d2.head(n_);
          Vec ds2(mI_);
          for (int i = 0; i < mI_; ++i) {
            double JIdx2 = 0.0;
            for (int a : ins_[static_cast<std::size_t>(i)].vars)
              JIdx2 += ev.JI(i, a) * dx2[a];
            ds2[i] = -(ev.cI[i] + s[i]) - JIdx2;
          }
          double a2 = a_pri;
          for (int i = 0; i < mI_; ++i)
            if (ds2[i] < 0.0) a2 = std::min(a2, -tau * s[i] / ds2[i]);
          for (int j : low_) {
            const double dl = x[j] - lower_of(j);
            if (dx2[j] < 0.0) a2 = std::min(a2, -tau * dl / dx2[j]);
          }
          for (int j : upp_) {
            const double du = upper_of(j) - x[j];
            if (dx2[j] > 0.0) a2 = std::min(a2, tau * du / dx2[j]);
          }
          Vec xs = x + a2 * dx2;
          Vec ss = s + a2 * ds2;
          double fs = 0.0;
          Vec cEs, cIs;
          if (eval_values(xs, fs, cEs, cIs)) {
            const double phi_s = merit(fs, cEs, cIs, ss, xs, mu, nu);
            if (std::isfinite(phi_s) &&
                phi_s <= phi0 + 1e-4 * a2 * std::min(dphi, 0.0) + 1e-12 * (1.0 + std::abs(phi0))) {
              x_t = std::move(xs);
              s_t = std::move(ss);
              f_t = fs;
              cE_t = std::move(cEs);
              cI_t = std::move(cIs);
              alpha = a2;
              accepted = true;
              break;
            }
          }
        }
      }
    }

    if (!accepted) {
      if (++resets > 5) {
        diag = "line search failed repeatedly (restoration failure)";
        status = viol <= opts_.feas_tol ? SolveStatus::FeasiblePoint : SolveStatus::Infeasible;
        break;
      }
      soft_restart(resets >= 2);
      continue;
    }

    last_alpha = alpha;
    const Vec x_old = x;
    x = x_t;
    s = s_t;
    if (mE_ > 0) y += alpha * dy;
    for (int i = 0; i < mI_; ++i) w[i] += a_dual * dw[i];
    for (int j : low_) zL[j] += a_dual * dzL[j];
    for (int j : upp_) zU[j] += a_dual * dzU[j];

    Evaluated ev_new;
    if (!eval_all(x, ev_new)) {
      diag = "evaluation failed after step";
      status = SolveStatus::Infeasible;
      iter++;
      x = x_old;
      break;
    }

    // Slack lift: raising a slack toward its natural margin only improves
    // the merit (larger log term, smaller |cI + s|). Violated rows keep a
    // protective floor; active rows follow their natural tiny slacks.
    for (int i = 0; i < mI_; ++i) {
      if (-ev_new.cI[i] > s[i]) s[i] = -ev_new.cI[i];
      const double floor_i = std::min(1e-2 * mu, std::max(ev_new.cI[i], 0.0));
      s[i] = std::max(s[i], floor_i);
    }

    // Dual safeguards keep multipliers commensurate with mu.
    const double kap = 1e10;
    for (int i = 0; i < mI_; ++i)
      w[i] = std::min(std::max(w[i], mu / (kap * s[i])), kap * mu / s[i]);
    for (int j : low_) {
      const double dl = x[j] - lower_of(j);
      zL[j] = std::min(std::max(zL[j], mu / (kap * dl)), kap * mu / dl);
    }
    for (int j : upp_) {
      const double du = upper_of(j) - x[j];
      zU[j] = std::min(std::max(zU[j], mu / (kap * du)), kap * mu / du);
    }

    // Damped BFGS on the Lagrangian, multipliers at their updated values.
    const Vec step = x - x_old;
    const double step_norm = step.lpNorm<Eigen::Infinity>();
    if (step_norm > 1e-13) {
      Vec gl_new = ev_new.grad_f;
      Vec gl_old = ev.grad_f;
      if (mE_ > 0) {
        gl_new += ev_new.JE.transpose() * y;
        gl_old += ev.JE.transpose() * y;
      }
      if (mI_ > 0) {
        gl_new += ev_new.JI.transpose() * w;
        gl_old += ev.JI.transpose() * w;
      }
      Vec yk = gl_new - gl_old;
      const Vec Bs = B * step;
      const double sBs = step.dot(Bs);
      double sy = step.dot(yk);
      if (sBs > 1e-16) {
        if (sy < 0.2 * sBs) {
          const double theta = 0.8 * sBs / (sBs - sy);
          yk = theta * yk + (1.0 - theta) * Bs;
          sy = step.dot(yk);
        }
        if (sy > 1e-12) {
          B -= (Bs * Bs.transpose()) / sBs;
          B += (yk * yk.transpose()) / sy;
          B = 0.5 * (B + B.transpose());
          if (!B.allFinite() || B.lpNorm<Eigen::Infinity>() > 1e10) B = Mat::Identity(n_, n_);
        }
      }
    }
    ev = std::move(ev_new);
  }

  return finalize(x, y, w, zL, zU, status, iter, std::move(diag));
}

}  // namespace

SolveOutcome solve(const AssembledNlp& nlp, std::span<const double> x0,
                   const SolverOptions& opts) {
  const auto t0 = std::chrono::steady_clock::now();
  Ipm ipm(nlp, opts);
  SolveOutcome out = ipm.run(x0);
  out.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                    .count();
  return out;
}

}  // namespace logicopt
