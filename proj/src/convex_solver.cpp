#include "convex_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "log.hpp"

namespace stldec {

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::Infeasible: return "infeasible";
    case SolveStatus::IterationLimit: return "iteration-limit";
  }
  return "unknown";
}

void ConvexProgram::validate() const {
  if (var_count < 1) throw InputError("program needs at least one variable");
  if (objective.size() != var_count)
    throw InputError("objective size does not match variable count");
  if (lower.size() != var_count || upper.size() != var_count)
    throw InputError("box bound size does not match variable count");
  for (int i = 0; i < var_count; ++i) {
    if (!std::isfinite(lower[i]) || !std::isfinite(upper[i]))
      throw InputError("box bounds must be finite");
    if (!(lower[i] < upper[i]))
      throw InputError("box lower bound must be strictly below upper bound");
  }
  for (const auto& c : constraints)
    if (!c.value || !c.gradient)
      throw InputError("constraint functions require value and gradient evaluators");
}

namespace {

constexpr double kBoxMargin = 1e-12;

Eigen::MatrixXd fd_hessian(const ConstraintFunction& c, const Eigen::VectorXd& x) {
  const int n = static_cast<int>(x.size());
  Eigen::MatrixXd h(n, n);
  const double step = 1e-6;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd xp = x, xm = x;
    xp[i] += step;
    xm[i] -= step;
    h.col(i) = (c.gradient(xp) - c.gradient(xm)) / (2.0 * step);
  }
  return 0.5 * (h + h.transpose());
}

struct BarrierState {
  double value = 0.0;       // -objective.x + mu * barrier
  bool interior = false;
};

class BarrierProblem {
 public:
  BarrierProblem(const ConvexProgram& p) : p_(p) {}

  bool strictly_feasible(const Eigen::VectorXd& x) const {
    for (int i = 0; i < p_.var_count; ++i)
      if (!(x[i] > p_.lower[i] + kBoxMargin) || !(x[i] < p_.upper[i] - kBoxMargin))
        return false;
    for (const auto& c : p_.constraints)
      if (!(c.value(x) > 0.0)) return false;
    return true;
  }

  BarrierState value(const Eigen::VectorXd& x, double mu) const {
    BarrierState s;
    double barrier = 0.0;
    for (int i = 0; i < p_.var_count; ++i) {
      double lo = x[i] - p_.lower[i];
      double hi = p_.upper[i] - x[i];
      if (!(lo > kBoxMargin) || !(hi > kBoxMargin)) return s;
      barrier -= std::log(lo) + std::log(hi);
    }
    for (const auto& c : p_.constraints) {
      double g = c.value(x);
      if (!(g > 0.0)) return s;
      barrier -= std::log(g);
    }
    s.value = -p_.objective.dot(x) + mu * barrier;
    s.interior = true;
    return s;
  }

  void derivatives(const Eigen::VectorXd& x, double mu, Eigen::VectorXd& grad,
                   Eigen::MatrixXd& hess) const {
    const int n = p_.var_count;
    grad = -p_.objective;
    hess = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      double lo = x[i] - p_.lower[i];
      double hi = p_.upper[i] - x[i];
      grad[i] += mu * (-1.0 / lo + 1.0 / hi);
      hess(i, i) += mu * (1.0 / (lo * lo) + 1.0 / (hi * hi));
    }
    for (const auto& c : p_.constraints) {
      double g = c.value(x);
      Eigen::VectorXd gg = c.gradient(x);
      Eigen::MatrixXd gh = c.hessian ? c.hessian(x) : fd_hessian(c, x);
      grad += mu * (-gg / g);
      hess += mu * (gg * gg.transpose() / (g * g) - gh / g);
    }
  }

  int barrier_terms() const { return static_cast<int>(p_.constraints.size()) + 2 * p_.var_count; }

  double min_slack(const Eigen::VectorXd& x) const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : p_.constraints) m = std::min(m, c.value(x));
    return m;
  }

 private:
  const ConvexProgram& p_;
};

// Minimizes the barrier objective at fixed mu. Returns the Newton step count.
int newton_minimize(const BarrierProblem& bp, double mu, Eigen::VectorXd& x,
                    const SolverConfig& cfg, double* kkt_out) {
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
  int steps = 0;
  for (int it = 0; it < cfg.max_inner; ++it) {
    bp.derivatives(x, mu, grad, hess);

    Eigen::VectorXd dir;
    double ridge = 0.0;
    for (;;) {
      Eigen::MatrixXd h = hess;
      if (ridge > 0.0) h.diagonal().array() += ridge;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      if (ldlt.info() == Eigen::Success) {
        dir = ldlt.solve(-grad);
        if (dir.allFinite() && grad.dot(dir) < 0.0) break;
      }
      ridge = ridge == 0.0 ? 1e-10 : ridge * 100.0;
      if (ridge > 1e6) {
        dir = -grad;  // steepest descent as a last resort
        break;
      }
    }

    double decrement = -grad.dot(dir);
    if (decrement * 0.5 <= 1e-12 * (1.0 + std::abs(bp.value(x, mu).value))) break;

    BarrierState cur = bp.value(x, mu);
    double step = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls) {
      BarrierState trial = bp.value(x + step * dir, mu);
      if (trial.interior && trial.value <= cur.value + 0.25 * step * grad.dot(dir)) {
        x += step * dir;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    ++steps;
    if (!moved) break;
  }
  if (kkt_out) {
    bp.derivatives(x, mu, grad, hess);
    *kkt_out = grad.lpNorm<Eigen::Infinity>();
  }
  return steps;
}

}  // namespace

PhaseOneResult phase_one_slack(const ConvexProgram& p, const SolverConfig& cfg) {
  p.validate();
  BarrierProblem bp(p);
  Eigen::VectorXd mid = 0.5 * (p.lower + p.upper);
  if (p.constraints.empty())
    return {mid, std::numeric_limits<double>::infinity()};
  if (bp.strictly_feasible(mid)) return {mid, bp.min_slack(mid)};

  // Auxiliary program over (x, s): maximize s with g_j(x) - s >= 0.
  ConvexProgram aux;
  aux.var_count = p.var_count + 1;
  aux.objective = Eigen::VectorXd::Zero(aux.var_count);
  aux.objective[p.var_count] = 1.0;
  double s0 = bp.min_slack(mid) - 1.0;
  aux.lower = Eigen::VectorXd(aux.var_count);
  aux.upper = Eigen::VectorXd(aux.var_count);
  aux.lower.head(p.var_count) = p.lower;
  aux.upper.head(p.var_count) = p.upper;
  aux.lower[p.var_count] = s0 - 1.0;
  aux.upper[p.var_count] = std::max(1.0, std::abs(s0));
  for (const auto& c : p.constraints) {
    ConstraintFunction shifted;
    shifted.label = c.label;
    shifted.value = [&c, n = p.var_count](const Eigen::VectorXd& xs) {
      return c.value(xs.head(n)) - xs[n];
    };
    shifted.gradient = [&c, n = p.var_count](const Eigen::VectorXd& xs) {
      Eigen::VectorXd g(n + 1);
      g.head(n) = c.gradient(xs.head(n));
      g[n] = -1.0;
      return g;
    };
    if (c.hessian) {
      shifted.hessian = [&c, n = p.var_count](const Eigen::VectorXd& xs) {
        Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n + 1, n + 1);
        h.topLeftCorner(n, n) = c.hessian(xs.head(n));
        return h;
      };
    }
    aux.constraints.push_back(std::move(shifted));
  }

  BarrierProblem abp(aux);
  Eigen::VectorXd xs(aux.var_count);
  xs.head(p.var_count) = mid;
  xs[p.var_count] = s0;

  double mu = cfg.barrier_init;
  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    newton_minimize(abp, mu, xs, cfg, nullptr);
    Eigen::VectorXd candidate = xs.head(p.var_count);
    if (xs[p.var_count] > 1e-9 && bp.strictly_feasible(candidate))
      return {candidate, bp.min_slack(candidate)};
    if (static_cast<double>(abp.barrier_terms()) * mu <= cfg.eps_opt) break;
    mu *= cfg.barrier_shrink;
  }
  Eigen::VectorXd candidate = xs.head(p.var_count);
  return {candidate, bp.min_slack(candidate)};
}

std::optional<Eigen::VectorXd> phase_one(const ConvexProgram& p,
                                         const SolverConfig& cfg) {
  PhaseOneResult r = phase_one_slack(p, cfg);
  if (r.slack > 0.0 && BarrierProblem(p).strictly_feasible(r.point)) return r.point;
  return std::nullopt;
}

SolveResult solve(const ConvexProgram& p, const SolverConfig& cfg,
                  std::optional<Eigen::VectorXd> start) {
  p.validate();
  BarrierProblem bp(p);
  SolveResult res;

  Eigen::VectorXd x;
  if (start && bp.strictly_feasible(*start)) {
    x = *start;
  } else {
    auto feasible = phase_one(p, cfg);
    if (!feasible) {
      res.status = SolveStatus::Infeasible;
      return res;
    }
    x = *feasible;
  }

  const double terms = static_cast<double>(bp.barrier_terms());
  double mu = cfg.barrier_init;
  double kkt = std::numeric_limits<double>::infinity();
  bool converged = false;
  for (int outer = 0; outer < cfg.max_outer; ++outer) {
    res.newton_steps += newton_minimize(bp, mu, x, cfg, &kkt);
    ++res.outer_iterations;
    if (terms * mu <= cfg.eps_opt) {
      converged = true;
      break;
    }
    mu *= cfg.barrier_shrink;
  }

  res.point = x;
  res.objective = p.objective.dot(x);
  res.kkt_residual = kkt;
  double min_g = p.constraints.empty() ? 0.0 : bp.min_slack(x);
  res.max_constraint_violation = std::max(0.0, -min_g);
  res.status = converged ? SolveStatus::Optimal : SolveStatus::IterationLimit;
  log_debug("solve: status=" + std::string(to_string(res.status)) +
            " objective=" + std::to_string(res.objective) +
            " newton_steps=" + std::to_string(res.newton_steps));
  return res;
}

}  // namespace stldec
