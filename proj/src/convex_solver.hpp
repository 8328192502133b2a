#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace stldec {

/// Smooth concave scalar constraint g(x) >= 0 with analytic gradient.
/// `hessian` may be empty; a central-difference fallback of the gradient is
/// used in that case.
struct ConstraintFunction {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
  std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;
  std::string label;
};

/// maximize objective . x  subject to  g_j(x) >= 0 (concave) and
/// lower <= x <= upper (finite boxes).
struct ConvexProgram {
  int var_count = 0;
  Eigen::VectorXd objective;
  std::vector<ConstraintFunction> constraints;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  void validate() const;
};

struct SolverConfig {
  int max_outer = 200;
  int max_inner = 50;
  double eps_feas = 1e-8;
  double eps_opt = 1e-4;
  double barrier_init = 1.0;
  double barrier_shrink = 0.1;
};

enum class SolveStatus { Optimal, Infeasible, IterationLimit };

const char* to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::IterationLimit;
  Eigen::VectorXd point;
  double objective = 0.0;
  int outer_iterations = 0;
  int newton_steps = 0;
  double max_constraint_violation = 0.0;  // max(0, -min_j g_j) at the point
  double kkt_residual = 0.0;
};

/// Log-barrier interior point method: Newton inner iterations with
/// backtracking line search; barrier weight shrinks geometrically until the
/// duality-gap proxy (terms * weight) falls below eps_opt. Runs phase one
/// first when no strictly feasible start is supplied.
SolveResult solve(const ConvexProgram& p, const SolverConfig& cfg = {},
                  std::optional<Eigen::VectorXd> start = std::nullopt);

/// Slack maximization: returns a point with every g_j strictly positive and
/// strictly inside the box, or nullopt when the best achievable slack is
/// nonpositive.
std::optional<Eigen::VectorXd> phase_one(const ConvexProgram& p,
                                         const SolverConfig& cfg = {});

/// The point found by slack maximization together with its slack
/// min_j g_j(point). A slack of (numerically) zero identifies feasible sets
/// with empty interior, which the barrier itself cannot enter.
struct PhaseOneResult {
  Eigen::VectorXd point;
  double slack = 0.0;
};

PhaseOneResult phase_one_slack(const ConvexProgram& p, const SolverConfig& cfg = {});

}  // namespace stldec
