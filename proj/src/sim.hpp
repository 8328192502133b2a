#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "scenario.hpp"
#include "synthesis.hpp"
#include "trajectory.hpp"

namespace stldec {

struct SimulationOutput {
  Trajectory trajectory;
  std::vector<int> state_bound_violations;  // sample indices past the bound
};

/// Forward-Euler rollout x_{k+1} = x_k + dt (A x_k + u_k) from the agent's
/// initial state (origin in Auto/Origin mode). Throws EvalError when an input
/// sample exceeds the input bound.
SimulationOutput simulate_dynamics(const AgentConfig& agent,
                                   const std::vector<Eigen::VectorXd>& inputs,
                                   double dt);

struct TeamPlan {
  bool feasible = false;
  std::optional<Trajectory> trajectory;  // team-local signal on success
  std::string failure;
  int violated_source = -1;              // conjunct index when attributable
  double violated_time = -1.0;
};

/// [lo, hi] requirement on one coordinate at one sample.
struct CoordinateWindow {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  int source = -1;  // conjunct that tightened the window last

  bool constrained() const { return std::isfinite(lo) || std::isfinite(hi); }
  bool empty() const { return lo > hi; }
  double mid() const { return 0.5 * (lo + hi); }
};

/// windows[k][coord] for the samples of [0, horizon]; the active grid ranges
/// match what the robustness evaluation will inspect.
using WindowGrid = std::vector<std::vector<CoordinateWindow>>;

struct WindowError {
  std::string message;
  int source = -1;
  double time = -1.0;
};

/// Per-sample box requirements implied by a task set. Returns nullopt (with
/// `err` filled) when two boxes conflict or a conjunct exceeds the horizon.
std::optional<WindowGrid> task_windows(const LocalTaskSet& tasks, int dim,
                                       double horizon, double dt, WindowError* err);

/// Waypoint planner: drives each required coordinate into its box before the
/// box becomes active and holds it there, with per-step displacement capped
/// by what the input bound leaves after compensating the drift term. Returns
/// infeasible when a deadline is unreachable under that cap or the rollout
/// misses a task.
TeamPlan plan_team_trajectory(const LocalTaskSet& tasks,
                              const std::vector<AgentConfig>& team_agents,
                              double horizon, double dt);

struct TeamReport {
  int team = 0;
  bool planned = false;
  std::string plan_failure;
  double local_robustness = 0.0;  // valid when planned
  std::vector<std::pair<std::string, double>> conjunct_robustness;
};

struct OracleCheck {
  int conjunct = 0;
  double solver_objective = 0.0;
  double oracle_objective = 0.0;
  double grid_step = 0.0;
  bool within_tolerance = false;
};

struct RobustnessReport {
  TimingMode timing_mode = TimingMode::PointEventually;
  double margin = 0.0;
  std::vector<DecompositionResult> decompositions;
  std::vector<LocalTaskSet> tasks;
  ConsistencyReport consistency;

  std::vector<TeamReport> teams;
  std::vector<std::optional<Trajectory>> team_trajectories;
  std::optional<Trajectory> global_trajectory;

  bool all_planned = false;
  double global_robustness = 0.0;    // valid when all_planned
  bool implication_premise = false;  // every local robustness > 0
  bool soundness_violation = false;  // premise held but global <= 0

  std::vector<OracleCheck> oracle_checks;
  double decompose_seconds = 0.0;
  double plan_seconds = 0.0;
  double eval_seconds = 0.0;

  double min_local_robustness() const;
};

struct RunOptions {
  std::optional<TimingMode> timing_mode;  // overrides the scenario's mode
  std::optional<double> margin;
  bool oracle_check = false;
  int oracle_resolution = 9;
};

/// Full pipeline: decompose every conjunct, synthesize the per-team tasks,
/// plan each team, stitch the global signal and evaluate both levels.
/// The soundness flag is raised if the planned run ever has every local
/// robustness positive while the global robustness is not.
RobustnessReport run_scenario(const Scenario& s, const RunOptions& opts = {});

}  // namespace stldec
