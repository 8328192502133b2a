#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scenario.hpp"
#include "sim.hpp"

namespace stldec {

/// Decomposition output bundle: everything needed to re-check a trajectory
/// against both the local tasks and the global formula.
struct TasksBundle {
  std::optional<TeamPartition> partition;
  std::map<std::string, PredicateFunction> global_predicates;
  std::string global_formula_text;
  StlFormula::Ptr global_formula;
  std::vector<LocalTaskSet> tasks;
  std::vector<DecompositionResult> decompositions;
  double margin = 0.0;
  TimingMode timing_mode = TimingMode::PointEventually;

  const TeamPartition& team_partition() const { return *partition; }
};

std::string tasks_bundle_to_json(const Scenario& s, const RobustnessReport& report);
TasksBundle tasks_bundle_from_json(const std::string& text);
TasksBundle tasks_bundle_from_file(const std::string& path);

std::string report_to_json(const RobustnessReport& report);

/// Corner list of every emitted box, long format:
/// name,team,source,vertex,coordinate,value
std::string boxes_to_csv(const RobustnessReport& report);

/// Predicate value traces over time, long format: t,scope,name,value
/// (scope "global" rows use the stitched signal, "team<l>" rows the local one).
std::string traces_to_csv(const Scenario& s, const RobustnessReport& report);

/// Evaluation of a stored bundle against an externally supplied trajectory.
struct CheckOutcome {
  std::vector<TeamReport> teams;
  double global_robustness = 0.0;
  double min_local_robustness = 0.0;
  bool all_local_positive = false;
  bool soundness_violation = false;
};

CheckOutcome check_bundle(const TasksBundle& bundle, const Trajectory& global);
std::string check_outcome_to_json(const CheckOutcome& outcome);

}  // namespace stldec
