#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "convex_solver.hpp"
#include "decompose.hpp"
#include "formula.hpp"
#include "synthesis.hpp"
#include "team.hpp"

namespace stldec {

enum class InitialStateMode { Origin, Auto, Given };

struct AgentConfig {
  int id = 0;
  int dim = 0;
  Eigen::MatrixXd dynamics;
  double state_bound = 1.0;
  double input_bound = 1.0;
  InitialStateMode initial_mode = InitialStateMode::Origin;
  Eigen::VectorXd initial_state;  // Given mode only
};

/// Parsed and validated scenario: agents, partition, named predicates, the
/// global formula (untils already rewritten), horizon/grid, timing policy and
/// solver settings.
struct Scenario {
  std::vector<AgentConfig> agents;
  std::optional<TeamPartition> partition;
  std::map<std::string, PredicateFunction> predicates;

  std::string formula_text;
  StlFormula::Ptr formula_raw;  // as written, may contain until terms
  StlFormula::Ptr formula;      // fragment-valid
  std::vector<TemporalConjunct> conjuncts;

  double horizon = 0.0;
  double dt = 0.1;
  TimingMode timing_mode = TimingMode::PointEventually;
  std::map<int, TimingChoice> timing_overrides;  // post-rewrite conjunct index
  SolverConfig solver;
  double margin = 1e-3;

  const TeamPartition& team_partition() const { return *partition; }
  const AgentConfig& agent_config(int agent_id) const;

  /// Per-team axis-aligned state domains: the box inscribed in each agent's
  /// Euclidean norm ball, stacked in team order.
  std::vector<TeamDomain> team_domains() const;

  /// Effective predicate for a conjunct, with negation folded in.
  PredicateFunction conjunct_predicate(const TemporalConjunct& c) const;
};

/// Strict parsing: unknown keys anywhere are rejected.
Scenario load_scenario_json(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);

}  // namespace stldec
