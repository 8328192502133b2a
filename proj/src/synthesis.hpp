#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "decompose.hpp"
#include "formula.hpp"
#include "robustness.hpp"

namespace stldec {

enum class TimingMode { PointEventually, IntervalAlways };

const char* to_string(TimingMode m);

/// Per-conjunct timing override; absent fields fall back to the defaults
/// (midpoint instant, centered third subinterval, midpoint until split).
struct TimingChoice {
  std::optional<double> instant;
  std::optional<TimeInterval> subinterval;
  std::optional<double> until_instant;  // t* for rewriting an until conjunct
};

struct TimingPolicy {
  TimingMode mode = TimingMode::PointEventually;
  std::map<int, TimingChoice> overrides;  // keyed by global conjunct index
  /// When positive, chosen instants are snapped to this sample grid so every
  /// team evaluates the same sample.
  double snap_dt = 0.0;
};

/// One conjunct of a team's local task.
struct LocalConjunct {
  bool is_always = true;  // else eventually
  TimeInterval interval;
  HypercubePredicate predicate;  // radius already margin-adjusted
  double raw_radius = 0.0;       // solver radius before the margin
  int source_index = 0;
  std::string name;              // predicate name used in the formula text
};

struct LocalTaskSet {
  int team = 0;
  std::vector<LocalConjunct> conjuncts;

  std::string formula_text() const;
  StlFormula::Ptr formula() const;
  /// Bindings for evaluating the task set against the team trajectory.
  PredicateTable bindings(int team_dim) const;
};

struct SynthesisConfig {
  TimingPolicy policy;
  double margin = 1e-3;
};

/// Emits the per-team tasks for the decomposed conjuncts. Always-conjuncts
/// keep their interval under both modes; eventually-conjuncts become either
/// F[t,t] at a common instant or G over a common subinterval. Every team
/// involved in conjunct i receives the same timing.
/// Throws InputError for invalid timing and InfeasibleError when the margin
/// eats a whole radius.
std::vector<LocalTaskSet> synthesize(const std::vector<TemporalConjunct>& global,
                                     const std::vector<DecompositionResult>& results,
                                     const TeamPartition& partition,
                                     const SynthesisConfig& cfg);

struct ConsistencyReport {
  bool ok = true;
  std::vector<std::string> violations;
};

/// Structural guardrails: every (conjunct, involved team) pair appears exactly
/// once, eventually-timings agree across teams, margins are uniform.
ConsistencyReport cross_team_consistency_check(
    const std::vector<LocalTaskSet>& tasks,
    const std::vector<TemporalConjunct>& global,
    const std::vector<DecompositionResult>& results, double margin);

}  // namespace stldec
