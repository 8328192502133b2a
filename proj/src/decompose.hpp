#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "convex_solver.hpp"
#include "team.hpp"

namespace stldec {

/// Axis-aligned box predicate over a team state:
///   h(z) = radius - max_{eta in J} |z(eta) - center(eta)|
/// Coordinates outside `indices` do not affect the value; their center
/// entries are fixed to the domain midpoint so serialized results are
/// deterministic.
struct HypercubePredicate {
  int team = 0;
  Eigen::VectorXd center;           // full team dimension
  double radius = 0.0;
  std::vector<int> indices;         // J, ascending
  int source_index = 0;             // global conjunct the box came from

  double value(const Eigen::VectorXd& z) const;
  /// All 2^|J| corner points; coordinates outside J copy the center.
  std::vector<Eigen::VectorXd> vertex_set() const;
};

/// Corner enumeration for arbitrary (c, r, J); signs run in lexicographic
/// order with - before +.
std::vector<Eigen::VectorXd> vertex_set(const Eigen::VectorXd& center, double radius,
                                        const std::vector<int>& indices);

/// Per-coordinate bounds of one team's state domain.
struct TeamDomain {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
};

/// The box-parameter program for one global predicate: decision variables are
/// per-team centers (footprint coordinates only) and radii; one concave
/// constraint per corner combination keeps the global predicate nonnegative
/// on every corner; affine constraints keep each box inside the domain.
struct DecompositionProblem {
  PredicateFunction predicate;
  FootprintSplit split;
  std::vector<TeamDomain> domains;     // parallel to split.teams
  int source_index = 0;

  ConvexProgram program;               // assembled; layout below
  int vertex_constraint_count = 0;     // 2^(sum of per-team widths)

  // Variable layout: teams in split order, per team the center coordinates
  // (ascending J) followed by that team's radius.
  int var_count() const { return program.var_count; }
  int center_var(int team_slot, int row) const;
  int radius_var(int team_slot) const;

  /// Footprint-ordered point for a given variable assignment and sign choice.
  Eigen::VectorXd corner(const Eigen::VectorXd& vars, unsigned long mask) const;

 private:
  friend DecompositionProblem assemble_program(const PredicateFunction&,
                                               const TeamPartition&,
                                               const std::vector<TeamDomain>&, int);
  std::vector<int> center_base_;  // per team slot
};

struct TeamBox {
  int team = 0;
  HypercubePredicate box;
};

struct DecompositionResult {
  std::vector<TeamBox> boxes;        // split order
  double objective = 0.0;            // sum of radii
  SolveStatus status = SolveStatus::Optimal;
  int outer_iterations = 0;
  int newton_steps = 0;
  double max_constraint_violation = 0.0;
  double kkt_residual = 0.0;
  bool degenerate = false;           // some radius at (numerical) zero
  std::string method = "barrier";
  double grid_step = 0.0;            // grid method only: final per-axis step
};

/// Builds the convex program for `pred` over the partition. `domains` holds
/// one entry per team of the partition (not just involved teams).
/// Throws InputError for a non-concave family or empty footprint.
DecompositionProblem assemble_program(const PredicateFunction& pred,
                                      const TeamPartition& partition,
                                      const std::vector<TeamDomain>& domains,
                                      int source_index = 0);

/// Solves the program with the interior-point engine. Throws InfeasibleError
/// when the zero level-set misses the domain.
DecompositionResult solve_decomposition(const DecompositionProblem& prob,
                                        const SolverConfig& cfg = {});

/// Brute-force reference: an exhaustive sweep over a uniform grid of the
/// decision variables, then pattern-search refinement (re-center on
/// improvement, shrink on stall) for up to `passes` sweeps in total.
/// Guarded to at most 6 variables. Throws InfeasibleError when no feasible
/// grid point exists.
DecompositionResult grid_oracle(const DecompositionProblem& prob, int resolution,
                                int passes = 80);

}  // namespace stldec
