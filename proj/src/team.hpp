#pragma once

#include <Eigen/Dense>
#include <map>
#include <vector>

#include "predicate.hpp"

namespace stldec {

struct AgentSpec {
  int id = 0;
  int dim = 0;
};

/// Disjoint cover of the agent set by sub-teams. Agents are kept in ascending
/// id order, which fixes the stacked global coordinate layout; members inside
/// a team are likewise ordered by ascending id, which fixes the permutation
/// between the global vector and the stacked team vectors.
class TeamPartition {
 public:
  TeamPartition(std::vector<AgentSpec> agents, std::vector<std::vector<int>> teams);

  int agent_count() const { return static_cast<int>(agents_.size()); }
  int team_count() const { return static_cast<int>(teams_.size()); }
  int global_dim() const { return global_dim_; }
  int team_dim(int team) const;

  const std::vector<AgentSpec>& agents() const { return agents_; }
  const std::vector<int>& team_members(int team) const;

  const AgentSpec& agent(int agent_id) const;
  int team_of_agent(int agent_id) const;

  /// Offset of the agent's block in the global vector.
  int global_offset(int agent_id) const;
  /// Offset of the agent's block inside its team vector.
  int local_offset(int agent_id) const;

  int global_index(const GlobalCoord& c) const;
  int local_index(const GlobalCoord& c) const;

 private:
  std::vector<AgentSpec> agents_;
  std::vector<std::vector<int>> teams_;
  std::map<int, int> agent_pos_;    // id -> index into agents_
  std::map<int, int> agent_team_;   // id -> team index
  std::vector<int> global_offset_;  // by agent position
  std::map<int, int> local_offset_; // id -> offset inside team vector
  std::vector<int> team_dim_;
  int global_dim_ = 0;
};

/// 0/1 matrix with unit row sums, stored as the source column of each row.
/// Square instances with unit column sums are permutation matrices.
class SelectionMatrix {
 public:
  SelectionMatrix(int rows, int cols, std::vector<int> row_to_col);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int col_of_row(int r) const { return row_to_col_.at(static_cast<size_t>(r)); }
  const std::vector<int>& mapping() const { return row_to_col_; }

  bool is_permutation() const;

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  /// x[col_of_row(r)] = y[r]; untouched entries keep their value.
  void scatter(const Eigen::VectorXd& y, Eigen::VectorXd& x) const;

  Eigen::MatrixXd dense() const;

 private:
  int rows_;
  int cols_;
  std::vector<int> row_to_col_;
};

/// E_l with z_l = E_l x: extracts team coordinates in ascending agent order.
SelectionMatrix selection_for_team(const TeamPartition& p, int team);

/// A with x = A z for z the stacked team vectors; A * stack(E_l) = identity.
SelectionMatrix global_permutation(const TeamPartition& p);

/// Per-team slice of a predicate footprint.
struct TeamFootprint {
  int team = 0;
  SelectionMatrix selector;        // d x n_l, rows in ascending local index
  std::vector<int> local_indices;  // the index set J (ascending)
};

/// Split of a footprint across the teams that touch it. `position_team` and
/// `position_row` map each footprint position j to (index into teams,
/// row within that team's selector), so footprint-ordered vectors can be
/// reassembled from per-team pieces.
struct FootprintSplit {
  std::vector<TeamFootprint> teams;  // ascending team index; all have d >= 1
  std::vector<int> position_team;
  std::vector<int> position_row;

  std::vector<int> involved_teams() const;
  int total_width() const { return static_cast<int>(position_team.size()); }
};

FootprintSplit footprint_selection(const PredicateFunction& pred,
                                   const TeamPartition& p);

}  // namespace stldec
