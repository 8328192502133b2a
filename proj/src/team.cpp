#include "team.hpp"

#include <algorithm>
#include <set>

namespace stldec {

TeamPartition::TeamPartition(std::vector<AgentSpec> agents,
                             std::vector<std::vector<int>> teams)
    : agents_(std::move(agents)), teams_(std::move(teams)) {
  if (agents_.empty()) throw InputError("partition requires at least one agent");
  if (teams_.empty()) throw InputError("partition requires at least one team");

  for (size_t i = 0; i < agents_.size(); ++i) {
    const AgentSpec& a = agents_[i];
    if (a.dim < 1) throw InputError("agent state dimension must be >= 1");
    if (i > 0 && agents_[i - 1].id >= a.id)
      throw InputError("agents must be listed in strictly ascending id order");
    agent_pos_[a.id] = static_cast<int>(i);
    global_offset_.push_back(global_dim_);
    global_dim_ += a.dim;
  }

  std::set<int> seen;
  for (size_t l = 0; l < teams_.size(); ++l) {
    auto& members = teams_[l];
    if (members.empty())
      throw InputError("team " + std::to_string(l) + " is empty");
    std::sort(members.begin(), members.end());
    int dim = 0;
    for (int id : members) {
      if (!agent_pos_.count(id))
        throw InputError("team member " + std::to_string(id) + " is not a declared agent");
      if (!seen.insert(id).second)
        throw InputError("agent " + std::to_string(id) + " appears in more than one team");
      agent_team_[id] = static_cast<int>(l);
      local_offset_[id] = dim;
      dim += agents_[static_cast<size_t>(agent_pos_[id])].dim;
    }
    team_dim_.push_back(dim);
  }
  if (seen.size() != agents_.size())
    throw InputError("teams must cover every agent");
}

int TeamPartition::team_dim(int team) const {
  if (team < 0 || team >= team_count())
    throw InputError("team index " + std::to_string(team) + " out of range");
  return team_dim_[static_cast<size_t>(team)];
}

const std::vector<int>& TeamPartition::team_members(int team) const {
  if (team < 0 || team >= team_count())
    throw InputError("team index " + std::to_string(team) + " out of range");
  return teams_[static_cast<size_t>(team)];
}

const AgentSpec& TeamPartition::agent(int agent_id) const {
  auto it = agent_pos_.find(agent_id);
  if (it == agent_pos_.end())
    throw InputError("unknown agent id " + std::to_string(agent_id));
  return agents_[static_cast<size_t>(it->second)];
}

int TeamPartition::team_of_agent(int agent_id) const {
  auto it = agent_team_.find(agent_id);
  if (it == agent_team_.end())
    throw InputError("unknown agent id " + std::to_string(agent_id));
  return it->second;
}

int TeamPartition::global_offset(int agent_id) const {
  auto it = agent_pos_.find(agent_id);
  if (it == agent_pos_.end())
    throw InputError("unknown agent id " + std::to_string(agent_id));
  return global_offset_[static_cast<size_t>(it->second)];
}

int TeamPartition::local_offset(int agent_id) const {
  auto it = local_offset_.find(agent_id);
  if (it == local_offset_.end())
    throw InputError("unknown agent id " + std::to_string(agent_id));
  return it->second;
}

int TeamPartition::global_index(const GlobalCoord& c) const {
  const AgentSpec& a = agent(c.agent_id);
  if (c.component < 0 || c.component >= a.dim)
    throw InputError("footprint coordinate out of range: agent " +
                     std::to_string(c.agent_id) + " component " +
                     std::to_string(c.component));
  return global_offset(c.agent_id) + c.component;
}

int TeamPartition::local_index(const GlobalCoord& c) const {
  const AgentSpec& a = agent(c.agent_id);
  if (c.component < 0 || c.component >= a.dim)
    throw InputError("footprint coordinate out of range: agent " +
                     std::to_string(c.agent_id) + " component " +
                     std::to_string(c.component));
  return local_offset(c.agent_id) + c.component;
}

SelectionMatrix::SelectionMatrix(int rows, int cols, std::vector<int> row_to_col)
    : rows_(rows), cols_(cols), row_to_col_(std::move(row_to_col)) {
  if (rows_ < 0 || cols_ < 0 || static_cast<int>(row_to_col_.size()) != rows_)
    throw InputError("selection matrix shape mismatch");
  for (int c : row_to_col_)
    if (c < 0 || c >= cols_)
      throw InputError("selection matrix column index out of range");
}

bool SelectionMatrix::is_permutation() const {
  if (rows_ != cols_) return false;
  std::vector<char> hit(static_cast<size_t>(cols_), 0);
  for (int c : row_to_col_) {
    if (hit[static_cast<size_t>(c)]) return false;
    hit[static_cast<size_t>(c)] = 1;
  }
  return true;
}

Eigen::VectorXd SelectionMatrix::apply(const Eigen::VectorXd& x) const {
  if (x.size() != cols_)
    throw EvalError("selection applied to vector of wrong dimension");
  Eigen::VectorXd y(rows_);
  for (int r = 0; r < rows_; ++r) y[r] = x[row_to_col_[static_cast<size_t>(r)]];
  return y;
}

void SelectionMatrix::scatter(const Eigen::VectorXd& y, Eigen::VectorXd& x) const {
  if (y.size() != rows_ || x.size() != cols_)
    throw EvalError("scatter dimension mismatch");
  for (int r = 0; r < rows_; ++r) x[row_to_col_[static_cast<size_t>(r)]] = y[r];
}

Eigen::MatrixXd SelectionMatrix::dense() const {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(rows_, cols_);
  for (int r = 0; r < rows_; ++r) m(r, row_to_col_[static_cast<size_t>(r)]) = 1.0;
  return m;
}

SelectionMatrix selection_for_team(const TeamPartition& p, int team) {
  std::vector<int> map;
  map.reserve(static_cast<size_t>(p.team_dim(team)));
  for (int id : p.team_members(team)) {
    int off = p.global_offset(id);
    for (int c = 0; c < p.agent(id).dim; ++c) map.push_back(off + c);
  }
  return SelectionMatrix(p.team_dim(team), p.global_dim(), std::move(map));
}

SelectionMatrix global_permutation(const TeamPartition& p) {
  const int n = p.global_dim();
  std::vector<int> pos_in_z(static_cast<size_t>(n), -1);
  int cursor = 0;
  for (int l = 0; l < p.team_count(); ++l) {
    for (int id : p.team_members(l)) {
      int off = p.global_offset(id);
      for (int c = 0; c < p.agent(id).dim; ++c)
        pos_in_z[static_cast<size_t>(off + c)] = cursor++;
    }
  }
  return SelectionMatrix(n, n, std::move(pos_in_z));
}

FootprintSplit footprint_selection(const PredicateFunction& pred,
                                   const TeamPartition& p) {
  struct PerTeam {
    std::vector<int> local;
    std::vector<int> positions;
  };
  std::map<int, PerTeam> by_team;
  const auto& fp = pred.footprint();
  for (size_t j = 0; j < fp.size(); ++j) {
    int team = p.team_of_agent(fp[j].agent_id);
    PerTeam& t = by_team[team];
    t.local.push_back(p.local_index(fp[j]));
    t.positions.push_back(static_cast<int>(j));
  }

  FootprintSplit split;
  split.position_team.assign(fp.size(), -1);
  split.position_row.assign(fp.size(), -1);
  for (auto& [team, entry] : by_team) {
    // Local indices arrive already ascending: footprint order is global order
    // and agents inside a team keep their relative order.
    TeamFootprint tf{team,
                     SelectionMatrix(static_cast<int>(entry.local.size()),
                                     p.team_dim(team), entry.local),
                     entry.local};
    int slot = static_cast<int>(split.teams.size());
    for (size_t r = 0; r < entry.positions.size(); ++r) {
      split.position_team[static_cast<size_t>(entry.positions[r])] = slot;
      split.position_row[static_cast<size_t>(entry.positions[r])] =
          static_cast<int>(r);
    }
    split.teams.push_back(std::move(tf));
  }
  return split;
}

std::vector<int> FootprintSplit::involved_teams() const {
  std::vector<int> out;
  out.reserve(teams.size());
  for (const auto& t : teams) out.push_back(t.team);
  return out;
}

}  // namespace stldec
