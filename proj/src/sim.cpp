#include "sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "log.hpp"
#include "robustness.hpp"

namespace stldec {

namespace {

constexpr double kGridSnap = 1e-9;

int grid_floor(double t, double dt) {
  return static_cast<int>(std::floor(t / dt + kGridSnap));
}

int grid_ceil(double t, double dt) {
  return static_cast<int>(std::ceil(t / dt - kGridSnap));
}

double spectral_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  return svd.singularValues()(0);
}

double now_seconds() {
  using clock = std::chrono::steady_clock;
  return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

}  // namespace

SimulationOutput simulate_dynamics(const AgentConfig& agent,
                                   const std::vector<Eigen::VectorXd>& inputs,
                                   double dt) {
  if (!(dt > 0.0)) throw InputError("dt must be positive");
  Eigen::VectorXd x = agent.initial_mode == InitialStateMode::Given
                          ? agent.initial_state
                          : Eigen::VectorXd::Zero(agent.dim);
  std::vector<Eigen::VectorXd> samples{x};
  std::vector<int> violations;
  if (x.norm() > agent.state_bound + 1e-9) violations.push_back(0);
  int k = 0;
  for (const Eigen::VectorXd& u : inputs) {
    if (u.size() != agent.dim)
      throw EvalError("input sample dimension mismatch for agent " +
                      std::to_string(agent.id));
    if (u.norm() > agent.input_bound + 1e-9)
      throw EvalError("input bound exceeded at step " + std::to_string(k) +
                      " for agent " + std::to_string(agent.id));
    x = x + dt * (agent.dynamics * x + u);
    ++k;
    if (x.norm() > agent.state_bound + 1e-9) violations.push_back(k);
    samples.push_back(x);
  }
  return {Trajectory(dt, 0.0, std::move(samples)), std::move(violations)};
}

std::optional<WindowGrid> task_windows(const LocalTaskSet& tasks, int dim,
                                       double horizon, double dt, WindowError* err) {
  const int samples = grid_ceil(horizon, dt) + 1;
  WindowGrid windows(static_cast<size_t>(samples),
                     std::vector<CoordinateWindow>(static_cast<size_t>(dim)));
  for (const LocalConjunct& c : tasks.conjuncts) {
    int lo = std::max(0, grid_floor(c.interval.a, dt));
    int hi = grid_ceil(c.interval.b, dt);
    if (hi >= samples) {
      if (err) {
        err->message = "horizon too short for conjunct " + c.name;
        err->source = c.source_index;
        err->time = c.interval.b;
      }
      return std::nullopt;
    }
    for (int k = lo; k <= hi; ++k) {
      for (int eta : c.predicate.indices) {
        CoordinateWindow& w = windows[static_cast<size_t>(k)][static_cast<size_t>(eta)];
        double blo = c.predicate.center[eta] - c.predicate.radius;
        double bhi = c.predicate.center[eta] + c.predicate.radius;
        if (blo > w.lo) { w.lo = blo; w.source = c.source_index; }
        if (bhi < w.hi) { w.hi = bhi; w.source = c.source_index; }
        if (w.empty()) {
          if (err) {
            err->message = "conflicting box requirements at t=" +
                           format_double(k * dt) + " on coordinate " +
                           std::to_string(eta);
            err->source = c.source_index;
            err->time = k * dt;
          }
          return std::nullopt;
        }
      }
    }
  }
  return windows;
}

TeamPlan plan_team_trajectory(const LocalTaskSet& tasks,
                              const std::vector<AgentConfig>& team_agents,
                              double horizon, double dt) {
  TeamPlan plan;
  int n = 0;
  for (const auto& a : team_agents) n += a.dim;
  const int samples = grid_ceil(horizon, dt) + 1;

  WindowError werr;
  auto maybe_windows = task_windows(tasks, n, horizon, dt, &werr);
  if (!maybe_windows) {
    plan.failure = werr.message;
    plan.violated_source = werr.source;
    plan.violated_time = werr.time;
    return plan;
  }
  const WindowGrid& windows = *maybe_windows;

  // Per-agent speed budget: what the input bound leaves after compensating
  // the drift term in the worst case.
  std::vector<double> agent_speed;
  std::vector<int> agent_offset;
  {
    int off = 0;
    for (const auto& a : team_agents) {
      double drift = spectral_norm(a.dynamics) * a.state_bound;
      double budget = std::max(a.input_bound - drift, 0.05 * a.input_bound);
      agent_speed.push_back(0.9 * budget * dt);
      agent_offset.push_back(off);
      off += a.dim;
    }
  }

  // Initial reference point.
  Eigen::VectorXd r0 = Eigen::VectorXd::Zero(n);
  {
    int off = 0;
    for (const auto& a : team_agents) {
      if (a.initial_mode == InitialStateMode::Given)
        r0.segment(off, a.dim) = a.initial_state;
      off += a.dim;
    }
  }
  for (int i = 0; i < n; ++i) {
    const CoordinateWindow& w = windows[0][static_cast<size_t>(i)];
    if (!w.constrained()) continue;
    bool given = false;
    for (size_t ai = 0; ai < team_agents.size(); ++ai) {
      int off = agent_offset[ai];
      if (i >= off && i < off + team_agents[ai].dim)
        given = team_agents[ai].initial_mode == InitialStateMode::Given;
    }
    if (given) {
      if (r0[i] < w.lo - 1e-12 || r0[i] > w.hi + 1e-12) {
        plan.failure = "initial state outside the box required at t=0";
        plan.violated_source = w.source;
        plan.violated_time = 0.0;
        return plan;
      }
    } else {
      r0[i] = w.mid();
    }
  }

  // Next constrained sample per coordinate, for steering ahead of deadlines.
  std::vector<std::vector<int>> next_active(static_cast<size_t>(samples + 1),
                                            std::vector<int>(static_cast<size_t>(n), -1));
  for (int k = samples - 1; k >= 0; --k)
    for (int i = 0; i < n; ++i)
      next_active[static_cast<size_t>(k)][static_cast<size_t>(i)] =
          windows[static_cast<size_t>(k)][static_cast<size_t>(i)].constrained()
              ? k
              : next_active[static_cast<size_t>(k) + 1][static_cast<size_t>(i)];

  // Reference sequence: greedy move toward the next (or current) window mid,
  // capped per agent.
  std::vector<Eigen::VectorXd> ref{r0};
  for (int k = 1; k < samples; ++k) {
    Eigen::VectorXd target = ref.back();
    for (int i = 0; i < n; ++i) {
      int ka = next_active[static_cast<size_t>(k)][static_cast<size_t>(i)];
      if (ka < 0) continue;
      const CoordinateWindow& w = windows[static_cast<size_t>(ka)][static_cast<size_t>(i)];
      target[i] = w.mid();
    }
    Eigen::VectorXd step = target - ref.back();
    for (size_t ai = 0; ai < team_agents.size(); ++ai) {
      auto block = step.segment(agent_offset[ai], team_agents[ai].dim);
      double len = block.norm();
      if (len > agent_speed[ai]) block *= agent_speed[ai] / len;
    }
    Eigen::VectorXd next = ref.back() + step;
    const auto& win = windows[static_cast<size_t>(k)];
    for (int i = 0; i < n; ++i) {
      const CoordinateWindow& w = win[static_cast<size_t>(i)];
      if (!w.constrained()) continue;
      if (next[i] < w.lo - 1e-12 || next[i] > w.hi + 1e-12) {
        plan.failure = "deadline unreachable under the speed bound at t=" +
                       format_double(k * dt) + " (conjunct source " +
                       std::to_string(w.source) + ")";
        plan.violated_source = w.source;
        plan.violated_time = k * dt;
        return plan;
      }
    }
    ref.push_back(std::move(next));
  }

  // Track the reference through the saturated dynamics.
  std::vector<Eigen::VectorXd> states{r0};
  Eigen::VectorXd x = r0;
  for (int k = 0; k + 1 < samples; ++k) {
    Eigen::VectorXd u(n);
    for (size_t ai = 0; ai < team_agents.size(); ++ai) {
      const AgentConfig& a = team_agents[ai];
      int off = agent_offset[ai];
      Eigen::VectorXd xa = x.segment(off, a.dim);
      Eigen::VectorXd ua = (ref[static_cast<size_t>(k) + 1].segment(off, a.dim) - xa) / dt -
                           a.dynamics * xa;
      double len = ua.norm();
      if (len > a.input_bound) ua *= a.input_bound / len;
      u.segment(off, a.dim) = ua;
    }
    Eigen::VectorXd xn(n);
    for (size_t ai = 0; ai < team_agents.size(); ++ai) {
      const AgentConfig& a = team_agents[ai];
      int off = agent_offset[ai];
      Eigen::VectorXd xa = x.segment(off, a.dim);
      xn.segment(off, a.dim) =
          xa + dt * (a.dynamics * xa + u.segment(off, a.dim));
    }
    x = std::move(xn);
    states.push_back(x);
  }

  Trajectory traj(dt, 0.0, std::move(states));

  // The plan is only accepted if it actually satisfies its own tasks.
  PredicateTable table = tasks.bindings(n);
  for (const LocalConjunct& c : tasks.conjuncts) {
    auto atom = StlFormula::make_predicate(c.name);
    auto f = c.is_always ? StlFormula::make_always(c.interval, atom)
                         : StlFormula::make_eventually(c.interval, atom);
    double rho = robustness(*f, table, traj, 0.0);
    if (!(rho > 0.0)) {
      plan.failure = "planned trajectory misses conjunct " + c.name +
                     " (robustness " + format_double(rho) + ")";
      plan.violated_source = c.source_index;
      return plan;
    }
  }

  plan.feasible = true;
  plan.trajectory = std::move(traj);
  return plan;
}

double RobustnessReport::min_local_robustness() const {
  double m = std::numeric_limits<double>::infinity();
  for (const TeamReport& t : teams)
    if (t.planned) m = std::min(m, t.local_robustness);
  return m;
}

RobustnessReport run_scenario(const Scenario& s, const RunOptions& opts) {
  RobustnessReport report;
  const TeamPartition& partition = s.team_partition();
  report.timing_mode = opts.timing_mode.value_or(s.timing_mode);
  report.margin = opts.margin.value_or(s.margin);

  // Decompose every global conjunct.
  double t0 = now_seconds();
  std::vector<TeamDomain> domains = s.team_domains();
  std::vector<DecompositionProblem> problems;
  for (size_t i = 0; i < s.conjuncts.size(); ++i) {
    PredicateFunction pred = s.conjunct_predicate(s.conjuncts[i]);
    problems.push_back(
        assemble_program(pred, partition, domains, static_cast<int>(i)));
    report.decompositions.push_back(solve_decomposition(problems.back(), s.solver));
  }
  report.decompose_seconds = now_seconds() - t0;

  if (opts.oracle_check) {
    for (size_t i = 0; i < problems.size(); ++i) {
      if (problems[i].program.var_count > 6) continue;
      OracleCheck oc;
      oc.conjunct = static_cast<int>(i);
      oc.solver_objective = report.decompositions[i].objective;
      DecompositionResult g = grid_oracle(problems[i], opts.oracle_resolution);
      oc.oracle_objective = g.objective;
      oc.grid_step = g.grid_step;
      oc.within_tolerance =
          oc.solver_objective >=
              oc.oracle_objective - std::max(oc.grid_step, s.solver.eps_opt) &&
          oc.solver_objective <= oc.oracle_objective + 1e-3;
      report.oracle_checks.push_back(oc);
    }
  }

  // Local task synthesis.
  SynthesisConfig syn;
  syn.policy.mode = report.timing_mode;
  syn.policy.overrides = s.timing_overrides;
  syn.policy.snap_dt = s.dt;
  syn.margin = report.margin;
  report.tasks = synthesize(s.conjuncts, report.decompositions, partition, syn);
  report.consistency = cross_team_consistency_check(report.tasks, s.conjuncts,
                                                    report.decompositions, syn.margin);

  // Plan per team.
  t0 = now_seconds();
  report.all_planned = true;
  for (int l = 0; l < partition.team_count(); ++l) {
    std::vector<AgentConfig> members;
    for (int id : partition.team_members(l)) members.push_back(s.agent_config(id));
    TeamPlan plan = plan_team_trajectory(report.tasks[static_cast<size_t>(l)],
                                         members, s.horizon, s.dt);
    TeamReport tr;
    tr.team = l;
    tr.planned = plan.feasible;
    tr.plan_failure = plan.failure;
    if (!plan.feasible) report.all_planned = false;
    report.team_trajectories.push_back(plan.trajectory);
    report.teams.push_back(std::move(tr));
  }
  report.plan_seconds = now_seconds() - t0;

  if (!report.all_planned) return report;

  // Evaluate local tasks on the team signals.
  t0 = now_seconds();
  bool premise = true;
  for (int l = 0; l < partition.team_count(); ++l) {
    TeamReport& tr = report.teams[static_cast<size_t>(l)];
    const LocalTaskSet& tasks = report.tasks[static_cast<size_t>(l)];
    const Trajectory& z = *report.team_trajectories[static_cast<size_t>(l)];
    PredicateTable table = tasks.bindings(partition.team_dim(l));
    if (tasks.conjuncts.empty()) {
      tr.local_robustness = std::numeric_limits<double>::infinity();
      continue;
    }
    tr.local_robustness = robustness(*tasks.formula(), table, z, 0.0);
    for (const LocalConjunct& c : tasks.conjuncts) {
      auto atom = StlFormula::make_predicate(c.name);
      auto f = c.is_always ? StlFormula::make_always(c.interval, atom)
                           : StlFormula::make_eventually(c.interval, atom);
      tr.conjunct_robustness.emplace_back(c.name, robustness(*f, table, z, 0.0));
    }
    if (!(tr.local_robustness > 0.0)) premise = false;
  }
  report.implication_premise = premise;

  // Stitch the global signal (x = A z) and evaluate the global formula.
  int samples = report.team_trajectories[0]->size();
  std::vector<Eigen::VectorXd> global(static_cast<size_t>(samples),
                                      Eigen::VectorXd::Zero(partition.global_dim()));
  for (int l = 0; l < partition.team_count(); ++l) {
    SelectionMatrix sel = selection_for_team(partition, l);
    const Trajectory& z = *report.team_trajectories[static_cast<size_t>(l)];
    for (int k = 0; k < samples; ++k)
      sel.scatter(z.sample(k), global[static_cast<size_t>(k)]);
  }
  report.global_trajectory = Trajectory(s.dt, 0.0, std::move(global));

  PredicateTable global_table;
  for (const auto& [name, pred] : s.predicates)
    global_table[name] = bind_global_predicate(pred, partition);
  report.global_robustness =
      robustness(*s.formula, global_table, *report.global_trajectory, 0.0);
  report.eval_seconds = now_seconds() - t0;

  report.soundness_violation = premise && !(report.global_robustness > 0.0);
  if (report.soundness_violation)
    log_error("soundness violation: all local tasks positive but global robustness = " +
              format_double(report.global_robustness));
  return report;
}

}  // namespace stldec
