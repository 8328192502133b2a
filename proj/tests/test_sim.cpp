#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "robustness.hpp"
#include "scenario.hpp"
#include "sim.hpp"

using namespace stldec;

namespace {

AgentConfig basic_agent(int id, double input_bound = 5.0) {
  AgentConfig a;
  a.id = id;
  a.dim = 2;
  a.dynamics = Eigen::MatrixXd::Zero(2, 2);
  a.dynamics << -0.5, 0.0, 1.0, -1.0;
  a.state_bound = 1.0;
  a.input_bound = input_bound;
  return a;
}

LocalConjunct box_task(bool always, double a, double b, double cx, double cy,
                       double radius, int source, const std::string& name) {
  LocalConjunct c;
  c.is_always = always;
  c.interval = TimeInterval(a, b);
  c.predicate.center = Eigen::VectorXd::Zero(2);
  c.predicate.center[0] = cx;
  c.predicate.center[1] = cy;
  c.predicate.radius = radius;
  c.predicate.indices = {0, 1};
  c.predicate.source_index = source;
  c.raw_radius = radius;
  c.source_index = source;
  c.name = name;
  return c;
}

}  // namespace

TEST_CASE("forward euler step by hand") {
  AgentConfig a = basic_agent(1);
  a.dynamics = -Eigen::MatrixXd::Identity(2, 2);
  a.initial_mode = InitialStateMode::Given;
  a.initial_state = Eigen::VectorXd(2);
  a.initial_state << 1.0, 0.0;
  std::vector<Eigen::VectorXd> inputs{Eigen::VectorXd::Zero(2)};
  SimulationOutput out = simulate_dynamics(a, inputs, 0.1);
  REQUIRE(out.trajectory.size() == 2);
  CHECK(out.trajectory.sample(1)[0] == doctest::Approx(0.9));
  CHECK(out.trajectory.sample(1)[1] == doctest::Approx(0.0));
  CHECK(out.state_bound_violations.empty());
}

TEST_CASE("the team dynamics matrices are stable") {
  Eigen::MatrixXd a1(2, 2), a2(2, 2);
  a1 << -0.5, 0.0, 1.0, -1.0;
  a2 << -1.0, -1.0, 0.0, -3.0;
  for (const auto& m : {a1, a2}) {
    Eigen::EigenSolver<Eigen::MatrixXd> eig(m);
    for (int i = 0; i < 2; ++i) CHECK(eig.eigenvalues()[i].real() < 0.0);
  }
}

TEST_CASE("input bound violations are rejected") {
  AgentConfig a = basic_agent(1, 1.0);
  Eigen::VectorXd too_big(2);
  too_big << 2.0, 0.0;
  CHECK_THROWS_AS(simulate_dynamics(a, {too_big}, 0.1), EvalError);
}

TEST_CASE("state bound excursions are flagged per sample") {
  AgentConfig a = basic_agent(1, 5.0);
  a.dynamics = Eigen::MatrixXd::Zero(2, 2);
  a.state_bound = 0.5;
  Eigen::VectorXd push(2);
  push << 5.0, 0.0;  // 0.5 displacement per step at dt = 0.1
  SimulationOutput out = simulate_dynamics(a, {push, push, push}, 0.1);
  // samples sit at 0, 0.5, 1.0, 1.5: the last two break the bound
  CHECK(out.state_bound_violations == std::vector<int>{2, 3});
}

TEST_CASE("euler rollout converges with the step") {
  AgentConfig a = basic_agent(1, 10.0);
  a.initial_mode = InitialStateMode::Given;
  a.initial_state = Eigen::VectorXd(2);
  a.initial_state << 0.5, -0.25;

  auto final_state = [&](double dt, int steps_per_unit) {
    std::vector<Eigen::VectorXd> inputs;
    for (int k = 0; k < steps_per_unit; ++k) {
      Eigen::VectorXd u(2);
      double t = k * dt;
      u << std::sin(t), std::cos(t);
      inputs.push_back(u);
    }
    SimulationOutput out = simulate_dynamics(a, inputs, dt);
    return out.trajectory.sample(out.trajectory.size() - 1);
  };

  Eigen::VectorXd coarse = final_state(0.1, 10);
  Eigen::VectorXd fine = final_state(0.01, 100);
  Eigen::VectorXd finer = final_state(0.001, 1000);
  double err_coarse = (coarse - finer).norm();
  double err_fine = (fine - finer).norm();
  CHECK(err_fine < err_coarse);
  // first-order integrator: error shrinks roughly linearly in dt
  CHECK(err_coarse / err_fine > 5.0);
}

TEST_CASE("planner holds a box around the start point") {
  LocalTaskSet tasks;
  tasks.team = 0;
  tasks.conjuncts.push_back(box_task(true, 0.0, 1.0, 0.0, 0.0, 0.3, 0, "hold"));
  TeamPlan plan = plan_team_trajectory(tasks, {basic_agent(1)}, 2.0, 0.1);
  REQUIRE(plan.feasible);
  PredicateTable table = tasks.bindings(2);
  CHECK(robustness(*tasks.formula(), table, *plan.trajectory, 0.0) > 0.0);
  // stays near the box center the whole window
  for (int k = 0; k <= 10; ++k)
    CHECK(plan.trajectory->sample(k).norm() <= 0.3);
}

TEST_CASE("unreachable deadline is reported infeasible") {
  LocalTaskSet tasks;
  tasks.team = 0;
  // box 0.6 away but the input budget only allows ~0.05/s
  tasks.conjuncts.push_back(box_task(false, 0.5, 0.5, 0.6, 0.0, 0.05, 3, "far"));
  AgentConfig slow = basic_agent(1, 0.5);
  slow.dynamics = Eigen::MatrixXd::Zero(2, 2);  // no drift to help or hurt
  TeamPlan plan = plan_team_trajectory(tasks, {slow}, 2.0, 0.1);
  CHECK_FALSE(plan.feasible);
  CHECK(plan.violated_source == 3);
  CHECK(plan.failure.find("deadline") != std::string::npos);
}

TEST_CASE("initial state outside a t=0 box is infeasible") {
  LocalTaskSet tasks;
  tasks.team = 0;
  tasks.conjuncts.push_back(box_task(true, 0.0, 1.0, 0.5, 0.5, 0.1, 1, "pin"));
  AgentConfig a = basic_agent(1);
  a.initial_mode = InitialStateMode::Given;
  a.initial_state = Eigen::VectorXd::Zero(2);
  TeamPlan plan = plan_team_trajectory(tasks, {a}, 2.0, 0.1);
  CHECK_FALSE(plan.feasible);
  CHECK(plan.failure.find("initial state") != std::string::npos);

  // auto initial mode starts inside instead
  AgentConfig b = basic_agent(1);
  b.initial_mode = InitialStateMode::Auto;
  TeamPlan plan2 = plan_team_trajectory(tasks, {b}, 2.0, 0.1);
  CHECK(plan2.feasible);
}

TEST_CASE("two timed boxes are visited in order") {
  LocalTaskSet tasks;
  tasks.team = 0;
  tasks.conjuncts.push_back(box_task(false, 0.7, 0.7, 0.5, 0.0, 0.1, 0, "first"));
  tasks.conjuncts.push_back(box_task(false, 1.2, 1.2, -0.3, 0.4, 0.1, 1, "second"));
  TeamPlan plan = plan_team_trajectory(tasks, {basic_agent(1)}, 1.5, 0.01);
  REQUIRE(plan.feasible);
  PredicateTable table = tasks.bindings(2);
  for (const LocalConjunct& c : tasks.conjuncts) {
    auto atom = StlFormula::make_predicate(c.name);
    auto f = c.is_always ? StlFormula::make_always(c.interval, atom)
                         : StlFormula::make_eventually(c.interval, atom);
    CHECK(robustness(*f, table, *plan.trajectory, 0.0) > 0.0);
  }
}

TEST_CASE("conflicting boxes on shared coordinates are infeasible") {
  LocalTaskSet tasks;
  tasks.team = 0;
  tasks.conjuncts.push_back(box_task(true, 0.0, 1.0, 0.5, 0.0, 0.05, 0, "left"));
  tasks.conjuncts.push_back(box_task(true, 0.5, 1.5, -0.5, 0.0, 0.05, 1, "right"));
  TeamPlan plan = plan_team_trajectory(tasks, {basic_agent(1)}, 2.0, 0.1);
  CHECK_FALSE(plan.feasible);
  CHECK(plan.failure.find("conflicting") != std::string::npos);
}

TEST_CASE("planner success implies its tasks hold, over random instances") {
  std::mt19937_64 rng(41);
  int feasible_count = 0;
  for (int trial = 0; trial < 40; ++trial) {
    LocalTaskSet tasks;
    tasks.team = 0;
    int n_tasks = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int i = 0; i < n_tasks; ++i) {
      double a = std::uniform_real_distribution<double>(0.0, 6.0)(rng);
      double b = a + std::uniform_real_distribution<double>(0.0, 3.0)(rng);
      bool always = std::uniform_int_distribution<int>(0, 1)(rng) == 1;
      if (!always) b = a;
      double cx = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
      double cy = std::uniform_real_distribution<double>(-0.5, 0.5)(rng);
      double r = std::uniform_real_distribution<double>(0.05, 0.3)(rng);
      tasks.conjuncts.push_back(
          box_task(always, a, b, cx, cy, r, i, "t" + std::to_string(i)));
    }
    AgentConfig agent = basic_agent(1);
    agent.initial_mode = InitialStateMode::Auto;
    TeamPlan plan = plan_team_trajectory(tasks, {agent}, 10.0, 0.1);
    if (!plan.feasible) continue;
    ++feasible_count;
    PredicateTable table = tasks.bindings(2);
    CHECK(robustness(*tasks.formula(), table, *plan.trajectory, 0.0) > 0.0);
  }
  CHECK(feasible_count >= 10);
}

TEST_CASE("run_scenario end to end on a two-agent scenario") {
  const char* text = R"({
    "agents": [
      {"id": 1, "dim": 2, "dynamics": [[-0.5, 0.0], [1.0, -1.0]],
       "state_bound": 1.0, "input_bound": 5.0, "initial_state": "auto"},
      {"id": 2, "dim": 2, "dynamics": [[-0.5, 0.0], [1.0, -1.0]],
       "state_bound": 1.0, "input_bound": 5.0, "initial_state": "auto"}
    ],
    "teams": [[1], [2]],
    "predicates": {
      "close": {"family": "quadratic", "offset": 0.1,
                "center": [0.3, 0.5, 0.0, 0.0],
                "weight": [[1, 0, -1, 0], [0, 1, 0, -1], [-1, 0, 1, 0], [0, -1, 0, 1]],
                "footprint": [[1, 0], [1, 1], [2, 0], [2, 1]]}
    },
    "formula": "F[1,3] close",
    "horizon": 4.0,
    "dt": 0.1
  })";
  Scenario s = load_scenario_json(text);
  RobustnessReport report = run_scenario(s);
  REQUIRE(report.all_planned);
  CHECK(report.implication_premise);
  CHECK(report.global_robustness > 0.0);
  CHECK_FALSE(report.soundness_violation);
  CHECK(report.consistency.ok);
  REQUIRE(report.global_trajectory.has_value());
  CHECK(report.global_trajectory->dim() == 4);
  CHECK(report.teams.size() == 2);
  for (const auto& t : report.teams) CHECK(t.local_robustness > 0.0);
  // stitching: global sample holds the team samples through the partition
  SelectionMatrix e0 = selection_for_team(s.team_partition(), 0);
  CHECK(e0.apply(report.global_trajectory->sample(5)) ==
        report.team_trajectories[0]->sample(5));
}
