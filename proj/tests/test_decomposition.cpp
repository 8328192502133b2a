#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "decompose.hpp"

using namespace stldec;

namespace {

std::vector<TeamDomain> cube_domains(const TeamPartition& p, double half) {
  std::vector<TeamDomain> out;
  for (int l = 0; l < p.team_count(); ++l) {
    TeamDomain d;
    d.lower = Eigen::VectorXd::Constant(p.team_dim(l), -half);
    d.upper = Eigen::VectorXd::Constant(p.team_dim(l), half);
    out.push_back(std::move(d));
  }
  return out;
}

// h(y) = 0.2 - |y|^2 over one team of one 2-d agent.
DecompositionProblem single_team_instance() {
  static TeamPartition p({{1, 2}}, {{1}});
  PredicateFunction pred = PredicateFunction::concave_quadratic(
      0.2, Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2),
      {{1, 0}, {1, 1}});
  return assemble_program(pred, p, cube_domains(p, 1.0));
}

// h(y1, y2) = 0.1 - |y1 - y2 - (0.3, 0.5)|^2 over two singleton teams.
DecompositionProblem two_team_instance() {
  static TeamPartition p({{1, 2}, {2, 2}}, {{1}, {2}});
  Eigen::MatrixXd w(4, 4);
  w << 1, 0, -1, 0,
       0, 1, 0, -1,
      -1, 0, 1, 0,
       0, -1, 0, 1;
  Eigen::VectorXd center(4);
  center << 0.3, 0.5, 0.0, 0.0;
  PredicateFunction pred = PredicateFunction::concave_quadratic(
      0.1, center, w, {{1, 0}, {1, 1}, {2, 0}, {2, 1}});
  return assemble_program(pred, p, cube_domains(p, 1.0 / std::sqrt(2.0)));
}

Eigen::VectorXd footprint_point(const DecompositionProblem& prob,
                                const std::vector<Eigen::VectorXd>& team_points) {
  const int d = prob.split.total_width();
  Eigen::VectorXd y(d);
  for (int j = 0; j < d; ++j) {
    int slot = prob.split.position_team[static_cast<size_t>(j)];
    int row = prob.split.position_row[static_cast<size_t>(j)];
    int eta = prob.split.teams[static_cast<size_t>(slot)].local_indices[static_cast<size_t>(row)];
    y[j] = team_points[static_cast<size_t>(slot)][eta];
  }
  return y;
}

}  // namespace

TEST_CASE("vertex set enumerates hypercube corners") {
  Eigen::VectorXd c2 = Eigen::VectorXd::Zero(2);
  auto corners = vertex_set(c2, 1.0, {0, 1});
  REQUIRE(corners.size() == 4);
  // lexicographic sign order, minus first
  CHECK(corners[0] == Eigen::Vector2d(-1, -1));
  CHECK(corners[1] == Eigen::Vector2d(-1, 1));
  CHECK(corners[2] == Eigen::Vector2d(1, -1));
  CHECK(corners[3] == Eigen::Vector2d(1, 1));

  Eigen::VectorXd c1(1);
  c1 << 0.3;
  auto pair = vertex_set(c1, 0.2, {0});
  REQUIRE(pair.size() == 2);
  CHECK(pair[0][0] == doctest::Approx(0.1));
  CHECK(pair[1][0] == doctest::Approx(0.5));

  // degenerate cube: all corners collapse onto the center
  auto collapsed = vertex_set(c2, 0.0, {0, 1});
  REQUIRE(collapsed.size() == 4);
  for (const auto& v : collapsed) CHECK(v == c2);

  CHECK_THROWS_AS(vertex_set(c2, -0.1, {0, 1}), InputError);

  // untouched coordinates copy the center
  Eigen::VectorXd c3(3);
  c3 << 5.0, 6.0, 7.0;
  auto partial = vertex_set(c3, 1.0, {1});
  REQUIRE(partial.size() == 2);
  CHECK(partial[0] == Eigen::Vector3d(5.0, 5.0, 7.0));
  CHECK(partial[1] == Eigen::Vector3d(5.0, 7.0, 7.0));
}

TEST_CASE("assembled programs have the advertised shape") {
  DecompositionProblem two = two_team_instance();
  CHECK(two.program.var_count == 6);  // two 2-d centers + two radii
  CHECK(two.vertex_constraint_count == 16);
  CHECK(two.program.constraints.size() == 16 + 8);  // + c +- r domain rows

  TeamPartition p1({{1, 1}}, {{1}});
  PredicateFunction narrow = PredicateFunction::affine(
      Eigen::VectorXd::Ones(1), 0.0, {{1, 0}});
  DecompositionProblem one = assemble_program(narrow, p1, cube_domains(p1, 1.0));
  CHECK(one.program.var_count == 2);
  CHECK(one.vertex_constraint_count == 2);
}

TEST_CASE("corner constraint count is exactly 2^d") {
  for (int d = 1; d <= 6; ++d) {
    TeamPartition p({{1, d}}, {{1}});
    std::vector<GlobalCoord> fp;
    for (int i = 0; i < d; ++i) fp.push_back({1, i});
    PredicateFunction pred =
        PredicateFunction::affine(Eigen::VectorXd::Ones(d), 1.0, fp);
    DecompositionProblem prob = assemble_program(pred, p, cube_domains(p, 1.0));
    CHECK(prob.vertex_constraint_count == (1 << d));
    // enumeration: count labels starting with "corner"
    int corners = 0;
    for (const auto& c : prob.program.constraints)
      if (c.label.rfind("corner", 0) == 0) ++corners;
    CHECK(corners == (1 << d));
  }
}

TEST_CASE("symmetric single-team optimum") {
  DecompositionProblem prob = single_team_instance();
  DecompositionResult res = solve_decomposition(prob);
  CHECK(res.status == SolveStatus::Optimal);
  CHECK(res.objective == doctest::Approx(std::sqrt(0.1)).epsilon(1e-3));
  REQUIRE(res.boxes.size() == 1);
  CHECK(res.boxes[0].box.radius == doctest::Approx(std::sqrt(0.1)).epsilon(1e-2));
  CHECK(res.boxes[0].box.center[0] == doctest::Approx(0.0).epsilon(1e-2));
  CHECK(res.boxes[0].box.center[1] == doctest::Approx(0.0).epsilon(1e-2));

  // the grid oracle confirms the analytic value; the solver may sit below
  // the near-exact oracle by its own optimality tolerance
  DecompositionResult oracle = grid_oracle(prob, 11);
  CHECK(res.objective >=
        oracle.objective - std::max(oracle.grid_step, SolverConfig{}.eps_opt));
  CHECK(res.objective <= oracle.objective + 1e-3);
}

TEST_CASE("two-team optimum splits the level set") {
  DecompositionProblem prob = two_team_instance();
  DecompositionResult res = solve_decomposition(prob);
  CHECK(res.status == SolveStatus::Optimal);
  CHECK(res.objective == doctest::Approx(std::sqrt(0.05)).epsilon(1e-3));
  REQUIRE(res.boxes.size() == 2);
  // centers relate by the offset (0.3, 0.5) on the footprint coordinates
  const Eigen::VectorXd& c1 = res.boxes[0].box.center;
  const Eigen::VectorXd& c2 = res.boxes[1].box.center;
  CHECK(c1[0] - c2[0] == doctest::Approx(0.3).epsilon(5e-2));
  CHECK(c1[1] - c2[1] == doctest::Approx(0.5).epsilon(5e-2));
}

TEST_CASE("empty level set is infeasible") {
  TeamPartition p({{1, 1}}, {{1}});
  PredicateFunction never = PredicateFunction::concave_quadratic(
      -1.0, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Zero(1, 1), {{1, 0}});
  DecompositionProblem prob = assemble_program(never, p, cube_domains(p, 1.0));
  CHECK_THROWS_AS(solve_decomposition(prob), InfeasibleError);
  CHECK_THROWS_AS(grid_oracle(prob, 9), InfeasibleError);
}

TEST_CASE("grid oracle single pass lands within one grid step") {
  DecompositionProblem prob = single_team_instance();
  DecompositionResult oracle = grid_oracle(prob, 101, 1);
  CHECK(oracle.grid_step == doctest::Approx(2.0 / 100.0));
  CHECK(std::abs(oracle.objective - std::sqrt(0.1)) <= oracle.grid_step);
}

TEST_CASE("grid oracle on a 1-d affine predicate") {
  TeamPartition p({{1, 1}}, {{1}});
  PredicateFunction pred =
      PredicateFunction::affine(Eigen::VectorXd::Ones(1), 0.0, {{1, 0}});
  DecompositionProblem prob = assemble_program(pred, p, cube_domains(p, 1.0));
  DecompositionResult oracle = grid_oracle(prob, 11);
  // h >= 0 at the minus corner forces c >= r; the domain forces c + r <= 1
  CHECK(oracle.objective == doctest::Approx(0.5).epsilon(1e-2));
  CHECK(oracle.boxes[0].box.center[0] == doctest::Approx(0.5).epsilon(1e-2));
  DecompositionResult solver = solve_decomposition(prob);
  CHECK(solver.objective == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("grid oracle refuses too many variables") {
  TeamPartition p({{1, 6}}, {{1}});
  std::vector<GlobalCoord> fp;
  for (int i = 0; i < 6; ++i) fp.push_back({1, i});
  PredicateFunction pred =
      PredicateFunction::affine(Eigen::VectorXd::Ones(6), 1.0, fp);
  DecompositionProblem prob = assemble_program(pred, p, cube_domains(p, 1.0));
  CHECK(prob.program.var_count == 7);
  CHECK_THROWS_AS(grid_oracle(prob, 9), InputError);
}

TEST_CASE("box membership certifies the global predicate") {
  std::mt19937_64 rng(17);
  for (DecompositionProblem prob : {single_team_instance(), two_team_instance()}) {
    DecompositionResult res = solve_decomposition(prob);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int sample = 0; sample < 10000; ++sample) {
      std::vector<Eigen::VectorXd> points;
      for (const TeamBox& tb : res.boxes) {
        Eigen::VectorXd z = tb.box.center;
        for (int eta : tb.box.indices) z[eta] += u(rng) * tb.box.radius;
        points.push_back(std::move(z));
      }
      double h = prob.predicate.value(footprint_point(prob, points));
      CHECK(h >= -1e-8);
    }
  }
}

TEST_CASE("shrinking a radius preserves feasibility") {
  DecompositionProblem prob = two_team_instance();
  DecompositionResult res = solve_decomposition(prob);
  for (double shrink : {0.99, 0.5, 0.1, 0.0}) {
    for (unsigned long mask = 0;
         mask < (1ul << prob.split.total_width()); ++mask) {
      std::vector<Eigen::VectorXd> corners;
      for (size_t slot = 0; slot < res.boxes.size(); ++slot) {
        const HypercubePredicate& box = res.boxes[slot].box;
        Eigen::VectorXd z = box.center;
        // apply this slot's share of the global sign mask
        for (size_t row = 0; row < box.indices.size(); ++row) {
          int j = -1;
          for (size_t pos = 0; pos < prob.split.position_team.size(); ++pos)
            if (prob.split.position_team[pos] == static_cast<int>(slot) &&
                prob.split.position_row[pos] == static_cast<int>(row))
              j = static_cast<int>(pos);
          bool plus = (mask >> (prob.split.total_width() - 1 - j)) & 1ul;
          z[box.indices[row]] += (plus ? 1.0 : -1.0) * box.radius * shrink;
        }
        corners.push_back(std::move(z));
      }
      CHECK(prob.predicate.value(footprint_point(prob, corners)) >= -1e-8);
    }
  }
}

TEST_CASE("solver tracks the oracle on random small instances") {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 5; ++trial) {
    int d = std::uniform_int_distribution<int>(1, 2)(rng);
    TeamPartition p({{1, d}}, {{1}});
    std::vector<GlobalCoord> fp;
    for (int i = 0; i < d; ++i) fp.push_back({1, i});
    Eigen::VectorXd center(d);
    for (int i = 0; i < d; ++i)
      center[i] = std::uniform_real_distribution<double>(-0.4, 0.4)(rng);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i)
      w(i, i) = std::uniform_real_distribution<double>(0.4, 1.5)(rng);
    PredicateFunction pred = PredicateFunction::concave_quadratic(
        std::uniform_real_distribution<double>(0.1, 0.4)(rng), center, w, fp);
    DecompositionProblem prob = assemble_program(pred, p, cube_domains(p, 1.0));
    DecompositionResult solver = solve_decomposition(prob);
    DecompositionResult oracle = grid_oracle(prob, 9);
    CAPTURE(trial);
    CHECK(solver.objective >=
          oracle.objective - std::max(oracle.grid_step, SolverConfig{}.eps_opt));
    CHECK(solver.objective <= oracle.objective + 1e-3);
  }
}

TEST_CASE("degenerate optimum is flagged") {
  // level set touches a single point: h(y) = 0 - y^2 forces r = 0
  TeamPartition p({{1, 1}}, {{1}});
  PredicateFunction point = PredicateFunction::concave_quadratic(
      0.0, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), {{1, 0}});
  DecompositionProblem prob = assemble_program(point, p, cube_domains(p, 1.0));
  DecompositionResult res = solve_decomposition(prob);
  CHECK(res.degenerate);
  CHECK(res.objective <= 1e-4);
}

TEST_CASE("hypercube predicate evaluation") {
  HypercubePredicate box;
  box.center = Eigen::VectorXd::Zero(3);
  box.center[2] = 9.0;  // outside the index set, must not matter
  box.radius = 0.5;
  box.indices = {0, 1};
  Eigen::VectorXd z(3);
  z << 0.2, -0.3, -100.0;
  CHECK(box.value(z) == doctest::Approx(0.2));
  z << 0.7, 0.0, 0.0;
  CHECK(box.value(z) == doctest::Approx(-0.2));
  CHECK_THROWS_AS(box.value(Eigen::VectorXd::Zero(2)), EvalError);
}
