#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "formula.hpp"

#include "support/brute_force.hpp"
#include "parser.hpp"
#include "robustness.hpp"
#include "trajectory.hpp"

using namespace stldec;

namespace {

Trajectory make_signal(double dt, const std::vector<double>& values) {
  std::vector<Eigen::VectorXd> samples;
  for (double v : values) {
    Eigen::VectorXd s(1);
    s[0] = v;
    samples.push_back(s);
  }
  return Trajectory(dt, 0.0, std::move(samples));
}

PredicateTable scalar_table() {
  PredicateTable t;
  t["pos"] = {1, [](const Eigen::VectorXd& y) { return y[0]; }};
  t["below_half"] = {1, [](const Eigen::VectorXd& y) { return 0.5 - y[0]; }};
  return t;
}


StlFormula::Ptr random_atom(std::mt19937_64& rng) {
  static const char* names[] = {"pos", "below_half"};
  bool negated = std::uniform_int_distribution<int>(0, 3)(rng) == 0;
  return StlFormula::make_predicate(
      names[std::uniform_int_distribution<int>(0, 1)(rng)], negated);
}

TimeInterval random_interval(std::mt19937_64& rng, double max_end) {
  std::uniform_real_distribution<double> u(0.0, max_end);
  double a = u(rng), b = u(rng);
  if (a > b) std::swap(a, b);
  return TimeInterval(a, b);
}

StlFormula::Ptr random_temporal(std::mt19937_64& rng, double budget, int depth) {
  TimeInterval iv = random_interval(rng, budget * 0.5);
  StlFormula::Ptr child =
      depth > 1 && std::uniform_int_distribution<int>(0, 2)(rng) == 0
          ? random_temporal(rng, budget - iv.b, depth - 1)
          : random_atom(rng);
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: return StlFormula::make_always(iv, child);
    case 1: return StlFormula::make_eventually(iv, child);
    default: return StlFormula::make_until(iv, random_atom(rng), child);
  }
}

StlFormula::Ptr random_formula(std::mt19937_64& rng, double horizon) {
  int terms = std::uniform_int_distribution<int>(1, 3)(rng);
  std::vector<StlFormula::Ptr> parts;
  for (int i = 0; i < terms; ++i) parts.push_back(random_temporal(rng, horizon, 2));
  if (parts.size() == 1) return parts[0];
  return StlFormula::make_conjunction(std::move(parts));
}

// Grammar-shaped only: temporal operators over atoms, conjunction of terms.
StlFormula::Ptr random_grammar_term(std::mt19937_64& rng) {
  TimeInterval iv = random_interval(rng, 8.0);
  switch (std::uniform_int_distribution<int>(0, 2)(rng)) {
    case 0: return StlFormula::make_always(iv, random_atom(rng));
    case 1: return StlFormula::make_eventually(iv, random_atom(rng));
    default: return StlFormula::make_until(iv, random_atom(rng), random_atom(rng));
  }
}

StlFormula::Ptr random_grammar_formula(std::mt19937_64& rng) {
  int terms = std::uniform_int_distribution<int>(1, 4)(rng);
  std::vector<StlFormula::Ptr> parts;
  for (int i = 0; i < terms; ++i) parts.push_back(random_grammar_term(rng));
  if (parts.size() == 1) return parts[0];
  return StlFormula::make_conjunction(std::move(parts));
}

Trajectory random_signal(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> value(-2.0, 2.0);
  int n = std::uniform_int_distribution<int>(21, 61)(rng);
  double dt = std::uniform_real_distribution<double>(0.1, 0.3)(rng);
  std::vector<double> vals;
  for (int k = 0; k < n; ++k) vals.push_back(value(rng));
  return make_signal(dt, vals);
}

// Random walk: smoother than white noise, so G-windows hold often enough for
// implication-style properties to actually fire.
Trajectory random_walk_signal(std::mt19937_64& rng) {
  int n = std::uniform_int_distribution<int>(31, 81)(rng);
  double dt = std::uniform_real_distribution<double>(0.1, 0.2)(rng);
  std::normal_distribution<double> step(0.0, 0.15);
  std::vector<double> vals{std::uniform_real_distribution<double>(-1.0, 1.0)(rng)};
  for (int k = 1; k < n; ++k) vals.push_back(vals.back() + step(rng));
  return make_signal(dt, vals);
}

}  // namespace

TEST_CASE("interval validation") {
  CHECK_NOTHROW(TimeInterval(0.0, 0.0));
  CHECK_NOTHROW(TimeInterval(1.5, 1.5));
  CHECK_THROWS_AS(TimeInterval(2.0, 1.0), InputError);
  CHECK_THROWS_AS(TimeInterval(-0.5, 1.0), InputError);
  CHECK_THROWS_AS(TimeInterval(0.0, std::numeric_limits<double>::infinity()), InputError);
}

TEST_CASE("parser builds the expected shapes") {
  auto f = parse_formula("G[0,2.1] near12");
  REQUIRE(f->kind == FormulaKind::Always);
  CHECK(f->interval.a == 0.0);
  CHECK(f->interval.b == 2.1);
  REQUIRE(f->children.size() == 1);
  CHECK(f->children[0]->kind == FormulaKind::Predicate);
  CHECK(f->children[0]->predicate == "near12");
  CHECK_FALSE(f->children[0]->negated);

  auto g = parse_formula("F[3,7] meet54");
  REQUIRE(g->kind == FormulaKind::Eventually);
  CHECK(g->interval.a == 3.0);
  CHECK(g->interval.b == 7.0);

  auto u = parse_formula("a U[2,4] b");
  REQUIRE(u->kind == FormulaKind::Until);
  CHECK(u->children[0]->predicate == "a");
  CHECK(u->children[1]->predicate == "b");

  auto conj = parse_formula("G[0,1] a and F[1,2] not b and c U[0,3] d");
  REQUIRE(conj->kind == FormulaKind::Conjunction);
  CHECK(conj->children.size() == 3);
  CHECK(conj->children[1]->children[0]->negated);
}

TEST_CASE("parser rejects bad input with positions") {
  CHECK_THROWS_WITH_AS(parse_formula("G[2,1] p"),
                       doctest::Contains("lower bound"), InputError);
  CHECK_THROWS_AS(parse_formula("G[-1,1] p"), InputError);
  CHECK_THROWS_AS(parse_formula("G[0,1]"), InputError);
  CHECK_THROWS_AS(parse_formula("p"), InputError);
  CHECK_THROWS_AS(parse_formula("G[0,1] p extra"), InputError);
  CHECK_THROWS_AS(parse_formula(""), InputError);
  CHECK_THROWS_AS(parse_formula("G[0,1] and"), InputError);

  std::set<std::string> known{"p"};
  CHECK_NOTHROW(parse_formula("G[0,1] p", known));
  CHECK_THROWS_WITH_AS(parse_formula("G[0,1] q", known),
                       doctest::Contains("unknown predicate"), InputError);
  try {
    parse_formula("G[0,1] a and\nF[2,1] b");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("2:") == 0);  // line 2
  }
}

TEST_CASE("print and parse round-trip") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 200; ++i) {
    auto f = random_grammar_formula(rng);
    auto g = parse_formula(to_text(*f));
    CAPTURE(to_text(*f));
    CHECK(structurally_equal(*f, *g));
  }
}

TEST_CASE("fragment validation") {
  auto mu = StlFormula::make_predicate("p");
  auto ok = StlFormula::make_conjunction(
      {StlFormula::make_always(TimeInterval(0, 1), mu)});
  CHECK(validate_fragment(*ok).ok);
  CHECK(validate_fragment(*StlFormula::make_always(TimeInterval(0, 1), mu)).ok);

  auto nested = StlFormula::make_always(
      TimeInterval(0, 1),
      StlFormula::make_conjunction({StlFormula::make_predicate("p"),
                                    StlFormula::make_predicate("q")}));
  auto r = validate_fragment(*nested);
  CHECK_FALSE(r.ok);
  CHECK(r.message.find("temporal operator") != std::string::npos);

  auto with_until = parse_formula("a U[0,2] b");
  auto r2 = validate_fragment(*with_until);
  CHECK_FALSE(r2.ok);
  CHECK(r2.message.find("until_rewrite") != std::string::npos);

  CHECK_FALSE(validate_fragment(*StlFormula::make_predicate("p")).ok);
}

TEST_CASE("until rewrite") {
  auto psi1 = StlFormula::make_predicate("a");
  auto psi2 = StlFormula::make_predicate("b");
  auto r = until_rewrite(psi1, psi2, TimeInterval(2, 4), 3.0);
  CHECK(structurally_equal(*r, *parse_formula("G[2,3] a and F[3,3] b")));

  auto boundary = until_rewrite(psi1, psi2, TimeInterval(2, 4), 2.0);
  CHECK(structurally_equal(*boundary, *parse_formula("G[2,2] a and F[2,2] b")));

  CHECK_THROWS_AS(until_rewrite(psi1, psi2, TimeInterval(2, 4), 5.0), InputError);
  CHECK_THROWS_AS(until_rewrite(psi1, psi2, TimeInterval(2, 4), 1.0), InputError);

  auto rewritten = rewrite_untils(parse_formula("G[0,1] a and b U[2,4] a"),
                                  [](int, const TimeInterval& iv) {
                                    return 0.5 * (iv.a + iv.b);
                                  });
  CHECK(structurally_equal(*rewritten,
                           *parse_formula("G[0,1] a and G[2,3] b and F[3,3] a")));
}

TEST_CASE("robustness on simple signals") {
  PredicateTable table = scalar_table();

  // constant signal x = 0.5
  Trajectory constant = make_signal(0.1, std::vector<double>(11, 0.5));
  auto g = parse_formula("G[0,1] pos");
  CHECK(robustness(*g, table, constant, 0.0) == 0.5);

  // ramp x(t) = t - 1 sampled at 0.1 on [0, 2]: F picks the end value 1.0
  std::vector<double> ramp;
  for (int k = 0; k <= 20; ++k) ramp.push_back(0.1 * k - 1.0);
  Trajectory ramp_traj = make_signal(0.1, ramp);
  auto f = parse_formula("F[0,2] pos");
  CHECK(robustness(*f, table, ramp_traj, 0.0) == doctest::Approx(1.0).epsilon(1e-12));

  // true has infinite robustness
  CHECK(std::isinf(robustness(*StlFormula::make_true(), table, constant, 0.0)));
}

TEST_CASE("robustness errors") {
  PredicateTable table = scalar_table();
  Trajectory x = make_signal(0.1, std::vector<double>(11, 1.0));  // covers [0, 1]
  CHECK_THROWS_WITH_AS(robustness(*parse_formula("G[0,2] pos"), table, x, 0.0),
                       doctest::Contains("horizon"), EvalError);
  CHECK_THROWS_AS(robustness(*parse_formula("F[0.5,1.5] pos"), table, x, 0.0),
                  EvalError);

  PredicateTable wrong;
  wrong["pos"] = {3, [](const Eigen::VectorXd& y) { return y[0]; }};
  CHECK_THROWS_WITH_AS(robustness(*parse_formula("G[0,1] pos"), wrong, x, 0.0),
                       doctest::Contains("dimension"), EvalError);
}

TEST_CASE("interval endpoints snap outward to enclosing samples") {
  PredicateTable table = scalar_table();
  // samples at 0, 0.1, ..., 1.0 with x = index
  std::vector<double> vals;
  for (int k = 0; k <= 10; ++k) vals.push_back(static_cast<double>(k));
  Trajectory x = make_signal(0.1, vals);
  // [0.25, 0.35] snaps to samples {2, 3, 4}: min = 2, max = 4
  CHECK(robustness(*parse_formula("G[0.25,0.35] pos"), table, x, 0.0) == 2.0);
  CHECK(robustness(*parse_formula("F[0.25,0.35] pos"), table, x, 0.0) == 4.0);
}

TEST_CASE("recursive evaluator equals brute force exactly") {
  std::mt19937_64 rng(123);
  PredicateTable table = scalar_table();
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    Trajectory x = random_signal(rng);
    auto f = random_formula(rng, x.end() * 0.9);
    stldec::testing::BruteForce oracle(table, x);
    double expect;
    try {
      expect = oracle.at(*f, 0.0);
    } catch (const EvalError&) {
      continue;  // formula reached past this signal's horizon
    }
    double got = robustness(*f, table, x, 0.0);
    CAPTURE(to_text(*f));
    CHECK(got == expect);  // bit-exact: same arithmetic, same order
    ++checked;
  }
  CHECK(checked >= 50);
}

TEST_CASE("negation duality and conjunction minimum") {
  std::mt19937_64 rng(77);
  PredicateTable table = scalar_table();
  for (int trial = 0; trial < 30; ++trial) {
    Trajectory x = random_signal(rng);
    auto mu = StlFormula::make_predicate("pos");
    auto not_mu = StlFormula::make_predicate("pos", true);
    double t = x.time_of(std::uniform_int_distribution<int>(0, x.size() - 1)(rng));
    CHECK(robustness(*not_mu, table, x, t) == -robustness(*mu, table, x, t));

    auto f1 = random_temporal(rng, x.end() * 0.4, 1);
    auto f2 = random_temporal(rng, x.end() * 0.4, 1);
    auto conj = StlFormula::make_conjunction({f1, f2});
    double lhs = robustness(*conj, table, x, 0.0);
    CHECK(lhs == std::min(robustness(*f1, table, x, 0.0),
                          robustness(*f2, table, x, 0.0)));
    CHECK(lhs <= robustness(*f1, table, x, 0.0));
  }
}

TEST_CASE("F/G duality on samples") {
  std::mt19937_64 rng(99);
  PredicateTable table = scalar_table();
  for (int trial = 0; trial < 30; ++trial) {
    Trajectory x = random_signal(rng);
    TimeInterval iv = random_interval(rng, x.end() * 0.8);
    auto ev = StlFormula::make_eventually(iv, StlFormula::make_predicate("pos"));
    auto alw_neg = StlFormula::make_always(iv, StlFormula::make_predicate("pos", true));
    CHECK(robustness(*ev, table, x, 0.0) == -robustness(*alw_neg, table, x, 0.0));
  }
}

TEST_CASE("until rewrite soundness on random signals") {
  std::mt19937_64 rng(2024);
  PredicateTable table = scalar_table();
  int positives = 0;
  for (int trial = 0; trial < 300; ++trial) {
    Trajectory x = random_walk_signal(rng);
    double a = std::uniform_real_distribution<double>(0.0, x.end() * 0.4)(rng);
    double b = a + std::uniform_real_distribution<double>(0.0, x.end() * 0.4)(rng);
    TimeInterval iv(a, b);
    auto left = random_atom(rng);
    auto right = random_atom(rng);
    auto until = StlFormula::make_until(iv, left, right);
    double t_star = std::uniform_real_distribution<double>(iv.a, iv.b)(rng);
    auto rewritten = until_rewrite(left, right, iv, t_star);
    double rho_rewritten = robustness(*rewritten, table, x, 0.0);
    if (rho_rewritten > 0.0) {
      ++positives;
      CHECK(robustness(*until, table, x, 0.0) > 0.0);
    }
  }
  CHECK(positives >= 50);  // the property must actually fire
}
