#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "scenario.hpp"
#include "sim.hpp"

namespace stldec {

struct FuzzConfig {
  std::uint64_t seed = 42;
  int count = 100;
  double margin = 1e-3;
  int splines_per_scenario = 2;
  bool oracle_check = false;
};

struct FuzzStats {
  int attempted = 0;
  int decomposed = 0;
  int planned = 0;
  int premise_held = 0;      // planned runs with every local robustness > 0
  int global_positive = 0;   // of those, global robustness > 0
  int spline_accepted = 0;   // planner-free signals passing the local filter
  int spline_global_positive = 0;
  std::vector<std::uint64_t> violation_seeds;

  bool ok() const { return violation_seeds.empty(); }
};

/// Deterministic random scenario: 2-6 agents of dimension 1-3 with stable
/// dynamics, a random disjoint partition, concave quadratic or affine
/// predicates with nonempty level sets, and 1-4 temporal conjuncts inside
/// [0, 10].
Scenario random_scenario(std::uint64_t seed, double margin = 1e-3);

/// Runs `count` random scenarios, alternating the two timing modes. Every
/// planned run with all-positive local robustness must have positive global
/// robustness; offenders land in `violation_seeds`. Each scenario also gets
/// planner-independent piecewise-linear signals sampled inside the task
/// boxes, filtered on local satisfaction and checked globally.
FuzzStats run_fuzz(const FuzzConfig& cfg);

std::string fuzz_summary_json(const FuzzConfig& cfg, const FuzzStats& stats);

}  // namespace stldec
