#pragma once

#include <functional>
#include <map>
#include <string>

#include "formula.hpp"
#include "trajectory.hpp"

namespace stldec {

/// Evaluation hook for one named predicate: `eval` receives the full state
/// sample of the trajectory under evaluation. `expected_dim` < 0 skips the
/// dimension check.
struct PredicateBinding {
  int expected_dim = -1;
  std::function<double(const Eigen::VectorXd&)> eval;
};

using PredicateTable = std::map<std::string, PredicateBinding>;

/// Quantitative robustness of `f` over `x` at time `t`:
///   predicate:  h(x(t))            negated predicate: -h(x(t))
///   and:        min over conjuncts
///   F[a,b]:     max over grid times in [t+a, t+b]
///   G[a,b]:     min over grid times in [t+a, t+b]
///   U[a,b]:     max_{t1} min(rho_right(t1), min_{t2 in [t,t1]} rho_left(t2))
/// Interval endpoints snap outward to the enclosing grid points; intervals
/// reaching past the sampled horizon raise EvalError.
double robustness(const StlFormula& f, const PredicateTable& predicates,
                  const Trajectory& x, double t);

/// Binding for a global predicate function: extracts the footprint
/// coordinates from the global state vector.
PredicateBinding bind_global_predicate(const PredicateFunction& pred,
                                       const TeamPartition& partition);

}  // namespace stldec
