#pragma once

#include <stdexcept>
#include <string>

namespace stldec {

/// Malformed input: formula syntax, scenario schema, bad parameters.
struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Evaluation cannot proceed: horizon too short, dimension mismatch.
struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A feasibility problem has no solution (empty level set, unreachable
/// deadline, domain too tight).
struct InfeasibleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace stldec
