#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"

namespace stldec {

/// Shortest decimal representation that round-trips through strtod.
std::string format_double(double v);

/// Closed time interval [a, b], 0 <= a <= b < inf.
struct TimeInterval {
  double a = 0.0;
  double b = 0.0;

  TimeInterval() = default;
  TimeInterval(double a_, double b_);

  double length() const { return b - a; }
  bool contains(double t) const { return t >= a && t <= b; }
  bool contains(const TimeInterval& other) const {
    return other.a >= a && other.b <= b;
  }
};

enum class FormulaKind { True, Predicate, Always, Eventually, Until, Conjunction };

/// Immutable AST node. Predicates are references into a named table; the
/// temporal operators carry a closed interval. Until nodes exist only before
/// rewriting; fragment validation rejects them.
struct StlFormula {
  using Ptr = std::shared_ptr<const StlFormula>;

  FormulaKind kind = FormulaKind::True;
  std::string predicate;  // Predicate only
  bool negated = false;   // Predicate only
  TimeInterval interval;  // Always / Eventually / Until
  std::vector<Ptr> children;

  static Ptr make_true();
  static Ptr make_predicate(std::string name, bool negated = false);
  static Ptr make_always(TimeInterval iv, Ptr child);
  static Ptr make_eventually(TimeInterval iv, Ptr child);
  static Ptr make_until(TimeInterval iv, Ptr left, Ptr right);
  static Ptr make_conjunction(std::vector<Ptr> children);
};

/// Renders a formula in the concrete grammar. ASTs outside the grammar
/// (nested non-atoms) are parenthesized and will not re-parse.
std::string to_text(const StlFormula& f);

bool structurally_equal(const StlFormula& a, const StlFormula& b);

struct FragmentReport {
  bool ok = true;
  std::string message;  // names the offending subtree when !ok
};

/// Checks the shape: a conjunction (or single instance) of Always/Eventually
/// formulas whose children are possibly negated predicates.
FragmentReport validate_fragment(const StlFormula& f);

/// psi1 U[a,b] psi2 with a chosen instant t* in [a,b] becomes
/// G[a,t*] psi1 and F[t*,t*] psi2. Throws InputError if t* lies outside.
StlFormula::Ptr until_rewrite(StlFormula::Ptr left, StlFormula::Ptr right,
                              const TimeInterval& iv, double t_star);

/// Replaces every Until conjunct using the supplied instant picker
/// (conjunct index, interval) -> t*. Non-until conjuncts pass through.
StlFormula::Ptr rewrite_untils(
    const StlFormula::Ptr& f,
    const std::function<double(int, const TimeInterval&)>& pick_t_star);

/// One validated top-level conjunct of the fragment.
struct TemporalConjunct {
  bool is_always = true;  // else eventually
  TimeInterval interval;
  std::string predicate;
  bool negated = false;
};

/// Flattens a fragment-valid formula into its conjunct list.
/// Throws InputError when the formula is not fragment-valid.
std::vector<TemporalConjunct> fragment_conjuncts(const StlFormula& f);

}  // namespace stldec
