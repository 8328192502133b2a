#include "robustness.hpp"

#include <algorithm>
#include <limits>

namespace stldec {

namespace {

class Evaluator {
 public:
  Evaluator(const PredicateTable& predicates, const Trajectory& x)
      : predicates_(predicates), x_(x) {}

  double eval(const StlFormula& f, double t) const {
    switch (f.kind) {
      case FormulaKind::True:
        return std::numeric_limits<double>::infinity();
      case FormulaKind::Predicate:
        return predicate(f, t);
      case FormulaKind::Conjunction: {
        double rho = std::numeric_limits<double>::infinity();
        for (const auto& c : f.children) rho = std::min(rho, eval(*c, t));
        return rho;
      }
      case FormulaKind::Always: {
        auto [lo, hi] = window(t + f.interval.a, t + f.interval.b);
        double rho = std::numeric_limits<double>::infinity();
        for (int k = lo; k <= hi; ++k)
          rho = std::min(rho, eval(*f.children[0], x_.time_of(k)));
        return rho;
      }
      case FormulaKind::Eventually: {
        auto [lo, hi] = window(t + f.interval.a, t + f.interval.b);
        double rho = -std::numeric_limits<double>::infinity();
        for (int k = lo; k <= hi; ++k)
          rho = std::max(rho, eval(*f.children[0], x_.time_of(k)));
        return rho;
      }
      case FormulaKind::Until: {
        // Inner minimum runs over [t+a, t1]; with this convention the
        // G/F rewrite of an until formula stays sound.
        auto [lo, hi] = window(t + f.interval.a, t + f.interval.b);
        double rho = -std::numeric_limits<double>::infinity();
        for (int k1 = lo; k1 <= hi; ++k1) {
          double right = eval(*f.children[1], x_.time_of(k1));
          auto [ilo, ihi] = window(t + f.interval.a, x_.time_of(k1));
          double left = std::numeric_limits<double>::infinity();
          for (int k2 = ilo; k2 <= ihi; ++k2)
            left = std::min(left, eval(*f.children[0], x_.time_of(k2)));
          rho = std::max(rho, std::min(right, left));
        }
        return rho;
      }
    }
    throw EvalError("unhandled formula kind");
  }

 private:
  double predicate(const StlFormula& f, double t) const {
    auto it = predicates_.find(f.predicate);
    if (it == predicates_.end())
      throw EvalError("no binding for predicate '" + f.predicate + "'");
    const PredicateBinding& b = it->second;
    if (b.expected_dim >= 0 && b.expected_dim != x_.dim())
      throw EvalError("predicate '" + f.predicate + "' expects dimension " +
                      std::to_string(b.expected_dim) + ", trajectory has " +
                      std::to_string(x_.dim()));
    double h = b.eval(x_.sample(x_.nearest_index(t)));
    return f.negated ? -h : h;
  }

  // Outward snap: the evaluated grid range encloses [ta, tb].
  std::pair<int, int> window(double ta, double tb) const {
    int lo = x_.floor_index(ta);
    int hi = x_.ceil_index(tb);
    if (lo > hi)
      throw EvalError("empty sample window for interval [" + format_double(ta) +
                      "," + format_double(tb) + "]");
    return {lo, hi};
  }

  const PredicateTable& predicates_;
  const Trajectory& x_;
};

}  // namespace

double robustness(const StlFormula& f, const PredicateTable& predicates,
                  const Trajectory& x, double t) {
  return Evaluator(predicates, x).eval(f, t);
}

PredicateBinding bind_global_predicate(const PredicateFunction& pred,
                                       const TeamPartition& partition) {
  std::vector<int> idx;
  idx.reserve(pred.footprint().size());
  for (const auto& c : pred.footprint()) idx.push_back(partition.global_index(c));
  PredicateBinding b;
  b.expected_dim = partition.global_dim();
  b.eval = [pred, idx](const Eigen::VectorXd& state) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(idx.size()));
    for (size_t j = 0; j < idx.size(); ++j) y[static_cast<Eigen::Index>(j)] = state[idx[j]];
    return pred.value(y);
  };
  return b;
}

}  // namespace stldec
