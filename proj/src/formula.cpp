#include "formula.hpp"

#include <charconv>
#include <cmath>

namespace stldec {

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

TimeInterval::TimeInterval(double a_, double b_) : a(a_), b(b_) {
  if (!std::isfinite(a) || !std::isfinite(b))
    throw InputError("interval bounds must be finite");
  if (a < 0.0) throw InputError("interval lower bound must be nonnegative");
  if (a > b)
    throw InputError("interval lower bound " + format_double(a) +
                     " exceeds upper bound " + format_double(b));
}

StlFormula::Ptr StlFormula::make_true() {
  auto f = std::make_shared<StlFormula>();
  f->kind = FormulaKind::True;
  return f;
}

StlFormula::Ptr StlFormula::make_predicate(std::string name, bool negated) {
  if (name.empty()) throw InputError("predicate name must not be empty");
  auto f = std::make_shared<StlFormula>();
  f->kind = FormulaKind::Predicate;
  f->predicate = std::move(name);
  f->negated = negated;
  return f;
}

StlFormula::Ptr StlFormula::make_always(TimeInterval iv, Ptr child) {
  if (!child) throw InputError("always requires a child formula");
  auto f = std::make_shared<StlFormula>();
  f->kind = FormulaKind::Always;
  f->interval = iv;
  f->children = {std::move(child)};
  return f;
}

StlFormula::Ptr StlFormula::make_eventually(TimeInterval iv, Ptr child) {
  if (!child) throw InputError("eventually requires a child formula");
  auto f = std::make_shared<StlFormula>();
  f->kind = FormulaKind::Eventually;
  f->interval = iv;
  f->children = {std::move(child)};
  return f;
}

StlFormula::Ptr StlFormula::make_until(TimeInterval iv, Ptr left, Ptr right) {
  if (!left || !right) throw InputError("until requires two child formulas");
  auto f = std::make_shared<StlFormula>();
  f->kind = FormulaKind::Until;
  f->interval = iv;
  f->children = {std::move(left), std::move(right)};
  return f;
}

StlFormula::Ptr StlFormula::make_conjunction(std::vector<Ptr> children) {
  if (children.empty()) throw InputError("conjunction requires at least one conjunct");
  for (const auto& c : children)
    if (!c) throw InputError("conjunction child must not be null");
  auto f = std::make_shared<StlFormula>();
  f->kind = FormulaKind::Conjunction;
  f->children = std::move(children);
  return f;
}

namespace {

bool is_atom(const StlFormula& f) {
  return f.kind == FormulaKind::Predicate || f.kind == FormulaKind::True;
}

std::string atom_text(const StlFormula& f) {
  if (f.kind == FormulaKind::True) return "true";
  return f.negated ? "not " + f.predicate : f.predicate;
}

std::string child_text(const StlFormula& f) {
  if (is_atom(f)) return atom_text(f);
  return "(" + to_text(f) + ")";  // outside the grammar; kept printable
}

std::string interval_text(const TimeInterval& iv) {
  return "[" + format_double(iv.a) + "," + format_double(iv.b) + "]";
}

}  // namespace

std::string to_text(const StlFormula& f) {
  switch (f.kind) {
    case FormulaKind::True:
    case FormulaKind::Predicate:
      return atom_text(f);
    case FormulaKind::Always:
      return "G" + interval_text(f.interval) + " " + child_text(*f.children[0]);
    case FormulaKind::Eventually:
      return "F" + interval_text(f.interval) + " " + child_text(*f.children[0]);
    case FormulaKind::Until:
      return child_text(*f.children[0]) + " U" + interval_text(f.interval) +
             " " + child_text(*f.children[1]);
    case FormulaKind::Conjunction: {
      std::string out;
      for (size_t i = 0; i < f.children.size(); ++i) {
        if (i) out += " and ";
        const StlFormula& c = *f.children[i];
        out += (c.kind == FormulaKind::Conjunction) ? child_text(c) : to_text(c);
      }
      return out;
    }
  }
  return {};
}

bool structurally_equal(const StlFormula& a, const StlFormula& b) {
  if (a.kind != b.kind) return false;
  if (a.kind == FormulaKind::Predicate &&
      (a.predicate != b.predicate || a.negated != b.negated))
    return false;
  if (a.kind == FormulaKind::Always || a.kind == FormulaKind::Eventually ||
      a.kind == FormulaKind::Until) {
    if (a.interval.a != b.interval.a || a.interval.b != b.interval.b)
      return false;
  }
  if (a.children.size() != b.children.size()) return false;
  for (size_t i = 0; i < a.children.size(); ++i)
    if (!structurally_equal(*a.children[i], *b.children[i])) return false;
  return true;
}

namespace {

FragmentReport violation(const StlFormula& subtree, const std::string& why) {
  return {false, why + ": " + to_text(subtree)};
}

FragmentReport check_term(const StlFormula& f) {
  switch (f.kind) {
    case FormulaKind::Always:
    case FormulaKind::Eventually: {
      const StlFormula& c = *f.children[0];
      if (c.kind != FormulaKind::Predicate)
        return violation(f, "temporal operator must wrap a (negated) predicate");
      return {};
    }
    case FormulaKind::Until:
      return violation(f, "until is not part of the fragment; apply until_rewrite first");
    default:
      return violation(f, "top-level conjunct must be an always or eventually formula");
  }
}

}  // namespace

FragmentReport validate_fragment(const StlFormula& f) {
  if (f.kind == FormulaKind::Conjunction) {
    for (const auto& c : f.children) {
      FragmentReport r = check_term(*c);
      if (!r.ok) return r;
    }
    return {};
  }
  return check_term(f);
}

StlFormula::Ptr until_rewrite(StlFormula::Ptr left, StlFormula::Ptr right,
                              const TimeInterval& iv, double t_star) {
  if (!iv.contains(t_star))
    throw InputError("until instant " + format_double(t_star) +
                     " outside interval " + format_double(iv.a) + ".." +
                     format_double(iv.b));
  return StlFormula::make_conjunction(
      {StlFormula::make_always(TimeInterval(iv.a, t_star), std::move(left)),
       StlFormula::make_eventually(TimeInterval(t_star, t_star), std::move(right))});
}

StlFormula::Ptr rewrite_untils(
    const StlFormula::Ptr& f,
    const std::function<double(int, const TimeInterval&)>& pick_t_star) {
  std::vector<StlFormula::Ptr> terms;
  if (f->kind == FormulaKind::Conjunction)
    terms = f->children;
  else
    terms = {f};

  std::vector<StlFormula::Ptr> out;
  bool changed = false;
  for (size_t i = 0; i < terms.size(); ++i) {
    const StlFormula& term = *terms[i];
    if (term.kind == FormulaKind::Until) {
      double t_star = pick_t_star(static_cast<int>(i), term.interval);
      auto rewritten = until_rewrite(term.children[0], term.children[1],
                                     term.interval, t_star);
      out.insert(out.end(), rewritten->children.begin(), rewritten->children.end());
      changed = true;
    } else {
      out.push_back(terms[i]);
    }
  }
  if (!changed) return f;
  if (out.size() == 1) return out[0];
  return StlFormula::make_conjunction(std::move(out));
}

std::vector<TemporalConjunct> fragment_conjuncts(const StlFormula& f) {
  FragmentReport r = validate_fragment(f);
  if (!r.ok) throw InputError(r.message);
  std::vector<const StlFormula*> terms;
  if (f.kind == FormulaKind::Conjunction) {
    for (const auto& c : f.children) terms.push_back(c.get());
  } else {
    terms.push_back(&f);
  }
  std::vector<TemporalConjunct> out;
  out.reserve(terms.size());
  for (const StlFormula* t : terms) {
    const StlFormula& p = *t->children[0];
    out.push_back({t->kind == FormulaKind::Always, t->interval, p.predicate,
                   p.negated});
  }
  return out;
}

}  // namespace stldec
