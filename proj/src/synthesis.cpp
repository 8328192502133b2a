#include "synthesis.hpp"

#include <algorithm>
#include <cmath>

namespace stldec {

const char* to_string(TimingMode m) {
  return m == TimingMode::PointEventually ? "point" : "interval";
}

std::string LocalTaskSet::formula_text() const {
  std::string out;
  for (size_t q = 0; q < conjuncts.size(); ++q) {
    const LocalConjunct& c = conjuncts[q];
    if (q) out += " and ";
    out += (c.is_always ? "G[" : "F[") + format_double(c.interval.a) + "," +
           format_double(c.interval.b) + "] " + c.name;
  }
  return out;
}

StlFormula::Ptr LocalTaskSet::formula() const {
  std::vector<StlFormula::Ptr> terms;
  terms.reserve(conjuncts.size());
  for (const LocalConjunct& c : conjuncts) {
    auto atom = StlFormula::make_predicate(c.name);
    terms.push_back(c.is_always
                        ? StlFormula::make_always(c.interval, std::move(atom))
                        : StlFormula::make_eventually(c.interval, std::move(atom)));
  }
  if (terms.size() == 1) return terms[0];
  return StlFormula::make_conjunction(std::move(terms));
}

PredicateTable LocalTaskSet::bindings(int team_dim) const {
  PredicateTable table;
  for (const LocalConjunct& c : conjuncts) {
    PredicateBinding b;
    b.expected_dim = team_dim;
    b.eval = [box = c.predicate](const Eigen::VectorXd& z) { return box.value(z); };
    table[c.name] = std::move(b);
  }
  return table;
}

namespace {

double snap_instant(double t, double dt) {
  if (dt <= 0.0) return t;
  return std::round(t / dt) * dt;
}

}  // namespace

std::vector<LocalTaskSet> synthesize(const std::vector<TemporalConjunct>& global,
                                     const std::vector<DecompositionResult>& results,
                                     const TeamPartition& partition,
                                     const SynthesisConfig& cfg) {
  if (results.size() != global.size())
    throw InputError("one decomposition result per global conjunct is required");
  if (cfg.margin < 0.0) throw InputError("margin must be nonnegative");

  std::vector<LocalTaskSet> tasks(static_cast<size_t>(partition.team_count()));
  for (int l = 0; l < partition.team_count(); ++l)
    tasks[static_cast<size_t>(l)].team = l;

  for (size_t i = 0; i < global.size(); ++i) {
    const TemporalConjunct& g = global[i];
    const DecompositionResult& res = results[i];
    if (res.boxes.empty())
      throw InputError("missing decomposition for conjunct " + std::to_string(i));

    // Common timing for every team involved in this conjunct.
    bool local_always = true;
    TimeInterval local_iv = g.interval;
    if (!g.is_always) {
      TimingChoice choice;
      if (auto it = cfg.policy.overrides.find(static_cast<int>(i));
          it != cfg.policy.overrides.end())
        choice = it->second;
      if (cfg.policy.mode == TimingMode::PointEventually) {
        double t = choice.instant.value_or(0.5 * (g.interval.a + g.interval.b));
        if (!g.interval.contains(t))
          throw InputError("eventually instant " + format_double(t) +
                           " outside [" + format_double(g.interval.a) + "," +
                           format_double(g.interval.b) + "] for conjunct " +
                           std::to_string(i));
        t = snap_instant(t, cfg.policy.snap_dt);
        local_always = false;
        local_iv = TimeInterval(t, t);
      } else {
        TimeInterval sub = choice.subinterval.value_or(TimeInterval(
            g.interval.a + g.interval.length() / 3.0,
            g.interval.b - g.interval.length() / 3.0));
        if (!g.interval.contains(sub))
          throw InputError("eventually subinterval [" + format_double(sub.a) + "," +
                           format_double(sub.b) + "] not inside [" +
                           format_double(g.interval.a) + "," +
                           format_double(g.interval.b) + "] for conjunct " +
                           std::to_string(i));
        local_always = true;
        local_iv = sub;
      }
    }

    for (const TeamBox& tb : res.boxes) {
      LocalConjunct c;
      c.is_always = g.is_always ? true : local_always;
      c.interval = g.is_always ? g.interval : local_iv;
      c.predicate = tb.box;
      c.raw_radius = tb.box.radius;
      c.predicate.radius = tb.box.radius - cfg.margin;
      if (c.predicate.radius < 0.0)
        throw InfeasibleError("margin " + format_double(cfg.margin) +
                              " exceeds solved radius " + format_double(tb.box.radius) +
                              " for conjunct " + std::to_string(i) + ", team " +
                              std::to_string(tb.team));
      c.source_index = static_cast<int>(i);
      c.name = "mu" + std::to_string(i) + "_" + std::to_string(tb.team);
      tasks[static_cast<size_t>(tb.team)].conjuncts.push_back(std::move(c));
    }
  }
  return tasks;
}

ConsistencyReport cross_team_consistency_check(
    const std::vector<LocalTaskSet>& tasks,
    const std::vector<TemporalConjunct>& global,
    const std::vector<DecompositionResult>& results, double margin) {
  ConsistencyReport report;
  auto flag = [&report](std::string msg) {
    report.ok = false;
    report.violations.push_back(std::move(msg));
  };

  for (size_t i = 0; i < global.size(); ++i) {
    std::vector<int> expected;
    if (i < results.size())
      for (const TeamBox& tb : results[i].boxes) expected.push_back(tb.team);
    std::sort(expected.begin(), expected.end());

    std::vector<int> found;
    std::optional<TimeInterval> timing;
    for (const LocalTaskSet& ts : tasks) {
      int count = 0;
      for (const LocalConjunct& c : ts.conjuncts) {
        if (c.source_index != static_cast<int>(i)) continue;
        ++count;
        found.push_back(ts.team);
        if (!timing) {
          timing = c.interval;
        } else if (timing->a != c.interval.a || timing->b != c.interval.b) {
          flag("conjunct " + std::to_string(i) + ": timing differs across teams (" +
               format_double(timing->a) + ".." + format_double(timing->b) + " vs " +
               format_double(c.interval.a) + ".." + format_double(c.interval.b) + ")");
        }
        if (std::abs((c.raw_radius - c.predicate.radius) - margin) > 1e-12)
          flag("conjunct " + std::to_string(i) + ", team " + std::to_string(ts.team) +
               ": margin not applied uniformly");
      }
      if (count > 1)
        flag("conjunct " + std::to_string(i) + ": duplicated in team " +
             std::to_string(ts.team));
    }
    std::sort(found.begin(), found.end());
    if (found != expected) {
      std::string msg = "conjunct " + std::to_string(i) + ": teams {";
      for (size_t k = 0; k < found.size(); ++k)
        msg += (k ? "," : "") + std::to_string(found[k]);
      msg += "} do not match the decomposition's {";
      for (size_t k = 0; k < expected.size(); ++k)
        msg += (k ? "," : "") + std::to_string(expected[k]);
      msg += "}";
      flag(std::move(msg));
    }
  }
  return report;
}

}  // namespace stldec
