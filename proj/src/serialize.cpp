#include "serialize.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "parser.hpp"
#include "robustness.hpp"

namespace stldec {

using nlohmann::json;

namespace {

json vector_to_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r)));
  return out;
}

Eigen::VectorXd vector_from_json(const json& v, const std::string& ctx) {
  if (!v.is_array()) throw InputError(ctx + " must be an array");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw InputError(ctx + " must contain numbers");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

json predicate_to_json(const PredicateFunction& p) {
  json out;
  json fp = json::array();
  for (const auto& c : p.footprint()) fp.push_back({c.agent_id, c.component});
  out["footprint"] = fp;
  if (p.family() == PredicateFamily::ConcaveQuadratic) {
    out["family"] = "quadratic";
    out["offset"] = p.offset();
    out["center"] = vector_to_json(p.center());
    out["weight"] = matrix_to_json(p.weight());
  } else {
    out["family"] = "affine";
    out["offset"] = p.offset();
    out["gradient"] = vector_to_json(p.gradient_coefficients());
  }
  return out;
}

PredicateFunction predicate_from_json(const json& p, const std::string& ctx) {
  if (!p.contains("family") || !p.contains("footprint"))
    throw InputError(ctx + ": predicate needs 'family' and 'footprint'");
  std::vector<GlobalCoord> fp;
  for (const auto& e : p["footprint"]) {
    if (!e.is_array() || e.size() != 2)
      throw InputError(ctx + ": footprint entries must be pairs");
    fp.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  std::string family = p["family"].get<std::string>();
  if (family == "quadratic")
    return PredicateFunction::concave_quadratic(
        p["offset"].get<double>(), vector_from_json(p["center"], ctx + " center"),
        [&] {
          const json& w = p["weight"];
          Eigen::MatrixXd m(static_cast<Eigen::Index>(w.size()),
                            static_cast<Eigen::Index>(w.size()));
          for (size_t r = 0; r < w.size(); ++r)
            m.row(static_cast<Eigen::Index>(r)) = vector_from_json(w[r], ctx + " weight");
          return m;
        }(),
        fp);
  if (family == "affine")
    return PredicateFunction::affine(vector_from_json(p["gradient"], ctx + " gradient"),
                                     p["offset"].get<double>(), fp);
  throw InputError(ctx + ": unknown predicate family '" + family + "'");
}

json interval_to_json(const TimeInterval& iv) { return json::array({iv.a, iv.b}); }

double finite_or(double v, double fallback) {
  return std::isfinite(v) ? v : fallback;
}

}  // namespace

std::string tasks_bundle_to_json(const Scenario& s, const RobustnessReport& report) {
  json out;
  out["version"] = 1;
  out["margin"] = report.margin;
  out["timing_mode"] = to_string(report.timing_mode);

  json agents = json::array();
  for (const auto& a : s.team_partition().agents())
    agents.push_back({{"id", a.id}, {"dim", a.dim}});
  out["agents"] = agents;
  json teams = json::array();
  for (int l = 0; l < s.team_partition().team_count(); ++l)
    teams.push_back(s.team_partition().team_members(l));
  out["teams"] = teams;

  json global;
  global["formula"] = to_text(*s.formula);
  json preds;
  for (const auto& [name, p] : s.predicates) preds[name] = predicate_to_json(p);
  global["predicates"] = preds;
  out["global"] = global;

  json decs = json::array();
  for (size_t i = 0; i < report.decompositions.size(); ++i) {
    const DecompositionResult& r = report.decompositions[i];
    const TemporalConjunct& c = s.conjuncts[i];
    json d;
    d["conjunct"] = i;
    d["operator"] = c.is_always ? "G" : "F";
    d["interval"] = interval_to_json(c.interval);
    d["objective"] = r.objective;
    d["status"] = to_string(r.status);
    d["method"] = r.method;
    d["outer_iterations"] = r.outer_iterations;
    d["newton_steps"] = r.newton_steps;
    d["max_constraint_violation"] = r.max_constraint_violation;
    d["kkt_residual"] = finite_or(r.kkt_residual, 0.0);
    d["degenerate"] = r.degenerate;
    json boxes = json::array();
    for (const TeamBox& tb : r.boxes)
      boxes.push_back({{"team", tb.team},
                       {"center", vector_to_json(tb.box.center)},
                       {"radius", tb.box.radius},
                       {"radius_adjusted", tb.box.radius - report.margin},
                       {"indices", tb.box.indices}});
    d["boxes"] = boxes;
    decs.push_back(d);
  }
  out["decompositions"] = decs;

  json tasks = json::array();
  for (const LocalTaskSet& ts : report.tasks) {
    json t;
    t["team"] = ts.team;
    t["formula"] = ts.formula_text();
    json cs = json::array();
    for (const LocalConjunct& c : ts.conjuncts)
      cs.push_back({{"name", c.name},
                    {"operator", c.is_always ? "G" : "F"},
                    {"interval", interval_to_json(c.interval)},
                    {"source", c.source_index},
                    {"center", vector_to_json(c.predicate.center)},
                    {"radius", c.predicate.radius},
                    {"raw_radius", c.raw_radius},
                    {"indices", c.predicate.indices}});
    t["conjuncts"] = cs;
    tasks.push_back(t);
  }
  out["local_tasks"] = tasks;
  return out.dump(2);
}

TasksBundle tasks_bundle_from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("tasks file is not valid JSON: ") + e.what());
  }
  TasksBundle b;
  if (!root.is_object() || !root.contains("agents") || !root.contains("teams") ||
      !root.contains("global") || !root.contains("local_tasks"))
    throw InputError("tasks file missing required sections");

  b.margin = root.value("margin", 0.0);
  b.timing_mode = root.value("timing_mode", "point") == std::string("interval")
                      ? TimingMode::IntervalAlways
                      : TimingMode::PointEventually;

  std::vector<AgentSpec> specs;
  for (const auto& a : root["agents"])
    specs.push_back({a["id"].get<int>(), a["dim"].get<int>()});
  std::vector<std::vector<int>> teams;
  for (const auto& t : root["teams"]) teams.push_back(t.get<std::vector<int>>());
  b.partition.emplace(specs, teams);

  b.global_formula_text = root["global"]["formula"].get<std::string>();
  std::set<std::string> names;
  for (auto it = root["global"]["predicates"].begin();
       it != root["global"]["predicates"].end(); ++it) {
    b.global_predicates.emplace(it.key(),
                                predicate_from_json(it.value(), "predicate " + it.key()));
    names.insert(it.key());
  }
  b.global_formula = parse_formula(b.global_formula_text, names);

  for (const auto& t : root["local_tasks"]) {
    LocalTaskSet ts;
    ts.team = t["team"].get<int>();
    if (ts.team < 0 || ts.team >= b.partition->team_count())
      throw InputError("tasks file references team " + std::to_string(ts.team) +
                       " outside the partition");
    for (const auto& c : t["conjuncts"]) {
      LocalConjunct lc;
      lc.name = c["name"].get<std::string>();
      lc.is_always = c["operator"].get<std::string>() == "G";
      Eigen::VectorXd iv = vector_from_json(c["interval"], "conjunct interval");
      if (iv.size() != 2) throw InputError("conjunct interval must be [a, b]");
      lc.interval = TimeInterval(iv[0], iv[1]);
      lc.source_index = c["source"].get<int>();
      lc.raw_radius = c.value("raw_radius", 0.0);
      lc.predicate.team = ts.team;
      lc.predicate.source_index = lc.source_index;
      lc.predicate.center = vector_from_json(c["center"], "conjunct center");
      if (lc.predicate.center.size() != b.partition->team_dim(ts.team))
        throw InputError("conjunct center size does not match team dimension");
      lc.predicate.radius = c["radius"].get<double>();
      lc.predicate.indices = c["indices"].get<std::vector<int>>();
      for (int eta : lc.predicate.indices)
        if (eta < 0 || eta >= b.partition->team_dim(ts.team))
          throw InputError("conjunct index set outside the team dimension");
      ts.conjuncts.push_back(std::move(lc));
    }
    b.tasks.push_back(std::move(ts));
  }

  if (root.contains("decompositions")) {
    for (const auto& d : root["decompositions"]) {
      DecompositionResult r;
      r.objective = d.value("objective", 0.0);
      r.degenerate = d.value("degenerate", false);
      r.method = d.value("method", "barrier");
      b.decompositions.push_back(std::move(r));
    }
  }
  return b;
}

TasksBundle tasks_bundle_from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open tasks file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return tasks_bundle_from_json(buf.str());
}

std::string report_to_json(const RobustnessReport& report) {
  json out;
  out["timing_mode"] = to_string(report.timing_mode);
  out["margin"] = report.margin;
  out["all_planned"] = report.all_planned;
  out["implication_premise"] = report.implication_premise;
  out["soundness_violation"] = report.soundness_violation;
  if (report.all_planned) out["global_robustness"] = report.global_robustness;

  json teams = json::array();
  for (const TeamReport& t : report.teams) {
    json tr;
    tr["team"] = t.team;
    tr["planned"] = t.planned;
    if (!t.planned) tr["failure"] = t.plan_failure;
    if (t.planned)
      tr["local_robustness"] = finite_or(t.local_robustness,
                                         std::numeric_limits<double>::max());
    json cs;
    for (const auto& [name, rho] : t.conjunct_robustness) cs[name] = rho;
    tr["conjuncts"] = cs;
    teams.push_back(tr);
  }
  out["teams"] = teams;

  json objectives = json::array();
  for (const auto& d : report.decompositions) objectives.push_back(d.objective);
  out["objectives"] = objectives;

  if (!report.oracle_checks.empty()) {
    json oc = json::array();
    for (const auto& o : report.oracle_checks)
      oc.push_back({{"conjunct", o.conjunct},
                    {"solver_objective", o.solver_objective},
                    {"oracle_objective", o.oracle_objective},
                    {"grid_step", o.grid_step},
                    {"within_tolerance", o.within_tolerance}});
    out["oracle_checks"] = oc;
  }

  out["consistency"] = {{"ok", report.consistency.ok},
                        {"violations", report.consistency.violations}};
  out["timings"] = {{"decompose_seconds", report.decompose_seconds},
                    {"plan_seconds", report.plan_seconds},
                    {"eval_seconds", report.eval_seconds}};
  return out.dump(2);
}

std::string boxes_to_csv(const RobustnessReport& report) {
  std::string out = "name,team,source,operator,interval_a,interval_b,vertex,coordinate,value\n";
  for (const LocalTaskSet& ts : report.tasks) {
    for (const LocalConjunct& c : ts.conjuncts) {
      auto corners = c.predicate.vertex_set();
      for (size_t v = 0; v < corners.size(); ++v)
        for (int eta : c.predicate.indices)
          out += c.name + "," + std::to_string(ts.team) + "," +
                 std::to_string(c.source_index) + "," + (c.is_always ? "G" : "F") +
                 "," + format_double(c.interval.a) + "," + format_double(c.interval.b) +
                 "," + std::to_string(v) + "," + std::to_string(eta) + "," +
                 format_double(corners[v][eta]) + "\n";
    }
  }
  return out;
}

std::string traces_to_csv(const Scenario& s, const RobustnessReport& report) {
  std::string out = "t,scope,name,value\n";
  if (report.global_trajectory) {
    const Trajectory& gx = *report.global_trajectory;
    const TeamPartition& partition = s.team_partition();
    for (size_t i = 0; i < s.conjuncts.size(); ++i) {
      PredicateFunction pred = s.conjunct_predicate(s.conjuncts[i]);
      PredicateBinding bind = bind_global_predicate(pred, partition);
      for (int k = 0; k < gx.size(); ++k)
        out += format_double(gx.time_of(k)) + ",global," + s.conjuncts[i].predicate +
               "_" + std::to_string(i) + "," +
               format_double((s.conjuncts[i].negated ? -1.0 : 1.0) *
                             bind.eval(gx.sample(k))) +
               "\n";
    }
  }
  for (size_t l = 0; l < report.tasks.size(); ++l) {
    if (!report.team_trajectories[l]) continue;
    const Trajectory& z = *report.team_trajectories[l];
    for (const LocalConjunct& c : report.tasks[l].conjuncts)
      for (int k = 0; k < z.size(); ++k)
        out += format_double(z.time_of(k)) + ",team" + std::to_string(l) + "," +
               c.name + "," + format_double(c.predicate.value(z.sample(k))) + "\n";
  }
  return out;
}

CheckOutcome check_bundle(const TasksBundle& bundle, const Trajectory& global) {
  const TeamPartition& partition = bundle.team_partition();
  if (global.dim() != partition.global_dim())
    throw EvalError("trajectory dimension " + std::to_string(global.dim()) +
                    " does not match the partition's " +
                    std::to_string(partition.global_dim()));
  CheckOutcome out;
  out.min_local_robustness = std::numeric_limits<double>::infinity();
  out.all_local_positive = true;
  for (const LocalTaskSet& ts : bundle.tasks) {
    TeamReport tr;
    tr.team = ts.team;
    tr.planned = true;
    Trajectory z = global.select(selection_for_team(partition, ts.team));
    if (ts.conjuncts.empty()) {
      tr.local_robustness = std::numeric_limits<double>::infinity();
      out.teams.push_back(std::move(tr));
      continue;
    }
    PredicateTable table = ts.bindings(partition.team_dim(ts.team));
    tr.local_robustness = robustness(*ts.formula(), table, z, 0.0);
    for (const LocalConjunct& c : ts.conjuncts) {
      auto atom = StlFormula::make_predicate(c.name);
      auto f = c.is_always ? StlFormula::make_always(c.interval, atom)
                           : StlFormula::make_eventually(c.interval, atom);
      tr.conjunct_robustness.emplace_back(c.name, robustness(*f, table, z, 0.0));
    }
    out.min_local_robustness = std::min(out.min_local_robustness, tr.local_robustness);
    if (!(tr.local_robustness > 0.0)) out.all_local_positive = false;
    out.teams.push_back(std::move(tr));
  }

  PredicateTable global_table;
  for (const auto& [name, pred] : bundle.global_predicates)
    global_table[name] = bind_global_predicate(pred, partition);
  out.global_robustness = robustness(*bundle.global_formula, global_table, global, 0.0);
  out.soundness_violation = out.all_local_positive && !(out.global_robustness > 0.0);
  return out;
}

std::string check_outcome_to_json(const CheckOutcome& outcome) {
  json out;
  out["global_robustness"] = outcome.global_robustness;
  out["min_local_robustness"] = finite_or(outcome.min_local_robustness,
                                          std::numeric_limits<double>::max());
  out["all_local_positive"] = outcome.all_local_positive;
  out["soundness_violation"] = outcome.soundness_violation;
  json teams = json::array();
  for (const TeamReport& t : outcome.teams) {
    json tr;
    tr["team"] = t.team;
    tr["local_robustness"] = finite_or(t.local_robustness,
                                       std::numeric_limits<double>::max());
    json cs;
    for (const auto& [name, rho] : t.conjunct_robustness) cs[name] = rho;
    tr["conjuncts"] = cs;
    teams.push_back(tr);
  }
  out["teams"] = teams;
  return out.dump(2);
}

}  // namespace stldec
