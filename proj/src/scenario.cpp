#include "scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "parser.hpp"

namespace stldec {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::set<std::string>& allowed,
                const std::string& context) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw InputError(context + ": unknown key '" + it.key() + "'");
}

double get_number(const json& obj, const std::string& key, const std::string& ctx) {
  if (!obj.contains(key)) throw InputError(ctx + ": missing '" + key + "'");
  if (!obj[key].is_number()) throw InputError(ctx + ": '" + key + "' must be a number");
  return obj[key].get<double>();
}

int get_int(const json& obj, const std::string& key, const std::string& ctx) {
  if (!obj.contains(key)) throw InputError(ctx + ": missing '" + key + "'");
  if (!obj[key].is_number_integer())
    throw InputError(ctx + ": '" + key + "' must be an integer");
  return obj[key].get<int>();
}

Eigen::VectorXd get_vector(const json& v, const std::string& ctx) {
  if (!v.is_array()) throw InputError(ctx + " must be an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw InputError(ctx + " must contain only numbers");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

Eigen::MatrixXd get_matrix(const json& v, const std::string& ctx) {
  if (!v.is_array() || v.empty()) throw InputError(ctx + " must be an array of rows");
  const size_t rows = v.size();
  size_t cols = 0;
  Eigen::MatrixXd out;
  for (size_t r = 0; r < rows; ++r) {
    Eigen::VectorXd row = get_vector(v[r], ctx + " row " + std::to_string(r));
    if (r == 0) {
      cols = static_cast<size_t>(row.size());
      out.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (static_cast<size_t>(row.size()) != cols) {
      throw InputError(ctx + ": ragged rows");
    }
    out.row(static_cast<Eigen::Index>(r)) = row;
  }
  return out;
}

std::vector<GlobalCoord> get_footprint(const json& v, const std::string& ctx) {
  if (!v.is_array() || v.empty())
    throw InputError(ctx + ": footprint must be a nonempty array of [agent, component] pairs");
  std::vector<GlobalCoord> out;
  for (const auto& e : v) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_number_integer() ||
        !e[1].is_number_integer())
      throw InputError(ctx + ": footprint entries must be [agent, component] integer pairs");
    out.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  return out;
}

TimingChoice parse_choice(const json& o, const std::string& ctx) {
  check_keys(o, {"t", "interval", "t_star"}, ctx);
  TimingChoice c;
  if (o.contains("t")) c.instant = get_number(o, "t", ctx);
  if (o.contains("interval")) {
    Eigen::VectorXd iv = get_vector(o["interval"], ctx + " interval");
    if (iv.size() != 2) throw InputError(ctx + ": interval must be [a, b]");
    c.subinterval = TimeInterval(iv[0], iv[1]);
  }
  if (o.contains("t_star")) c.until_instant = get_number(o, "t_star", ctx);
  return c;
}

}  // namespace

const AgentConfig& Scenario::agent_config(int agent_id) const {
  for (const auto& a : agents)
    if (a.id == agent_id) return a;
  throw InputError("unknown agent id " + std::to_string(agent_id));
}

std::vector<TeamDomain> Scenario::team_domains() const {
  const TeamPartition& p = team_partition();
  std::vector<TeamDomain> out;
  for (int l = 0; l < p.team_count(); ++l) {
    TeamDomain d;
    d.lower = Eigen::VectorXd(p.team_dim(l));
    d.upper = Eigen::VectorXd(p.team_dim(l));
    int off = 0;
    for (int id : p.team_members(l)) {
      const AgentConfig& a = agent_config(id);
      double half = a.state_bound / std::sqrt(static_cast<double>(a.dim));
      for (int c = 0; c < a.dim; ++c) {
        d.lower[off + c] = -half;
        d.upper[off + c] = half;
      }
      off += a.dim;
    }
    out.push_back(std::move(d));
  }
  return out;
}

PredicateFunction Scenario::conjunct_predicate(const TemporalConjunct& c) const {
  auto it = predicates.find(c.predicate);
  if (it == predicates.end())
    throw InputError("formula references undeclared predicate '" + c.predicate + "'");
  return c.negated ? it->second.negated() : it->second;
}

Scenario load_scenario_json(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw InputError("scenario root must be an object");
  check_keys(root,
             {"agents", "teams", "predicates", "formula", "horizon", "dt",
              "timing", "solver", "margin"},
             "scenario");

  Scenario s;

  if (!root.contains("agents") || !root["agents"].is_array() || root["agents"].empty())
    throw InputError("scenario: 'agents' must be a nonempty array");
  std::vector<AgentSpec> specs;
  for (const auto& a : root["agents"]) {
    std::string ctx = "agent " + std::to_string(specs.size());
    if (!a.is_object()) throw InputError(ctx + " must be an object");
    check_keys(a, {"id", "dim", "dynamics", "state_bound", "input_bound", "initial_state"},
               ctx);
    AgentConfig cfg;
    cfg.id = get_int(a, "id", ctx);
    cfg.dim = get_int(a, "dim", ctx);
    if (cfg.dim < 1) throw InputError(ctx + ": dim must be >= 1");
    if (!a.contains("dynamics")) throw InputError(ctx + ": missing 'dynamics'");
    cfg.dynamics = get_matrix(a["dynamics"], ctx + " dynamics");
    if (cfg.dynamics.rows() != cfg.dim || cfg.dynamics.cols() != cfg.dim)
      throw InputError(ctx + ": dynamics must be dim x dim");
    cfg.state_bound = get_number(a, "state_bound", ctx);
    cfg.input_bound = get_number(a, "input_bound", ctx);
    if (!(cfg.state_bound > 0.0) || !(cfg.input_bound > 0.0))
      throw InputError(ctx + ": bounds must be positive");
    if (a.contains("initial_state")) {
      if (a["initial_state"].is_string()) {
        if (a["initial_state"].get<std::string>() != "auto")
          throw InputError(ctx + ": initial_state must be an array or \"auto\"");
        cfg.initial_mode = InitialStateMode::Auto;
      } else {
        cfg.initial_mode = InitialStateMode::Given;
        cfg.initial_state = get_vector(a["initial_state"], ctx + " initial_state");
        if (cfg.initial_state.size() != cfg.dim)
          throw InputError(ctx + ": initial_state size must equal dim");
        if (cfg.initial_state.norm() > cfg.state_bound + 1e-9)
          throw InputError(ctx + ": initial_state violates the state bound");
      }
    }
    specs.push_back({cfg.id, cfg.dim});
    s.agents.push_back(std::move(cfg));
  }

  if (!root.contains("teams") || !root["teams"].is_array() || root["teams"].empty())
    throw InputError("scenario: 'teams' must be a nonempty array of agent-id arrays");
  std::vector<std::vector<int>> teams;
  for (const auto& t : root["teams"]) {
    if (!t.is_array()) throw InputError("scenario: each team must be an array of agent ids");
    std::vector<int> members;
    for (const auto& id : t) {
      if (!id.is_number_integer()) throw InputError("scenario: team members must be integers");
      members.push_back(id.get<int>());
    }
    teams.push_back(std::move(members));
  }
  s.partition.emplace(specs, teams);

  if (!root.contains("predicates") || !root["predicates"].is_object())
    throw InputError("scenario: 'predicates' must be an object");
  for (auto it = root["predicates"].begin(); it != root["predicates"].end(); ++it) {
    const std::string& name = it.key();
    const json& p = it.value();
    std::string ctx = "predicate '" + name + "'";
    if (!p.is_object()) throw InputError(ctx + " must be an object");
    if (!p.contains("family") || !p["family"].is_string())
      throw InputError(ctx + ": missing 'family'");
    std::string family = p["family"].get<std::string>();
    std::vector<GlobalCoord> fp = get_footprint(
        p.contains("footprint") ? p["footprint"] : json::array(), ctx);
    if (family == "quadratic") {
      check_keys(p, {"family", "offset", "center", "weight", "footprint"}, ctx);
      double offset = get_number(p, "offset", ctx);
      if (!p.contains("center") || !p.contains("weight"))
        throw InputError(ctx + ": quadratic needs 'center' and 'weight'");
      s.predicates.emplace(name, PredicateFunction::concave_quadratic(
                                     offset, get_vector(p["center"], ctx + " center"),
                                     get_matrix(p["weight"], ctx + " weight"), fp));
    } else if (family == "affine") {
      check_keys(p, {"family", "gradient", "offset", "footprint"}, ctx);
      if (!p.contains("gradient")) throw InputError(ctx + ": affine needs 'gradient'");
      s.predicates.emplace(name, PredicateFunction::affine(
                                     get_vector(p["gradient"], ctx + " gradient"),
                                     get_number(p, "offset", ctx), fp));
    } else {
      throw InputError(ctx + ": family must be 'quadratic' or 'affine'");
    }
    // Footprint coordinates must resolve against the agent set.
    for (const auto& c : s.predicates.at(name).footprint())
      s.partition->global_index(c);
  }

  if (!root.contains("formula") || !root["formula"].is_string())
    throw InputError("scenario: 'formula' must be a string");
  s.formula_text = root["formula"].get<std::string>();
  std::set<std::string> names;
  for (const auto& [n, _] : s.predicates) names.insert(n);
  s.formula_raw = parse_formula(s.formula_text, names);

  s.horizon = get_number(root, "horizon", "scenario");
  s.dt = get_number(root, "dt", "scenario");
  if (!(s.horizon > 0.0)) throw InputError("scenario: horizon must be positive");
  if (!(s.dt > 0.0)) throw InputError("scenario: dt must be positive");

  std::map<int, TimingChoice> file_overrides;
  if (root.contains("timing")) {
    const json& t = root["timing"];
    check_keys(t, {"mode", "overrides"}, "timing");
    if (t.contains("mode")) {
      std::string m = t["mode"].get<std::string>();
      if (m == "point") s.timing_mode = TimingMode::PointEventually;
      else if (m == "interval") s.timing_mode = TimingMode::IntervalAlways;
      else throw InputError("timing: mode must be 'point' or 'interval'");
    }
    if (t.contains("overrides")) {
      if (!t["overrides"].is_object())
        throw InputError("timing: overrides must map conjunct index to a choice");
      for (auto it = t["overrides"].begin(); it != t["overrides"].end(); ++it) {
        int idx;
        try {
          idx = std::stoi(it.key());
        } catch (const std::exception&) {
          throw InputError("timing: override key '" + it.key() + "' is not an index");
        }
        file_overrides[idx] = parse_choice(it.value(), "timing override " + it.key());
      }
    }
  }

  if (root.contains("solver")) {
    const json& o = root["solver"];
    check_keys(o, {"eps_feas", "eps_opt", "max_outer", "max_inner"}, "solver");
    if (o.contains("eps_feas")) s.solver.eps_feas = get_number(o, "eps_feas", "solver");
    if (o.contains("eps_opt")) s.solver.eps_opt = get_number(o, "eps_opt", "solver");
    if (o.contains("max_outer")) s.solver.max_outer = get_int(o, "max_outer", "solver");
    if (o.contains("max_inner")) s.solver.max_inner = get_int(o, "max_inner", "solver");
  }
  if (root.contains("margin")) {
    s.margin = get_number(root, "margin", "scenario");
    if (s.margin < 0.0) throw InputError("scenario: margin must be nonnegative");
  }

  // Rewrite until terms, keeping pre-rewrite override keys attached to the
  // right post-rewrite conjuncts.
  auto pick_t_star = [&file_overrides](int pre_index, const TimeInterval& iv) {
    auto it = file_overrides.find(pre_index);
    if (it != file_overrides.end() && it->second.until_instant)
      return *it->second.until_instant;
    return 0.5 * (iv.a + iv.b);
  };
  s.formula = rewrite_untils(s.formula_raw, pick_t_star);

  std::vector<const StlFormula*> pre_terms;
  if (s.formula_raw->kind == FormulaKind::Conjunction)
    for (const auto& c : s.formula_raw->children) pre_terms.push_back(c.get());
  if (pre_terms.empty()) pre_terms.push_back(s.formula_raw.get());
  int post = 0;
  for (size_t pre = 0; pre < pre_terms.size(); ++pre) {
    if (pre_terms[pre]->kind == FormulaKind::Until) {
      post += 2;  // until expands to always + eventually; both timings are fixed
      continue;
    }
    auto it = file_overrides.find(static_cast<int>(pre));
    if (it != file_overrides.end()) s.timing_overrides[post] = it->second;
    ++post;
  }

  FragmentReport fr = validate_fragment(*s.formula);
  if (!fr.ok) throw InputError("formula outside the supported fragment: " + fr.message);
  s.conjuncts = fragment_conjuncts(*s.formula);

  for (const auto& c : s.conjuncts)
    if (c.interval.b > s.horizon + 1e-9)
      throw InputError("formula interval [" + format_double(c.interval.a) + "," +
                       format_double(c.interval.b) + "] extends past the horizon " +
                       format_double(s.horizon));

  // Negated quadratics cannot be decomposed; fail early with a clear message.
  for (const auto& c : s.conjuncts) s.conjunct_predicate(c);

  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_scenario_json(buf.str());
}

}  // namespace stldec
