#include "fuzz.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "log.hpp"
#include "robustness.hpp"

namespace stldec {

using nlohmann::json;

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

json random_predicate(std::mt19937_64& rng, const std::vector<int>& dims,
                      std::vector<std::pair<int, int>>* footprint_out) {
  const int n_agents = static_cast<int>(dims.size());

  // Pick agents until the footprint would exceed 4 coordinates.
  std::vector<int> order(static_cast<size_t>(n_agents));
  for (int i = 0; i < n_agents; ++i) order[static_cast<size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<std::pair<int, int>> fp;  // (agent index, component)
  int want_agents = uniform_int(rng, 1, std::min(3, n_agents));
  int width = 0;
  for (int oi = 0; oi < n_agents && want_agents > 0; ++oi) {
    int a = order[static_cast<size_t>(oi)];
    if (width + dims[static_cast<size_t>(a)] > 4 && width > 0) continue;
    for (int c = 0; c < dims[static_cast<size_t>(a)]; ++c) fp.emplace_back(a, c);
    width += dims[static_cast<size_t>(a)];
    --want_agents;
    if (width >= 4) break;
  }
  std::sort(fp.begin(), fp.end());
  const int d = static_cast<int>(fp.size());

  // Anchor point inside the per-coordinate domain (box inscribed in the
  // unit state ball).
  std::vector<double> anchor;
  for (const auto& [a, c] : fp) {
    double half = 1.0 / std::sqrt(static_cast<double>(dims[static_cast<size_t>(a)]));
    anchor.push_back(uniform(rng, -0.6 * half, 0.6 * half));
  }

  json p;
  json fp_json = json::array();
  for (const auto& [a, c] : fp) fp_json.push_back({a + 1, c});  // ids are 1-based
  p["footprint"] = fp_json;
  *footprint_out = fp;

  if (uniform(rng, 0.0, 1.0) < 0.75) {
    p["family"] = "quadratic";
    p["offset"] = uniform(rng, 0.05, 0.4);
    p["center"] = anchor;
    Eigen::MatrixXd diag = Eigen::MatrixXd::Zero(d, d);
    for (int i = 0; i < d; ++i) diag(i, i) = uniform(rng, 0.3, 1.5);
    Eigen::MatrixXd w = diag;
    if (d > 1 && uniform(rng, 0.0, 1.0) < 0.5) {
      Eigen::MatrixXd g(d, d);
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) g(i, j) = uniform(rng, -1.0, 1.0);
      Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
      Eigen::MatrixXd q = qr.householderQ();
      w = q.transpose() * diag * q;
      w = 0.5 * (w + w.transpose());
    }
    json rows = json::array();
    for (int i = 0; i < d; ++i) {
      json row = json::array();
      for (int j = 0; j < d; ++j) row.push_back(w(i, j));
      rows.push_back(row);
    }
    p["weight"] = rows;
  } else {
    p["family"] = "affine";
    Eigen::VectorXd g(d);
    for (int i = 0; i < d; ++i) g[i] = uniform(rng, -1.0, 1.0);
    if (g.norm() < 1e-6) g[0] = 1.0;
    g *= uniform(rng, 0.5, 2.0) / g.norm();
    double dot = 0.0;
    for (int i = 0; i < d; ++i) dot += g[i] * anchor[static_cast<size_t>(i)];
    json grad = json::array();
    for (int i = 0; i < d; ++i) grad.push_back(g[i]);
    p["gradient"] = grad;
    p["offset"] = -dot + uniform(rng, 0.05, 0.3);
  }
  return p;
}

}  // namespace

Scenario random_scenario(std::uint64_t seed, double margin) {
  std::mt19937_64 rng(seed);
  const int n_agents = uniform_int(rng, 2, 6);

  json root;
  std::vector<int> dims;
  json agents = json::array();
  for (int a = 0; a < n_agents; ++a) {
    int dim = uniform_int(rng, 1, 3);
    dims.push_back(dim);
    json ag;
    ag["id"] = a + 1;
    ag["dim"] = dim;
    json rows = json::array();
    for (int i = 0; i < dim; ++i) {
      json row = json::array();
      for (int j = 0; j < dim; ++j) {
        if (i == j)
          row.push_back(uniform(rng, -1.0, -0.2));
        else
          row.push_back(uniform(rng, 0.0, 1.0) < 0.3 ? uniform(rng, -0.3, 0.3) : 0.0);
      }
      rows.push_back(row);
    }
    ag["dynamics"] = rows;
    ag["state_bound"] = 1.0;
    ag["input_bound"] = uniform(rng, 4.0, 8.0);
    ag["initial_state"] = "auto";
    agents.push_back(ag);
  }
  root["agents"] = agents;

  // Random disjoint cover: shuffle and cut at v-1 points.
  std::vector<int> ids(static_cast<size_t>(n_agents));
  for (int a = 0; a < n_agents; ++a) ids[static_cast<size_t>(a)] = a + 1;
  std::shuffle(ids.begin(), ids.end(), rng);
  int v = uniform_int(rng, 1, n_agents);
  std::set<int> cuts{0};
  while (static_cast<int>(cuts.size()) < v) cuts.insert(uniform_int(rng, 1, n_agents - 1));
  std::vector<int> cut_list(cuts.begin(), cuts.end());
  cut_list.push_back(n_agents);
  json teams = json::array();
  for (size_t c = 0; c + 1 < cut_list.size(); ++c) {
    json team = json::array();
    for (int i = cut_list[c]; i < cut_list[c + 1]; ++i)
      team.push_back(ids[static_cast<size_t>(i)]);
    teams.push_back(team);
  }
  root["teams"] = teams;

  const int conjuncts = uniform_int(rng, 1, 4);
  json predicates = json::object();
  std::string formula;
  for (int i = 0; i < conjuncts; ++i) {
    std::string name = "p" + std::to_string(i);
    std::vector<std::pair<int, int>> fp;
    json pred = random_predicate(rng, dims, &fp);
    bool negate = pred["family"] == "affine" && uniform(rng, 0.0, 1.0) < 0.15;
    predicates[name] = pred;

    double a = uniform(rng, 0.0, 5.0);
    double b = std::min(a + uniform(rng, 0.5, 4.0), 9.5);
    bool always = uniform(rng, 0.0, 1.0) < 0.5;
    if (i) formula += " and ";
    formula += std::string(always ? "G[" : "F[") + format_double(a) + "," +
               format_double(b) + "] " + (negate ? "not " : "") + name;
  }
  root["predicates"] = predicates;
  root["formula"] = formula;
  root["horizon"] = 10.0;
  root["dt"] = 0.1;
  root["margin"] = margin;

  return load_scenario_json(root.dump());
}

namespace {

// Planner-independent piecewise-linear team signal with waypoints sampled
// uniformly inside the required windows.
std::optional<Trajectory> random_spline(std::mt19937_64& rng, const LocalTaskSet& tasks,
                                        const TeamDomain& domain, double horizon,
                                        double dt) {
  const int dim = static_cast<int>(domain.lower.size());
  auto maybe_windows = task_windows(tasks, dim, horizon, dt, nullptr);
  if (!maybe_windows) return std::nullopt;
  const WindowGrid& windows = *maybe_windows;
  const int samples = static_cast<int>(windows.size());

  // Waypoints: window edges, a point every few samples, both ends.
  std::set<int> waypoint_set{0, samples - 1};
  for (int k = 0; k < samples; ++k) {
    bool edge = false;
    for (int i = 0; i < dim && !edge; ++i) {
      bool cur = windows[static_cast<size_t>(k)][static_cast<size_t>(i)].constrained();
      bool prev = k > 0 && windows[static_cast<size_t>(k) - 1][static_cast<size_t>(i)].constrained();
      bool next = k + 1 < samples &&
                  windows[static_cast<size_t>(k) + 1][static_cast<size_t>(i)].constrained();
      edge = cur && (!prev || !next);
    }
    if (edge || k % 5 == 0) waypoint_set.insert(k);
  }

  std::vector<int> waypoints(waypoint_set.begin(), waypoint_set.end());
  std::vector<Eigen::VectorXd> values;
  for (int k : waypoints) {
    Eigen::VectorXd p(dim);
    for (int i = 0; i < dim; ++i) {
      const CoordinateWindow& w = windows[static_cast<size_t>(k)][static_cast<size_t>(i)];
      if (w.constrained()) {
        if (w.empty()) return std::nullopt;
        p[i] = uniform(rng, w.lo, w.hi);
      } else {
        p[i] = uniform(rng, domain.lower[i], domain.upper[i]);
      }
    }
    values.push_back(std::move(p));
  }

  std::vector<Eigen::VectorXd> sampled;
  sampled.reserve(static_cast<size_t>(samples));
  size_t seg = 0;
  for (int k = 0; k < samples; ++k) {
    while (seg + 1 < waypoints.size() && waypoints[seg + 1] < k) ++seg;
    if (k <= waypoints[0]) {
      sampled.push_back(values[0]);
      continue;
    }
    int k0 = waypoints[seg];
    int k1 = waypoints[seg + 1];
    double w = k1 == k0 ? 0.0 : static_cast<double>(k - k0) / (k1 - k0);
    sampled.push_back((1.0 - w) * values[seg] + w * values[seg + 1]);
  }
  return Trajectory(dt, 0.0, std::move(sampled));
}

}  // namespace

FuzzStats run_fuzz(const FuzzConfig& cfg) {
  FuzzStats stats;
  for (int i = 0; i < cfg.count; ++i) {
    std::uint64_t seed = cfg.seed + static_cast<std::uint64_t>(i);
    ++stats.attempted;

    Scenario s;
    RobustnessReport report;
    try {
      s = random_scenario(seed, cfg.margin);
      RunOptions opts;
      opts.timing_mode =
          (i % 2 == 0) ? TimingMode::PointEventually : TimingMode::IntervalAlways;
      opts.oracle_check = cfg.oracle_check;
      report = run_scenario(s, opts);
    } catch (const InfeasibleError& e) {
      log_debug("fuzz seed " + std::to_string(seed) + " infeasible: " + e.what());
      continue;
    }
    ++stats.decomposed;

    if (report.all_planned) {
      ++stats.planned;
      if (report.implication_premise) {
        ++stats.premise_held;
        if (report.global_robustness > 0.0)
          ++stats.global_positive;
        else
          stats.violation_seeds.push_back(seed);
      }
    }

    // Planner-independent check on the same decomposition.
    std::mt19937_64 spline_rng(seed ^ 0x9e3779b97f4a7c15ull);
    const TeamPartition& partition = s.team_partition();
    std::vector<TeamDomain> domains = s.team_domains();
    for (int trial = 0; trial < cfg.splines_per_scenario; ++trial) {
      std::vector<Trajectory> team_signals;
      bool built = true;
      for (int l = 0; l < partition.team_count() && built; ++l) {
        auto z = random_spline(spline_rng, report.tasks[static_cast<size_t>(l)],
                               domains[static_cast<size_t>(l)], s.horizon, s.dt);
        if (!z) built = false;
        else team_signals.push_back(std::move(*z));
      }
      if (!built) break;

      bool local_ok = true;
      for (int l = 0; l < partition.team_count() && local_ok; ++l) {
        const LocalTaskSet& tasks = report.tasks[static_cast<size_t>(l)];
        if (tasks.conjuncts.empty()) continue;
        PredicateTable table = tasks.bindings(partition.team_dim(l));
        local_ok = robustness(*tasks.formula(), table,
                              team_signals[static_cast<size_t>(l)], 0.0) > 0.0;
      }
      if (!local_ok) continue;  // rejected by the local filter
      ++stats.spline_accepted;

      int samples = team_signals[0].size();
      std::vector<Eigen::VectorXd> global(
          static_cast<size_t>(samples), Eigen::VectorXd::Zero(partition.global_dim()));
      for (int l = 0; l < partition.team_count(); ++l) {
        SelectionMatrix sel = selection_for_team(partition, l);
        for (int k = 0; k < samples; ++k)
          sel.scatter(team_signals[static_cast<size_t>(l)].sample(k),
                      global[static_cast<size_t>(k)]);
      }
      Trajectory gx(s.dt, 0.0, std::move(global));
      PredicateTable global_table;
      for (const auto& [name, pred] : s.predicates)
        global_table[name] = bind_global_predicate(pred, partition);
      double rho = robustness(*s.formula, global_table, gx, 0.0);
      if (rho > 0.0)
        ++stats.spline_global_positive;
      else
        stats.violation_seeds.push_back(seed);
    }
  }
  return stats;
}

std::string fuzz_summary_json(const FuzzConfig& cfg, const FuzzStats& stats) {
  json out;
  out["seed"] = cfg.seed;
  out["count"] = cfg.count;
  out["attempted"] = stats.attempted;
  out["decomposed"] = stats.decomposed;
  out["planned"] = stats.planned;
  out["premise_held"] = stats.premise_held;
  out["global_positive"] = stats.global_positive;
  out["spline_accepted"] = stats.spline_accepted;
  out["spline_global_positive"] = stats.spline_global_positive;
  out["violation_seeds"] = stats.violation_seeds;
  out["ok"] = stats.ok();
  return out.dump(2);
}

}  // namespace stldec
