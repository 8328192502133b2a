#include "stldec/stldec.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <new>
#include <sstream>
#include <string>

#include "fuzz.hpp"
#include "log.hpp"
#include "scenario.hpp"
#include "serialize.hpp"
#include "sim.hpp"

using namespace stldec;

struct stldec_scenario {
  Scenario impl;
};

struct stldec_tasks {
  TasksBundle impl;
  std::string json_text;
};

struct stldec_report {
  Scenario scenario;  // kept for trace serialization
  RobustnessReport impl;
};

namespace {

thread_local std::string g_last_error;

stldec_status fail(stldec_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename Fn>
stldec_status guarded(Fn&& fn) {
  try {
    return fn();
  } catch (const InputError& e) {
    return fail(STLDEC_ERR_INPUT, e.what());
  } catch (const InfeasibleError& e) {
    return fail(STLDEC_ERR_INFEASIBLE, e.what());
  } catch (const EvalError& e) {
    return fail(STLDEC_ERR_INPUT, e.what());
  } catch (const std::bad_alloc&) {
    return fail(STLDEC_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(STLDEC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(STLDEC_ERR_INTERNAL, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

stldec_status emit_string(const std::string& s, char** out) {
  if (!out) return fail(STLDEC_ERR_INPUT, "output pointer is null");
  *out = dup_string(s);
  if (!*out) return fail(STLDEC_ERR_INTERNAL, "out of memory");
  return STLDEC_OK;
}

RunOptions make_run_options(const stldec_options* opts) {
  RunOptions ro;
  if (!opts) return ro;
  if (opts->timing_mode == 0) ro.timing_mode = TimingMode::PointEventually;
  if (opts->timing_mode == 1) ro.timing_mode = TimingMode::IntervalAlways;
  if (opts->margin >= 0.0) ro.margin = opts->margin;
  ro.oracle_check = opts->oracle_check != 0;
  if (opts->log_level >= 0 && opts->log_level <= 2)
    set_log_level(static_cast<LogLevel>(opts->log_level));
  return ro;
}

}  // namespace

extern "C" {

const char* stldec_version(void) { return "0.1.0"; }

const char* stldec_status_name(stldec_status status) {
  switch (status) {
    case STLDEC_OK: return "ok";
    case STLDEC_ERR_INPUT: return "input-error";
    case STLDEC_ERR_INFEASIBLE: return "infeasible";
    case STLDEC_ERR_VIOLATION: return "violation";
    case STLDEC_ERR_INTERNAL: return "internal-error";
  }
  return "unknown";
}

const char* stldec_last_error(void) { return g_last_error.c_str(); }

void stldec_options_defaults(stldec_options* opts) {
  if (!opts) return;
  opts->timing_mode = -1;
  opts->margin = -1.0;
  opts->seed = 42;
  opts->oracle_check = 0;
  opts->log_level = 0;
}

stldec_status stldec_scenario_load_file(const char* path, stldec_scenario** out) {
  if (!path || !out) return fail(STLDEC_ERR_INPUT, "null argument");
  return guarded([&] {
    auto* s = new stldec_scenario{load_scenario_file(path)};
    *out = s;
    return STLDEC_OK;
  });
}

stldec_status stldec_scenario_load_string(const char* json_text, stldec_scenario** out) {
  if (!json_text || !out) return fail(STLDEC_ERR_INPUT, "null argument");
  return guarded([&] {
    auto* s = new stldec_scenario{load_scenario_json(json_text)};
    *out = s;
    return STLDEC_OK;
  });
}

void stldec_scenario_free(stldec_scenario* s) { delete s; }

stldec_status stldec_decompose(const stldec_scenario* s, const stldec_options* opts,
                               stldec_tasks** out) {
  if (!s || !out) return fail(STLDEC_ERR_INPUT, "null argument");
  return guarded([&] {
    RunOptions ro = make_run_options(opts);
    // Decomposition + synthesis without planning: reuse the scenario pipeline
    // pieces directly.
    const Scenario& sc = s->impl;
    RobustnessReport partial;
    partial.timing_mode = ro.timing_mode.value_or(sc.timing_mode);
    partial.margin = ro.margin.value_or(sc.margin);
    std::vector<TeamDomain> domains = sc.team_domains();
    for (size_t i = 0; i < sc.conjuncts.size(); ++i) {
      PredicateFunction pred = sc.conjunct_predicate(sc.conjuncts[i]);
      auto prob = assemble_program(pred, sc.team_partition(), domains,
                                   static_cast<int>(i));
      partial.decompositions.push_back(solve_decomposition(prob, sc.solver));
    }
    SynthesisConfig syn;
    syn.policy.mode = partial.timing_mode;
    syn.policy.overrides = sc.timing_overrides;
    syn.policy.snap_dt = sc.dt;
    syn.margin = partial.margin;
    partial.tasks = synthesize(sc.conjuncts, partial.decompositions,
                               sc.team_partition(), syn);
    partial.consistency = cross_team_consistency_check(
        partial.tasks, sc.conjuncts, partial.decompositions, syn.margin);

    std::string text = tasks_bundle_to_json(sc, partial);
    *out = new stldec_tasks{tasks_bundle_from_json(text), std::move(text)};
    return STLDEC_OK;
  });
}

stldec_status stldec_tasks_load_file(const char* path, stldec_tasks** out) {
  if (!path || !out) return fail(STLDEC_ERR_INPUT, "null argument");
  return guarded([&] {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open tasks file '" + std::string(path) + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    std::string text = buf.str();
    *out = new stldec_tasks{tasks_bundle_from_json(text), std::move(text)};
    return STLDEC_OK;
  });
}

stldec_status stldec_tasks_load_string(const char* json_text, stldec_tasks** out) {
  if (!json_text || !out) return fail(STLDEC_ERR_INPUT, "null argument");
  return guarded([&] {
    std::string text = json_text;
    *out = new stldec_tasks{tasks_bundle_from_json(text), std::move(text)};
    return STLDEC_OK;
  });
}

stldec_status stldec_tasks_to_json(const stldec_tasks* t, char** out) {
  if (!t) return fail(STLDEC_ERR_INPUT, "null argument");
  return guarded([&] { return emit_string(t->json_text, out); });
}

void stldec_tasks_free(stldec_tasks* t) { delete t; }

stldec_status stldec_simulate(const stldec_scenario* s, const stldec_options* opts,
                              stldec_report** out) {
  if (!s || !out) return fail(STLDEC_ERR_INPUT, "null argument");
  return guarded([&]() -> stldec_status {
    RunOptions ro = make_run_options(opts);
    RobustnessReport rep = run_scenario(s->impl, ro);
    // The report handle is produced even on failure so callers can inspect
    // the stage diagnostics.
    *out = new stldec_report{s->impl, std::move(rep)};
    if (!(*out)->impl.all_planned)
      return fail(STLDEC_ERR_INFEASIBLE, "planning failed for at least one team");
    if ((*out)->impl.soundness_violation)
      return fail(STLDEC_ERR_VIOLATION,
                  "soundness violation: local tasks hold, global does not");
    return STLDEC_OK;
  });
}

stldec_status stldec_report_to_json(const stldec_report* r, char** out) {
  if (!r) return fail(STLDEC_ERR_INPUT, "null argument");
  return guarded([&] { return emit_string(report_to_json(r->impl), out); });
}

int stldec_report_team_count(const stldec_report* r) {
  return r ? static_cast<int>(r->impl.teams.size()) : 0;
}

int stldec_report_all_planned(const stldec_report* r) {
  return r && r->impl.all_planned ? 1 : 0;
}

double stldec_report_local_robustness(const stldec_report* r, int team) {
  if (!r || team < 0 || team >= static_cast<int>(r->impl.teams.size())) return 0.0;
  return r->impl.teams[static_cast<size_t>(team)].local_robustness;
}

double stldec_report_global_robustness(const stldec_report* r) {
  return r ? r->impl.global_robustness : 0.0;
}

int stldec_report_soundness_violation(const stldec_report* r) {
  return r && r->impl.soundness_violation ? 1 : 0;
}

stldec_status stldec_report_trajectory_csv(const stldec_report* r, int team,
                                           char** out) {
  if (!r) return fail(STLDEC_ERR_INPUT, "null argument");
  return guarded([&]() -> stldec_status {
    if (team < 0) {
      if (!r->impl.global_trajectory)
        return fail(STLDEC_ERR_INFEASIBLE, "no global trajectory: planning failed");
      return emit_string(r->impl.global_trajectory->to_csv(), out);
    }
    if (team >= static_cast<int>(r->impl.team_trajectories.size()))
      return fail(STLDEC_ERR_INPUT, "team index out of range");
    const auto& z = r->impl.team_trajectories[static_cast<size_t>(team)];
    if (!z) return fail(STLDEC_ERR_INFEASIBLE, "no trajectory for this team");
    return emit_string(z->to_csv(), out);
  });
}

stldec_status stldec_report_boxes_csv(const stldec_report* r, char** out) {
  if (!r) return fail(STLDEC_ERR_INPUT, "null argument");
  return guarded([&] { return emit_string(boxes_to_csv(r->impl), out); });
}

stldec_status stldec_report_traces_csv(const stldec_report* r, char** out) {
  if (!r) return fail(STLDEC_ERR_INPUT, "null argument");
  return guarded([&] { return emit_string(traces_to_csv(r->scenario, r->impl), out); });
}

stldec_status stldec_report_tasks_json(const stldec_report* r, char** out) {
  if (!r) return fail(STLDEC_ERR_INPUT, "null argument");
  return guarded(
      [&] { return emit_string(tasks_bundle_to_json(r->scenario, r->impl), out); });
}

void stldec_report_free(stldec_report* r) { delete r; }

stldec_status stldec_check_csv(const stldec_tasks* t, const char* csv_text,
                               char** out_report_json, double* out_global_robustness,
                               double* out_min_local_robustness) {
  if (!t || !csv_text) return fail(STLDEC_ERR_INPUT, "null argument");
  return guarded([&]() -> stldec_status {
    Trajectory traj = Trajectory::from_csv(csv_text);
    CheckOutcome outcome = check_bundle(t->impl, traj);
    if (out_global_robustness) *out_global_robustness = outcome.global_robustness;
    if (out_min_local_robustness)
      *out_min_local_robustness = outcome.min_local_robustness;
    if (out_report_json) {
      stldec_status rc = emit_string(check_outcome_to_json(outcome), out_report_json);
      if (rc != STLDEC_OK) return rc;
    }
    if (!outcome.all_local_positive)
      return fail(STLDEC_ERR_VIOLATION, "a local task is not satisfied");
    if (outcome.soundness_violation)
      return fail(STLDEC_ERR_VIOLATION, "soundness violation");
    return STLDEC_OK;
  });
}

stldec_status stldec_fuzz(const stldec_options* opts, int count,
                          char** out_summary_json) {
  if (count < 1) return fail(STLDEC_ERR_INPUT, "count must be positive");
  return guarded([&]() -> stldec_status {
    FuzzConfig cfg;
    if (opts) {
      cfg.seed = opts->seed;
      if (opts->margin >= 0.0) cfg.margin = opts->margin;
      cfg.oracle_check = opts->oracle_check != 0;
      if (opts->log_level >= 0 && opts->log_level <= 2)
        set_log_level(static_cast<LogLevel>(opts->log_level));
    }
    cfg.count = count;
    FuzzStats stats = run_fuzz(cfg);
    if (out_summary_json) {
      stldec_status rc = emit_string(fuzz_summary_json(cfg, stats), out_summary_json);
      if (rc != STLDEC_OK) return rc;
    }
    if (!stats.ok())
      return fail(STLDEC_ERR_VIOLATION,
                  std::to_string(stats.violation_seeds.size()) +
                      " soundness violation(s) found");
    return STLDEC_OK;
  });
}

void stldec_string_free(char* s) { std::free(s); }

}  // extern "C"
