// Exercises the public C interface through the shared library, the way an
// external caller would.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <string>

#include "stldec/stldec.h"

namespace {

const char* kTwoAgentScenario = R"({
  "agents": [
    {"id": 1, "dim": 2, "dynamics": [[-0.5, 0.0], [1.0, -1.0]],
     "state_bound": 1.0, "input_bound": 5.0, "initial_state": "auto"},
    {"id": 2, "dim": 2, "dynamics": [[-0.5, 0.0], [1.0, -1.0]],
     "state_bound": 1.0, "input_bound": 5.0, "initial_state": "auto"}
  ],
  "teams": [[1], [2]],
  "predicates": {
    "close": {"family": "quadratic", "offset": 0.1,
              "center": [0.3, 0.5, 0.0, 0.0],
              "weight": [[1, 0, -1, 0], [0, 1, 0, -1], [-1, 0, 1, 0], [0, -1, 0, 1]],
              "footprint": [[1, 0], [1, 1], [2, 0], [2, 1]]}
  },
  "formula": "G[0,2] close",
  "horizon": 3.0,
  "dt": 0.1
})";

struct Cleanup {
  char* s = nullptr;
  ~Cleanup() { stldec_string_free(s); }
};

}  // namespace

TEST_CASE("version and status names") {
  CHECK(stldec_version() != nullptr);
  CHECK(std::strcmp(stldec_status_name(STLDEC_OK), "ok") == 0);
  CHECK(std::strcmp(stldec_status_name(STLDEC_ERR_INFEASIBLE), "infeasible") == 0);
  stldec_options opts;
  stldec_options_defaults(&opts);
  CHECK(opts.timing_mode == -1);
  CHECK(opts.seed == 42);
}

TEST_CASE("null arguments are input errors") {
  CHECK(stldec_scenario_load_file(nullptr, nullptr) == STLDEC_ERR_INPUT);
  CHECK(stldec_decompose(nullptr, nullptr, nullptr) == STLDEC_ERR_INPUT);
  CHECK(std::strlen(stldec_last_error()) > 0);
}

TEST_CASE("scenario errors carry messages") {
  stldec_scenario* s = nullptr;
  CHECK(stldec_scenario_load_file("/nonexistent/path.json", &s) == STLDEC_ERR_INPUT);
  CHECK(std::string(stldec_last_error()).find("cannot open") != std::string::npos);
  CHECK(stldec_scenario_load_string("{oops", &s) == STLDEC_ERR_INPUT);
  CHECK(std::string(stldec_last_error()).find("JSON") != std::string::npos);
}

TEST_CASE("decompose, serialize, reload, check") {
  stldec_scenario* scenario = nullptr;
  REQUIRE(stldec_scenario_load_string(kTwoAgentScenario, &scenario) == STLDEC_OK);

  stldec_tasks* tasks = nullptr;
  REQUIRE(stldec_decompose(scenario, nullptr, &tasks) == STLDEC_OK);
  Cleanup json;
  REQUIRE(stldec_tasks_to_json(tasks, &json.s) == STLDEC_OK);
  CHECK(std::string(json.s).find("local_tasks") != std::string::npos);

  stldec_tasks* reloaded = nullptr;
  REQUIRE(stldec_tasks_load_string(json.s, &reloaded) == STLDEC_OK);

  // simulate, then check the produced trajectory against the bundle
  stldec_report* report = nullptr;
  REQUIRE(stldec_simulate(scenario, nullptr, &report) == STLDEC_OK);
  CHECK(stldec_report_all_planned(report) == 1);
  CHECK(stldec_report_team_count(report) == 2);
  CHECK(stldec_report_global_robustness(report) > 0.0);
  CHECK(stldec_report_local_robustness(report, 0) > 0.0);
  CHECK(stldec_report_local_robustness(report, 1) > 0.0);
  CHECK(stldec_report_soundness_violation(report) == 0);

  Cleanup csv;
  REQUIRE(stldec_report_trajectory_csv(report, -1, &csv.s) == STLDEC_OK);
  Cleanup check_json;
  double global_rho = 0.0, min_local = 0.0;
  CHECK(stldec_check_csv(reloaded, csv.s, &check_json.s, &global_rho, &min_local) ==
        STLDEC_OK);
  CHECK(global_rho > 0.0);
  CHECK(min_local > 0.0);
  CHECK(std::string(check_json.s).find("global_robustness") != std::string::npos);

  // a parked-at-origin trajectory violates the relative-position task
  std::string zeros = "t,x1,x2,x3,x4\n";
  for (int k = 0; k <= 30; ++k)
    zeros += std::to_string(0.1 * k) + ",0,0,0,0\n";
  Cleanup bad_json;
  CHECK(stldec_check_csv(reloaded, zeros.c_str(), &bad_json.s, &global_rho,
                         &min_local) == STLDEC_ERR_VIOLATION);
  CHECK(min_local <= 0.0);

  // team trajectory export and plot data
  Cleanup team_csv;
  CHECK(stldec_report_trajectory_csv(report, 0, &team_csv.s) == STLDEC_OK);
  CHECK(std::string(team_csv.s).rfind("t,x1,x2", 0) == 0);
  CHECK(stldec_report_trajectory_csv(report, 7, &team_csv.s) == STLDEC_ERR_INPUT);
  Cleanup boxes;
  CHECK(stldec_report_boxes_csv(report, &boxes.s) == STLDEC_OK);
  CHECK(std::string(boxes.s).find("vertex") != std::string::npos);
  Cleanup traces;
  CHECK(stldec_report_traces_csv(report, &traces.s) == STLDEC_OK);
  CHECK(std::string(traces.s).find("global") != std::string::npos);

  stldec_report_free(report);
  stldec_tasks_free(reloaded);
  stldec_tasks_free(tasks);
  stldec_scenario_free(scenario);
}

TEST_CASE("bundled five-agent scenario loads from disk") {
  std::string path = std::string(STLDEC_SCENARIO_DIR) + "/five_agents.json";
  stldec_scenario* scenario = nullptr;
  REQUIRE(stldec_scenario_load_file(path.c_str(), &scenario) == STLDEC_OK);
  stldec_tasks* tasks = nullptr;
  REQUIRE(stldec_decompose(scenario, nullptr, &tasks) == STLDEC_OK);
  Cleanup json;
  REQUIRE(stldec_tasks_to_json(tasks, &json.s) == STLDEC_OK);
  // four global conjuncts, boxes for two teams each
  std::string text = json.s;
  size_t boxes = 0;
  for (size_t pos = 0;
       (pos = text.find("\"radius_adjusted\"", pos)) != std::string::npos; ++pos)
    ++boxes;
  CHECK(boxes == 8);
  stldec_tasks_free(tasks);
  stldec_scenario_free(scenario);
}

TEST_CASE("infeasible decomposition maps to the infeasible status") {
  const char* scenario_text = R"({
    "agents": [{"id": 1, "dim": 1, "dynamics": [[-1.0]], "state_bound": 1.0,
                "input_bound": 5.0}],
    "teams": [[1]],
    "predicates": {"bad": {"family": "quadratic", "offset": -1.0, "center": [0.0],
                            "weight": [[0.0]], "footprint": [[1, 0]]}},
    "formula": "G[0,1] bad",
    "horizon": 2.0,
    "dt": 0.1
  })";
  stldec_scenario* scenario = nullptr;
  REQUIRE(stldec_scenario_load_string(scenario_text, &scenario) == STLDEC_OK);
  stldec_tasks* tasks = nullptr;
  CHECK(stldec_decompose(scenario, nullptr, &tasks) == STLDEC_ERR_INFEASIBLE);
  CHECK(std::string(stldec_last_error()).find("level-set") != std::string::npos);
  stldec_scenario_free(scenario);
}

TEST_CASE("randomized soundness endpoint") {
  stldec_options opts;
  stldec_options_defaults(&opts);
  opts.seed = 5;
  Cleanup summary;
  CHECK(stldec_fuzz(&opts, 6, &summary.s) == STLDEC_OK);
  CHECK(std::string(summary.s).find("\"ok\": true") != std::string::npos);
  CHECK(stldec_fuzz(&opts, 0, nullptr) == STLDEC_ERR_INPUT);
}
