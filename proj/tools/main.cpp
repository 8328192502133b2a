// stldec command line: decompose | check | simulate over the C library API.
#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "stldec/stldec.h"

namespace {

int log_level_from_env() {
  const char* v = std::getenv("STLDEC_LOG");
  if (!v) return 0;
  std::string s = v;
  if (s == "debug") return 2;
  if (s == "info") return 1;
  return 0;
}

struct StringGuard {
  char* value = nullptr;
  ~StringGuard() { stldec_string_free(value); }
};

int report_error(const std::string& stage, stldec_status rc) {
  std::cerr << "stldec: " << stage << " failed (" << stldec_status_name(rc)
            << "): " << stldec_last_error() << "\n";
  return static_cast<int>(rc);
}

bool write_file(const std::filesystem::path& path, const char* content) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "stldec: cannot write " << path << "\n";
    return false;
  }
  out << content;
  return true;
}

std::string read_file(const std::string& path, bool* ok) {
  std::ifstream in(path);
  if (!in) {
    *ok = false;
    return {};
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  *ok = true;
  return text;
}

int apply_timing(const std::string& timing, stldec_options* opts) {
  if (timing.empty()) return 0;
  if (timing == "point") opts->timing_mode = 0;
  else if (timing == "interval") opts->timing_mode = 1;
  else {
    std::cerr << "stldec: --timing must be 'point' or 'interval'\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decomposes global STL tasks over agent teams into local tasks, "
               "plans satisfying trajectories, and checks robustness"};
  app.require_subcommand(1);

  stldec_options opts;
  stldec_options_defaults(&opts);
  opts.log_level = log_level_from_env();

  std::string scenario_path;
  std::string out_dir = ".";
  std::string timing;
  double margin = -1.0;
  std::uint64_t seed = 42;
  bool oracle = false;

  auto add_common = [&](CLI::App* cmd, bool scenario_required) {
    auto* opt = cmd->add_option("--scenario", scenario_path, "scenario JSON file");
    if (scenario_required) opt->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_option("--timing", timing, "timing mode for eventually tasks: point|interval");
    cmd->add_option("--margin", margin, "radius margin for strict satisfaction");
    cmd->add_option("--seed", seed, "seed for randomized runs");
    cmd->add_flag("--oracle", oracle, "cross-check small programs with the grid oracle");
  };

  CLI::App* decompose = app.add_subcommand(
      "decompose", "solve the box programs and write the local-task bundle");
  add_common(decompose, true);

  CLI::App* check = app.add_subcommand(
      "check", "evaluate a local-task bundle against a trajectory CSV");
  std::string tasks_path, trajectory_path;
  check->add_option("--tasks", tasks_path, "local-task bundle JSON")->required();
  check->add_option("--trajectory", trajectory_path, "trajectory CSV (t,x1,...,xn)")
      ->required();
  check->add_option("--out", out_dir, "output directory");

  CLI::App* simulate = app.add_subcommand(
      "simulate", "full pipeline: decompose, plan trajectories, evaluate robustness");
  add_common(simulate, false);
  int fuzz_count = 0;
  simulate->add_option("--fuzz", fuzz_count,
                       "run N randomized scenarios instead of the scenario file");

  CLI11_PARSE(app, argc, argv);

  if (apply_timing(timing, &opts) != 0) return 1;
  if (margin >= 0.0) opts.margin = margin;
  opts.seed = seed;
  opts.oracle_check = oracle ? 1 : 0;

  std::filesystem::path out_path(out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out_path, ec);

  if (decompose->parsed()) {
    stldec_scenario* scenario = nullptr;
    stldec_status rc = stldec_scenario_load_file(scenario_path.c_str(), &scenario);
    if (rc != STLDEC_OK) return report_error("scenario load", rc);

    stldec_tasks* tasks = nullptr;
    rc = stldec_decompose(scenario, &opts, &tasks);
    if (rc != STLDEC_OK) {
      stldec_scenario_free(scenario);
      return report_error("decompose", rc);
    }
    StringGuard json;
    rc = stldec_tasks_to_json(tasks, &json.value);
    if (rc == STLDEC_OK && write_file(out_path / "local_tasks.json", json.value))
      std::cout << "wrote " << (out_path / "local_tasks.json").string() << "\n";
    stldec_tasks_free(tasks);
    stldec_scenario_free(scenario);
    return rc == STLDEC_OK ? 0 : report_error("serialize", rc);
  }

  if (check->parsed()) {
    stldec_tasks* tasks = nullptr;
    stldec_status rc = stldec_tasks_load_file(tasks_path.c_str(), &tasks);
    if (rc != STLDEC_OK) return report_error("tasks load", rc);

    bool ok = false;
    std::string csv = read_file(trajectory_path, &ok);
    if (!ok) {
      stldec_tasks_free(tasks);
      std::cerr << "stldec: cannot read " << trajectory_path << "\n";
      return 1;
    }
    StringGuard json;
    double global_rho = 0.0, min_local = 0.0;
    rc = stldec_check_csv(tasks, csv.c_str(), &json.value, &global_rho, &min_local);
    stldec_tasks_free(tasks);
    if (rc != STLDEC_OK && rc != STLDEC_ERR_VIOLATION)
      return report_error("check", rc);
    if (json.value) std::cout << json.value << "\n";
    std::cout << "min local robustness: " << min_local << "\n";
    std::cout << "global robustness:    " << global_rho << "\n";
    if (rc == STLDEC_ERR_VIOLATION)
      std::cerr << "stldec: " << stldec_last_error() << "\n";
    return static_cast<int>(rc);
  }

  // simulate
  if (fuzz_count > 0) {
    StringGuard summary;
    stldec_status rc = stldec_fuzz(&opts, fuzz_count, &summary.value);
    if (summary.value) {
      std::cout << summary.value << "\n";
      write_file(out_path / "fuzz_summary.json", summary.value);
    }
    if (rc != STLDEC_OK && rc != STLDEC_ERR_VIOLATION)
      return report_error("fuzz", rc);
    if (rc == STLDEC_ERR_VIOLATION) {
      std::cerr << "stldec: " << stldec_last_error() << "\n";
      return static_cast<int>(rc);
    }
    return 0;
  }

  if (scenario_path.empty()) {
    std::cerr << "stldec: simulate needs --scenario (or --fuzz N)\n";
    return 1;
  }
  stldec_scenario* scenario = nullptr;
  stldec_status rc = stldec_scenario_load_file(scenario_path.c_str(), &scenario);
  if (rc != STLDEC_OK) return report_error("scenario load", rc);

  stldec_report* report = nullptr;
  rc = stldec_simulate(scenario, &opts, &report);
  if (report) {
    StringGuard json;
    if (stldec_report_to_json(report, &json.value) == STLDEC_OK)
      write_file(out_path / "report.json", json.value);
    StringGuard tasks_json;
    if (stldec_report_tasks_json(report, &tasks_json.value) == STLDEC_OK)
      write_file(out_path / "local_tasks.json", tasks_json.value);
    if (stldec_report_all_planned(report)) {
      StringGuard csv;
      if (stldec_report_trajectory_csv(report, -1, &csv.value) == STLDEC_OK)
        write_file(out_path / "trajectory_global.csv", csv.value);
      for (int l = 0; l < stldec_report_team_count(report); ++l) {
        StringGuard team_csv;
        if (stldec_report_trajectory_csv(report, l, &team_csv.value) == STLDEC_OK)
          write_file(out_path / ("trajectory_team_" + std::to_string(l) + ".csv"),
                     team_csv.value);
      }
      StringGuard boxes;
      if (stldec_report_boxes_csv(report, &boxes.value) == STLDEC_OK)
        write_file(out_path / "boxes.csv", boxes.value);
      StringGuard traces;
      if (stldec_report_traces_csv(report, &traces.value) == STLDEC_OK)
        write_file(out_path / "traces.csv", traces.value);

      std::cout << "global robustness: " << stldec_report_global_robustness(report)
                << "\n";
      for (int l = 0; l < stldec_report_team_count(report); ++l)
        std::cout << "team " << l << " local robustness: "
                  << stldec_report_local_robustness(report, l) << "\n";
    }
    stldec_report_free(report);
  }
  stldec_scenario_free(scenario);
  if (rc != STLDEC_OK) return report_error("simulate", rc);
  std::cout << "wrote outputs to " << out_path.string() << "\n";
  return 0;
}
