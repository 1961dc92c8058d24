// Copyright 2026 The regtrap Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "regtrap/cli.hpp"

namespace cli = regtrap::cli;

int main(int argc, char** argv) {
  CLI::App app{"Agent-based simulation of course regularity expiry and student attrition"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(regtrap::kToolVersion));

  cli::RunOptions run;
  std::string run_out;
  auto* c_run = app.add_subcommand("run", "Run replications and write per-seed results");
  c_run->add_option("--scenario", run.scenario, "Scenario JSON")->required();
  c_run->add_option("--curriculum", run.curriculum, "Curriculum CSV")->required();
  c_run->add_option("--archetypes", run.archetypes, "Archetype CSV")->required();
  c_run->add_option("--seeds", run.seeds, "Seed list, e.g. 1..100 or 1..3,7")
      ->capture_default_str();
  c_run->add_option("--out", run_out, "Output directory (default $REGTRAP_OUT_DIR or ./out)");
  c_run->add_option("--jobs", run.jobs, "Worker threads (default $REGTRAP_JOBS or 1)");
  c_run->add_flag("--events", run.events, "Also write per-agent event logs");

  std::string an_in, an_out;
  auto* c_an = app.add_subcommand("analyze", "Build summary tables from a run directory");
  c_an->add_option("results", an_in, "Run directory")->required();
  c_an->add_option("--out", an_out, "Output directory (default <results>/analysis)");

  std::vector<std::string> cmp_in;
  std::string cmp_out;
  auto* c_cmp = app.add_subcommand("compare", "Paired comparison of runs against the first");
  c_cmp->add_option("results", cmp_in, "Run directories, baseline first")->required()->expected(2, -1);
  c_cmp->add_option("--out", cmp_out, "Output directory (default $REGTRAP_OUT_DIR or ./out)");

  cli::CalibrateOptions cal;
  std::string cal_out;
  int cal_agents = 0;
  auto* c_cal = app.add_subcommand("calibrate", "Fit ability, belonging and stress reactivity");
  c_cal->add_option("--scenario", cal.scenario, "Scenario JSON")->required();
  c_cal->add_option("--curriculum", cal.curriculum, "Curriculum CSV")->required();
  c_cal->add_option("--archetypes", cal.archetypes, "Starting archetype CSV")->required();
  c_cal->add_option("--targets", cal.targets, "Target CSV: id,dropout_rate,mean_expiries")
      ->required();
  c_cal->add_option("--seeds", cal.seeds, "Seeds used for every evaluation")->capture_default_str();
  c_cal->add_option("--n-agents", cal_agents, "Override the scenario population size");
  c_cal->add_option("--max-evaluations", cal.max_evaluations, "Search budget")
      ->capture_default_str();
  c_cal->add_option("--out", cal_out, "Output directory (default $REGTRAP_OUT_DIR or ./out)");
  c_cal->add_option("--jobs", cal.jobs, "Worker threads (default $REGTRAP_JOBS or 1)");

  auto* c_def = app.add_subcommand("print-default-config", "Print the default scenario");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::kConfigError;
  }

  if (*c_run) {
    run.out_dir = run_out.empty() ? cli::out_dir_from_env("out") : run_out;
    if (c_run->count("--jobs") == 0) run.jobs = cli::jobs_from_env(1);
    return cli::cmd_run(run, std::cout, std::cerr);
  }
  if (*c_an) {
    if (an_out.empty()) an_out = an_in + "/analysis";
    return cli::cmd_analyze(an_in, an_out, std::cout, std::cerr);
  }
  if (*c_cmp) {
    return cli::cmd_compare(cmp_in, cmp_out.empty() ? cli::out_dir_from_env("out") : cmp_out,
                            std::cout, std::cerr);
  }
  if (*c_cal) {
    cal.out_dir = cal_out.empty() ? cli::out_dir_from_env("out") : cal_out;
    if (c_cal->count("--jobs") == 0) cal.jobs = cli::jobs_from_env(1);
    if (c_cal->count("--n-agents")) cal.n_agents = cal_agents;
    return cli::cmd_calibrate(cal, std::cout, std::cerr);
  }
  if (*c_def) return cli::cmd_print_default_config(std::cout);
  return cli::kConfigError;
}
