// Copyright 2026 The hfdp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// hfdp: trains with the hyperparameter-free DP optimizer and writes
// trace.csv and summary.json, or prints the noise plan with --plan-only.

#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/strings/str_cat.h"
#include "experiment.h"
#include "experiment_config.h"

namespace {

using hfdp::cli::ExitCode;

int Fail(const absl::Status& status) {
  std::fprintf(stderr, "hfdp: %s\n", std::string(status.message()).c_str());
  return hfdp::cli::ExitCodeFor(status);
}

int Run(int argc, char** argv) {
  CLI::App app{"Hyperparameter-free differentially private training."};
  std::string config_path;
  bool plan_only = false;
  std::vector<std::string> settings;
  // Flag name -> config key; values are applied after the config file.
  const std::vector<std::pair<std::string, std::string>> flag_keys = {
      {"--epsilon", "epsilon"},     {"--delta", "delta"},
      {"--model", "model"},         {"--dataset", "dataset"},
      {"--optimizer", "optimizer"}, {"--k", "k"},
      {"--gamma", "gamma"},         {"--steps", "steps"},
      {"--batch", "batch"},         {"--seed", "seed"},
      {"--repeats", "repeats"},     {"--out", "out"},
      {"--clip-mode", "clip_mode"}, {"--noise-kind", "noise_kind"},
  };
  std::map<std::string, std::string> flag_values;
  std::vector<CLI::Option*> flag_options;
  for (const auto& [flag, key] : flag_keys) {
    flag_options.push_back(
        app.add_option(flag, flag_values[key], absl::StrCat("config key ", key)));
  }
  app.add_option("--config", config_path, "flat key = value config file");
  app.add_option("--set", settings, "extra key=value override (repeatable)");
  app.add_flag("--plan-only", plan_only, "print the noise plan and exit");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? hfdp::cli::kExitOk : hfdp::cli::kExitUsage;
  }

  hfdp::cli::ExperimentConfig config;
  if (!config_path.empty()) {
    if (auto s = hfdp::cli::ApplyConfigFile(config, config_path); !s.ok()) {
      return Fail(absl::InvalidArgumentError(s.message()));
    }
  }
  for (size_t i = 0; i < flag_keys.size(); ++i) {
    if (flag_options[i]->count() == 0) continue;
    const std::string& key = flag_keys[i].second;
    if (auto s = hfdp::cli::ApplySetting(config, key, flag_values[key]); !s.ok()) {
      return Fail(s);
    }
  }
  for (const std::string& setting : settings) {
    const size_t eq = setting.find('=');
    if (eq == std::string::npos) {
      return Fail(absl::InvalidArgumentError(
          absl::StrCat("--set expects key=value, got '", setting, "'")));
    }
    if (auto s = hfdp::cli::ApplySetting(config, setting.substr(0, eq),
                                         setting.substr(eq + 1));
        !s.ok()) {
      return Fail(s);
    }
  }

  if (plan_only) {
    absl::StatusOr<std::string> text = hfdp::cli::PlanOnly(config);
    if (!text.ok()) return Fail(text.status());
    std::fputs(text->c_str(), stdout);
    return hfdp::cli::kExitOk;
  }
  absl::StatusOr<hfdp::cli::ExperimentReport> report =
      hfdp::cli::RunExperiment(config);
  if (!report.ok()) return Fail(report.status());
  for (const hfdp::cli::SeedRun& run : report->runs) {
    std::printf("seed %llu: %s, final metric %s, %lld forward passes -> %s\n",
                static_cast<unsigned long long>(run.seed),
                run.termination.ok() ? "ok"
                                     : std::string(run.termination.message()).c_str(),
                run.final_metric.has_value()
                    ? hfdp::cli::FormatNumber(*run.final_metric).c_str()
                    : "n/a",
                static_cast<long long>(run.forward_passes), run.directory.c_str());
  }
  if (!report->status.ok()) return Fail(report->status);
  return hfdp::cli::kExitOk;
}

}  // namespace

int main(int argc, char** argv) { return Run(argc, argv); }
