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

#ifndef HFDP_TOOLS_EXPERIMENT_H_
#define HFDP_TOOLS_EXPERIMENT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "experiment_config.h"
#include "hfdp/trainer.h"
#include "nlohmann/json.hpp"

namespace hfdp::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInfeasible = 2,
  kExitDiverged = 3,
};

// FailedPrecondition and OutOfRange (an unreachable budget) are infeasible,
// Aborted is divergence, everything else is a usage error.
ExitCode ExitCodeFor(const absl::Status& status);

inline constexpr char kTraceHeader[] =
    "step,eta,r_l,priv_loss,true_loss,test_metric,fwd_passes";

// One header line plus one row per step. Missing or non-finite values are
// empty fields.
std::string TraceCsv(const std::vector<TraceRow>& trace);

struct SeedRun {
  uint64_t seed = 0;
  std::string directory;
  absl::Status termination;
  std::optional<double> final_metric;
  int64_t forward_passes = 0;
  nlohmann::json summary;
};

struct ExperimentReport {
  std::vector<SeedRun> runs;
  // Divergence if any seed diverged, OK otherwise.
  absl::Status status;
};

// Trains `repeats` seeds (seed, seed + 1, ...) and writes trace.csv and
// summary.json for each. With one repeat the files go straight into `out`;
// otherwise into out/seed_<s>/ plus out/sweep.json. Errors that stop every
// run (bad config, infeasible budget, unwritable output) are returned;
// divergence is reported in ExperimentReport::status.
absl::StatusOr<ExperimentReport> RunExperiment(const ExperimentConfig& config);

// Human-readable noise plan for `config` without training.
absl::StatusOr<std::string> PlanOnly(const ExperimentConfig& config);

}  // namespace hfdp::cli

#endif  // HFDP_TOOLS_EXPERIMENT_H_
