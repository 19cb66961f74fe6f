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

#ifndef HFDP_TRAINER_H_
#define HFDP_TRAINER_H_

// The private training loop: every step privatizes the batch gradient and
// takes an optimizer step; every K steps (starting at step 0) three
// privatized loss probes refit the learning rate and the loss threshold.

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "hfdp/accountant.h"
#include "hfdp/dataset.h"
#include "hfdp/gen_lr.h"
#include "hfdp/mechanisms.h"
#include "hfdp/models.h"
#include "hfdp/optimizer.h"

namespace hfdp {

struct TrainerConfig {
  PrivacyBudget budget;
  SamplingSpec spec;
  double gamma = 1.01;
  OptimizerKind optimizer = OptimizerKind::kAdamW;
  uint64_t seed = 0;
  ClipMode clip_mode = ClipMode::kAutomatic;
  double clip_threshold = 1.0;  // R_g, vanilla mode only
  NoiseKind noise_kind = NoiseKind::kGaussian;
  double initial_eta = 1e-4;
  double initial_r_l = 1.0;
  LrPolicy lr_policy;
  // false: no probes and no loss releases; eta stays at initial_eta.
  bool adapt_lr = true;
  // false: the non-private batch loss is never computed for the trace.
  bool record_true_loss = true;
  // Test metric every `eval_every` steps and after the last step; 0 means
  // after the last step only.
  int64_t eval_every = 0;
  // Use this plan instead of calibrating one from `budget`. Its release
  // counts must match the run.
  std::optional<NoisePlan> noise_plan;
  // Starting parameters; the model's default initialization when empty.
  std::optional<Eigen::VectorXd> initial_params;

  absl::Status Validate() const;
};

struct TraceRow {
  int64_t step = 0;
  double eta = 0;  // learning rate used for this step's update
  double r_l = 0;  // loss threshold after this step's probe, if any
  // Latest privatized center loss; carried forward between probes and NaN
  // before the first one.
  double privatized_loss = 0;
  // Diagnostic only, never consumed by the update; NaN when disabled.
  double true_loss = 0;
  std::optional<double> test_metric;
  int64_t forward_passes = 0;  // cumulative
};

struct ProbeRecord {
  int64_t step = 0;
  LossProbe probe;
  QuadFit fit;
  double eta_after = 0;
  double r_l_after = 0;
};

// Releases the run actually made, next to what the plan was calibrated for.
struct ReleaseLedger {
  int64_t gradient_releases = 0;
  int64_t loss_releases = 0;
  int64_t probe_events = 0;
  int64_t planned_gradient_releases = 0;
  int64_t planned_loss_releases = 0;
  int64_t gradient_noise_draws = 0;
  int64_t loss_noise_draws = 0;

  bool matches_plan() const {
    return gradient_releases == planned_gradient_releases &&
           loss_releases == planned_loss_releases;
  }
};

struct TrainResult {
  NoisePlan plan;
  std::vector<TraceRow> trace;
  std::vector<ProbeRecord> probes;
  Eigen::VectorXd params;
  ReleaseLedger ledger;
  int64_t forward_passes = 0;
  std::optional<double> final_metric;
  // OK, or Aborted when a loss or the parameters became non-finite; the trace
  // then ends at the failing step.
  absl::Status termination;
};

// Noise plan `config` implies: the explicit plan if set, otherwise one
// calibrated to the budget.
absl::StatusOr<NoisePlan> ResolvePlan(const TrainerConfig& config);

// Runs the loop on `data.train`; the test metric uses `data.test`. Errors
// are returned for invalid input and infeasible plans; divergence is reported
// through TrainResult::termination.
absl::StatusOr<TrainResult> Train(const TrainerConfig& config,
                                  const GradientOracle& model,
                                  const Dataset& data);

}  // namespace hfdp

#endif  // HFDP_TRAINER_H_
