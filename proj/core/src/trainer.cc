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

#include "hfdp/trainer.h"

#include <cmath>
#include <limits>
#include <span>

#include "absl/strings/str_format.h"
#include "hfdp/rng.h"
#include "hfdp/status_macros.h"

namespace hfdp {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Sequential mini-batches over a seeded permutation of the training rows,
// reshuffled whenever fewer than B rows remain.
class BatchSampler {
 public:
  BatchSampler(const std::vector<int64_t>& rows, int64_t batch_size,
               RandomStream rng)
      : rows_(rows), batch_size_(batch_size), rng_(std::move(rng)) {
    Reshuffle();
  }

  std::span<const int64_t> Next() {
    if (position_ + batch_size_ > static_cast<int64_t>(order_.size())) {
      Reshuffle();
    }
    std::span<const int64_t> batch(order_.data() + position_, batch_size_);
    position_ += batch_size_;
    return batch;
  }

 private:
  void Reshuffle() {
    const std::vector<int64_t> perm =
        rng_.Permutation(static_cast<int64_t>(rows_.size()));
    order_.resize(perm.size());
    for (size_t i = 0; i < perm.size(); ++i) order_[i] = rows_[perm[i]];
    position_ = 0;
  }

  const std::vector<int64_t>& rows_;
  int64_t batch_size_;
  RandomStream rng_;
  std::vector<int64_t> order_;
  int64_t position_ = 0;
};

absl::StatusOr<double> PrivateMeanLoss(const GradientOracle& model,
                                       const Eigen::VectorXd& params,
                                       const Dataset& data,
                                       std::span<const int64_t> rows,
                                       double r_l, const NoisePlan& plan,
                                       NoiseKind kind, RandomStream& rng) {
  HFDP_ASSIGN_OR_RETURN(Eigen::VectorXd losses,
                        model.PerSampleLosses(params, data, rows));
  HFDP_ASSIGN_OR_RETURN(PrivatizedLoss released,
                        PrivatizeLoss(losses, r_l, plan.sigma_l, kind, rng));
  return released.value;
}

}  // namespace

absl::Status TrainerConfig::Validate() const {
  HFDP_RETURN_IF_ERROR(PrivacyBudget::Create(budget.epsilon, budget.delta).status());
  HFDP_RETURN_IF_ERROR(SamplingSpec::Create(spec.batch_size, spec.dataset_size,
                                            spec.steps, spec.interval)
                           .status());
  if (!(initial_eta > 0) || !(initial_r_l > 0)) {
    return absl::InvalidArgumentError(
        "initial learning rate and loss threshold must be positive");
  }
  if (clip_mode == ClipMode::kVanilla && !(clip_threshold > 0)) {
    return absl::InvalidArgumentError("vanilla clipping needs a positive threshold");
  }
  if (!(lr_policy.growth_cap > 1) || !(lr_policy.r_l_floor > 0) ||
      !(lr_policy.bracket_growth >= 1) || !(lr_policy.significance >= 0)) {
    return absl::InvalidArgumentError("invalid learning-rate policy");
  }
  if (eval_every < 0) return absl::InvalidArgumentError("eval_every must be >= 0");
  return absl::OkStatus();
}

absl::StatusOr<NoisePlan> ResolvePlan(const TrainerConfig& config) {
  HFDP_RETURN_IF_ERROR(config.Validate());
  if (config.noise_plan.has_value()) {
    const NoisePlan& plan = *config.noise_plan;
    if (!(plan.sigma_g >= 0) || !(plan.sigma_l >= 0)) {
      return absl::InvalidArgumentError("noise multipliers must be >= 0");
    }
    return plan;
  }
  if (config.adapt_lr) {
    return SolveNoisePlan(config.budget, config.spec, config.gamma);
  }
  return SolveGradientOnlyPlan(config.budget, config.spec, GdpAccountant());
}

absl::StatusOr<TrainResult> Train(const TrainerConfig& config,
                                  const GradientOracle& model,
                                  const Dataset& data) {
  HFDP_ASSIGN_OR_RETURN(NoisePlan plan, ResolvePlan(config));
  const SamplingSpec& spec = config.spec;
  if (static_cast<int64_t>(data.train.size()) != spec.dataset_size) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "sampling spec says N=%d but the training split has %d rows",
        spec.dataset_size, data.train.size()));
  }
  const int64_t expected_loss_releases =
      config.adapt_lr ? spec.loss_releases() : 0;
  if (plan.gradient_releases != spec.steps ||
      plan.loss_releases != expected_loss_releases) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "noise plan covers %d gradient and %d loss releases, the run makes "
        "%d and %d",
        plan.gradient_releases, plan.loss_releases, spec.steps,
        expected_loss_releases));
  }

  const RandomStream root(config.seed);
  RandomStream gradient_noise = root.Fork(StreamId::kGradientNoise);
  RandomStream loss_noise = root.Fork(StreamId::kLossNoise);
  RandomStream init_rng = root.Fork(StreamId::kInit);
  BatchSampler sampler(data.train, spec.batch_size, root.Fork(StreamId::kBatchOrder));

  TrainResult result;
  result.plan = plan;
  result.ledger.planned_gradient_releases = plan.gradient_releases;
  result.ledger.planned_loss_releases = plan.loss_releases;
  Eigen::VectorXd w = config.initial_params.has_value()
                          ? *config.initial_params
                          : model.InitialParams(init_rng);
  if (w.size() != model.num_params()) {
    return absl::InvalidArgumentError("initial parameters have the wrong length");
  }
  Optimizer optimizer(config.optimizer, w.size());
  LrState lr{config.initial_eta, config.initial_r_l, 0, false};
  double privatized_loss = kNaN;
  int64_t passes = 0;
  result.trace.reserve(spec.steps);

  auto finish = [&](absl::Status termination) {
    result.params = w;
    result.forward_passes = passes;
    result.ledger.gradient_noise_draws = gradient_noise.draw_calls();
    result.ledger.loss_noise_draws = loss_noise.draw_calls();
    result.termination = std::move(termination);
    return std::move(result);
  };
  auto diverged = [&](int64_t step, const char* what) {
    return finish(absl::AbortedError(
        absl::StrFormat("diverged at step %d: %s is not finite", step, what)));
  };

  for (int64_t t = 0; t < spec.steps; ++t) {
    const std::span<const int64_t> rows = sampler.Next();
    HFDP_ASSIGN_OR_RETURN(PerSampleBatch batch, model.PerSampleGrads(w, data, rows));
    ++passes;
    TraceRow row;
    row.step = t;
    if (!batch.losses.allFinite()) {
      row.true_loss = kNaN;
      row.eta = lr.eta;
      row.r_l = lr.r_l;
      row.privatized_loss = privatized_loss;
      row.forward_passes = passes;
      result.trace.push_back(row);
      return diverged(t, "a per-sample loss");
    }
    row.true_loss = config.record_true_loss ? batch.losses.mean() : kNaN;

    absl::StatusOr<PrivatizedGradient> m_dp =
        config.clip_mode == ClipMode::kAutomatic
            ? PrivatizeGradientAuto(batch, plan.sigma_g, gradient_noise)
            : PrivatizeGradientVanilla(batch, config.clip_threshold,
                                       plan.sigma_g, gradient_noise);
    HFDP_RETURN_IF_ERROR(m_dp.status());
    ++result.ledger.gradient_releases;
    const Eigen::VectorXd direction = optimizer.Direction(m_dp->value, w);

    if (config.adapt_lr && t % spec.interval == 0) {
      LossProbe probe;
      probe.eta_probe = lr.eta;
      probe.r_l_used = lr.r_l;
      probe.noise_std =
          LossNoiseStd(plan.sigma_l, lr.r_l, spec.batch_size, config.noise_kind);
      const Eigen::VectorXd backward = w + lr.eta * direction;
      const Eigen::VectorXd forward = w - lr.eta * direction;
      HFDP_ASSIGN_OR_RETURN(
          probe.l_minus, PrivateMeanLoss(model, backward, data, rows, lr.r_l,
                                         plan, config.noise_kind, loss_noise));
      HFDP_ASSIGN_OR_RETURN(
          PrivatizedLoss center,
          PrivatizeLoss(batch.losses, lr.r_l, plan.sigma_l, config.noise_kind,
                        loss_noise));
      probe.l_zero = center.value;
      HFDP_ASSIGN_OR_RETURN(
          probe.l_plus, PrivateMeanLoss(model, forward, data, rows, lr.r_l,
                                        plan, config.noise_kind, loss_noise));
      passes += 2;
      result.ledger.loss_releases += 3;
      ++result.ledger.probe_events;

      ProbeRecord record;
      record.step = t;
      record.probe = probe;
      record.fit = FitQuadratic(probe);
      lr = UpdateLr(lr, record.fit, config.lr_policy);
      lr = UpdateRl(lr, probe, config.lr_policy);
      record.eta_after = lr.eta;
      record.r_l_after = lr.r_l;
      result.probes.push_back(record);
      privatized_loss = probe.l_zero;
    }

    w -= lr.eta * direction;
    row.eta = lr.eta;
    row.r_l = lr.r_l;
    row.privatized_loss = privatized_loss;
    row.forward_passes = passes;
    if (!w.allFinite()) {
      result.trace.push_back(row);
      return diverged(t, "the parameter vector");
    }
    const bool last = t + 1 == spec.steps;
    if (!data.test.empty() &&
        (last || (config.eval_every > 0 && (t + 1) % config.eval_every == 0))) {
      HFDP_ASSIGN_OR_RETURN(double metric, model.Evaluate(w, data, data.test));
      row.test_metric = metric;
      if (last) result.final_metric = metric;
    }
    result.trace.push_back(row);
  }
  if (!result.ledger.matches_plan()) {
    return absl::InternalError("release ledger does not match the noise plan");
  }
  return finish(absl::OkStatus());
}

}  // namespace hfdp
