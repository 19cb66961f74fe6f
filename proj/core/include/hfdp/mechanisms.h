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

#ifndef HFDP_MECHANISMS_H_
#define HFDP_MECHANISMS_H_

// Privatization primitives: the noisy per-sample-normalized gradient sum and
// the clipped noisy loss mean.

#include <cstdint>

#include <Eigen/Core>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "hfdp/rng.h"

namespace hfdp {

enum class ClipMode { kAutomatic, kVanilla };
enum class NoiseKind { kGaussian, kLaplace };

// Per-sample losses and gradients of one mini-batch. Row i of `gradients` is
// the gradient of `losses[i]`.
struct PerSampleBatch {
  Eigen::VectorXd losses;     // B
  Eigen::MatrixXd gradients;  // B x d

  int64_t batch_size() const { return losses.size(); }
  int64_t dim() const { return gradients.cols(); }
  absl::Status Validate() const;
};

struct PrivatizedGradient {
  Eigen::VectorXd value;
  double sigma_g_used = 0;
  ClipMode clip_mode = ClipMode::kAutomatic;
  double clip_threshold = 0;  // R_g; unused in automatic mode
};

struct PrivatizedLoss {
  double value = 0;
  double r_l_used = 0;
  double sigma_l_used = 0;
  NoiseKind noise_kind = NoiseKind::kGaussian;
};

// Norm floor for automatic clipping.
inline constexpr double kNormFloor = 1e-12;

// min(threshold / |x|, 1); 1 when x == 0.
double ClipFactor(double x, double threshold);

// ClipFactor(x, threshold) * x, computed as a clamp so the result never
// exceeds the threshold by a rounding error.
double ClipScalar(double x, double threshold);

// [sum_i g_i / max(|g_i|, kNormFloor) + sigma_g * z] / B, z ~ N(0, I).
absl::StatusOr<PrivatizedGradient> PrivatizeGradientAuto(
    const PerSampleBatch& batch, double sigma_g, RandomStream& rng);

// [sum_i min(r_g / |g_i|, 1) g_i + sigma_g * r_g * z] / B.
absl::StatusOr<PrivatizedGradient> PrivatizeGradientVanilla(
    const PerSampleBatch& batch, double r_g, double sigma_g,
    RandomStream& rng);

// [sum_i min(r_l / |L_i|, 1) L_i + sigma_l * r_l * zeta] / B, where zeta is a
// standard normal or a standard Laplace variate.
absl::StatusOr<PrivatizedLoss> PrivatizeLoss(
    const Eigen::Ref<const Eigen::VectorXd>& losses, double r_l,
    double sigma_l, NoiseKind noise_kind, RandomStream& rng);

// Standard deviation of the noise PrivatizeLoss adds to the mean.
double LossNoiseStd(double sigma_l, double r_l, int64_t batch_size,
                    NoiseKind noise_kind);

}  // namespace hfdp

#endif  // HFDP_MECHANISMS_H_
