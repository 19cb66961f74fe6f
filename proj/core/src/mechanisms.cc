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

#include "hfdp/mechanisms.h"

#include <algorithm>
#include <cmath>

#include "absl/strings/str_format.h"

namespace hfdp {
namespace {

absl::Status CheckNoise(double sigma) {
  if (!(sigma >= 0) || !std::isfinite(sigma)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("noise multiplier must be finite and >= 0, got %g", sigma));
  }
  return absl::OkStatus();
}

// sum += sigma * threshold * N(0, I), then sum /= B. The noise is drawn even
// when sigma is 0 so the stream advances the same way; the product is skipped
// then, which keeps an infinite threshold with zero noise finite.
void AddNoise(double sigma, double threshold, double batch_size,
              RandomStream& rng, Eigen::VectorXd& sum) {
  Eigen::VectorXd noise(sum.size());
  rng.FillGaussian(noise);
  if (sigma > 0) sum += (sigma * threshold) * noise;
  sum /= batch_size;
}

}  // namespace

absl::Status PerSampleBatch::Validate() const {
  if (losses.size() < 1) return absl::InvalidArgumentError("empty batch");
  if (gradients.rows() != losses.size()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "%d losses but %d gradient rows", losses.size(), gradients.rows()));
  }
  if (gradients.cols() < 1) {
    return absl::InvalidArgumentError("gradients have no columns");
  }
  return absl::OkStatus();
}

double ClipFactor(double x, double threshold) {
  const double magnitude = std::abs(x);
  if (magnitude <= threshold) return 1.0;
  return threshold / magnitude;
}

double ClipScalar(double x, double threshold) {
  return std::clamp(x, -threshold, threshold);
}

absl::StatusOr<PrivatizedGradient> PrivatizeGradientAuto(
    const PerSampleBatch& batch, double sigma_g, RandomStream& rng) {
  if (auto s = batch.Validate(); !s.ok()) return s;
  if (auto s = CheckNoise(sigma_g); !s.ok()) return s;
  const Eigen::VectorXd scale =
      (1.0 / batch.gradients.rowwise().norm().array().max(kNormFloor)).matrix();
  PrivatizedGradient out;
  out.value = batch.gradients.transpose() * scale;
  AddNoise(sigma_g, 1.0, static_cast<double>(batch.batch_size()), rng, out.value);
  out.sigma_g_used = sigma_g;
  out.clip_mode = ClipMode::kAutomatic;
  return out;
}

absl::StatusOr<PrivatizedGradient> PrivatizeGradientVanilla(
    const PerSampleBatch& batch, double r_g, double sigma_g,
    RandomStream& rng) {
  if (auto s = batch.Validate(); !s.ok()) return s;
  if (auto s = CheckNoise(sigma_g); !s.ok()) return s;
  if (!(r_g > 0)) {
    return absl::InvalidArgumentError("clipping threshold must be positive");
  }
  const Eigen::VectorXd norms = batch.gradients.rowwise().norm();
  const Eigen::VectorXd scale =
      norms.unaryExpr([r_g](double n) { return ClipFactor(n, r_g); });
  PrivatizedGradient out;
  out.value = batch.gradients.transpose() * scale;
  AddNoise(sigma_g, r_g, static_cast<double>(batch.batch_size()), rng,
           out.value);
  out.sigma_g_used = sigma_g;
  out.clip_mode = ClipMode::kVanilla;
  out.clip_threshold = r_g;
  return out;
}

absl::StatusOr<PrivatizedLoss> PrivatizeLoss(
    const Eigen::Ref<const Eigen::VectorXd>& losses, double r_l,
    double sigma_l, NoiseKind noise_kind, RandomStream& rng) {
  if (losses.size() < 1) return absl::InvalidArgumentError("empty batch");
  if (!(r_l > 0)) {
    return absl::InvalidArgumentError("loss clipping threshold must be positive");
  }
  if (auto s = CheckNoise(sigma_l); !s.ok()) return s;
  double sum = 0;
  for (double loss : losses) sum += ClipScalar(loss, r_l);
  const double zeta =
      noise_kind == NoiseKind::kGaussian ? rng.Gaussian() : rng.Laplace();
  PrivatizedLoss out;
  out.value = (sum + sigma_l * r_l * zeta) / static_cast<double>(losses.size());
  out.r_l_used = r_l;
  out.sigma_l_used = sigma_l;
  out.noise_kind = noise_kind;
  return out;
}

double LossNoiseStd(double sigma_l, double r_l, int64_t batch_size,
                    NoiseKind noise_kind) {
  const double scale = sigma_l * r_l / static_cast<double>(batch_size);
  return noise_kind == NoiseKind::kGaussian ? scale : std::sqrt(2.0) * scale;
}

}  // namespace hfdp
