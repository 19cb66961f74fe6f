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

#include "hfdp/theory.h"

#include <cmath>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace hfdp {

absl::StatusOr<BiasParams> BiasParams::Create(double mu, double xi,
                                              double r_l) {
  if (!std::isfinite(mu) || !(xi > 0) || !std::isfinite(xi) ||
      !(r_l > 0) || !std::isfinite(r_l)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "need finite mu, xi > 0 and r_l > 0 (got %g, %g, %g)", mu, xi, r_l));
  }
  return BiasParams{mu, xi, r_l};
}

double ClippingBiasAnalytic(const BiasParams& params) {
  const double alpha = params.alpha();
  return params.xi * (NormalPdf(alpha) - alpha * NormalCdf(-alpha));
}

double TruncatedNormalUpperMean(const BiasParams& params) {
  const double alpha = params.alpha();
  return params.mu + params.xi * NormalPdf(alpha) / NormalCdf(-alpha);
}

absl::StatusOr<MonteCarloEstimate> ClippingBiasEmpirical(
    const LossSampler& sampler, double r_l, int64_t batch_size, int64_t trials,
    uint64_t seed) {
  if (trials < 10000) {
    return absl::InvalidArgumentError("need at least 1e4 trials");
  }
  if (batch_size < 1 || !(r_l > 0)) {
    return absl::InvalidArgumentError("need batch_size >= 1 and r_l > 0");
  }
  RandomStream rng(seed);
  // Welford accumulation of the per-trial bias.
  double mean = 0;
  double m2 = 0;
  for (int64_t k = 0; k < trials; ++k) {
    double excess = 0;
    for (int64_t i = 0; i < batch_size; ++i) {
      excess += std::max(sampler(rng) - r_l, 0.0);
    }
    const double value = excess / static_cast<double>(batch_size);
    const double delta = value - mean;
    mean += delta / static_cast<double>(k + 1);
    m2 += delta * (value - mean);
  }
  const double variance = m2 / static_cast<double>(trials - 1);
  return MonteCarloEstimate{mean, std::sqrt(variance / static_cast<double>(trials)),
                            trials};
}

double LossNoiseVariance(double sigma_l, double r_l, int64_t batch_size) {
  const double scale = sigma_l * r_l / static_cast<double>(batch_size);
  return scale * scale;
}

}  // namespace hfdp
