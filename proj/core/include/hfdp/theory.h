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

#ifndef HFDP_THEORY_H_
#define HFDP_THEORY_H_

// Bias of the clipped loss mean: a closed form for normally distributed
// losses and a Monte Carlo estimator for any loss distribution.

#include <cstdint>
#include <functional>

#include "absl/status/statusor.h"
#include "hfdp/normal.h"
#include "hfdp/rng.h"

namespace hfdp {

// Losses L ~ N(mu, xi^2) clipped at r_l.
struct BiasParams {
  double mu = 0;
  double xi = 1;
  double r_l = 1;

  static absl::StatusOr<BiasParams> Create(double mu, double xi, double r_l);
  // (r_l - mu) / xi
  double alpha() const { return (r_l - mu) / xi; }
};

// E[max(L - r_l, 0)] = xi * (phi(alpha) - alpha * (1 - Phi(alpha))).
double ClippingBiasAnalytic(const BiasParams& params);

// E[L | L > r_l] = mu + xi * phi(alpha) / (1 - Phi(alpha)).
double TruncatedNormalUpperMean(const BiasParams& params);

struct MonteCarloEstimate {
  double mean = 0;
  double std_error = 0;
  int64_t trials = 0;
};

using LossSampler = std::function<double(RandomStream&)>;

// Monte Carlo estimate of the clipping bias of a B-sample loss mean without
// noise: each trial draws `batch_size` losses and records the mean of
// max(L_i - r_l, 0). Requires trials >= 1e4.
absl::StatusOr<MonteCarloEstimate> ClippingBiasEmpirical(
    const LossSampler& sampler, double r_l, int64_t batch_size, int64_t trials,
    uint64_t seed);

// Variance (sigma_l * r_l / B)^2 of the Gaussian loss-release noise.
double LossNoiseVariance(double sigma_l, double r_l, int64_t batch_size);

}  // namespace hfdp

#endif  // HFDP_THEORY_H_
