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

#ifndef HFDP_TESTS_GRADIENT_CHECK_H_
#define HFDP_TESTS_GRADIENT_CHECK_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "hfdp/dataset.h"
#include "hfdp/models.h"
#include "hfdp/rng.h"

namespace hfdp::testing {

struct GradientCheckResult {
  int pairs = 0;
  int failures = 0;
  double worst_relative = 0;
  std::string first_failure;
};

// Central differences with step 1e-6 on `pairs` random (w, example) pairs.
// A coordinate passes when the analytic and numeric derivatives agree to
// 1e-5 relative or 1e-8 absolute.
inline GradientCheckResult CheckGradients(const GradientOracle& model,
                                          const Dataset& data, int pairs,
                                          uint64_t seed) {
  constexpr double kStep = 1e-6;
  constexpr double kRelative = 1e-5;
  constexpr double kAbsolute = 1e-8;
  RandomStream rng(seed);
  GradientCheckResult result;
  const int64_t d = model.num_params();
  for (int k = 0; k < pairs; ++k) {
    Eigen::VectorXd w(d);
    rng.FillGaussian(w);
    const int64_t row = static_cast<int64_t>(rng.NextU64() % data.size());
    const int64_t rows[] = {row};
    const PerSampleBatch batch = *model.PerSampleGrads(w, data, rows);
    ++result.pairs;
    bool failed = false;
    for (int64_t j = 0; j < d; ++j) {
      Eigen::VectorXd up = w;
      Eigen::VectorXd down = w;
      up[j] += kStep;
      down[j] -= kStep;
      const double numeric = ((*model.PerSampleLosses(up, data, rows))[0] -
                              (*model.PerSampleLosses(down, data, rows))[0]) /
                             (2 * kStep);
      const double analytic = batch.gradients(0, j);
      const double error = std::abs(numeric - analytic);
      const double scale = std::max(std::abs(numeric), std::abs(analytic));
      if (scale > 0) result.worst_relative = std::max(result.worst_relative, error / scale);
      if (error > kRelative * scale && error > kAbsolute) {
        if (!failed && result.first_failure.empty()) {
          result.first_failure = "pair " + std::to_string(k) + " coord " +
                                 std::to_string(j) + ": analytic " +
                                 std::to_string(analytic) + " numeric " +
                                 std::to_string(numeric);
        }
        failed = true;
      }
    }
    if (failed) ++result.failures;
  }
  return result;
}

}  // namespace hfdp::testing

#endif  // HFDP_TESTS_GRADIENT_CHECK_H_
