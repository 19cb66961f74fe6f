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

#ifndef HFDP_OPTIMIZER_H_
#define HFDP_OPTIMIZER_H_

// Post-processing of the privatized gradient into a descent direction.

#include <cstdint>
#include <string_view>

#include <Eigen/Core>

#include "absl/status/statusor.h"

namespace hfdp {

enum class OptimizerKind { kSgd, kAdamW };

// Fixed AdamW coefficients.
struct AdamWConstants {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kWeightDecay = 0.01;
  static constexpr double kEpsilon = 1e-8;
};

absl::StatusOr<OptimizerKind> ParseOptimizerKind(std::string_view name);
std::string_view OptimizerName(OptimizerKind kind);

// Turns m_DP into G_DP; the caller applies w <- w - eta * G_DP.
class Optimizer {
 public:
  Optimizer(OptimizerKind kind, int64_t dim);

  // SGD returns `gradient` unchanged. AdamW returns the bias-corrected
  // m_hat / (sqrt(v_hat) + eps) plus the decoupled decay term
  // weight_decay * params.
  Eigen::VectorXd Direction(const Eigen::VectorXd& gradient,
                            const Eigen::VectorXd& params);

  OptimizerKind kind() const { return kind_; }
  int64_t steps() const { return steps_; }

 private:
  OptimizerKind kind_;
  int64_t steps_ = 0;
  Eigen::VectorXd first_moment_;
  Eigen::VectorXd second_moment_;
};

}  // namespace hfdp

#endif  // HFDP_OPTIMIZER_H_
