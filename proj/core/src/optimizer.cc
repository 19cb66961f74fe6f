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

#include "hfdp/optimizer.h"

#include <cmath>
#include <string>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"

namespace hfdp {

absl::StatusOr<OptimizerKind> ParseOptimizerKind(std::string_view name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adamw") return OptimizerKind::kAdamW;
  return absl::InvalidArgumentError(
      absl::StrFormat("unknown optimizer '%s' (expected sgd or adamw)", std::string(name)));
}

std::string_view OptimizerName(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adamw";
}

Optimizer::Optimizer(OptimizerKind kind, int64_t dim)
    : kind_(kind),
      first_moment_(Eigen::VectorXd::Zero(dim)),
      second_moment_(Eigen::VectorXd::Zero(dim)) {}

Eigen::VectorXd Optimizer::Direction(const Eigen::VectorXd& gradient,
                                     const Eigen::VectorXd& params) {
  ++steps_;
  if (kind_ == OptimizerKind::kSgd) return gradient;
  using C = AdamWConstants;
  first_moment_ = C::kBeta1 * first_moment_ + (1 - C::kBeta1) * gradient;
  second_moment_ = C::kBeta2 * second_moment_ +
                   (1 - C::kBeta2) * gradient.cwiseProduct(gradient);
  const double t = static_cast<double>(steps_);
  const double correction1 = 1 - std::pow(C::kBeta1, t);
  const double correction2 = 1 - std::pow(C::kBeta2, t);
  const Eigen::ArrayXd m_hat = first_moment_.array() / correction1;
  const Eigen::ArrayXd v_hat = second_moment_.array() / correction2;
  return (m_hat / (v_hat.sqrt() + C::kEpsilon)).matrix() +
         C::kWeightDecay * params;
}

}  // namespace hfdp
