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

#ifndef HFDP_MODELS_H_
#define HFDP_MODELS_H_

// Desk-scale objectives with exact per-sample gradients.

#include <cstdint>
#include <memory>
#include <span>
#include <string_view>

#include <Eigen/Core>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "hfdp/dataset.h"
#include "hfdp/mechanisms.h"
#include "hfdp/rng.h"

namespace hfdp {

enum class ModelFamily {
  kQuadraticBowl,       // 0.5 |w - c_i|^2, c_i the feature row
  kLinearRegression,    // 0.5 (y_i - w.x_i)^2
  kLogisticRegression,  // log(1 + e^z) - y_i z, z = w.x_i
  kMlp,                 // tanh hidden layer, softmax cross-entropy
};

absl::StatusOr<ModelFamily> ParseModelFamily(std::string_view name);
std::string_view ModelFamilyName(ModelFamily family);

struct ModelKind {
  ModelFamily family = ModelFamily::kLogisticRegression;
  int64_t input_dim = 1;     // d for the bowl, p otherwise
  int64_t hidden_width = 0;  // mlp only
  int64_t classes = 2;       // mlp only

  static ModelKind QuadraticBowl(int64_t dim);
  static ModelKind LinearRegression(int64_t features);
  static ModelKind LogisticRegression(int64_t features);
  static ModelKind Mlp(int64_t features, int64_t hidden_width, int64_t classes);

  // Length of the parameter vector.
  int64_t num_params() const;
  bool is_classifier() const;
  absl::Status Validate() const;
};

// Per-sample losses and gradients for a model. Implementations are stateless
// and thread-safe.
class GradientOracle {
 public:
  virtual ~GradientOracle() = default;

  virtual const ModelKind& kind() const = 0;
  int64_t num_params() const { return kind().num_params(); }

  virtual absl::StatusOr<PerSampleBatch> PerSampleGrads(
      const Eigen::VectorXd& params, const Dataset& data,
      std::span<const int64_t> rows) const = 0;

  virtual absl::StatusOr<Eigen::VectorXd> PerSampleLosses(
      const Eigen::VectorXd& params, const Dataset& data,
      std::span<const int64_t> rows) const = 0;

  // Accuracy for classifiers, mean squared error otherwise.
  virtual absl::StatusOr<double> Evaluate(const Eigen::VectorXd& params,
                                          const Dataset& data,
                                          std::span<const int64_t> rows) const = 0;

  // Zeros, except for the mlp, whose weights start at N(0, 1/fan_in).
  virtual Eigen::VectorXd InitialParams(RandomStream& rng) const;
};

absl::StatusOr<std::unique_ptr<GradientOracle>> MakeOracle(const ModelKind& kind);

}  // namespace hfdp

#endif  // HFDP_MODELS_H_
