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

#ifndef HFDP_DATASET_H_
#define HFDP_DATASET_H_

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace hfdp {

struct ModelKind;

// Examples plus a train/test split. Targets hold real values for regression
// and class indices (0, 1, ...) for classification.
struct Dataset {
  Eigen::MatrixXd features;  // N x p
  Eigen::VectorXd targets;   // N
  std::vector<int64_t> train;
  std::vector<int64_t> test;
  // Parameters the synthetic generator planted; empty for loaded data.
  Eigen::VectorXd planted;

  int64_t size() const { return features.rows(); }
  int64_t num_features() const { return features.cols(); }
  // Shapes agree, entries are finite, splits are disjoint and in range.
  absl::Status Validate() const;
};

struct SyntheticOptions {
  // Standard deviation of each raw feature.
  double feature_scale = 1.0;
  // Binary classification: every point is pushed margin * feature_scale away
  // from the planted hyperplane.
  double margin = 0.1;
  // Fraction of labels flipped, applied exactly within each split.
  double label_flip = 0.05;
  // Regression target noise; for the bowl, the spread of the centers.
  double noise_std = 0.1;
  double test_fraction = 0.2;
};

// Seeded synthetic data for `kind`:
//   quadratic bowl      rows are centers planted + noise_std * N(0, I)
//   linear regression   y = planted . x + noise_std * N(0, 1)
//   logistic regression label = [planted . x > 0] for a unit planted vector
//   mlp                 label = argmax of a planted linear map
// Classification sets get exactly floor(label_flip * |split|) flipped labels
// in each split. Requires n >= 10.
absl::StatusOr<Dataset> MakeSynthetic(const ModelKind& kind, int64_t n,
                                      uint64_t seed,
                                      const SyntheticOptions& options = {});

// Reads a comma-separated file with a header row, feature columns first and
// the target column last, then splits it with a seeded permutation.
absl::StatusOr<Dataset> LoadCsv(const std::string& path, double test_fraction,
                                uint64_t seed);

}  // namespace hfdp

#endif  // HFDP_DATASET_H_
