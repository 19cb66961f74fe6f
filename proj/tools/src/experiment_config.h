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

#ifndef HFDP_TOOLS_EXPERIMENT_CONFIG_H_
#define HFDP_TOOLS_EXPERIMENT_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "hfdp/dataset.h"
#include "hfdp/models.h"
#include "hfdp/trainer.h"

namespace hfdp::cli {

// Everything one experiment needs. Only `epsilon` has no default.
struct ExperimentConfig {
  std::optional<double> epsilon;
  std::optional<double> delta;  // empty means N_train^-1.1

  // Data and model.
  std::string dataset = "synthetic";  // or a CSV path
  std::string model = "logistic";
  int64_t n = 12500;  // synthetic rows before the train/test split
  int64_t features = 20;
  int64_t hidden = 16;
  int64_t classes = 3;
  double feature_scale = 1.0;
  double margin = 0.1;
  double label_flip = 0.05;
  double noise_std = 0.1;
  double test_fraction = 0.2;
  std::optional<uint64_t> data_seed;  // defaults to `seed`

  // Training.
  std::string optimizer = "adamw";
  int64_t k = 5;
  double gamma = 1.01;
  int64_t steps = 1000;
  int64_t batch = 100;
  uint64_t seed = 0;
  std::string clip_mode = "automatic";
  double clip_threshold = 1.0;
  std::string noise_kind = "gaussian";
  double eta0 = 1e-4;
  double r_l0 = 1.0;
  double growth_cap = 10;
  std::string r_l_rule = "sum";
  double significance = 2;
  int64_t eval_every = 0;
  bool true_loss = true;

  // Output.
  int64_t repeats = 1;
  std::string out = "hfdp_out";
};

// Shortest decimal that parses back to exactly `value`; "nan"/"inf" for
// non-finite values.
std::string FormatNumber(double value);

// Parses `key = value` lines. Blank lines and text after '#' are ignored.
absl::StatusOr<std::vector<std::pair<std::string, std::string>>> ParseConfigText(
    const std::string& text);

// Sets one key; unknown keys and malformed values are InvalidArgument.
absl::Status ApplySetting(ExperimentConfig& config, const std::string& key,
                          const std::string& value);

// Reads and applies a config file.
absl::Status ApplyConfigFile(ExperimentConfig& config, const std::string& path);

// Every key in the file format, in a stable order.
const std::vector<std::string>& ConfigKeys();

// The config as (key, value) strings; parsing them back reproduces it.
std::vector<std::pair<std::string, std::string>> ConfigEntries(
    const ExperimentConfig& config);

// Builds or loads the dataset for `config` (seeded by data_seed or seed).
absl::StatusOr<Dataset> LoadDataset(const ExperimentConfig& config);

absl::StatusOr<ModelKind> ResolveModel(const ExperimentConfig& config,
                                       const Dataset& data);

// Trainer settings for one seed. `train_size` fixes N and the default delta.
absl::StatusOr<TrainerConfig> ResolveTrainer(const ExperimentConfig& config,
                                             int64_t train_size, uint64_t seed);

}  // namespace hfdp::cli

#endif  // HFDP_TOOLS_EXPERIMENT_CONFIG_H_
