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

#include "hfdp/dataset.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "absl/strings/numbers.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_split.h"
#include "absl/strings/strip.h"
#include "hfdp/models.h"
#include "hfdp/rng.h"
#include "hfdp/status_macros.h"

namespace hfdp {
namespace {

void SplitRows(Dataset& data, double test_fraction, RandomStream& rng) {
  const int64_t n = data.size();
  const int64_t n_test = static_cast<int64_t>(std::floor(test_fraction * n));
  std::vector<int64_t> order = rng.Permutation(n);
  data.train.assign(order.begin(), order.end() - n_test);
  data.test.assign(order.end() - n_test, order.end());
}

// Flips exactly floor(fraction * |rows|) labels among `rows`.
void FlipLabels(Dataset& data, const std::vector<int64_t>& rows,
                double fraction, int64_t classes, RandomStream& rng) {
  const int64_t count =
      static_cast<int64_t>(std::floor(fraction * static_cast<double>(rows.size())));
  const std::vector<int64_t> order = rng.Permutation(static_cast<int64_t>(rows.size()));
  for (int64_t i = 0; i < count; ++i) {
    const int64_t row = rows[order[i]];
    const int64_t label = static_cast<int64_t>(data.targets[row]);
    const int64_t shift =
        1 + static_cast<int64_t>(rng.NextU64() % static_cast<uint64_t>(classes - 1));
    data.targets[row] = static_cast<double>((label + shift) % classes);
  }
}

}  // namespace

absl::Status Dataset::Validate() const {
  if (targets.size() != features.rows()) {
    return absl::InvalidArgumentError("targets and features disagree in length");
  }
  if (!features.allFinite() || !targets.allFinite()) {
    return absl::InvalidArgumentError("dataset has non-finite entries");
  }
  std::vector<char> seen(size(), 0);
  for (const auto* split : {&train, &test}) {
    for (int64_t row : *split) {
      if (row < 0 || row >= size()) {
        return absl::OutOfRangeError(absl::StrFormat("split row %d out of range", row));
      }
      if (seen[row]++) {
        return absl::InvalidArgumentError(
            absl::StrFormat("row %d appears twice in the splits", row));
      }
    }
  }
  return absl::OkStatus();
}

absl::StatusOr<Dataset> MakeSynthetic(const ModelKind& kind, int64_t n,
                                      uint64_t seed,
                                      const SyntheticOptions& options) {
  HFDP_RETURN_IF_ERROR(kind.Validate());
  if (n < 10) return absl::InvalidArgumentError("synthetic sets need n >= 10");
  if (!(options.test_fraction >= 0 && options.test_fraction < 1)) {
    return absl::InvalidArgumentError("test_fraction must lie in [0, 1)");
  }
  if (!(options.label_flip >= 0 && options.label_flip <= 1)) {
    return absl::InvalidArgumentError("label_flip must lie in [0, 1]");
  }
  const RandomStream root(seed);
  RandomStream rng = root.Fork(StreamId::kData);
  RandomStream split_rng = root.Fork(StreamId::kSplit);
  const int64_t p = kind.input_dim;
  const double scale = options.feature_scale;

  Dataset data;
  data.features.resize(n, p);
  data.targets.resize(n);
  for (int64_t i = 0; i < n; ++i) {
    for (int64_t j = 0; j < p; ++j) data.features(i, j) = scale * rng.Gaussian();
  }

  switch (kind.family) {
    case ModelFamily::kQuadraticBowl: {
      data.planted.resize(p);
      rng.FillGaussian(data.planted);
      for (int64_t i = 0; i < n; ++i) {
        data.features.row(i) = data.planted.transpose() +
                               (options.noise_std / std::max(scale, 1e-300)) *
                                   data.features.row(i);
        data.targets[i] = 0;
      }
      break;
    }
    case ModelFamily::kLinearRegression: {
      data.planted.resize(p);
      rng.FillGaussian(data.planted);
      for (int64_t i = 0; i < n; ++i) {
        data.targets[i] = data.features.row(i).dot(data.planted) +
                          options.noise_std * rng.Gaussian();
      }
      break;
    }
    case ModelFamily::kLogisticRegression: {
      data.planted.resize(p);
      rng.FillGaussian(data.planted);
      data.planted.normalize();
      for (int64_t i = 0; i < n; ++i) {
        const double z = data.features.row(i).dot(data.planted);
        const double push = options.margin * scale * (z > 0 ? 1.0 : -1.0);
        data.features.row(i) += push * data.planted.transpose();
        data.targets[i] = data.features.row(i).dot(data.planted) > 0 ? 1.0 : 0.0;
      }
      break;
    }
    case ModelFamily::kMlp: {
      const int64_t c = kind.classes;
      data.planted.resize(c * p);
      rng.FillGaussian(data.planted);
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>
          rule(data.planted.data(), c, p);
      for (int64_t i = 0; i < n; ++i) {
        Eigen::Index label = 0;
        (rule * data.features.row(i).transpose()).maxCoeff(&label);
        data.targets[i] = static_cast<double>(label);
      }
      break;
    }
  }

  SplitRows(data, options.test_fraction, split_rng);
  if (kind.is_classifier()) {
    FlipLabels(data, data.train, options.label_flip, kind.classes, rng);
    FlipLabels(data, data.test, options.label_flip, kind.classes, rng);
  }
  return data;
}

absl::StatusOr<Dataset> LoadCsv(const std::string& path, double test_fraction,
                                uint64_t seed) {
  if (!(test_fraction >= 0 && test_fraction < 1)) {
    return absl::InvalidArgumentError("test_fraction must lie in [0, 1)");
  }
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrFormat("cannot open '%s'", path));
  std::string line;
  if (!std::getline(in, line)) {
    return absl::InvalidArgumentError(absl::StrFormat("'%s' is empty", path));
  }
  const size_t columns = std::vector<absl::string_view>(absl::StrSplit(line, ',')).size();
  if (columns < 2) {
    return absl::InvalidArgumentError("need at least one feature and a target column");
  }
  std::vector<double> values;
  int64_t rows = 0;
  int64_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    absl::string_view view = absl::StripAsciiWhitespace(line);
    if (view.empty()) continue;
    const std::vector<absl::string_view> fields = absl::StrSplit(view, ',');
    if (fields.size() != columns) {
      return absl::InvalidArgumentError(absl::StrFormat(
          "%s:%d: expected %d fields, got %d", path, line_number, columns,
          fields.size()));
    }
    for (absl::string_view field : fields) {
      double value = 0;
      if (!absl::SimpleAtod(absl::StripAsciiWhitespace(field), &value)) {
        return absl::InvalidArgumentError(absl::StrFormat(
            "%s:%d: '%s' is not a number", path, line_number, field));
      }
      values.push_back(value);
    }
    ++rows;
  }
  if (rows == 0) return absl::InvalidArgumentError("no data rows");
  const int64_t p = static_cast<int64_t>(columns) - 1;
  Dataset data;
  data.features.resize(rows, p);
  data.targets.resize(rows);
  for (int64_t i = 0; i < rows; ++i) {
    for (int64_t j = 0; j < p; ++j) data.features(i, j) = values[i * (p + 1) + j];
    data.targets[i] = values[i * (p + 1) + p];
  }
  RandomStream split_rng = RandomStream(seed).Fork(StreamId::kSplit);
  SplitRows(data, test_fraction, split_rng);
  HFDP_RETURN_IF_ERROR(data.Validate());
  return data;
}

}  // namespace hfdp
