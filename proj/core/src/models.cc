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

#include "hfdp/models.h"

#include <cmath>
#include <string>
#include <utility>

#include "absl/strings/str_format.h"
#include "hfdp/status_macros.h"

namespace hfdp {
namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// log(1 + e^z) without overflow.
double Softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

double Sigmoid(double z) {
  if (z >= 0) return 1 / (1 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1 + e);
}

absl::Status CheckShapes(const ModelKind& kind, const Eigen::VectorXd& params,
                         const Dataset& data, std::span<const int64_t> rows) {
  if (params.size() != kind.num_params()) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "expected %d parameters, got %d", kind.num_params(), params.size()));
  }
  if (data.num_features() != kind.input_dim) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "model expects %d features, dataset has %d", kind.input_dim,
        data.num_features()));
  }
  if (data.targets.size() != data.size()) {
    return absl::InvalidArgumentError("targets and features disagree in length");
  }
  for (int64_t row : rows) {
    if (row < 0 || row >= data.size()) {
      return absl::OutOfRangeError(absl::StrFormat("row %d out of range", row));
    }
    if (kind.family == ModelFamily::kMlp) {
      const double label = data.targets[row];
      if (!(label >= 0 && label < kind.classes) || label != std::floor(label)) {
        return absl::InvalidArgumentError(
            absl::StrFormat("row %d has invalid class label %g", row, label));
      }
    }
  }
  return absl::OkStatus();
}

// Shared driver: `Sample` computes the loss of one example and, when asked,
// writes its gradient.
template <typename Model>
class OracleBase : public GradientOracle {
 public:
  explicit OracleBase(ModelKind kind) : kind_(std::move(kind)) {}

  const ModelKind& kind() const override { return kind_; }

  absl::StatusOr<PerSampleBatch> PerSampleGrads(
      const Eigen::VectorXd& params, const Dataset& data,
      std::span<const int64_t> rows) const override {
    HFDP_RETURN_IF_ERROR(CheckShapes(kind_, params, data, rows));
    PerSampleBatch batch;
    const int64_t b = static_cast<int64_t>(rows.size());
    batch.losses.resize(b);
    batch.gradients.resize(b, kind_.num_params());
    Eigen::VectorXd grad(kind_.num_params());
    for (int64_t i = 0; i < b; ++i) {
      batch.losses[i] = self().Sample(params, data, rows[i], &grad);
      batch.gradients.row(i) = grad.transpose();
    }
    return batch;
  }

  absl::StatusOr<Eigen::VectorXd> PerSampleLosses(
      const Eigen::VectorXd& params, const Dataset& data,
      std::span<const int64_t> rows) const override {
    HFDP_RETURN_IF_ERROR(CheckShapes(kind_, params, data, rows));
    Eigen::VectorXd losses(static_cast<int64_t>(rows.size()));
    for (size_t i = 0; i < rows.size(); ++i) {
      losses[i] = self().Sample(params, data, rows[i], nullptr);
    }
    return losses;
  }

  absl::StatusOr<double> Evaluate(const Eigen::VectorXd& params,
                                  const Dataset& data,
                                  std::span<const int64_t> rows) const override {
    HFDP_RETURN_IF_ERROR(CheckShapes(kind_, params, data, rows));
    if (rows.empty()) return absl::InvalidArgumentError("empty evaluation split");
    double total = 0;
    for (int64_t row : rows) total += self().Metric(params, data, row);
    return total / static_cast<double>(rows.size());
  }

 protected:
  const ModelKind kind_;

 private:
  const Model& self() const { return static_cast<const Model&>(*this); }
};

class QuadraticBowl final : public OracleBase<QuadraticBowl> {
 public:
  using OracleBase::OracleBase;

  double Sample(const Eigen::VectorXd& w, const Dataset& data, int64_t row,
                Eigen::VectorXd* grad) const {
    const Eigen::VectorXd diff = w - data.features.row(row).transpose();
    if (grad != nullptr) *grad = diff;
    return 0.5 * diff.squaredNorm();
  }
  double Metric(const Eigen::VectorXd& w, const Dataset& data,
                int64_t row) const {
    return (w - data.features.row(row).transpose()).squaredNorm();
  }
};

class LinearRegression final : public OracleBase<LinearRegression> {
 public:
  using OracleBase::OracleBase;

  double Sample(const Eigen::VectorXd& w, const Dataset& data, int64_t row,
                Eigen::VectorXd* grad) const {
    const double residual = data.targets[row] - data.features.row(row).dot(w);
    if (grad != nullptr) *grad = -residual * data.features.row(row).transpose();
    return 0.5 * residual * residual;
  }
  double Metric(const Eigen::VectorXd& w, const Dataset& data,
                int64_t row) const {
    const double residual = data.targets[row] - data.features.row(row).dot(w);
    return residual * residual;
  }
};

class LogisticRegression final : public OracleBase<LogisticRegression> {
 public:
  using OracleBase::OracleBase;

  double Sample(const Eigen::VectorXd& w, const Dataset& data, int64_t row,
                Eigen::VectorXd* grad) const {
    const double z = data.features.row(row).dot(w);
    const double y = data.targets[row];
    if (grad != nullptr) {
      *grad = (Sigmoid(z) - y) * data.features.row(row).transpose();
    }
    return Softplus(z) - y * z;
  }
  double Metric(const Eigen::VectorXd& w, const Dataset& data,
                int64_t row) const {
    const bool predicted = data.features.row(row).dot(w) > 0;
    const bool actual = data.targets[row] > 0.5;
    return predicted == actual ? 1.0 : 0.0;
  }
};

// Parameter layout: W1 (h x p, row-major), b1 (h), W2 (c x h, row-major),
// b2 (c).
class Mlp final : public OracleBase<Mlp> {
 public:
  using OracleBase::OracleBase;

  double Sample(const Eigen::VectorXd& w, const Dataset& data, int64_t row,
                Eigen::VectorXd* grad) const {
    const int64_t p = kind_.input_dim;
    const int64_t h = kind_.hidden_width;
    const int64_t c = kind_.classes;
    Eigen::Map<const RowMajorMatrix> w1(w.data(), h, p);
    Eigen::Map<const Eigen::VectorXd> b1(w.data() + h * p, h);
    Eigen::Map<const RowMajorMatrix> w2(w.data() + h * p + h, c, h);
    Eigen::Map<const Eigen::VectorXd> b2(w.data() + h * p + h + c * h, c);

    const Eigen::VectorXd x = data.features.row(row).transpose();
    const Eigen::VectorXd hidden = (w1 * x + b1).array().tanh().matrix();
    const Eigen::VectorXd logits = w2 * hidden + b2;
    const double top = logits.maxCoeff();
    const double log_norm =
        top + std::log((logits.array() - top).exp().sum());
    const int64_t label = static_cast<int64_t>(data.targets[row]);
    const double loss = log_norm - logits[label];
    if (grad == nullptr) return loss;

    Eigen::VectorXd d_logits = (logits.array() - log_norm).exp().matrix();
    d_logits[label] -= 1;
    const Eigen::VectorXd d_pre =
        ((w2.transpose() * d_logits).array() * (1 - hidden.array().square()))
            .matrix();
    grad->resize(w.size());
    Eigen::Map<RowMajorMatrix>(grad->data(), h, p) = d_pre * x.transpose();
    grad->segment(h * p, h) = d_pre;
    Eigen::Map<RowMajorMatrix>(grad->data() + h * p + h, c, h) =
        d_logits * hidden.transpose();
    grad->segment(h * p + h + c * h, c) = d_logits;
    return loss;
  }

  double Metric(const Eigen::VectorXd& w, const Dataset& data,
                int64_t row) const {
    const int64_t p = kind_.input_dim;
    const int64_t h = kind_.hidden_width;
    const int64_t c = kind_.classes;
    Eigen::Map<const RowMajorMatrix> w1(w.data(), h, p);
    Eigen::Map<const Eigen::VectorXd> b1(w.data() + h * p, h);
    Eigen::Map<const RowMajorMatrix> w2(w.data() + h * p + h, c, h);
    Eigen::Map<const Eigen::VectorXd> b2(w.data() + h * p + h + c * h, c);
    const Eigen::VectorXd hidden =
        (w1 * data.features.row(row).transpose() + b1).array().tanh().matrix();
    Eigen::Index predicted = 0;
    (w2 * hidden + b2).maxCoeff(&predicted);
    return predicted == static_cast<Eigen::Index>(data.targets[row]) ? 1.0 : 0.0;
  }

  Eigen::VectorXd InitialParams(RandomStream& rng) const override {
    const int64_t p = kind_.input_dim;
    const int64_t h = kind_.hidden_width;
    const int64_t c = kind_.classes;
    Eigen::VectorXd w = Eigen::VectorXd::Zero(kind_.num_params());
    for (int64_t i = 0; i < h * p; ++i) w[i] = rng.Gaussian() / std::sqrt(p);
    for (int64_t i = 0; i < c * h; ++i) {
      w[h * p + h + i] = rng.Gaussian() / std::sqrt(h);
    }
    return w;
  }
};

}  // namespace

absl::StatusOr<ModelFamily> ParseModelFamily(std::string_view name) {
  if (name == "bowl" || name == "quadratic_bowl") {
    return ModelFamily::kQuadraticBowl;
  }
  if (name == "linear" || name == "linear_regression") {
    return ModelFamily::kLinearRegression;
  }
  if (name == "logistic" || name == "logistic_regression") {
    return ModelFamily::kLogisticRegression;
  }
  if (name == "mlp") return ModelFamily::kMlp;
  return absl::InvalidArgumentError(absl::StrFormat(
      "unknown model '%s' (expected bowl, linear, logistic or mlp)", std::string(name)));
}

std::string_view ModelFamilyName(ModelFamily family) {
  switch (family) {
    case ModelFamily::kQuadraticBowl:
      return "bowl";
    case ModelFamily::kLinearRegression:
      return "linear";
    case ModelFamily::kLogisticRegression:
      return "logistic";
    case ModelFamily::kMlp:
      return "mlp";
  }
  return "unknown";
}

ModelKind ModelKind::QuadraticBowl(int64_t dim) {
  return {ModelFamily::kQuadraticBowl, dim, 0, 0};
}
ModelKind ModelKind::LinearRegression(int64_t features) {
  return {ModelFamily::kLinearRegression, features, 0, 0};
}
ModelKind ModelKind::LogisticRegression(int64_t features) {
  return {ModelFamily::kLogisticRegression, features, 0, 2};
}
ModelKind ModelKind::Mlp(int64_t features, int64_t hidden_width,
                         int64_t classes) {
  return {ModelFamily::kMlp, features, hidden_width, classes};
}

int64_t ModelKind::num_params() const {
  if (family != ModelFamily::kMlp) return input_dim;
  return hidden_width * input_dim + hidden_width + classes * hidden_width +
         classes;
}

bool ModelKind::is_classifier() const {
  return family == ModelFamily::kLogisticRegression ||
         family == ModelFamily::kMlp;
}

absl::Status ModelKind::Validate() const {
  if (input_dim < 1) return absl::InvalidArgumentError("input_dim must be >= 1");
  if (family == ModelFamily::kMlp && (hidden_width < 1 || classes < 2)) {
    return absl::InvalidArgumentError(
        "mlp needs hidden_width >= 1 and classes >= 2");
  }
  return absl::OkStatus();
}

Eigen::VectorXd GradientOracle::InitialParams(RandomStream&) const {
  return Eigen::VectorXd::Zero(num_params());
}

absl::StatusOr<std::unique_ptr<GradientOracle>> MakeOracle(
    const ModelKind& kind) {
  HFDP_RETURN_IF_ERROR(kind.Validate());
  switch (kind.family) {
    case ModelFamily::kQuadraticBowl:
      return std::make_unique<QuadraticBowl>(kind);
    case ModelFamily::kLinearRegression:
      return std::make_unique<LinearRegression>(kind);
    case ModelFamily::kLogisticRegression:
      return std::make_unique<LogisticRegression>(kind);
    case ModelFamily::kMlp:
      return std::make_unique<Mlp>(kind);
  }
  return absl::InvalidArgumentError("unknown model family");
}

}  // namespace hfdp
