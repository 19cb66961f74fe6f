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

#include "experiment_config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "absl/strings/ascii.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_split.h"
#include "absl/strings/string_view.h"
#include "hfdp/gen_lr.h"
#include "hfdp/mechanisms.h"
#include "hfdp/optimizer.h"
#include "hfdp/status_macros.h"

namespace hfdp::cli {
namespace {

absl::Status BadValue(const std::string& key, const std::string& value,
                      const char* expected) {
  return absl::InvalidArgumentError(
      absl::StrCat("config key '", key, "': '", value, "' is not ", expected));
}

absl::StatusOr<double> ParseDouble(const std::string& key, const std::string& value) {
  double out = 0;
  if (!absl::SimpleAtod(value, &out) || std::isnan(out)) {
    return BadValue(key, value, "a number");
  }
  return out;
}

absl::StatusOr<int64_t> ParseInt(const std::string& key, const std::string& value) {
  int64_t out = 0;
  if (!absl::SimpleAtoi(value, &out)) return BadValue(key, value, "an integer");
  return out;
}

absl::StatusOr<uint64_t> ParseSeed(const std::string& key, const std::string& value) {
  uint64_t out = 0;
  if (!absl::SimpleAtoi(value, &out)) {
    return BadValue(key, value, "a non-negative integer");
  }
  return out;
}

absl::StatusOr<bool> ParseBool(const std::string& key, const std::string& value) {
  bool out = false;
  if (!absl::SimpleAtob(value, &out)) return BadValue(key, value, "true or false");
  return out;
}

absl::Status OneOf(const std::string& key, const std::string& value,
                   std::initializer_list<const char*> allowed) {
  for (const char* a : allowed) {
    if (value == a) return absl::OkStatus();
  }
  std::string list;
  for (const char* a : allowed) absl::StrAppend(&list, list.empty() ? "" : ", ", a);
  return absl::InvalidArgumentError(
      absl::StrCat("config key '", key, "': '", value, "' is not one of ", list));
}

std::string FormatOptional(const std::optional<double>& v, const char* empty) {
  return v.has_value() ? FormatNumber(*v) : empty;
}

struct Field {
  std::string key;
  std::function<absl::Status(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

#define HFDP_DOUBLE_FIELD(name)                                              \
  Field {                                                                    \
    #name,                                                                   \
        [](ExperimentConfig& c, const std::string& v) -> absl::Status {      \
          HFDP_ASSIGN_OR_RETURN(c.name, ParseDouble(#name, v));              \
          return absl::OkStatus();                                           \
        },                                                                   \
        [](const ExperimentConfig& c) { return FormatNumber(c.name); }       \
  }
#define HFDP_INT_FIELD(name)                                                 \
  Field {                                                                    \
    #name,                                                                   \
        [](ExperimentConfig& c, const std::string& v) -> absl::Status {      \
          HFDP_ASSIGN_OR_RETURN(c.name, ParseInt(#name, v));                 \
          return absl::OkStatus();                                           \
        },                                                                   \
        [](const ExperimentConfig& c) { return absl::StrCat(c.name); }       \
  }
#define HFDP_CHOICE_FIELD(name, ...)                                         \
  Field {                                                                    \
    #name,                                                                   \
        [](ExperimentConfig& c, const std::string& v) -> absl::Status {      \
          HFDP_RETURN_IF_ERROR(OneOf(#name, v, {__VA_ARGS__}));              \
          c.name = v;                                                        \
          return absl::OkStatus();                                           \
        },                                                                   \
        [](const ExperimentConfig& c) { return c.name; }                     \
  }

const std::vector<Field>& Fields() {
  static const std::vector<Field>* fields = new std::vector<Field>{
      {"epsilon",
       [](ExperimentConfig& c, const std::string& v) -> absl::Status {
         HFDP_ASSIGN_OR_RETURN(c.epsilon, ParseDouble("epsilon", v));
         return absl::OkStatus();
       },
       [](const ExperimentConfig& c) { return FormatOptional(c.epsilon, ""); }},
      {"delta",
       [](ExperimentConfig& c, const std::string& v) -> absl::Status {
         if (v == "auto") {
           c.delta.reset();
           return absl::OkStatus();
         }
         HFDP_ASSIGN_OR_RETURN(c.delta, ParseDouble("delta", v));
         return absl::OkStatus();
       },
       [](const ExperimentConfig& c) { return FormatOptional(c.delta, "auto"); }},
      {"dataset",
       [](ExperimentConfig& c, const std::string& v) -> absl::Status {
         if (v.empty()) return BadValue("dataset", v, "'synthetic' or a path");
         c.dataset = v;
         return absl::OkStatus();
       },
       [](const ExperimentConfig& c) { return c.dataset; }},
      {"model",
       [](ExperimentConfig& c, const std::string& v) -> absl::Status {
         HFDP_RETURN_IF_ERROR(ParseModelFamily(v).status());
         c.model = v;
         return absl::OkStatus();
       },
       [](const ExperimentConfig& c) { return c.model; }},
      HFDP_INT_FIELD(n),
      HFDP_INT_FIELD(features),
      HFDP_INT_FIELD(hidden),
      HFDP_INT_FIELD(classes),
      HFDP_DOUBLE_FIELD(feature_scale),
      HFDP_DOUBLE_FIELD(margin),
      HFDP_DOUBLE_FIELD(label_flip),
      HFDP_DOUBLE_FIELD(noise_std),
      HFDP_DOUBLE_FIELD(test_fraction),
      {"data_seed",
       [](ExperimentConfig& c, const std::string& v) -> absl::Status {
         HFDP_ASSIGN_OR_RETURN(c.data_seed, ParseSeed("data_seed", v));
         return absl::OkStatus();
       },
       [](const ExperimentConfig& c) {
         return c.data_seed.has_value() ? absl::StrCat(*c.data_seed) : "seed";
       }},
      HFDP_CHOICE_FIELD(optimizer, "sgd", "adamw"),
      HFDP_INT_FIELD(k),
      HFDP_DOUBLE_FIELD(gamma),
      HFDP_INT_FIELD(steps),
      HFDP_INT_FIELD(batch),
      {"seed",
       [](ExperimentConfig& c, const std::string& v) -> absl::Status {
         HFDP_ASSIGN_OR_RETURN(c.seed, ParseSeed("seed", v));
         return absl::OkStatus();
       },
       [](const ExperimentConfig& c) { return absl::StrCat(c.seed); }},
      HFDP_CHOICE_FIELD(clip_mode, "automatic", "vanilla"),
      HFDP_DOUBLE_FIELD(clip_threshold),
      HFDP_CHOICE_FIELD(noise_kind, "gaussian", "laplace"),
      HFDP_DOUBLE_FIELD(eta0),
      HFDP_DOUBLE_FIELD(r_l0),
      HFDP_DOUBLE_FIELD(growth_cap),
      HFDP_CHOICE_FIELD(r_l_rule, "sum", "center"),
      HFDP_DOUBLE_FIELD(significance),
      HFDP_INT_FIELD(eval_every),
      {"true_loss",
       [](ExperimentConfig& c, const std::string& v) -> absl::Status {
         HFDP_ASSIGN_OR_RETURN(c.true_loss, ParseBool("true_loss", v));
         return absl::OkStatus();
       },
       [](const ExperimentConfig& c) { return c.true_loss ? "true" : "false"; }},
      HFDP_INT_FIELD(repeats),
      {"out",
       [](ExperimentConfig& c, const std::string& v) -> absl::Status {
         if (v.empty()) return BadValue("out", v, "a directory");
         c.out = v;
         return absl::OkStatus();
       },
       [](const ExperimentConfig& c) { return c.out; }},
  };
  return *fields;
}

#undef HFDP_DOUBLE_FIELD
#undef HFDP_INT_FIELD
#undef HFDP_CHOICE_FIELD

}  // namespace

std::string FormatNumber(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buffer[64];
  const auto [end, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, end);
}

absl::StatusOr<std::vector<std::pair<std::string, std::string>>> ParseConfigText(
    const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  int line_number = 0;
  for (absl::string_view line : absl::StrSplit(text, '\n')) {
    ++line_number;
    line = line.substr(0, line.find('#'));
    line = absl::StripAsciiWhitespace(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == absl::string_view::npos) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_number, ": expected key = value"));
    }
    const absl::string_view key = absl::StripAsciiWhitespace(line.substr(0, eq));
    const absl::string_view value = absl::StripAsciiWhitespace(line.substr(eq + 1));
    if (key.empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("config line ", line_number, ": empty key"));
    }
    entries.emplace_back(std::string(key), std::string(value));
  }
  return entries;
}

absl::Status ApplySetting(ExperimentConfig& config, const std::string& key,
                          const std::string& value) {
  for (const Field& field : Fields()) {
    if (field.key == key) return field.set(config, value);
  }
  return absl::InvalidArgumentError(absl::StrCat("unknown config key '", key, "'"));
}

absl::Status ApplyConfigFile(ExperimentConfig& config, const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot read config ", path));
  std::stringstream text;
  text << in.rdbuf();
  HFDP_ASSIGN_OR_RETURN(auto entries, ParseConfigText(text.str()));
  for (const auto& [key, value] : entries) {
    if (auto s = ApplySetting(config, key, value); !s.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(path, ": ", s.message()));
    }
  }
  return absl::OkStatus();
}

const std::vector<std::string>& ConfigKeys() {
  static const std::vector<std::string>* keys = [] {
    auto* out = new std::vector<std::string>;
    for (const Field& f : Fields()) out->push_back(f.key);
    return out;
  }();
  return *keys;
}

std::vector<std::pair<std::string, std::string>> ConfigEntries(
    const ExperimentConfig& config) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const Field& f : Fields()) out.emplace_back(f.key, f.get(config));
  return out;
}

absl::StatusOr<Dataset> LoadDataset(const ExperimentConfig& config) {
  const uint64_t seed = config.data_seed.value_or(config.seed);
  if (config.dataset != "synthetic") {
    return LoadCsv(config.dataset, config.test_fraction, seed);
  }
  HFDP_ASSIGN_OR_RETURN(ModelFamily family, ParseModelFamily(config.model));
  ModelKind kind;
  switch (family) {
    case ModelFamily::kQuadraticBowl:
      kind = ModelKind::QuadraticBowl(config.features);
      break;
    case ModelFamily::kLinearRegression:
      kind = ModelKind::LinearRegression(config.features);
      break;
    case ModelFamily::kLogisticRegression:
      kind = ModelKind::LogisticRegression(config.features);
      break;
    case ModelFamily::kMlp:
      kind = ModelKind::Mlp(config.features, config.hidden, config.classes);
      break;
  }
  SyntheticOptions options;
  options.feature_scale = config.feature_scale;
  options.margin = config.margin;
  options.label_flip = config.label_flip;
  options.noise_std = config.noise_std;
  options.test_fraction = config.test_fraction;
  return MakeSynthetic(kind, config.n, seed, options);
}

absl::StatusOr<ModelKind> ResolveModel(const ExperimentConfig& config,
                                       const Dataset& data) {
  HFDP_ASSIGN_OR_RETURN(ModelFamily family, ParseModelFamily(config.model));
  const int64_t p = data.num_features();
  ModelKind kind;
  switch (family) {
    case ModelFamily::kQuadraticBowl:
      kind = ModelKind::QuadraticBowl(p);
      break;
    case ModelFamily::kLinearRegression:
      kind = ModelKind::LinearRegression(p);
      break;
    case ModelFamily::kLogisticRegression:
      kind = ModelKind::LogisticRegression(p);
      break;
    case ModelFamily::kMlp:
      kind = ModelKind::Mlp(p, config.hidden, config.classes);
      break;
  }
  HFDP_RETURN_IF_ERROR(kind.Validate());
  return kind;
}

absl::StatusOr<TrainerConfig> ResolveTrainer(const ExperimentConfig& config,
                                             int64_t train_size, uint64_t seed) {
  if (!config.epsilon.has_value()) {
    return absl::InvalidArgumentError("epsilon is required");
  }
  TrainerConfig trainer;
  const double delta = config.delta.value_or(DefaultDelta(train_size));
  HFDP_ASSIGN_OR_RETURN(trainer.budget, PrivacyBudget::Create(*config.epsilon, delta));
  HFDP_ASSIGN_OR_RETURN(trainer.spec, SamplingSpec::Create(config.batch, train_size,
                                                           config.steps, config.k));
  trainer.gamma = config.gamma;
  HFDP_ASSIGN_OR_RETURN(trainer.optimizer, ParseOptimizerKind(config.optimizer));
  trainer.seed = seed;
  trainer.clip_mode =
      config.clip_mode == "vanilla" ? ClipMode::kVanilla : ClipMode::kAutomatic;
  trainer.clip_threshold = config.clip_threshold;
  trainer.noise_kind =
      config.noise_kind == "laplace" ? NoiseKind::kLaplace : NoiseKind::kGaussian;
  trainer.initial_eta = config.eta0;
  trainer.initial_r_l = config.r_l0;
  trainer.lr_policy.growth_cap = config.growth_cap;
  trainer.lr_policy.r_l_rule =
      config.r_l_rule == "center" ? RlRule::kCenterLoss : RlRule::kProbeSum;
  trainer.lr_policy.significance = config.significance;
  trainer.record_true_loss = config.true_loss;
  trainer.eval_every = config.eval_every;
  if (config.repeats < 1) return absl::InvalidArgumentError("repeats must be >= 1");
  HFDP_RETURN_IF_ERROR(trainer.Validate());
  return trainer;
}

}  // namespace hfdp::cli
