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

#include "experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "hfdp/accountant.h"
#include "hfdp/status_macros.h"

namespace hfdp::cli {
namespace {

using nlohmann::json;

// The realized epsilon may undershoot the target by the calibration
// tolerance, never overshoot it.
constexpr double kEpsilonCheckRtol = 1e-6;

void AppendField(std::string& line, double value) {
  line.push_back(',');
  if (std::isfinite(value)) line += FormatNumber(value);
}

json Number(double value) {
  return std::isfinite(value) ? json(value) : json(nullptr);
}

json Number(const std::optional<double>& value) {
  return value.has_value() ? Number(*value) : json(nullptr);
}

absl::Status WriteFile(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) {
    return absl::PermissionDeniedError(absl::StrCat("cannot write ", path.string()));
  }
  return absl::OkStatus();
}

// Everything shared by the seeds of one experiment.
struct Prepared {
  Dataset data;
  ModelKind kind;
  std::unique_ptr<GradientOracle> model;
  TrainerConfig trainer;  // seed filled per run
  NoisePlan plan;
  PlanBreakdown breakdown;
};

absl::StatusOr<Prepared> Prepare(const ExperimentConfig& config) {
  Prepared p;
  HFDP_ASSIGN_OR_RETURN(p.data, LoadDataset(config));
  HFDP_ASSIGN_OR_RETURN(p.kind, ResolveModel(config, p.data));
  HFDP_ASSIGN_OR_RETURN(p.model, MakeOracle(p.kind));
  HFDP_ASSIGN_OR_RETURN(
      p.trainer,
      ResolveTrainer(config, static_cast<int64_t>(p.data.train.size()), config.seed));
  HFDP_ASSIGN_OR_RETURN(p.plan, ResolvePlan(p.trainer));
  // Every seed shares the plan; solve it once.
  p.trainer.noise_plan = p.plan;
  HFDP_ASSIGN_OR_RETURN(p.breakdown,
                        DescribePlan(p.plan, p.trainer.spec, p.trainer.budget.delta));
  return p;
}

json ConfigJson(const ExperimentConfig& config) {
  json out = json::object();
  for (const auto& [key, value] : ConfigEntries(config)) out[key] = value;
  return out;
}

json PlanJson(const Prepared& p) {
  const double target = p.trainer.budget.epsilon;
  const double realized = p.breakdown.epsilon;
  return {
      {"plan",
       {{"sigma_g", p.plan.sigma_g},
        {"sigma_l", p.plan.sigma_l},
        {"gamma", p.plan.gamma},
        {"k", p.plan.interval},
        {"base_sigma", p.plan.base_sigma},
        {"gradient_releases", p.plan.gradient_releases},
        {"loss_releases", p.plan.loss_releases}}},
      {"privacy",
       {{"epsilon", target},
        {"delta", p.trainer.budget.delta},
        {"delta_is_default", false},
        {"mu_gradient", p.breakdown.mu_gradient.value},
        {"mu_loss", p.breakdown.mu_loss.value},
        {"mu_total", p.breakdown.mu_total.value},
        {"loss_share", p.breakdown.loss_share},
        {"epsilon_realized", realized},
        {"epsilon_check_passed",
         realized <= target * (1 + 1e-12) &&
             realized >= target * (1 - kEpsilonCheckRtol)}}},
  };
}

SeedRun TrainSeed(const ExperimentConfig& config, const Prepared& p, uint64_t seed,
                  const std::filesystem::path& directory, absl::Status& io_error) {
  SeedRun run;
  run.seed = seed;
  run.directory = directory.string();
  TrainerConfig trainer = p.trainer;
  trainer.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  absl::StatusOr<TrainResult> result = Train(trainer, *p.model, p.data);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!result.ok()) {
    io_error = result.status();
    return run;
  }
  run.termination = result->termination;
  run.final_metric = result->final_metric;
  run.forward_passes = result->forward_passes;

  json summary = PlanJson(p);
  summary["privacy"]["delta_is_default"] = !config.delta.has_value();
  summary["config"] = ConfigJson(config);
  summary["config"]["seed"] = absl::StrCat(seed);
  summary["resolved"] = {
      {"train_size", p.data.train.size()},
      {"test_size", p.data.test.size()},
      {"num_features", p.data.num_features()},
      {"num_params", p.kind.num_params()},
      {"data_seed", config.data_seed.value_or(config.seed)},
      {"seed", seed},
  };
  const ReleaseLedger& ledger = result->ledger;
  summary["ledger"] = {
      {"gradient_releases", ledger.gradient_releases},
      {"loss_releases", ledger.loss_releases},
      {"probe_events", ledger.probe_events},
      {"planned_gradient_releases", ledger.planned_gradient_releases},
      {"planned_loss_releases", ledger.planned_loss_releases},
      {"gradient_noise_draws", ledger.gradient_noise_draws},
      {"loss_noise_draws", ledger.loss_noise_draws},
      {"matches_plan", ledger.matches_plan()},
  };
  const std::vector<TraceRow>& trace = result->trace;
  summary["result"] = {
      {"status", result->termination.ok() ? "ok" : "diverged"},
      {"message", std::string(result->termination.message())},
      {"steps_completed", trace.size()},
      {"forward_passes", result->forward_passes},
      {"final_metric", Number(result->final_metric)},
      {"metric", p.kind.is_classifier() ? "accuracy" : "mse"},
      {"final_eta", trace.empty() ? json(nullptr) : Number(trace.back().eta)},
      {"final_r_l", trace.empty() ? json(nullptr) : Number(trace.back().r_l)},
  };
  summary["wall_clock_seconds"] = seconds;
  run.summary = summary;

  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) {
    io_error = absl::PermissionDeniedError(
        absl::StrCat("cannot create ", directory.string(), ": ", ec.message()));
    return run;
  }
  if (auto s = WriteFile(directory / "trace.csv", TraceCsv(trace)); !s.ok()) {
    io_error = s;
    return run;
  }
  if (auto s = WriteFile(directory / "summary.json", summary.dump(2) + "\n"); !s.ok()) {
    io_error = s;
  }
  return run;
}

}  // namespace

ExitCode ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kOutOfRange:
      return kExitInfeasible;
    case absl::StatusCode::kAborted:
      return kExitDiverged;
    default:
      return kExitUsage;
  }
}

std::string TraceCsv(const std::vector<TraceRow>& trace) {
  std::string out = kTraceHeader;
  out.push_back('\n');
  for (const TraceRow& row : trace) {
    std::string line = absl::StrCat(row.step);
    AppendField(line, row.eta);
    AppendField(line, row.r_l);
    AppendField(line, row.privatized_loss);
    AppendField(line, row.true_loss);
    AppendField(line, row.test_metric.value_or(NAN));
    absl::StrAppend(&line, ",", row.forward_passes, "\n");
    out += line;
  }
  return out;
}

absl::StatusOr<ExperimentReport> RunExperiment(const ExperimentConfig& config) {
  HFDP_ASSIGN_OR_RETURN(Prepared prepared, Prepare(config));
  const std::filesystem::path root(config.out);
  const int64_t repeats = config.repeats;

  ExperimentReport report;
  report.runs.resize(repeats);
  std::vector<absl::Status> errors(repeats);
  // Seeds run in parallel; each writes only its own directory.
  const int64_t workers = std::clamp<int64_t>(
      std::thread::hardware_concurrency(), 1, repeats);
  std::vector<std::thread> pool;
  for (int64_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (int64_t i = w; i < repeats; i += workers) {
        const uint64_t seed = config.seed + static_cast<uint64_t>(i);
        const std::filesystem::path dir =
            repeats == 1 ? root : root / absl::StrCat("seed_", seed);
        report.runs[i] = TrainSeed(config, prepared, seed, dir, errors[i]);
      }
    });
  }
  for (std::thread& t : pool) t.join();
  for (const absl::Status& e : errors) {
    if (!e.ok()) return e;
  }

  int diverged = 0;
  for (const SeedRun& run : report.runs) diverged += !run.termination.ok();
  report.status =
      diverged == 0
          ? absl::OkStatus()
          : absl::AbortedError(absl::StrFormat("%d of %d runs diverged", diverged,
                                               static_cast<int>(repeats)));
  if (repeats > 1) {
    json sweep = PlanJson(prepared);
    sweep["config"] = ConfigJson(config);
    json runs = json::array();
    double sum = 0;
    int counted = 0;
    for (const SeedRun& run : report.runs) {
      runs.push_back({{"seed", run.seed},
                      {"directory", run.directory},
                      {"status", run.termination.ok() ? "ok" : "diverged"},
                      {"final_metric", Number(run.final_metric)},
                      {"forward_passes", run.forward_passes}});
      if (run.final_metric.has_value() && std::isfinite(*run.final_metric)) {
        sum += *run.final_metric;
        ++counted;
      }
    }
    sweep["runs"] = runs;
    sweep["diverged"] = diverged;
    sweep["mean_final_metric"] = counted > 0 ? json(sum / counted) : json(nullptr);
    HFDP_RETURN_IF_ERROR(WriteFile(root / "sweep.json", sweep.dump(2) + "\n"));
  }
  return report;
}

absl::StatusOr<std::string> PlanOnly(const ExperimentConfig& config) {
  HFDP_ASSIGN_OR_RETURN(Dataset data, LoadDataset(config));
  HFDP_ASSIGN_OR_RETURN(
      TrainerConfig trainer,
      ResolveTrainer(config, static_cast<int64_t>(data.train.size()), config.seed));
  HFDP_ASSIGN_OR_RETURN(NoisePlan plan, ResolvePlan(trainer));
  HFDP_ASSIGN_OR_RETURN(PlanBreakdown b,
                        DescribePlan(plan, trainer.spec, trainer.budget.delta));
  const SamplingSpec& s = trainer.spec;
  std::string out;
  absl::StrAppendFormat(&out, "budget      epsilon=%s delta=%s%s\n",
                        FormatNumber(trainer.budget.epsilon),
                        FormatNumber(trainer.budget.delta),
                        config.delta.has_value() ? "" : " (N^-1.1)");
  absl::StrAppendFormat(&out, "sampling    B=%d N=%d T=%d K=%d q=%s\n", s.batch_size,
                        s.dataset_size, s.steps, s.interval,
                        FormatNumber(s.sampling_rate()));
  absl::StrAppendFormat(&out, "releases    gradient=%d loss=%d\n",
                        plan.gradient_releases, plan.loss_releases);
  absl::StrAppendFormat(&out, "sigma_g     %.6f (gamma=%s x %.6f)\n", plan.sigma_g,
                        FormatNumber(plan.gamma), plan.base_sigma);
  absl::StrAppendFormat(&out, "sigma_l     %.6f\n", plan.sigma_l);
  absl::StrAppendFormat(&out, "mu          gradient=%.6f loss=%.6f total=%.6f\n",
                        b.mu_gradient.value, b.mu_loss.value, b.mu_total.value);
  absl::StrAppendFormat(&out, "loss share  %.4f%% of mu^2\n", 100 * b.loss_share);
  absl::StrAppendFormat(&out, "epsilon     realized=%.9g\n", b.epsilon);
  return out;
}

}  // namespace hfdp::cli
