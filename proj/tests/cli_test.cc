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

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "experiment.h"
#include "experiment_config.h"
#include "hfdp/accountant.h"
#include "nlohmann/json.hpp"

namespace hfdp::cli {
namespace {

namespace fs = std::filesystem;

// Fresh directory under the test temp dir.
fs::path Scratch(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / "hfdp_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream text;
  text << in.rdbuf();
  return text.str();
}

struct Invocation {
  int exit_code = -1;
  std::string out;
  std::string err;
};

Invocation RunCli(const std::string& args, const fs::path& scratch) {
  const fs::path out = scratch / "stdout.txt";
  const fs::path err = scratch / "stderr.txt";
  const std::string command = absl::StrCat(HFDP_CLI_BINARY, " ", args, " >",
                                           out.string(), " 2>", err.string());
  const int raw = std::system(command.c_str());
  Invocation result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.out = ReadFile(out);
  result.err = ReadFile(err);
  return result;
}

// Small, fast training run: N_train = 1000.
std::string QuickArgs(const fs::path& out) {
  return absl::StrCat("--epsilon 3 --steps 200 --batch 50 --set n=1250 --out ",
                      out.string());
}

TEST(ParseConfigTextTest, KeyValueLines) {
  auto entries = ParseConfigText(
      "# comment\n\nepsilon = 3  # trailing\n  model=logistic\nout = a b\n");
  ASSERT_TRUE(entries.ok()) << entries.status();
  ASSERT_EQ(entries->size(), 3u);
  EXPECT_EQ((*entries)[0], std::make_pair(std::string("epsilon"), std::string("3")));
  EXPECT_EQ((*entries)[1].second, "logistic");
  EXPECT_EQ((*entries)[2].second, "a b");
}

TEST(ParseConfigTextTest, Malformed) {
  EXPECT_FALSE(ParseConfigText("epsilon 3\n").ok());
  EXPECT_FALSE(ParseConfigText(" = 3\n").ok());
}

TEST(ApplySettingTest, UnknownKeyRejected) {
  ExperimentConfig config;
  const absl::Status s = ApplySetting(config, "learning_rate", "0.1");
  EXPECT_EQ(s.code(), absl::StatusCode::kInvalidArgument);
  EXPECT_NE(s.message().find("learning_rate"), std::string::npos);
}

TEST(ApplySettingTest, MalformedValues) {
  ExperimentConfig config;
  EXPECT_FALSE(ApplySetting(config, "epsilon", "three").ok());
  EXPECT_FALSE(ApplySetting(config, "steps", "1.5").ok());
  EXPECT_FALSE(ApplySetting(config, "optimizer", "adam").ok());
  EXPECT_FALSE(ApplySetting(config, "clip_mode", "auto-ish").ok());
  EXPECT_FALSE(ApplySetting(config, "model", "resnet").ok());
  EXPECT_FALSE(ApplySetting(config, "true_loss", "maybe").ok());
  EXPECT_TRUE(ApplySetting(config, "delta", "auto").ok());
  EXPECT_FALSE(config.delta.has_value());
}

TEST(ConfigEntriesTest, RoundTrip) {
  ExperimentConfig config;
  ASSERT_TRUE(ApplySetting(config, "epsilon", "0.1").ok());
  ASSERT_TRUE(ApplySetting(config, "delta", "1e-7").ok());
  ASSERT_TRUE(ApplySetting(config, "gamma", "1.05").ok());
  ASSERT_TRUE(ApplySetting(config, "noise_kind", "laplace").ok());
  ASSERT_TRUE(ApplySetting(config, "true_loss", "false").ok());
  ASSERT_TRUE(ApplySetting(config, "data_seed", "17").ok());
  const auto entries = ConfigEntries(config);
  EXPECT_EQ(entries.size(), ConfigKeys().size());
  ExperimentConfig parsed;
  for (const auto& [key, value] : entries) {
    ASSERT_TRUE(ApplySetting(parsed, key, value).ok()) << key << "=" << value;
  }
  EXPECT_EQ(ConfigEntries(parsed), entries);
}

TEST(FormatNumberTest, ShortestRoundTrip) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> mantissa(-1, 1);
  std::uniform_int_distribution<int> exponent(-300, 300);
  for (int i = 0; i < 10000; ++i) {
    const double x = std::ldexp(mantissa(gen), exponent(gen));
    double back = 0;
    ASSERT_TRUE(absl::SimpleAtod(FormatNumber(x), &back));
    EXPECT_EQ(back, x);
  }
  EXPECT_EQ(FormatNumber(0.1), "0.1");
  EXPECT_EQ(FormatNumber(1e-4), "1e-04");
  EXPECT_EQ(FormatNumber(NAN), "nan");
}

TEST(TraceCsvTest, SchemaAndEmptyFields) {
  TraceRow a;
  a.step = 0;
  a.eta = 1e-4;
  a.r_l = 1;
  a.privatized_loss = NAN;
  a.true_loss = 0.5;
  a.forward_passes = 3;
  TraceRow b = a;
  b.step = 1;
  b.privatized_loss = 0.25;
  b.test_metric = 0.9;
  b.forward_passes = 4;
  EXPECT_EQ(TraceCsv({a, b}),
            "step,eta,r_l,priv_loss,true_loss,test_metric,fwd_passes\n"
            "0,1e-04,1,,0.5,,3\n"
            "1,1e-04,1,0.25,0.5,0.9,4\n");
}

TEST(ExitCodeTest, Mapping) {
  EXPECT_EQ(ExitCodeFor(absl::OkStatus()), kExitOk);
  EXPECT_EQ(ExitCodeFor(absl::FailedPreconditionError("x")), kExitInfeasible);
  EXPECT_EQ(ExitCodeFor(absl::OutOfRangeError("x")), kExitInfeasible);
  EXPECT_EQ(ExitCodeFor(absl::AbortedError("x")), kExitDiverged);
  EXPECT_EQ(ExitCodeFor(absl::InvalidArgumentError("x")), kExitUsage);
  EXPECT_EQ(ExitCodeFor(absl::NotFoundError("x")), kExitUsage);
}

TEST(ResolveTrainerTest, EpsilonRequired) {
  ExperimentConfig config;
  EXPECT_EQ(ResolveTrainer(config, 1000, 0).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(ResolveTrainerTest, SmallerIntervalNeedsMoreLossNoise) {
  ExperimentConfig config;
  config.epsilon = 3;
  config.steps = 2000;
  double previous = std::numeric_limits<double>::infinity();
  for (int64_t k : {1, 2, 5, 10, 20, 50}) {
    config.k = k;
    auto trainer = ResolveTrainer(config, 10000, 0);
    ASSERT_TRUE(trainer.ok()) << trainer.status();
    auto plan = ResolvePlan(*trainer);
    ASSERT_TRUE(plan.ok()) << plan.status();
    EXPECT_LT(plan->sigma_l, previous) << "K=" << k;
    previous = plan->sigma_l;
  }
}

TEST(CliTest, DeltaAutoIsTrainSizeToMinusOnePointOne) {
  const fs::path dir = Scratch("delta_auto");
  // 12500 rows with a 0.2 test fraction leave N_train = 10^4.
  const Invocation run = RunCli(
      absl::StrCat("--epsilon 3 --delta auto --steps 20 --out ", (dir / "out").string()),
      dir);
  ASSERT_EQ(run.exit_code, 0) << run.err;
  const auto summary = nlohmann::json::parse(ReadFile(dir / "out" / "summary.json"));
  EXPECT_EQ(summary["resolved"]["train_size"], 10000);
  const double delta = summary["privacy"]["delta"];
  EXPECT_NEAR(delta / std::pow(10.0, -4.4), 1, 1e-12);
  EXPECT_TRUE(summary["privacy"]["delta_is_default"]);
  EXPECT_TRUE(summary["privacy"]["epsilon_check_passed"]);
  EXPECT_TRUE(summary["ledger"]["matches_plan"]);
  EXPECT_EQ(summary["config"]["delta"], "auto");
}

TEST(CliTest, SameSeedGivesIdenticalTrace) {
  const fs::path dir = Scratch("reproducible");
  const Invocation a = RunCli(QuickArgs(dir / "a") + " --seed 7", dir);
  const Invocation b = RunCli(QuickArgs(dir / "b") + " --seed 7", dir);
  const Invocation c = RunCli(QuickArgs(dir / "c") + " --seed 8", dir);
  ASSERT_EQ(a.exit_code, 0) << a.err;
  ASSERT_EQ(b.exit_code, 0) << b.err;
  ASSERT_EQ(c.exit_code, 0) << c.err;
  const std::string trace = ReadFile(dir / "a" / "trace.csv");
  EXPECT_EQ(trace, ReadFile(dir / "b" / "trace.csv"));
  EXPECT_NE(trace, ReadFile(dir / "c" / "trace.csv"));
  EXPECT_EQ(trace.substr(0, trace.find('\n')), kTraceHeader);
  EXPECT_EQ(std::count(trace.begin(), trace.end(), '\n'), 201);
}

TEST(CliTest, ForwardPassRatioBetweenIntervals) {
  const fs::path dir = Scratch("k_ratio");
  const Invocation k1 = RunCli(QuickArgs(dir / "k1") + " --k 1", dir);
  const Invocation k10 = RunCli(QuickArgs(dir / "k10") + " --k 10", dir);
  ASSERT_EQ(k1.exit_code, 0) << k1.err;
  ASSERT_EQ(k10.exit_code, 0) << k10.err;
  const double p1 = nlohmann::json::parse(
      ReadFile(dir / "k1" / "summary.json"))["result"]["forward_passes"];
  const double p10 = nlohmann::json::parse(
      ReadFile(dir / "k10" / "summary.json"))["result"]["forward_passes"];
  EXPECT_NEAR(p1 / p10, 2.5, 0.02 * 2.5);
}

TEST(CliTest, PlanOnlyWorkedCase) {
  const fs::path dir = Scratch("plan_only");
  // mu = 1 target: delta(eps = 1) of 1-GDP.
  const Invocation run = RunCli(
      "--plan-only --epsilon 1 --delta 0.12693673750664395 --batch 100 "
      "--steps 10000 --k 5 --gamma 1.01",
      dir);
  ASSERT_EQ(run.exit_code, 0) << run.err;
  const size_t at = run.out.find("sigma_l");
  ASSERT_NE(at, std::string::npos) << run.out;
  std::istringstream line(run.out.substr(at + 7));
  double sigma_l = 0;
  line >> sigma_l;
  EXPECT_NEAR(sigma_l, 4.75, 0.01);
  EXPECT_NE(run.out.find("sigma_g     1.213"), std::string::npos) << run.out;
  EXPECT_NE(run.out.find("total=1.000000"), std::string::npos) << run.out;
}

TEST(CliTest, GammaOneIsInfeasible) {
  const fs::path dir = Scratch("gamma_one");
  const Invocation run = RunCli("--plan-only --epsilon 1 --gamma 1", dir);
  EXPECT_EQ(run.exit_code, kExitInfeasible);
  EXPECT_NE(run.err.find("infeasible"), std::string::npos) << run.err;
}

TEST(CliTest, UnknownConfigKeyIsUsageError) {
  const fs::path dir = Scratch("unknown_key");
  std::ofstream(dir / "bad.cfg") << "epsilon = 3\nlearning_rate = 0.1\n";
  const Invocation run =
      RunCli(absl::StrCat("--plan-only --config ", (dir / "bad.cfg").string()), dir);
  EXPECT_EQ(run.exit_code, kExitUsage);
  EXPECT_NE(run.err.find("unknown config key 'learning_rate'"), std::string::npos)
      << run.err;
}

TEST(CliTest, FlagsOverrideConfigFile) {
  const fs::path dir = Scratch("override");
  std::ofstream(dir / "run.cfg") << "epsilon = 3\nsteps = 50\nk = 5\nn = 1250\n";
  const Invocation run = RunCli(
      absl::StrCat("--config ", (dir / "run.cfg").string(), " --k 10 --out ",
                   (dir / "out").string()),
      dir);
  ASSERT_EQ(run.exit_code, 0) << run.err;
  const auto summary = nlohmann::json::parse(ReadFile(dir / "out" / "summary.json"));
  EXPECT_EQ(summary["plan"]["k"], 10);
  EXPECT_EQ(summary["config"]["steps"], "50");
  EXPECT_EQ(summary["ledger"]["loss_releases"], 15);
}

TEST(CliTest, MissingEpsilonIsUsageError) {
  const fs::path dir = Scratch("no_epsilon");
  EXPECT_EQ(RunCli("--plan-only", dir).exit_code, kExitUsage);
  EXPECT_EQ(RunCli("--epsilon 3 --no-such-flag", dir).exit_code, kExitUsage);
}

TEST(CliTest, DivergenceKeepsPartialTrace) {
  const fs::path dir = Scratch("diverge");
  const Invocation run = RunCli(
      absl::StrCat("--epsilon 3 --model linear --optimizer sgd --clip-mode vanilla "
                   "--steps 200 --set n=1250 --set clip_threshold=1e300 "
                   "--set eta0=1000 --out ",
                   (dir / "out").string()),
      dir);
  EXPECT_EQ(run.exit_code, kExitDiverged) << run.err;
  const std::string trace = ReadFile(dir / "out" / "trace.csv");
  const auto rows = std::count(trace.begin(), trace.end(), '\n') - 1;
  EXPECT_GE(rows, 1);
  EXPECT_LT(rows, 200);
  const auto summary = nlohmann::json::parse(ReadFile(dir / "out" / "summary.json"));
  EXPECT_EQ(summary["result"]["status"], "diverged");
}

TEST(CliTest, RepeatsWriteSeedDirectoriesAndSweep) {
  const fs::path dir = Scratch("repeats");
  const Invocation run =
      RunCli(QuickArgs(dir / "out") + " --seed 3 --repeats 3", dir);
  ASSERT_EQ(run.exit_code, 0) << run.err;
  for (int seed : {3, 4, 5}) {
    EXPECT_TRUE(fs::exists(dir / "out" / absl::StrCat("seed_", seed) / "trace.csv"));
  }
  const auto sweep = nlohmann::json::parse(ReadFile(dir / "out" / "sweep.json"));
  EXPECT_EQ(sweep["runs"].size(), 3u);
  EXPECT_EQ(sweep["diverged"], 0);
  // A repeat matches the single run with the same trainer seed; the sweep
  // shares the dataset drawn from the base seed.
  const Invocation single =
      RunCli(QuickArgs(dir / "single") + " --seed 4 --set data_seed=3", dir);
  ASSERT_EQ(single.exit_code, 0);
  EXPECT_EQ(ReadFile(dir / "single" / "trace.csv"),
            ReadFile(dir / "out" / "seed_4" / "trace.csv"));
}

}  // namespace
}  // namespace hfdp::cli
