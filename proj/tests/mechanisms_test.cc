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

#include "hfdp/mechanisms.h"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

namespace hfdp {
namespace {

PerSampleBatch Batch(std::initializer_list<std::initializer_list<double>> rows) {
  PerSampleBatch batch;
  const int64_t b = static_cast<int64_t>(rows.size());
  const int64_t d = static_cast<int64_t>(rows.begin()->size());
  batch.losses = Eigen::VectorXd::Ones(b);
  batch.gradients.resize(b, d);
  int64_t i = 0;
  for (const auto& row : rows) {
    int64_t j = 0;
    for (double v : row) batch.gradients(i, j++) = v;
    ++i;
  }
  return batch;
}

TEST(ClipFactorTest, Examples) {
  EXPECT_EQ(ClipFactor(5, 1), 0.2);
  EXPECT_EQ(ClipFactor(0.5, 1), 1);
  EXPECT_DOUBLE_EQ(ClipFactor(-3, 1), 1.0 / 3);
  EXPECT_EQ(ClipFactor(0, 1), 1);
}

TEST(PrivatizeGradientAutoTest, Examples) {
  RandomStream rng(1);
  auto single = PrivatizeGradientAuto(Batch({{3, 4}}), 0, rng);
  ASSERT_TRUE(single.ok());
  EXPECT_DOUBLE_EQ(single->value[0], 0.6);
  EXPECT_DOUBLE_EQ(single->value[1], 0.8);

  auto pair = PrivatizeGradientAuto(Batch({{1, 0}, {0, 1}}), 0, rng);
  EXPECT_DOUBLE_EQ(pair->value[0], 0.5);
  EXPECT_DOUBLE_EQ(pair->value[1], 0.5);

  auto zero = PrivatizeGradientAuto(Batch({{0, 0}}), 0, rng);
  ASSERT_TRUE(zero.ok());
  EXPECT_EQ(zero->value[0], 0);
  EXPECT_EQ(zero->value[1], 0);
  EXPECT_EQ(zero->clip_mode, ClipMode::kAutomatic);
}

TEST(PrivatizeGradientAutoTest, NormalizedSummandsHaveUnitNorm) {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> n;
  RandomStream rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    PerSampleBatch batch;
    batch.losses = Eigen::VectorXd::Ones(1);
    batch.gradients.resize(1, 7);
    const double scale = std::pow(10.0, trial % 20 - 10);
    for (int j = 0; j < 7; ++j) batch.gradients(0, j) = scale * n(gen);
    auto out = PrivatizeGradientAuto(batch, 0, rng);
    EXPECT_NEAR(out->value.norm(), 1.0, 1e-12);
  }
}

TEST(PrivatizeGradientAutoTest, NoiseScale) {
  RandomStream rng(5);
  const int trials = 20000;
  double sum_sq = 0;
  for (int i = 0; i < trials; ++i) {
    auto out = PrivatizeGradientAuto(Batch({{0, 0, 0}, {0, 0, 0}}), 1.5, rng);
    sum_sq += out->value.squaredNorm();
  }
  // Each coordinate has variance (sigma / B)^2.
  EXPECT_NEAR(sum_sq / (3 * trials), 0.75 * 0.75, 0.03 * 0.5625);
}

TEST(PrivatizeGradientVanillaTest, Examples) {
  RandomStream rng(1);
  const PerSampleBatch batch = Batch({{3, 4}, {-1, 2}, {0.5, 0.5}});
  auto inactive = PrivatizeGradientVanilla(batch, 10, 0, rng);
  ASSERT_TRUE(inactive.ok());
  const Eigen::VectorXd mean = batch.gradients.colwise().mean().transpose();
  EXPECT_NEAR((inactive->value - mean).norm(), 0, 1e-15);

  auto clipped = PrivatizeGradientVanilla(Batch({{3, 4}}), 1, 0, rng);
  EXPECT_DOUBLE_EQ(clipped->value[0], 0.6);
  EXPECT_DOUBLE_EQ(clipped->value[1], 0.8);
  EXPECT_EQ(clipped->clip_threshold, 1);
}

TEST(PrivatizeGradientVanillaTest, SmallThresholdLimitIsAutomatic) {
  const PerSampleBatch batch = Batch({{3, 4}, {-1, 2}, {0.5, 0.5}, {1e-3, 0}});
  const double r_g = 1e-8;
  RandomStream a(9);
  RandomStream b(9);
  auto vanilla = PrivatizeGradientVanilla(batch, r_g, 0.7, a);
  auto automatic = PrivatizeGradientAuto(batch, 0.7, b);
  EXPECT_LT((vanilla->value / r_g - automatic->value).cwiseAbs().maxCoeff(), 1e-6);
}

TEST(PrivatizeGradientVanillaTest, InfiniteThresholdWithoutNoiseIsExactMean) {
  RandomStream rng(5);
  auto out = PrivatizeGradientVanilla(Batch({{3, 4}, {-1, 2}}),
                                      std::numeric_limits<double>::infinity(), 0, rng);
  ASSERT_TRUE(out.ok()) << out.status();
  EXPECT_EQ(out->value[0], 1);
  EXPECT_EQ(out->value[1], 3);
  EXPECT_EQ(rng.draw_calls(), 1);
}

TEST(PrivatizeGradientVanillaTest, Errors) {
  RandomStream rng(1);
  EXPECT_FALSE(PrivatizeGradientVanilla(Batch({{1}}), 0, 1, rng).ok());
  EXPECT_FALSE(PrivatizeGradientVanilla(Batch({{1}}), 1, -1, rng).ok());
  PerSampleBatch bad = Batch({{1, 2}});
  bad.losses = Eigen::VectorXd::Ones(2);
  EXPECT_FALSE(PrivatizeGradientAuto(bad, 1, rng).ok());
}

TEST(PrivatizeLossTest, Examples) {
  RandomStream rng(1);
  Eigen::VectorXd losses(2);
  losses << 0.5, 3.0;
  auto out = PrivatizeLoss(losses, 1, 0, NoiseKind::kGaussian, rng);
  ASSERT_TRUE(out.ok());
  EXPECT_DOUBLE_EQ(out->value, 0.75);
  EXPECT_EQ(out->r_l_used, 1);

  Eigen::VectorXd small(3);
  small << 0.1, 0.7, 0.2;
  EXPECT_DOUBLE_EQ(
      PrivatizeLoss(small, 1, 0, NoiseKind::kGaussian, rng)->value, small.mean());
  Eigen::VectorXd negative(2);
  negative << -4, 0.5;
  EXPECT_DOUBLE_EQ(
      PrivatizeLoss(negative, 1, 0, NoiseKind::kGaussian, rng)->value, -0.25);
}

TEST(PrivatizeLossTest, Errors) {
  RandomStream rng(1);
  EXPECT_FALSE(PrivatizeLoss(Eigen::VectorXd::Ones(2), 0, 1,
                             NoiseKind::kGaussian, rng).ok());
  EXPECT_FALSE(PrivatizeLoss(Eigen::VectorXd(), 1, 1, NoiseKind::kGaussian, rng).ok());
}

struct Moments {
  double mean = 0;
  double variance = 0;
  double mean_abs_dev = 0;  // E|x - center|
};

Moments NoiseMoments(NoiseKind kind, const Eigen::VectorXd& losses,
                     double center, int trials) {
  RandomStream rng(2718);
  double sum = 0;
  double sum_sq = 0;
  double sum_abs = 0;
  for (int i = 0; i < trials; ++i) {
    const double v = PrivatizeLoss(losses, 2, 1, kind, rng)->value;
    sum += v;
    sum_sq += (v - center) * (v - center);
    sum_abs += std::abs(v - center);
  }
  Moments m;
  m.mean = sum / trials;
  m.variance = sum_sq / trials;
  m.mean_abs_dev = sum_abs / trials;
  return m;
}

TEST(PrivatizeLossTest, GaussianNoiseMagnitude) {
  Eigen::VectorXd losses(4);
  losses << 0.3, 1.9, 0.8, 1.2;  // all below R_l = 2
  const double center = losses.mean();
  const Moments m = NoiseMoments(NoiseKind::kGaussian, losses, center, 100000);
  // (sigma_l * R_l / B)^2 = 0.25.
  EXPECT_NEAR(m.variance, 0.25, 0.03 * 0.25);
  EXPECT_NEAR(m.mean_abs_dev, std::sqrt(2 / std::numbers::pi) * 0.5,
              0.03 * std::sqrt(2 / std::numbers::pi) * 0.5);
  // Unbiased when clipping is inactive: within 3 standard errors.
  EXPECT_NEAR(m.mean, center, 3 * 0.5 / std::sqrt(100000.0));
  EXPECT_DOUBLE_EQ(LossNoiseStd(1, 2, 4, NoiseKind::kGaussian), 0.5);
}

TEST(PrivatizeLossTest, LaplaceNoiseMagnitude) {
  Eigen::VectorXd losses(4);
  losses << 0.3, 1.9, 0.8, 1.2;
  const double center = losses.mean();
  const Moments m = NoiseMoments(NoiseKind::kLaplace, losses, center, 100000);
  // Laplace with scale 0.5: variance 2 * 0.25, E|x| = 0.5.
  EXPECT_NEAR(m.variance, 0.5, 0.04 * 0.5);
  EXPECT_NEAR(m.mean_abs_dev, 0.5, 0.03 * 0.5);
  EXPECT_NEAR(LossNoiseStd(1, 2, 4, NoiseKind::kLaplace), std::sqrt(0.5), 1e-15);
}

TEST(PrivatizeLossTest, SensitivityIsThresholdOverBatch) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0, 20);
  RandomStream rng(17);
  const double r_l = 1.5;
  for (int trial = 0; trial < 1000; ++trial) {
    Eigen::VectorXd losses(8);
    for (auto& v : losses) v = u(gen);
    Eigen::VectorXd neighbor = losses;
    neighbor[trial % 8] = u(gen);
    const double a = PrivatizeLoss(losses, r_l, 0, NoiseKind::kGaussian, rng)->value;
    const double b = PrivatizeLoss(neighbor, r_l, 0, NoiseKind::kGaussian, rng)->value;
    EXPECT_LE(std::abs(a - b), r_l / 8 + 1e-15);
  }
}

TEST(PrivatizeLossTest, SignedLossesStayWithinThreshold) {
  // Each clipped summand lies in [-R_l, R_l], so adding or removing one
  // example moves the un-noised sum by at most R_l.
  std::mt19937_64 gen(19);
  std::uniform_real_distribution<double> u(-20, 20);
  for (int trial = 0; trial < 1000; ++trial) {
    const double loss = u(gen);
    EXPECT_LE(std::abs(ClipScalar(loss, 1.5)), 1.5);
    EXPECT_NEAR(ClipScalar(loss, 1.5), ClipFactor(loss, 1.5) * loss, 1e-15);
  }
}

TEST(MechanismsTest, Deterministic) {
  const PerSampleBatch batch = Batch({{3, 4}, {-1, 2}});
  RandomStream a(123);
  RandomStream b(123);
  EXPECT_EQ(PrivatizeGradientAuto(batch, 1.3, a)->value,
            PrivatizeGradientAuto(batch, 1.3, b)->value);
  EXPECT_EQ(PrivatizeLoss(batch.losses, 1, 2, NoiseKind::kLaplace, a)->value,
            PrivatizeLoss(batch.losses, 1, 2, NoiseKind::kLaplace, b)->value);
}

}  // namespace
}  // namespace hfdp
