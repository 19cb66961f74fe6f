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

#include "hfdp/theory.h"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

namespace hfdp {
namespace {

LossSampler NormalLosses(double mu, double xi) {
  return [mu, xi](RandomStream& rng) { return mu + xi * rng.Gaussian(); };
}

TEST(ClippingBiasAnalyticTest, Examples) {
  const BiasParams at_mean = *BiasParams::Create(1, 0.5, 1);
  EXPECT_EQ(at_mean.alpha(), 0);
  EXPECT_NEAR(ClippingBiasAnalytic(at_mean), 0.199471, 1e-5);
  EXPECT_NEAR(ClippingBiasAnalytic(at_mean), 0.1994711402007163390, 1e-15);
  EXPECT_NEAR(ClippingBiasAnalytic(*BiasParams::Create(0, 1, 40)), 0, 1e-300);
  // Doubling xi at fixed alpha = 0.7 doubles the bias.
  const double single = ClippingBiasAnalytic(*BiasParams::Create(1, 1, 1.7));
  const double twice = ClippingBiasAnalytic(*BiasParams::Create(1, 2, 2.4));
  EXPECT_NEAR(twice, 2 * single, 1e-15);
}

TEST(ClippingBiasAnalyticTest, PositiveAndDecreasingInAlpha) {
  double previous = INFINITY;
  for (double r_l = 0.01; r_l <= 8; r_l += 0.01) {
    const double bias = ClippingBiasAnalytic(*BiasParams::Create(2, 1, r_l));
    EXPECT_GT(bias, 0) << r_l;
    EXPECT_LT(bias, previous) << r_l;
    previous = bias;
  }
}

TEST(ClippingBiasAnalyticTest, InvalidParams) {
  EXPECT_FALSE(BiasParams::Create(1, 0, 1).ok());
  EXPECT_FALSE(BiasParams::Create(1, 1, 0).ok());
  EXPECT_FALSE(BiasParams::Create(NAN, 1, 1).ok());
}

TEST(TruncatedNormalUpperMeanTest, MatchesMonteCarlo) {
  RandomStream rng(3);
  for (const auto& [mu, xi, r_l] :
       {std::tuple{1.0, 0.5, 1.0}, std::tuple{0.0, 2.0, 1.5},
        std::tuple{3.0, 1.0, 2.0}}) {
    const BiasParams params = *BiasParams::Create(mu, xi, r_l);
    double sum = 0;
    double sum_sq = 0;
    int64_t count = 0;
    for (int i = 0; i < 400000; ++i) {
      const double x = mu + xi * rng.Gaussian();
      if (x > r_l) {
        sum += x;
        sum_sq += x * x;
        ++count;
      }
    }
    const double mean = sum / count;
    const double se = std::sqrt((sum_sq / count - mean * mean) / count);
    EXPECT_NEAR(TruncatedNormalUpperMean(params), mean, 4 * se);
    // The bias identity: (E[L | L > R] - R) P(L > R).
    EXPECT_NEAR((TruncatedNormalUpperMean(params) - r_l) * NormalCdf(-params.alpha()),
                ClippingBiasAnalytic(params), 1e-14);
  }
}

TEST(ClippingBiasEmpiricalTest, InactiveClippingHasNoBias) {
  const LossSampler below = [](RandomStream& rng) { return 0.5 * rng.Uniform(); };
  const MonteCarloEstimate e = *ClippingBiasEmpirical(below, 1, 8, 10000, 1);
  EXPECT_EQ(e.mean, 0);
  EXPECT_EQ(e.std_error, 0);
}

TEST(ClippingBiasEmpiricalTest, MatchesClosedFormAtAlphaZero) {
  const MonteCarloEstimate e =
      *ClippingBiasEmpirical(NormalLosses(1, 0.5), 1, 1, 1000000, 2);
  EXPECT_NEAR(e.mean, 0.1995, 3 * e.std_error + 5e-5);
  EXPECT_NEAR(e.mean, ClippingBiasAnalytic(*BiasParams::Create(1, 0.5, 1)),
              3 * e.std_error);
}

TEST(ClippingBiasEmpiricalTest, RandomTriplesAgreeWithAnalytic) {
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> mu(0, 3);
  std::uniform_real_distribution<double> xi(0.2, 2);
  std::uniform_real_distribution<double> offset(-1.5, 2.5);
  for (int k = 0; k < 20; ++k) {
    const double m = mu(gen);
    const double x = xi(gen);
    const double r = std::max(0.05, m + offset(gen) * x);
    const BiasParams params = *BiasParams::Create(m, x, r);
    const MonteCarloEstimate e =
        *ClippingBiasEmpirical(NormalLosses(m, x), r, 1, 100000, 100 + k);
    EXPECT_NEAR(e.mean, ClippingBiasAnalytic(params), 4 * e.std_error)
        << m << " " << x << " " << r;
  }
}

TEST(ClippingBiasEmpiricalTest, BiasVarianceTradeoff) {
  double previous_bias = INFINITY;
  double previous_variance = 0;
  for (double r_l = 0.25; r_l <= 4; r_l += 0.25) {
    // Common random numbers: the same seed at every threshold.
    const MonteCarloEstimate e =
        *ClippingBiasEmpirical(NormalLosses(1, 1), r_l, 4, 20000, 7);
    EXPECT_LE(e.mean, previous_bias) << r_l;
    const double variance = LossNoiseVariance(1.2, r_l, 4);
    EXPECT_GT(variance, previous_variance);
    previous_bias = e.mean;
    previous_variance = variance;
  }
  EXPECT_LT(ClippingBiasEmpirical(NormalLosses(1, 1), 2, 4, 20000, 7)->mean,
            ClippingBiasEmpirical(NormalLosses(1, 1), 1, 4, 20000, 7)->mean);
}

TEST(ClippingBiasEmpiricalTest, BatchAverageConvergesToAsymptoticForm) {
  const BiasParams params = *BiasParams::Create(1, 0.5, 1.2);
  const double asymptotic =
      (TruncatedNormalUpperMean(params) - params.r_l) * NormalCdf(-params.alpha());
  const MonteCarloEstimate small =
      *ClippingBiasEmpirical(NormalLosses(1, 0.5), 1.2, 10, 10000, 11);
  const MonteCarloEstimate large =
      *ClippingBiasEmpirical(NormalLosses(1, 0.5), 1.2, 10000, 10000, 12);
  EXPECT_NEAR(small.mean, asymptotic, 4 * small.std_error);
  EXPECT_NEAR(large.mean, asymptotic, 4 * large.std_error);
  // Spread of the batch average shrinks as 1/sqrt(B).
  EXPECT_NEAR(small.std_error / large.std_error, std::sqrt(1000.0),
              0.1 * std::sqrt(1000.0));
}

TEST(ClippingBiasEmpiricalTest, Errors) {
  EXPECT_FALSE(ClippingBiasEmpirical(NormalLosses(0, 1), 1, 1, 9999, 1).ok());
  EXPECT_FALSE(ClippingBiasEmpirical(NormalLosses(0, 1), 0, 1, 10000, 1).ok());
  EXPECT_FALSE(ClippingBiasEmpirical(NormalLosses(0, 1), 1, 0, 10000, 1).ok());
}

}  // namespace
}  // namespace hfdp
