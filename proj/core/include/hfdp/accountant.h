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

#ifndef HFDP_ACCOUNTANT_H_
#define HFDP_ACCOUNTANT_H_

// Privacy accounting for noisy gradient descent with privatized loss probes.
//
// A run makes two kinds of Gaussian releases: one noisy gradient per
// iteration (T in total) and three noisy loss means per learning-rate probe
// (3·ceil(T/K) in total). Both are subsampled at rate B/N. The accountant
// turns noise multipliers into an (epsilon, delta) guarantee and inverts that
// map to calibrate the noise for a target budget.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace hfdp {

// Target (epsilon, delta) for the whole run.
struct PrivacyBudget {
  double epsilon = 0;
  double delta = 0;

  // epsilon >= 0 and finite, 0 < delta < 1.
  static absl::StatusOr<PrivacyBudget> Create(double epsilon, double delta);
};

// Boundary default for an unspecified delta: N^-1.1.
double DefaultDelta(int64_t dataset_size);

struct SamplingSpec {
  int64_t batch_size = 1;    // B
  int64_t dataset_size = 1;  // N
  int64_t steps = 1;         // T
  int64_t interval = 1;      // K, iterations between learning-rate probes

  // 1 <= B <= N, T >= 1, 1 <= K <= T.
  static absl::StatusOr<SamplingSpec> Create(int64_t batch_size,
                                             int64_t dataset_size,
                                             int64_t steps, int64_t interval);

  double sampling_rate() const {
    return static_cast<double>(batch_size) / static_cast<double>(dataset_size);
  }
  // Probe events happen at every t in [0, T) with t % K == 0.
  int64_t probe_events() const { return (steps + interval - 1) / interval; }
  int64_t loss_releases() const { return 3 * probe_events(); }
};

// Parameter of a mu-GDP guarantee.
struct GdpMu {
  double value = 0;
  friend bool operator==(GdpMu, GdpMu) = default;
};

// One family of identical subsampled Gaussian releases.
struct GaussianReleases {
  double noise_multiplier = 0;
  double sampling_rate = 0;
  int64_t count = 0;
};

// Resolved noise configuration for one run.
struct NoisePlan {
  double sigma_g = 0;  // gradient noise multiplier, gamma * base_sigma
  double sigma_l = 0;  // loss noise multiplier
  double gamma = 1;    // gradient-noise inflation
  double base_sigma = 0;  // noise a gradient-only run would need
  int64_t interval = 1;
  // Release counts the plan was calibrated for.
  int64_t gradient_releases = 0;
  int64_t loss_releases = 0;
};

// mu of `count` compositions of a Gaussian mechanism with noise multiplier
// `sigma` under Poisson-style subsampling at `rate` (the CLT approximation):
//   rate * sqrt(count * (exp(1/sigma^2) - 1)).
absl::StatusOr<GdpMu> SubsampledGaussianMu(double sigma, double rate,
                                           int64_t count);

// mu of the T gradient releases.
absl::StatusOr<GdpMu> MuVanilla(double sigma, const SamplingSpec& spec);
// mu of the 3*ceil(T/K) loss releases.
absl::StatusOr<GdpMu> MuLoss(double sigma_l, const SamplingSpec& spec);

// sqrt(a^2 + b^2).
GdpMu Compose(GdpMu a, GdpMu b);

// delta(epsilon) of a mu-GDP mechanism:
//   Phi(-eps/mu + mu/2) - e^eps * Phi(-eps/mu - mu/2).
double GdpToDelta(GdpMu mu, double epsilon);

// Smallest epsilon >= 0 with GdpToDelta(mu, epsilon) <= delta.
absl::StatusOr<double> GdpToEpsilon(GdpMu mu, double delta);

// The mu with GdpToDelta(mu, budget.epsilon) == budget.delta.
absl::StatusOr<GdpMu> DpToMu(const PrivacyBudget& budget);

// Maps a set of release families to epsilon at fixed delta. Implementations
// must be monotonically decreasing in every noise multiplier.
class PrivacyAccountant {
 public:
  virtual ~PrivacyAccountant() = default;
  virtual std::string_view name() const = 0;
  virtual absl::StatusOr<double> Epsilon(
      std::span<const GaussianReleases> releases, double delta) const = 0;
};

// Closed-form mu-GDP accountant; the only built-in one.
class GdpAccountant final : public PrivacyAccountant {
 public:
  std::string_view name() const override { return "gdp"; }
  absl::StatusOr<double> Epsilon(std::span<const GaussianReleases> releases,
                                 double delta) const override;
  // Composed mu of `releases`.
  absl::StatusOr<GdpMu> Mu(std::span<const GaussianReleases> releases) const;
};

// Search settings shared by the calibration routines.
struct CalibrationOptions {
  double sigma_lower = 0.3;
  double sigma_upper = 1e8;
  double mu_lower = 1e-6;
  double mu_upper = 1e8;
  int max_iterations = 200;
  double epsilon_rtol = 1e-6;
  double gamma_max = 1.1;
};

// Gradient noise multiplier for a gradient-only run that spends exactly
// `budget`. Bisection on sigma.
absl::StatusOr<double> GetSigma(const PrivacyBudget& budget,
                                const SamplingSpec& spec,
                                const PrivacyAccountant& accountant,
                                const CalibrationOptions& options = {});
absl::StatusOr<double> GetSigma(const PrivacyBudget& budget,
                                const SamplingSpec& spec);

// Splits `budget` between gradient and loss releases: sigma_g is inflated by
// `gamma` over GetSigma and sigma_l is solved so that the composition of
// both families spends exactly `budget`.
//
// Errors: gamma == 1 leaves nothing for the loss releases
// (FailedPrecondition); an unreachable budget or an exhausted bracket is
// OutOfRange; gamma outside [1, gamma_max] is InvalidArgument.
absl::StatusOr<NoisePlan> SolveNoisePlan(const PrivacyBudget& budget,
                                         const SamplingSpec& spec,
                                         double gamma,
                                         const PrivacyAccountant& accountant,
                                         const CalibrationOptions& options = {});
absl::StatusOr<NoisePlan> SolveNoisePlan(const PrivacyBudget& budget,
                                         const SamplingSpec& spec,
                                         double gamma);

// Plan for a run that releases gradients only (no learning-rate probes).
absl::StatusOr<NoisePlan> SolveGradientOnlyPlan(
    const PrivacyBudget& budget, const SamplingSpec& spec,
    const PrivacyAccountant& accountant, const CalibrationOptions& options = {});

// mu decomposition of a plan, for reporting.
struct PlanBreakdown {
  GdpMu mu_gradient;
  GdpMu mu_loss;
  GdpMu mu_total;
  double loss_share = 0;  // mu_loss^2 / mu_total^2
  double epsilon = 0;     // realized epsilon at the plan's delta
};
absl::StatusOr<PlanBreakdown> DescribePlan(const NoisePlan& plan,
                                           const SamplingSpec& spec,
                                           double delta);

// Release families a plan was calibrated for.
std::vector<GaussianReleases> PlanReleases(const NoisePlan& plan,
                                           const SamplingSpec& spec);

}  // namespace hfdp

#endif  // HFDP_ACCOUNTANT_H_
