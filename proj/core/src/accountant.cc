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

#include "hfdp/accountant.h"

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "absl/status/status.h"
#include "absl/strings/str_format.h"
#include "hfdp/normal.h"
#include "hfdp/status_macros.h"

namespace hfdp {
namespace {

// Bisection for the root of a monotone function on [lower, upper], stepping
// at geometric midpoints (the bracket spans many orders of magnitude).
// `too_low(x)` is true when the root lies above x. Returns the final bracket.
struct Bracket {
  double lower;
  double upper;
};

Bracket GeometricBisect(double lower, double upper, int max_iterations,
                        const std::function<bool(double)>& too_low) {
  for (int i = 0; i < max_iterations; ++i) {
    const double mid = std::sqrt(lower * upper);
    if (!(mid > lower && mid < upper)) break;
    if (too_low(mid)) {
      lower = mid;
    } else {
      upper = mid;
    }
    if (upper / lower - 1.0 < 1e-15) break;
  }
  return {lower, upper};
}

absl::Status CheckEpsilon(double achieved, double target, double rtol) {
  if (std::abs(achieved - target) > rtol * target) {
    return absl::OutOfRangeError(absl::StrFormat(
        "calibration did not converge: epsilon %.12g vs target %.12g",
        achieved, target));
  }
  return absl::OkStatus();
}

absl::Status ValidateForCalibration(const PrivacyBudget& budget) {
  if (!(budget.epsilon > 0)) {
    return absl::InvalidArgumentError(
        "noise calibration needs a strictly positive epsilon");
  }
  return PrivacyBudget::Create(budget.epsilon, budget.delta).status();
}

}  // namespace

absl::StatusOr<PrivacyBudget> PrivacyBudget::Create(double epsilon,
                                                    double delta) {
  if (!std::isfinite(epsilon) || epsilon < 0) {
    return absl::InvalidArgumentError(
        absl::StrFormat("epsilon must be finite and >= 0, got %g", epsilon));
  }
  if (!(delta > 0 && delta < 1)) {
    return absl::InvalidArgumentError(
        absl::StrFormat("delta must lie in (0, 1), got %g", delta));
  }
  return PrivacyBudget{epsilon, delta};
}

double DefaultDelta(int64_t dataset_size) {
  return std::pow(static_cast<double>(dataset_size), -1.1);
}

absl::StatusOr<SamplingSpec> SamplingSpec::Create(int64_t batch_size,
                                                  int64_t dataset_size,
                                                  int64_t steps,
                                                  int64_t interval) {
  if (batch_size < 1 || batch_size > dataset_size) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "batch size %d must lie in [1, N=%d]", batch_size, dataset_size));
  }
  if (steps < 1) {
    return absl::InvalidArgumentError("steps must be >= 1");
  }
  if (interval < 1 || interval > steps) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "interval K=%d must lie in [1, T=%d]", interval, steps));
  }
  return SamplingSpec{batch_size, dataset_size, steps, interval};
}

absl::StatusOr<GdpMu> SubsampledGaussianMu(double sigma, double rate,
                                           int64_t count) {
  if (!(sigma > 0)) {
    return absl::InvalidArgumentError("noise multiplier must be positive");
  }
  if (!(rate > 0 && rate <= 1)) {
    return absl::InvalidArgumentError("sampling rate must lie in (0, 1]");
  }
  if (count < 0) return absl::InvalidArgumentError("negative release count");
  if (count == 0) return GdpMu{0};
  const double mu =
      rate * std::sqrt(static_cast<double>(count) * std::expm1(1 / (sigma * sigma)));
  if (!std::isfinite(mu)) {
    return absl::OutOfRangeError(absl::StrFormat(
        "noise multiplier %g is too small for the GDP closed form", sigma));
  }
  return GdpMu{mu};
}

absl::StatusOr<GdpMu> MuVanilla(double sigma, const SamplingSpec& spec) {
  return SubsampledGaussianMu(sigma, spec.sampling_rate(), spec.steps);
}

absl::StatusOr<GdpMu> MuLoss(double sigma_l, const SamplingSpec& spec) {
  return SubsampledGaussianMu(sigma_l, spec.sampling_rate(),
                              spec.loss_releases());
}

GdpMu Compose(GdpMu a, GdpMu b) { return GdpMu{std::hypot(a.value, b.value)}; }

double GdpToDelta(GdpMu mu, double epsilon) {
  if (!(mu.value > 0)) return 0;
  const double ratio = epsilon / mu.value;
  const double half = mu.value / 2;
  const double head = NormalCdf(-ratio + half);
  const double tail_cdf = NormalCdf(-ratio - half);
  const double tail =
      tail_cdf > 0 ? std::exp(epsilon + std::log(tail_cdf)) : 0.0;
  const double delta = head - tail;
  return delta > 0 ? delta : 0.0;
}

absl::StatusOr<double> GdpToEpsilon(GdpMu mu, double delta) {
  if (!(delta > 0 && delta < 1)) {
    return absl::InvalidArgumentError("delta must lie in (0, 1)");
  }
  if (!(mu.value > 0)) return 0.0;
  if (GdpToDelta(mu, 0) <= delta) return 0.0;
  double upper = std::max(1.0, mu.value * mu.value);
  while (GdpToDelta(mu, upper) > delta) {
    upper *= 2;
    if (upper > 1e6) {
      return absl::OutOfRangeError("epsilon exceeds 1e6 for this mu and delta");
    }
  }
  double lower = 0;
  for (int i = 0; i < 200 && upper - lower > 1e-15 * upper; ++i) {
    const double mid = 0.5 * (lower + upper);
    if (GdpToDelta(mu, mid) > delta) {
      lower = mid;
    } else {
      upper = mid;
    }
  }
  return upper;
}

absl::StatusOr<GdpMu> DpToMu(const PrivacyBudget& budget) {
  HFDP_RETURN_IF_ERROR(
      PrivacyBudget::Create(budget.epsilon, budget.delta).status());
  const CalibrationOptions options;
  auto delta_at = [&](double mu) { return GdpToDelta(GdpMu{mu}, budget.epsilon); };
  if (delta_at(options.mu_lower) > budget.delta ||
      delta_at(options.mu_upper) < budget.delta) {
    return absl::OutOfRangeError(absl::StrFormat(
        "no mu in [%g, %g] matches (epsilon=%g, delta=%g)", options.mu_lower,
        options.mu_upper, budget.epsilon, budget.delta));
  }
  const Bracket b = GeometricBisect(
      options.mu_lower, options.mu_upper, options.max_iterations,
      [&](double mu) { return delta_at(mu) < budget.delta; });
  return GdpMu{0.5 * (b.lower + b.upper)};
}

absl::StatusOr<GdpMu> GdpAccountant::Mu(
    std::span<const GaussianReleases> releases) const {
  double sum_sq = 0;
  for (const GaussianReleases& r : releases) {
    HFDP_ASSIGN_OR_RETURN(
        GdpMu mu, SubsampledGaussianMu(r.noise_multiplier, r.sampling_rate, r.count));
    sum_sq += mu.value * mu.value;
  }
  return GdpMu{std::sqrt(sum_sq)};
}

absl::StatusOr<double> GdpAccountant::Epsilon(
    std::span<const GaussianReleases> releases, double delta) const {
  HFDP_ASSIGN_OR_RETURN(GdpMu mu, Mu(releases));
  return GdpToEpsilon(mu, delta);
}

absl::StatusOr<double> GetSigma(const PrivacyBudget& budget,
                                const SamplingSpec& spec,
                                const PrivacyAccountant& accountant,
                                const CalibrationOptions& options) {
  HFDP_RETURN_IF_ERROR(ValidateForCalibration(budget));
  auto epsilon_at = [&](double sigma) -> absl::StatusOr<double> {
    const GaussianReleases releases{sigma, spec.sampling_rate(), spec.steps};
    return accountant.Epsilon({&releases, 1}, budget.delta);
  };
  HFDP_ASSIGN_OR_RETURN(double eps_low, epsilon_at(options.sigma_lower));
  HFDP_ASSIGN_OR_RETURN(double eps_high, epsilon_at(options.sigma_upper));
  if (eps_low < budget.epsilon || eps_high > budget.epsilon) {
    return absl::OutOfRangeError(absl::StrFormat(
        "budget epsilon=%g is unreachable with sigma in [%g, %g] "
        "(epsilon spans [%g, %g])",
        budget.epsilon, options.sigma_lower, options.sigma_upper, eps_high,
        eps_low));
  }
  absl::Status inner = absl::OkStatus();
  const Bracket b = GeometricBisect(
      options.sigma_lower, options.sigma_upper, options.max_iterations,
      [&](double sigma) {
        auto eps = epsilon_at(sigma);
        if (!eps.ok()) {
          inner = eps.status();
          return true;
        }
        return *eps > budget.epsilon;
      });
  HFDP_RETURN_IF_ERROR(inner);
  // The upper end never overspends.
  HFDP_ASSIGN_OR_RETURN(double achieved, epsilon_at(b.upper));
  HFDP_RETURN_IF_ERROR(CheckEpsilon(achieved, budget.epsilon, options.epsilon_rtol));
  return b.upper;
}

absl::StatusOr<double> GetSigma(const PrivacyBudget& budget,
                                const SamplingSpec& spec) {
  return GetSigma(budget, spec, GdpAccountant());
}

absl::StatusOr<NoisePlan> SolveNoisePlan(const PrivacyBudget& budget,
                                         const SamplingSpec& spec,
                                         double gamma,
                                         const PrivacyAccountant& accountant,
                                         const CalibrationOptions& options) {
  if (!(gamma >= 1 && gamma <= options.gamma_max)) {
    return absl::InvalidArgumentError(absl::StrFormat(
        "gamma must lie in [1, %g], got %g", options.gamma_max, gamma));
  }
  HFDP_ASSIGN_OR_RETURN(double sigma,
                        GetSigma(budget, spec, accountant, options));
  const double sigma_g = gamma * sigma;
  const double rate = spec.sampling_rate();
  const GaussianReleases gradient{sigma_g, rate, spec.steps};
  HFDP_ASSIGN_OR_RETURN(double eps_gradient,
                        accountant.Epsilon({&gradient, 1}, budget.delta));
  if (eps_gradient >= budget.epsilon * (1 - options.epsilon_rtol)) {
    return absl::FailedPreconditionError(absl::StrFormat(
        "infeasible noise plan: gamma=%g leaves no budget for the loss "
        "releases (gradient releases alone spend epsilon=%.9g of %.9g); "
        "use gamma > 1",
        gamma, eps_gradient, budget.epsilon));
  }

  auto epsilon_at = [&](double sigma_l) -> absl::StatusOr<double> {
    const GaussianReleases both[] = {
        gradient, GaussianReleases{sigma_l, rate, spec.loss_releases()}};
    return accountant.Epsilon(both, budget.delta);
  };
  HFDP_ASSIGN_OR_RETURN(double eps_low, epsilon_at(options.sigma_lower));
  if (eps_low < budget.epsilon) {
    return absl::OutOfRangeError(absl::StrFormat(
        "loss noise multiplier below the search bracket [%g, %g]; "
        "lower gamma",
        options.sigma_lower, options.sigma_upper));
  }
  HFDP_ASSIGN_OR_RETURN(double eps_high, epsilon_at(options.sigma_upper));
  if (eps_high > budget.epsilon) {
    return absl::OutOfRangeError(
        "loss noise multiplier above the search bracket");
  }
  absl::Status inner = absl::OkStatus();
  const Bracket b = GeometricBisect(
      options.sigma_lower, options.sigma_upper, options.max_iterations,
      [&](double sigma_l) {
        auto eps = epsilon_at(sigma_l);
        if (!eps.ok()) {
          inner = eps.status();
          return true;
        }
        return *eps > budget.epsilon;
      });
  HFDP_RETURN_IF_ERROR(inner);
  HFDP_ASSIGN_OR_RETURN(double achieved, epsilon_at(b.upper));
  HFDP_RETURN_IF_ERROR(CheckEpsilon(achieved, budget.epsilon, options.epsilon_rtol));

  NoisePlan plan;
  plan.sigma_g = sigma_g;
  plan.sigma_l = b.upper;
  plan.gamma = gamma;
  plan.base_sigma = sigma;
  plan.interval = spec.interval;
  plan.gradient_releases = spec.steps;
  plan.loss_releases = spec.loss_releases();
  return plan;
}

absl::StatusOr<NoisePlan> SolveNoisePlan(const PrivacyBudget& budget,
                                         const SamplingSpec& spec,
                                         double gamma) {
  return SolveNoisePlan(budget, spec, gamma, GdpAccountant());
}

absl::StatusOr<NoisePlan> SolveGradientOnlyPlan(
    const PrivacyBudget& budget, const SamplingSpec& spec,
    const PrivacyAccountant& accountant, const CalibrationOptions& options) {
  HFDP_ASSIGN_OR_RETURN(double sigma,
                        GetSigma(budget, spec, accountant, options));
  NoisePlan plan;
  plan.sigma_g = sigma;
  plan.sigma_l = 0;
  plan.gamma = 1;
  plan.base_sigma = sigma;
  plan.interval = spec.interval;
  plan.gradient_releases = spec.steps;
  plan.loss_releases = 0;
  return plan;
}

std::vector<GaussianReleases> PlanReleases(const NoisePlan& plan,
                                           const SamplingSpec& spec) {
  std::vector<GaussianReleases> releases;
  releases.push_back({plan.sigma_g, spec.sampling_rate(), plan.gradient_releases});
  if (plan.loss_releases > 0) {
    releases.push_back({plan.sigma_l, spec.sampling_rate(), plan.loss_releases});
  }
  return releases;
}

absl::StatusOr<PlanBreakdown> DescribePlan(const NoisePlan& plan,
                                           const SamplingSpec& spec,
                                           double delta) {
  const double rate = spec.sampling_rate();
  PlanBreakdown out;
  HFDP_ASSIGN_OR_RETURN(
      out.mu_gradient,
      SubsampledGaussianMu(plan.sigma_g, rate, plan.gradient_releases));
  if (plan.loss_releases > 0) {
    HFDP_ASSIGN_OR_RETURN(
        out.mu_loss, SubsampledGaussianMu(plan.sigma_l, rate, plan.loss_releases));
  }
  out.mu_total = Compose(out.mu_gradient, out.mu_loss);
  out.loss_share = out.mu_total.value > 0
                       ? (out.mu_loss.value * out.mu_loss.value) /
                             (out.mu_total.value * out.mu_total.value)
                       : 0.0;
  HFDP_ASSIGN_OR_RETURN(out.epsilon, GdpToEpsilon(out.mu_total, delta));
  return out;
}

}  // namespace hfdp
