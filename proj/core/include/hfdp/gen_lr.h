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

#ifndef HFDP_GEN_LR_H_
#define HFDP_GEN_LR_H_

// Learning-rate estimation from three privatized loss probes taken at
// w + eta*G, w and w - eta*G, plus the auto-regressive loss clipping
// threshold.

#include <cstdint>
#include <optional>

namespace hfdp {

// Privatized losses at step offsets {-eta, 0, +eta} along the descent
// direction. "Minus" is the point w + eta*G (one step backwards).
struct LossProbe {
  double eta_probe = 0;
  double l_minus = 0;
  double l_zero = 0;
  double l_plus = 0;
  double r_l_used = 0;
  // Standard deviation of the noise in each released loss; public, since it
  // depends only on the noise plan, R_l and B.
  double noise_std = 0;
};

// Quadratic L(eta) = l_zero - slope_b*eta + curvature_a*eta^2/2 through the
// three probes.
struct QuadFit {
  double curvature_a = 0;
  double slope_b = 0;
  // slope_b / curvature_a when both are positive.
  std::optional<double> eta_star;
  // Standard errors of the coefficients implied by the probe noise.
  double curvature_se = 0;
  double slope_se = 0;
};

struct LrState {
  double eta = 1e-4;
  double r_l = 1.0;
  int64_t updates_seen = 0;
  // Set once a fit has resolved positive curvature.
  bool bracketed = false;
};

enum class RlRule {
  kProbeSum,    // R_l = l_minus + l_zero + l_plus
  kCenterLoss,  // R_l = l_zero
};

struct LrPolicy {
  // Per-event multiplicative cap on eta changes; may be +infinity.
  double growth_cap = 10;
  double r_l_floor = 1e-3;
  RlRule r_l_rule = RlRule::kProbeSum;
  // Noise gate, in standard errors. Only fits whose curvature exceeds
  // `significance` standard errors move eta to eta_star. Before the first
  // such fit, a significantly positive slope over an unresolved curvature
  // multiplies eta by `bracket_growth`. Zero disables the gate and gives the
  // plain rule: move to eta_star whenever it exists.
  double significance = 2;
  double bracket_growth = 2;
};

QuadFit FitQuadratic(const LossProbe& probe);

// New eta: clamp(eta_star, eta / growth_cap, eta * growth_cap) when the fit
// is usable, otherwise unchanged (see LrPolicy for the noise gate).
LrState UpdateLr(const LrState& state, const QuadFit& fit,
                 const LrPolicy& policy = {});

// New R_l from the latest probe, floored at policy.r_l_floor. A non-finite
// value keeps the previous threshold.
LrState UpdateRl(const LrState& state, const LossProbe& probe,
                 const LrPolicy& policy = {});

}  // namespace hfdp

#endif  // HFDP_GEN_LR_H_
