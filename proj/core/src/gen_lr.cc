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

#include "hfdp/gen_lr.h"

#include <algorithm>
#include <cmath>

namespace hfdp {

QuadFit FitQuadratic(const LossProbe& probe) {
  const double eta = probe.eta_probe;
  QuadFit fit;
  fit.slope_b = (probe.l_minus - probe.l_plus) / (2 * eta);
  fit.curvature_a = (probe.l_plus + probe.l_minus - 2 * probe.l_zero) / (eta * eta);
  if (fit.curvature_a > 0 && fit.slope_b > 0) {
    fit.eta_star = fit.slope_b / fit.curvature_a;
  }
  // Var(a) = 6 n^2 / eta^4 and Var(b) = n^2 / (2 eta^2) for i.i.d. noise n.
  fit.curvature_se = std::sqrt(6.0) * probe.noise_std / (eta * eta);
  fit.slope_se = probe.noise_std / (std::sqrt(2.0) * eta);
  return fit;
}

LrState UpdateLr(const LrState& state, const QuadFit& fit,
                 const LrPolicy& policy) {
  LrState next = state;
  ++next.updates_seen;
  const double lower = state.eta / policy.growth_cap;
  const double upper = state.eta * policy.growth_cap;
  double eta = state.eta;
  const bool gated = policy.significance > 0 && fit.curvature_se > 0;
  if (!gated) {
    if (fit.eta_star.has_value()) eta = std::clamp(*fit.eta_star, lower, upper);
  } else {
    const double a_threshold = policy.significance * fit.curvature_se;
    if (fit.eta_star.has_value() && fit.curvature_a > a_threshold) {
      eta = std::clamp(*fit.eta_star, lower, upper);
      next.bracketed = true;
    } else if (!state.bracketed && std::abs(fit.curvature_a) <= a_threshold &&
               fit.slope_b > policy.significance * fit.slope_se) {
      eta = std::min(state.eta * policy.bracket_growth, upper);
    }
  }
  if (std::isfinite(eta) && eta > 0) next.eta = eta;
  return next;
}

LrState UpdateRl(const LrState& state, const LossProbe& probe,
                 const LrPolicy& policy) {
  LrState next = state;
  const double candidate = policy.r_l_rule == RlRule::kProbeSum
                               ? probe.l_minus + probe.l_zero + probe.l_plus
                               : probe.l_zero;
  if (std::isfinite(candidate)) next.r_l = std::max(candidate, policy.r_l_floor);
  return next;
}

}  // namespace hfdp
