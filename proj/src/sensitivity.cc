// Copyright 2026 The mdpfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "mdpfuzz/sensitivity.h"

#include <cmath>

#include "mdpfuzz/error.h"

namespace mdpfuzz {

EnergyEstimate EnergyFromRewards(double base_reward, double perturbed_reward,
                                 double perturbation_norm) {
  if (!(perturbation_norm > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "perturbation norm must be > 0");
  }
  EnergyEstimate e;
  e.base_reward = base_reward;
  e.perturbed_reward = perturbed_reward;
  e.perturbation_norm = perturbation_norm;
  e.energy = std::abs(base_reward - perturbed_reward) / perturbation_norm;
  return e;
}

namespace {

State DrawPerturbed(FuzzTarget& target, const State& s0, RandomStream& rng,
                    const SensitivityOptions& options) {
  const EnvironmentSpec& spec = target.spec();
  for (int attempt = 0; attempt <= options.max_retries; ++attempt) {
    State candidate = s0;
    for (int i = 0; i < spec.state_dim; ++i) {
      if (!spec.mutable_dims[i]) continue;
      const double half = options.delta * spec.initial_state_bounds[i].width();
      candidate[i] += rng.Uniform(-half, half);
    }
    candidate = spec.Clamp(candidate);
    if ((candidate - s0).norm() > 0.0 && target.Validate(candidate)) {
      return candidate;
    }
  }
  throw Error(ErrorCode::kPerturbationRejected,
              "no valid perturbation after " +
                  std::to_string(options.max_retries) + " retries");
}

}  // namespace

EnergyEstimate Sensitivity(FuzzTarget& target, const State& s0, int horizon,
                           uint64_t rollout_seed, RandomStream& rng,
                           const SensitivityOptions& options) {
  if (options.samples < 1 || !(options.delta > 0.0)) {
    throw Error(ErrorCode::kInvalidConfig, "sensitivity options");
  }
  const double base = target.Rollout(s0, horizon, rollout_seed).cumulative_reward;
  if (options.samples == 1) {
    const State perturbed = DrawPerturbed(target, s0, rng, options);
    const double r = target.Rollout(perturbed, horizon, rollout_seed).cumulative_reward;
    return EnergyFromRewards(base, r, (perturbed - s0).norm());
  }
  EnergyEstimate mean;
  mean.base_reward = base;
  for (int i = 0; i < options.samples; ++i) {
    const State perturbed = DrawPerturbed(target, s0, rng, options);
    const double r = target.Rollout(perturbed, horizon, rollout_seed).cumulative_reward;
    const EnergyEstimate e = EnergyFromRewards(base, r, (perturbed - s0).norm());
    mean.energy += e.energy / options.samples;
    mean.perturbation_norm += e.perturbation_norm / options.samples;
    mean.perturbed_reward += r / options.samples;
  }
  return mean;
}

}  // namespace mdpfuzz
