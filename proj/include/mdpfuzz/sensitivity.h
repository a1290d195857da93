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

#ifndef MDPFUZZ_SENSITIVITY_H_
#define MDPFUZZ_SENSITIVITY_H_

#include <cstdint>

#include "mdpfuzz/mdp.h"
#include "mdpfuzz/random.h"
#include "mdpfuzz/target.h"

namespace mdpfuzz {

struct SensitivityOptions {
  // Perturbation half-width as a fraction of each dimension's bound width.
  double delta = 0.01;
  // Perturbations averaged per estimate.
  int samples = 1;
  // Validator rejections tolerated per perturbation.
  int max_retries = 10;
};

struct EnergyEstimate {
  double energy = 0.0;
  double perturbation_norm = 0.0;
  double base_reward = 0.0;
  double perturbed_reward = 0.0;
};

// |r - r_delta| / |dS|_2.
EnergyEstimate EnergyFromRewards(double base_reward, double perturbed_reward,
                                 double perturbation_norm);

// Local sensitivity of the target's cumulative reward around s0. Both
// rollouts use `rollout_seed`. ΔS is uniform in ±delta * width on the
// mutable dimensions, re-projected into bounds and validated. Throws
// PerturbationRejected after max_retries consecutive rejections.
EnergyEstimate Sensitivity(FuzzTarget& target, const State& s0, int horizon,
                           uint64_t rollout_seed, RandomStream& rng,
                           const SensitivityOptions& options = {});

}  // namespace mdpfuzz

#endif  // MDPFUZZ_SENSITIVITY_H_
