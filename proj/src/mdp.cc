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

#include "mdpfuzz/mdp.h"

#include <algorithm>
#include <cmath>

#include "mdpfuzz/error.h"

namespace mdpfuzz {

bool IsFinite(const State& s) { return s.allFinite(); }

void EnvironmentSpec::Check() const {
  if (state_dim <= 0) {
    throw Error(ErrorCode::kInvalidConfig, name + ": state_dim must be > 0");
  }
  if (static_cast<int>(initial_state_bounds.size()) != state_dim ||
      static_cast<int>(mutable_dims.size()) != state_dim) {
    throw Error(ErrorCode::kInvalidConfig,
                name + ": bounds/mutable mask length != state_dim");
  }
  for (const Interval& b : initial_state_bounds) {
    if (!(b.lo <= b.hi) || !std::isfinite(b.lo) || !std::isfinite(b.hi)) {
      throw Error(ErrorCode::kInvalidConfig, name + ": bad bound interval");
    }
  }
  if (default_horizon < 1) {
    throw Error(ErrorCode::kInvalidConfig, name + ": default_horizon < 1");
  }
}

bool EnvironmentSpec::WithinBounds(const State& s) const {
  if (s.size() != state_dim) return false;
  for (int i = 0; i < state_dim; ++i) {
    if (!initial_state_bounds[i].Contains(s[i])) return false;
  }
  return true;
}

State EnvironmentSpec::Clamp(const State& s) const {
  State out = s;
  for (int i = 0; i < state_dim; ++i) {
    out[i] = std::clamp(out[i], initial_state_bounds[i].lo,
                        initial_state_bounds[i].hi);
  }
  return out;
}

bool operator==(const RolloutResult& a, const RolloutResult& b) {
  if (a.states.size() != b.states.size()) return false;
  if (a.crash_step != b.crash_step) return false;
  if (a.cumulative_reward != b.cumulative_reward) return false;
  for (size_t i = 0; i < a.states.size(); ++i) {
    if (a.states[i].size() != b.states[i].size()) return false;
    if (a.states[i] != b.states[i]) return false;
  }
  return true;
}

RolloutResult Rollout(const Environment& env, const Policy& policy,
                      const State& s0, int horizon, uint64_t rng_seed) {
  if (horizon < 1) {
    throw Error(ErrorCode::kInvalidConfig, "horizon must be >= 1");
  }
  if (s0.size() != env.spec().state_dim) {
    throw Error(ErrorCode::kDimensionMismatch, "initial state dimension");
  }
  if (!IsFinite(s0) || !env.Validate(s0)) {
    throw Error(ErrorCode::kInvalidInitialState,
                env.spec().name + " rejected the initial state");
  }
  RandomStream rng(rng_seed);
  RolloutResult result;
  result.states.reserve(horizon);
  result.states.push_back(s0);
  for (int t = 0; t < horizon; ++t) {
    const State& s = result.states.back();
    if (env.Crashed(s)) {
      result.crash_step = t;
      break;
    }
    const Action a = policy.Act(s);
    result.cumulative_reward += env.Reward(s, a);
    if (t + 1 == horizon) break;
    State next = env.Step(s, a, rng);
    if (!IsFinite(next)) {
      throw Error(ErrorCode::kNonFiniteState,
                  env.spec().name + " transition produced NaN/Inf at step " +
                      std::to_string(t + 1));
    }
    result.states.push_back(std::move(next));
  }
  return result;
}

}  // namespace mdpfuzz
