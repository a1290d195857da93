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

#ifndef MDPFUZZ_MDP_H_
#define MDPFUZZ_MDP_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "mdpfuzz/random.h"

namespace mdpfuzz {

// Observation of the agent, in environment-specific units.
using State = Eigen::VectorXd;
// Environment-specific action encoding (a discrete index is stored as a
// single entry).
using Action = Eigen::VectorXd;
// Ordered rollout trace; states[0] is the initial state.
using StateSequence = std::vector<State>;

bool IsFinite(const State& s);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
  bool Contains(double x) const { return x >= lo && x <= hi; }
};

struct EnvironmentSpec {
  std::string name;
  int state_dim = 0;
  std::vector<Interval> initial_state_bounds;
  // Dimensions the fuzzer may perturb when mutating an initial state.
  std::vector<bool> mutable_dims;
  int default_horizon = 1;

  // Throws InvalidConfig when the invariants do not hold.
  void Check() const;
  bool WithinBounds(const State& s) const;
  State Clamp(const State& s) const;
};

struct RolloutResult {
  StateSequence states;
  double cumulative_reward = 0.0;
  std::optional<int> crash_step;

  bool crashed() const { return crash_step.has_value(); }
  int length() const { return static_cast<int>(states.size()); }

  friend bool operator==(const RolloutResult& a, const RolloutResult& b);
};

// An MDP without its policy: transition T, reward R, crash oracle, and the
// initial-state sampler/validator. Implementations are immutable after
// construction and safe for concurrent rollouts.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvironmentSpec& spec() const = 0;
  // Draws a candidate initial state; callers still run Validate.
  virtual State Sample(RandomStream& rng) const = 0;
  virtual bool Validate(const State& s) const = 0;
  virtual State Step(const State& s, const Action& a,
                     RandomStream& rng) const = 0;
  virtual double Reward(const State& s, const Action& a) const = 0;
  virtual bool Crashed(const State& s) const = 0;
};

// Deterministic action function. Act must be a pure function of the state.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action Act(const State& s) const = 0;
};

// Runs the policy in the environment from s0 for at most `horizon` states.
// The oracle is checked on every state including s0; on a crash the
// sequence ends at the crashing state and no reward is accrued for it.
RolloutResult Rollout(const Environment& env, const Policy& policy,
                      const State& s0, int horizon, uint64_t rng_seed);

}  // namespace mdpfuzz

#endif  // MDPFUZZ_MDP_H_
