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

#ifndef MDPFUZZ_ENVS_COOPNAV_TOY_H_
#define MDPFUZZ_ENVS_COOPNAV_TOY_H_

#include "mdpfuzz/mdp.h"

namespace mdpfuzz::envs {

// Three agents, three landmarks on a square arena. State layout:
//   [0..5]  agent i position (x_i, y_i), i = 0..2   (arena units)
//   [6..11] landmark j position (x_j, y_j), j = 0..2
// Action layout: agent i velocity (vx_i, vy_i) at indices 2i, 2i+1.
struct CoopNavConstants {
  double arena_half = 2.0;  // arena is [-2, 2]^2, i.e. 4 x 4
  double radius = 0.15;     // agent radius
  double speed_cap = 0.5;   // units/s
  double dt = 0.1;          // s
  int horizon = 100;
};

inline constexpr int kCoopNavAgents = 3;
inline constexpr int kCoopNavLandmarks = 3;

class CoopNavEnvironment : public Environment {
 public:
  explicit CoopNavEnvironment(CoopNavConstants c = {});

  const EnvironmentSpec& spec() const override { return spec_; }
  const CoopNavConstants& constants() const { return c_; }

  State Sample(RandomStream& rng) const override;
  bool Validate(const State& s) const override;
  State Step(const State& s, const Action& a, RandomStream& rng) const override;
  double Reward(const State& s, const Action& a) const override;
  bool Crashed(const State& s) const override;

  static Eigen::Vector2d Agent(const State& s, int i) { return s.segment<2>(2 * i); }
  static Eigen::Vector2d Landmark(const State& s, int j) {
    return s.segment<2>(2 * (kCoopNavAgents + j));
  }
  double MinAgentSeparation(const State& s) const;

 private:
  CoopNavConstants c_;
  EnvironmentSpec spec_;
};

// Agents claim landmarks greedily in index order (each takes its nearest
// unclaimed landmark) and fly straight at it at capped speed. Nothing
// deconflicts paths, so crossing assignments collide.
class CoopNavGreedyPolicy : public Policy {
 public:
  explicit CoopNavGreedyPolicy(CoopNavConstants c = {}) : c_(c) {}
  Action Act(const State& s) const override;

 private:
  CoopNavConstants c_;
};

}  // namespace mdpfuzz::envs

#endif  // MDPFUZZ_ENVS_COOPNAV_TOY_H_
