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

#include "mdpfuzz/envs/coopnav_toy.h"

#include <cmath>
#include <limits>

#include "mdpfuzz/error.h"

namespace mdpfuzz::envs {

CoopNavEnvironment::CoopNavEnvironment(CoopNavConstants c) : c_(c) {
  if (!(c_.arena_half > 0 && c_.radius > 0 && c_.speed_cap > 0 && c_.dt > 0)) {
    throw Error(ErrorCode::kInvalidConfig, "coopnav-toy constants");
  }
  spec_.name = "coopnav-toy";
  spec_.state_dim = 2 * (kCoopNavAgents + kCoopNavLandmarks);
  spec_.initial_state_bounds.assign(spec_.state_dim,
                                    Interval{-c_.arena_half, c_.arena_half});
  spec_.mutable_dims.assign(spec_.state_dim, false);
  for (int i = 0; i < 2 * kCoopNavAgents; ++i) spec_.mutable_dims[i] = true;
  spec_.default_horizon = c_.horizon;
  spec_.Check();
}

State CoopNavEnvironment::Sample(RandomStream& rng) const {
  State s(spec_.state_dim);
  for (int i = 0; i < spec_.state_dim; ++i) {
    s[i] = rng.Uniform(-c_.arena_half, c_.arena_half);
  }
  // Redraw the agents until no two touch; landmarks are kept.
  while (!(MinAgentSeparation(s) > 2.0 * c_.radius)) {
    for (int i = 0; i < 2 * kCoopNavAgents; ++i) {
      s[i] = rng.Uniform(-c_.arena_half, c_.arena_half);
    }
  }
  return s;
}

double CoopNavEnvironment::MinAgentSeparation(const State& s) const {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kCoopNavAgents; ++i) {
    for (int j = i + 1; j < kCoopNavAgents; ++j) {
      best = std::min(best, (Agent(s, i) - Agent(s, j)).norm());
    }
  }
  return best;
}

bool CoopNavEnvironment::Validate(const State& s) const {
  if (s.size() != spec_.state_dim || !s.allFinite()) return false;
  if (!spec_.WithinBounds(s)) return false;
  return MinAgentSeparation(s) > 2.0 * c_.radius;
}

State CoopNavEnvironment::Step(const State& s, const Action& a,
                               RandomStream& /*rng*/) const {
  if (a.size() != 2 * kCoopNavAgents) {
    throw Error(ErrorCode::kDimensionMismatch, "coopnav action size");
  }
  State next = s;
  next.head(2 * kCoopNavAgents) += c_.dt * a;
  return next;
}

double CoopNavEnvironment::Reward(const State& s, const Action& /*a*/) const {
  double total = 0.0;
  for (int j = 0; j < kCoopNavLandmarks; ++j) {
    double nearest = std::numeric_limits<double>::infinity();
    for (int i = 0; i < kCoopNavAgents; ++i) {
      nearest = std::min(nearest, (Agent(s, i) - Landmark(s, j)).norm());
    }
    total += nearest;
  }
  return -total;
}

bool CoopNavEnvironment::Crashed(const State& s) const {
  return MinAgentSeparation(s) < 2.0 * c_.radius;
}

Action CoopNavGreedyPolicy::Act(const State& s) const {
  Action a = Action::Zero(2 * kCoopNavAgents);
  bool claimed[kCoopNavLandmarks] = {false, false, false};
  for (int i = 0; i < kCoopNavAgents; ++i) {
    const Eigen::Vector2d pos = CoopNavEnvironment::Agent(s, i);
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int j = 0; j < kCoopNavLandmarks; ++j) {
      if (claimed[j]) continue;
      const double d = (CoopNavEnvironment::Landmark(s, j) - pos).norm();
      if (d < best_dist) {
        best_dist = d;
        best = j;
      }
    }
    claimed[best] = true;
    if (best_dist == 0.0) continue;
    const Eigen::Vector2d dir =
        (CoopNavEnvironment::Landmark(s, best) - pos) / best_dist;
    const double speed = std::min(c_.speed_cap, best_dist / c_.dt);
    a.segment<2>(2 * i) = speed * dir;
  }
  return a;
}

}  // namespace mdpfuzz::envs
