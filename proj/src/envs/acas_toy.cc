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

#include "mdpfuzz/envs/acas_toy.h"

#include <cmath>

#include "mdpfuzz/error.h"

namespace mdpfuzz::envs {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDegToRad = kPi / 180.0;

}  // namespace

double WrapAngle(double a) {
  a = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

Action MakeAcasAction(AcasAction a) {
  Action out(1);
  out[0] = static_cast<double>(static_cast<int>(a));
  return out;
}

AcasAction ToAcasAction(const Action& a) {
  if (a.size() != 1) {
    throw Error(ErrorCode::kDimensionMismatch, "acas action must be scalar");
  }
  const int idx = static_cast<int>(a[0]);
  if (idx < 0 || idx > 4 || a[0] != idx) {
    throw Error(ErrorCode::kInvalidConfig, "acas action out of range");
  }
  return static_cast<AcasAction>(idx);
}

AcasToyEnvironment::AcasToyEnvironment(AcasConstants c) : c_(c) {
  if (!(c_.rho_crash > 0 && c_.rho_init_min > c_.rho_crash &&
        c_.rho_init_max >= c_.rho_init_min && c_.v_min > 0 &&
        c_.v_cap >= c_.v_min && c_.dt > 0 && c_.rho_safe > 0)) {
    throw Error(ErrorCode::kInvalidConfig, "acas-toy constants");
  }
  spec_.name = "acas-toy";
  spec_.state_dim = 5;
  spec_.initial_state_bounds = {{c_.rho_init_min, c_.rho_init_max},
                                {-kPi, kPi},
                                {-kPi, kPi},
                                {c_.v_min, c_.v_cap},
                                {c_.v_min, c_.v_cap}};
  spec_.mutable_dims.assign(5, true);
  spec_.default_horizon = c_.horizon;
  spec_.Check();
}

State AcasToyEnvironment::Sample(RandomStream& rng) const {
  State s(5);
  for (int i = 0; i < 5; ++i) {
    const Interval& b = spec_.initial_state_bounds[i];
    s[i] = rng.Uniform(b.lo, b.hi);
  }
  s[kAcasTheta] = WrapAngle(s[kAcasTheta]);
  s[kAcasPsi] = WrapAngle(s[kAcasPsi]);
  return s;
}

bool AcasToyEnvironment::Validate(const State& s) const {
  if (s.size() != 5 || !s.allFinite()) return false;
  if (!spec_.WithinBounds(s)) return false;
  return s[kAcasRho] >= c_.rho_crash;
}

double AcasToyEnvironment::TurnRate(AcasAction a) const {
  switch (a) {
    case AcasAction::kCoc: return 0.0;
    case AcasAction::kWeakLeft: return c_.weak_turn_deg * kDegToRad;
    case AcasAction::kWeakRight: return -c_.weak_turn_deg * kDegToRad;
    case AcasAction::kStrongLeft: return c_.strong_turn_deg * kDegToRad;
    case AcasAction::kStrongRight: return -c_.strong_turn_deg * kDegToRad;
  }
  return 0.0;
}

State AcasToyEnvironment::Step(const State& s, const Action& a,
                               RandomStream& /*rng*/) const {
  const double omega = TurnRate(ToAcasAction(a));
  const double dt = c_.dt;
  const double v_own = s[kAcasVOwn];
  const double v_int = s[kAcasVInt];
  const double psi = s[kAcasPsi];

  // Intruder position in the current ownship frame.
  double px = s[kAcasRho] * std::cos(s[kAcasTheta]);
  double py = s[kAcasRho] * std::sin(s[kAcasTheta]);
  px += v_int * dt * std::cos(psi);
  py += v_int * dt * std::sin(psi);

  // Ownship flies a constant-rate arc.
  const double turn = omega * dt;
  if (omega == 0.0) {
    px -= v_own * dt;
  } else {
    px -= v_own / omega * std::sin(turn);
    py -= v_own / omega * (1.0 - std::cos(turn));
  }

  // Re-express in the ownship frame after the heading change.
  const double c = std::cos(turn);
  const double sn = std::sin(turn);
  const double qx = c * px + sn * py;
  const double qy = -sn * px + c * py;

  State next(5);
  next[kAcasRho] = std::hypot(qx, qy);
  next[kAcasTheta] = WrapAngle(std::atan2(qy, qx));
  next[kAcasPsi] = WrapAngle(psi - turn);
  next[kAcasVOwn] = v_own;
  next[kAcasVInt] = v_int;
  return next;
}

double AcasToyEnvironment::Reward(const State& s, const Action& a) const {
  double penalty = 0.0;
  switch (ToAcasAction(a)) {
    case AcasAction::kCoc: break;
    case AcasAction::kWeakLeft:
    case AcasAction::kWeakRight: penalty = c_.weak_turn_penalty; break;
    case AcasAction::kStrongLeft:
    case AcasAction::kStrongRight: penalty = c_.strong_turn_penalty; break;
  }
  return std::min(s[kAcasRho] / c_.rho_safe, 1.0) - penalty;
}

bool AcasToyEnvironment::Crashed(const State& s) const {
  return s[kAcasRho] < c_.rho_crash;
}

Action AcasScriptedPolicy::Act(const State& s) const {
  const double theta = s[kAcasTheta];
  const double abs_theta = std::abs(theta);
  if (abs_theta > c_.blind_spot_deg * kDegToRad) {
    return MakeAcasAction(AcasAction::kCoc);
  }
  if (s[kAcasRho] > c_.rho_alert) return MakeAcasAction(AcasAction::kCoc);
  const bool strong = abs_theta <= c_.strong_sector_deg * kDegToRad;
  // Intruder on the left (theta > 0) -> turn right; dead ahead -> left.
  if (theta > 0.0) {
    return MakeAcasAction(strong ? AcasAction::kStrongRight
                                 : AcasAction::kWeakRight);
  }
  return MakeAcasAction(strong ? AcasAction::kStrongLeft
                               : AcasAction::kWeakLeft);
}

}  // namespace mdpfuzz::envs
