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

#ifndef MDPFUZZ_ENVS_ACAS_TOY_H_
#define MDPFUZZ_ENVS_ACAS_TOY_H_

#include <numbers>

#include "mdpfuzz/mdp.h"

namespace mdpfuzz::envs {

// Two-aircraft horizontal encounter. State layout (ownship frame, x ahead,
// y to the left, angles counter-clockwise):
//   [0] rho    range to intruder                      (ft)
//   [1] theta  bearing of intruder from ownship nose  (rad, (-pi, pi])
//   [2] psi    intruder heading relative to ownship   (rad, (-pi, pi])
//   [3] v_own  ownship ground speed                   (ft/s)
//   [4] v_int  intruder ground speed                  (ft/s)
struct AcasConstants {
  double rho_crash = 500.0;       // ft; oracle fires below this range
  double rho_safe = 5000.0;       // ft; reward saturates above this range
  double rho_alert = 8000.0;      // ft; scripted policy ignores traffic beyond
  double rho_init_min = 2000.0;   // ft
  double rho_init_max = 12000.0;  // ft
  double v_min = 100.0;           // ft/s
  double v_cap = 1100.0;          // ft/s; no aircraft is faster
  double dt = 1.0;                // s
  double weak_turn_deg = 1.5;     // deg/s
  double strong_turn_deg = 3.0;   // deg/s
  double weak_turn_penalty = 0.01;
  double strong_turn_penalty = 0.02;
  // Intruders with |theta| above this are behind the policy's field of
  // regard: it flies clear-of-conflict regardless of range.
  double blind_spot_deg = 150.0;
  // Strong turn when |theta| is below this, weak turn otherwise.
  double strong_sector_deg = 60.0;
  int horizon = 100;
};

enum class AcasAction : int { kCoc = 0, kWeakLeft, kWeakRight, kStrongLeft, kStrongRight };

inline constexpr int kAcasRho = 0;
inline constexpr int kAcasTheta = 1;
inline constexpr int kAcasPsi = 2;
inline constexpr int kAcasVOwn = 3;
inline constexpr int kAcasVInt = 4;

double WrapAngle(double a);
Action MakeAcasAction(AcasAction a);
AcasAction ToAcasAction(const Action& a);

class AcasToyEnvironment : public Environment {
 public:
  explicit AcasToyEnvironment(AcasConstants c = {});

  const EnvironmentSpec& spec() const override { return spec_; }
  const AcasConstants& constants() const { return c_; }

  State Sample(RandomStream& rng) const override;
  bool Validate(const State& s) const override;
  State Step(const State& s, const Action& a, RandomStream& rng) const override;
  double Reward(const State& s, const Action& a) const override;
  bool Crashed(const State& s) const override;

  // Turn rate for an action, rad/s, counter-clockwise positive.
  double TurnRate(AcasAction a) const;

 private:
  AcasConstants c_;
  EnvironmentSpec spec_;
};

// Turns away from the intruder, harder when it is closer to the nose.
// Has a rear blind spot (see AcasConstants::blind_spot_deg).
class AcasScriptedPolicy : public Policy {
 public:
  explicit AcasScriptedPolicy(AcasConstants c = {}) : c_(c) {}
  Action Act(const State& s) const override;

 private:
  AcasConstants c_;
};

}  // namespace mdpfuzz::envs

#endif  // MDPFUZZ_ENVS_ACAS_TOY_H_
