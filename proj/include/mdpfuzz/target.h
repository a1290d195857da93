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

#ifndef MDPFUZZ_TARGET_H_
#define MDPFUZZ_TARGET_H_

#include <cstdint>
#include <memory>

#include "mdpfuzz/mdp.h"

namespace mdpfuzz {

// The blackbox under test: an environment together with the policy driving
// it. Every operation is keyed by an explicit seed so an in-process target
// and a bridged one produce identical results.
class FuzzTarget {
 public:
  virtual ~FuzzTarget() = default;

  virtual const EnvironmentSpec& spec() const = 0;
  virtual State Sample(uint64_t seed) = 0;
  virtual bool Validate(const State& s) = 0;
  virtual RolloutResult Rollout(const State& s0, int horizon, uint64_t seed) = 0;
  // An independent handle usable from another worker lane.
  virtual std::unique_ptr<FuzzTarget> Fork() const = 0;
};

class LocalTarget : public FuzzTarget {
 public:
  LocalTarget(std::shared_ptr<const Environment> env,
              std::shared_ptr<const Policy> policy)
      : env_(std::move(env)), policy_(std::move(policy)) {}

  const EnvironmentSpec& spec() const override { return env_->spec(); }
  State Sample(uint64_t seed) override {
    RandomStream rng(seed);
    return env_->Sample(rng);
  }
  bool Validate(const State& s) override {
    return s.size() == env_->spec().state_dim && env_->Validate(s);
  }
  RolloutResult Rollout(const State& s0, int horizon, uint64_t seed) override {
    return mdpfuzz::Rollout(*env_, *policy_, s0, horizon, seed);
  }
  std::unique_ptr<FuzzTarget> Fork() const override {
    return std::make_unique<LocalTarget>(env_, policy_);
  }

  const Environment& environment() const { return *env_; }
  const Policy& policy() const { return *policy_; }

 private:
  std::shared_ptr<const Environment> env_;
  std::shared_ptr<const Policy> policy_;
};

}  // namespace mdpfuzz

#endif  // MDPFUZZ_TARGET_H_
