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

#ifndef MDPFUZZ_ENVS_CHAIN_H_
#define MDPFUZZ_ENVS_CHAIN_H_

#include <Eigen/Core>

#include "mdpfuzz/mdp.h"

namespace mdpfuzz::envs {

// Linear-Gaussian chain S_{t+1} = A S_t + b + eps, eps ~ N(0, sigma^2 I).
// Its exact sequence density is known in closed form, which makes it the
// reference environment for the density estimator.
struct ChainConstants {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
  double sigma = 0.1;
  double init_half_width = 2.0;   // initial states in [-w, w]^d
  double crash_threshold = 3.0;   // oracle fires when |S_t|_inf exceeds this
  int horizon = 50;

  // d = 2 defaults: a slowly rotating contraction.
  static ChainConstants Default(int dim = 2);
};

class ChainEnvironment : public Environment {
 public:
  explicit ChainEnvironment(ChainConstants c);

  const EnvironmentSpec& spec() const override { return spec_; }
  const ChainConstants& constants() const { return c_; }

  State Sample(RandomStream& rng) const override;
  bool Validate(const State& s) const override;
  State Step(const State& s, const Action& a, RandomStream& rng) const override;
  // -|S_t|^2; the chain ignores actions.
  double Reward(const State& s, const Action& a) const override;
  bool Crashed(const State& s) const override;

 private:
  ChainConstants c_;
  EnvironmentSpec spec_;
};

// The chain has no controls; this policy returns an empty action.
class NullPolicy : public Policy {
 public:
  Action Act(const State&) const override { return Action(); }
};

double SpectralRadius(const Eigen::MatrixXd& a);

// Solves P = A P A^T + Q for the stationary covariance. Requires spectral
// radius < 1.
Eigen::MatrixXd SolveDiscreteLyapunov(const Eigen::MatrixXd& a,
                                      const Eigen::MatrixXd& q);

// log N(S_0 | stationary) + sum_t log N(S_{t+1} | A S_t + b, sigma^2 I).
double ChainExactLogDensity(const StateSequence& seq, const Eigen::MatrixXd& a,
                            const Eigen::VectorXd& b, double sigma);

}  // namespace mdpfuzz::envs

#endif  // MDPFUZZ_ENVS_CHAIN_H_
