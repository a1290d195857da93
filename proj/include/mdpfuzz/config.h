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

#ifndef MDPFUZZ_CONFIG_H_
#define MDPFUZZ_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

namespace mdpfuzz {

enum class ClockMode {
  kWall,     // elapsed_s is wall-clock seconds
  kLogical,  // elapsed_s counts completed iterations; outputs are reproducible
};

struct CampaignConfig {
  std::string env = "acas-toy";
  nlohmann::json env_constants = nlohmann::json::object();
  // Bridged targets (env == "bridge"): exactly one of these is set.
  std::string bridge_cmd;
  std::string bridge_tcp;  // host:port
  double bridge_timeout_s = 30.0;

  int corpus_size = 50;  // N
  int horizon = 0;       // M; 0 selects the environment default
  std::optional<int64_t> budget_iters;
  std::optional<double> budget_seconds;  // used when budget_iters is unset

  int k = 10;            // GMM components
  double tau = 0.01;     // density threshold; +inf updates on every sequence
  double gamma = 0.01;   // DynEM update weight
  bool density_guidance = true;
  bool normalize_responsibilities = true;
  // Rescale states per dimension (unit variance under uniform sampling of
  // the initial-state bounds) before density estimation.
  bool normalize_states = true;

  double delta_sens = 0.01;
  int sensitivity_samples = 1;
  int sensitivity_retries = 10;
  double beta = 0.05;       // mutation magnitude, fraction of bound width
  int mutation_retries = 100;
  int sampling_retries = 1000;

  uint64_t rng_seed = 0;
  std::optional<int> corpus_capacity;
  int lanes = 1;
  int stats_every = 10;
  int checkpoint_every = 500;
  ClockMode clock = ClockMode::kWall;
  std::string out_dir = "mdpfuzz-out";

  // Throws InvalidConfig.
  void Validate() const;
  double DefaultBudgetSeconds() const { return 600.0; }
};

nlohmann::json ToJson(const CampaignConfig& c);
// Keys absent from `j` keep the values already in `base`.
CampaignConfig ConfigFromJson(const nlohmann::json& j, CampaignConfig base = {});

std::string ClockModeName(ClockMode m);

}  // namespace mdpfuzz

#endif  // MDPFUZZ_CONFIG_H_
