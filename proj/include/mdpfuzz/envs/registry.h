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

#ifndef MDPFUZZ_ENVS_REGISTRY_H_
#define MDPFUZZ_ENVS_REGISTRY_H_

#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdpfuzz/mdp.h"

namespace mdpfuzz::envs {

struct EnvironmentBundle {
  std::shared_ptr<const Environment> env;
  std::shared_ptr<const Policy> policy;
  // Fully resolved constants (defaults merged with overrides).
  nlohmann::json constants;
};

// Built-in environment names: "acas-toy", "coopnav-toy", "chain".
std::vector<std::string> BuiltinEnvironmentNames();
bool IsBuiltinEnvironment(const std::string& name);

// Builds an environment and its scripted reference policy. Keys in
// `overrides` replace the documented defaults; unknown keys are an error.
EnvironmentBundle MakeEnvironment(const std::string& name,
                                  const nlohmann::json& overrides = nlohmann::json::object());

}  // namespace mdpfuzz::envs

#endif  // MDPFUZZ_ENVS_REGISTRY_H_
