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

#include "mdpfuzz/config.h"

#include <cmath>
#include <limits>

#include "mdpfuzz/error.h"

namespace mdpfuzz {

using nlohmann::json;

std::string ClockModeName(ClockMode m) {
  return m == ClockMode::kWall ? "wall" : "logical";
}

void CampaignConfig::Validate() const {
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::kInvalidConfig, what);
  };
  if (env.empty()) fail("env is empty");
  if (env == "bridge" && bridge_cmd.empty() == bridge_tcp.empty()) {
    fail("bridge env needs exactly one of bridge_cmd / bridge_tcp");
  }
  if (!(bridge_timeout_s > 0)) fail("bridge_timeout_s must be > 0");
  if (corpus_size < 1) fail("corpus_size must be >= 1");
  if (horizon < 0) fail("horizon must be >= 0 (0 = environment default)");
  if (budget_iters && *budget_iters < 0) fail("budget_iters must be >= 0");
  if (budget_seconds && !(*budget_seconds >= 0)) fail("budget_seconds must be >= 0");
  if (k < 1) fail("K must be >= 1");
  if (!(tau > 0)) fail("tau must be > 0");
  if (!(gamma > 0 && gamma <= 1)) fail("gamma must be in (0, 1]");
  if (!(delta_sens > 0)) fail("delta_sens must be > 0");
  if (sensitivity_samples < 1) fail("sensitivity_samples must be >= 1");
  if (sensitivity_retries < 0 || mutation_retries < 0 || sampling_retries < 1) {
    fail("retry counts must be non-negative");
  }
  if (!(beta > 0 && beta <= 1)) fail("beta must be in (0, 1]");
  if (corpus_capacity && *corpus_capacity < 1) fail("corpus_capacity must be >= 1");
  if (lanes < 1) fail("lanes must be >= 1");
  if (stats_every < 1 || checkpoint_every < 1) fail("cadences must be >= 1");
}

json ToJson(const CampaignConfig& c) {
  json j;
  j["env"] = c.env;
  j["env_constants"] = c.env_constants;
  j["bridge_cmd"] = c.bridge_cmd;
  j["bridge_tcp"] = c.bridge_tcp;
  j["bridge_timeout_s"] = c.bridge_timeout_s;
  j["corpus_size"] = c.corpus_size;
  j["horizon"] = c.horizon;
  j["budget_iters"] = c.budget_iters ? json(*c.budget_iters) : json(nullptr);
  j["budget_seconds"] = c.budget_seconds ? json(*c.budget_seconds) : json(nullptr);
  j["K"] = c.k;
  j["tau"] = std::isinf(c.tau) ? json("always") : json(c.tau);
  j["gamma"] = c.gamma;
  j["density_guidance"] = c.density_guidance;
  j["responsibility_normalization"] = c.normalize_responsibilities ? "on" : "off";
  j["normalize_states"] = c.normalize_states;
  j["delta_sens"] = c.delta_sens;
  j["sensitivity_samples"] = c.sensitivity_samples;
  j["sensitivity_retries"] = c.sensitivity_retries;
  j["beta"] = c.beta;
  j["mutation_retries"] = c.mutation_retries;
  j["sampling_retries"] = c.sampling_retries;
  j["rng_seed"] = c.rng_seed;
  j["corpus_capacity"] = c.corpus_capacity ? json(*c.corpus_capacity) : json(nullptr);
  j["lanes"] = c.lanes;
  j["stats_every"] = c.stats_every;
  j["checkpoint_every"] = c.checkpoint_every;
  j["clock"] = ClockModeName(c.clock);
  j["out_dir"] = c.out_dir;
  return j;
}

CampaignConfig ConfigFromJson(const json& j, CampaignConfig c) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "config must be a JSON object");
  try {
    for (const auto& [key, v] : j.items()) {
      if (key == "env") c.env = v.get<std::string>();
      else if (key == "env_constants") c.env_constants = v.is_null() ? json::object() : v;
      else if (key == "bridge_cmd") c.bridge_cmd = v.get<std::string>();
      else if (key == "bridge_tcp") c.bridge_tcp = v.get<std::string>();
      else if (key == "bridge_timeout_s") c.bridge_timeout_s = v.get<double>();
      else if (key == "corpus_size") c.corpus_size = v.get<int>();
      else if (key == "horizon") c.horizon = v.get<int>();
      else if (key == "budget_iters") {
        c.budget_iters = v.is_null() ? std::nullopt : std::optional<int64_t>(v.get<int64_t>());
      } else if (key == "budget_seconds") {
        c.budget_seconds = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
      } else if (key == "K") c.k = v.get<int>();
      else if (key == "tau") {
        if (v.is_string()) {
          if (v.get<std::string>() != "always") {
            throw Error(ErrorCode::kInvalidConfig, "tau must be a number or \"always\"");
          }
          c.tau = std::numeric_limits<double>::infinity();
        } else {
          c.tau = v.get<double>();
        }
      } else if (key == "gamma") c.gamma = v.get<double>();
      else if (key == "density_guidance") c.density_guidance = v.get<bool>();
      else if (key == "responsibility_normalization") {
        const std::string s = v.get<std::string>();
        if (s != "on" && s != "off") {
          throw Error(ErrorCode::kInvalidConfig, "responsibility_normalization must be on|off");
        }
        c.normalize_responsibilities = s == "on";
      } else if (key == "normalize_states") c.normalize_states = v.get<bool>();
      else if (key == "delta_sens") c.delta_sens = v.get<double>();
      else if (key == "sensitivity_samples") c.sensitivity_samples = v.get<int>();
      else if (key == "sensitivity_retries") c.sensitivity_retries = v.get<int>();
      else if (key == "beta") c.beta = v.get<double>();
      else if (key == "mutation_retries") c.mutation_retries = v.get<int>();
      else if (key == "sampling_retries") c.sampling_retries = v.get<int>();
      else if (key == "rng_seed") c.rng_seed = v.get<uint64_t>();
      else if (key == "corpus_capacity") {
        c.corpus_capacity = v.is_null() ? std::nullopt : std::optional<int>(v.get<int>());
      } else if (key == "lanes") c.lanes = v.get<int>();
      else if (key == "stats_every") c.stats_every = v.get<int>();
      else if (key == "checkpoint_every") c.checkpoint_every = v.get<int>();
      else if (key == "clock") {
        const std::string s = v.get<std::string>();
        if (s == "wall") c.clock = ClockMode::kWall;
        else if (s == "logical") c.clock = ClockMode::kLogical;
        else throw Error(ErrorCode::kInvalidConfig, "clock must be wall|logical");
      } else if (key == "out_dir") c.out_dir = v.get<std::string>();
      else throw Error(ErrorCode::kInvalidConfig, "unknown config key '" + key + "'");
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, e.what());
  }
  return c;
}

}  // namespace mdpfuzz
