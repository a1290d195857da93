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

#include "mdpfuzz/envs/registry.h"

#include "mdpfuzz/envs/acas_toy.h"
#include "mdpfuzz/envs/chain.h"
#include "mdpfuzz/envs/coopnav_toy.h"
#include "mdpfuzz/error.h"

namespace mdpfuzz::envs {
namespace {

using nlohmann::json;

json AcasToJson(const AcasConstants& c) {
  return {{"rho_crash", c.rho_crash},
          {"rho_safe", c.rho_safe},
          {"rho_alert", c.rho_alert},
          {"rho_init_min", c.rho_init_min},
          {"rho_init_max", c.rho_init_max},
          {"v_min", c.v_min},
          {"v_cap", c.v_cap},
          {"dt", c.dt},
          {"weak_turn_deg", c.weak_turn_deg},
          {"strong_turn_deg", c.strong_turn_deg},
          {"weak_turn_penalty", c.weak_turn_penalty},
          {"strong_turn_penalty", c.strong_turn_penalty},
          {"blind_spot_deg", c.blind_spot_deg},
          {"strong_sector_deg", c.strong_sector_deg},
          {"horizon", c.horizon}};
}

AcasConstants AcasFromJson(const json& j) {
  AcasConstants c;
  c.rho_crash = j.at("rho_crash").get<double>();
  c.rho_safe = j.at("rho_safe").get<double>();
  c.rho_alert = j.at("rho_alert").get<double>();
  c.rho_init_min = j.at("rho_init_min").get<double>();
  c.rho_init_max = j.at("rho_init_max").get<double>();
  c.v_min = j.at("v_min").get<double>();
  c.v_cap = j.at("v_cap").get<double>();
  c.dt = j.at("dt").get<double>();
  c.weak_turn_deg = j.at("weak_turn_deg").get<double>();
  c.strong_turn_deg = j.at("strong_turn_deg").get<double>();
  c.weak_turn_penalty = j.at("weak_turn_penalty").get<double>();
  c.strong_turn_penalty = j.at("strong_turn_penalty").get<double>();
  c.blind_spot_deg = j.at("blind_spot_deg").get<double>();
  c.strong_sector_deg = j.at("strong_sector_deg").get<double>();
  c.horizon = j.at("horizon").get<int>();
  return c;
}

json CoopNavToJson(const CoopNavConstants& c) {
  return {{"arena_half", c.arena_half},
          {"radius", c.radius},
          {"speed_cap", c.speed_cap},
          {"dt", c.dt},
          {"horizon", c.horizon}};
}

CoopNavConstants CoopNavFromJson(const json& j) {
  CoopNavConstants c;
  c.arena_half = j.at("arena_half").get<double>();
  c.radius = j.at("radius").get<double>();
  c.speed_cap = j.at("speed_cap").get<double>();
  c.dt = j.at("dt").get<double>();
  c.horizon = j.at("horizon").get<int>();
  return c;
}

json ChainToJson(const ChainConstants& c) {
  json a = json::array();
  for (int r = 0; r < c.a.rows(); ++r) {
    json row = json::array();
    for (int col = 0; col < c.a.cols(); ++col) row.push_back(c.a(r, col));
    a.push_back(row);
  }
  json b = json::array();
  for (int i = 0; i < c.b.size(); ++i) b.push_back(c.b[i]);
  return {{"a", a},
          {"b", b},
          {"sigma", c.sigma},
          {"init_half_width", c.init_half_width},
          {"crash_threshold", c.crash_threshold},
          {"horizon", c.horizon}};
}

ChainConstants ChainFromJson(const json& j) {
  ChainConstants c;
  const json& a = j.at("a");
  const json& b = j.at("b");
  const int d = static_cast<int>(b.size());
  c.b.resize(d);
  for (int i = 0; i < d; ++i) c.b[i] = b[i].get<double>();
  if (static_cast<int>(a.size()) != d) {
    throw Error(ErrorCode::kInvalidConfig, "chain 'a' must be d x d");
  }
  c.a.resize(d, d);
  for (int r = 0; r < d; ++r) {
    if (static_cast<int>(a[r].size()) != d) {
      throw Error(ErrorCode::kInvalidConfig, "chain 'a' must be d x d");
    }
    for (int col = 0; col < d; ++col) c.a(r, col) = a[r][col].get<double>();
  }
  c.sigma = j.at("sigma").get<double>();
  c.init_half_width = j.at("init_half_width").get<double>();
  c.crash_threshold = j.at("crash_threshold").get<double>();
  c.horizon = j.at("horizon").get<int>();
  return c;
}

json Merge(json defaults, const json& overrides, const std::string& env) {
  if (overrides.is_null()) return defaults;
  if (!overrides.is_object()) {
    throw Error(ErrorCode::kInvalidConfig, env + " constants must be an object");
  }
  for (const auto& [key, value] : overrides.items()) {
    if (!defaults.contains(key)) {
      throw Error(ErrorCode::kInvalidConfig,
                  "unknown " + env + " constant '" + key + "'");
    }
    defaults[key] = value;
  }
  return defaults;
}

}  // namespace

std::vector<std::string> BuiltinEnvironmentNames() {
  return {"acas-toy", "coopnav-toy", "chain"};
}

bool IsBuiltinEnvironment(const std::string& name) {
  for (const auto& n : BuiltinEnvironmentNames()) {
    if (n == name) return true;
  }
  return false;
}

EnvironmentBundle MakeEnvironment(const std::string& name,
                                  const nlohmann::json& overrides) {
  EnvironmentBundle bundle;
  try {
    if (name == "acas-toy") {
      bundle.constants = Merge(AcasToJson(AcasConstants{}), overrides, name);
      const AcasConstants c = AcasFromJson(bundle.constants);
      bundle.env = std::make_shared<AcasToyEnvironment>(c);
      bundle.policy = std::make_shared<AcasScriptedPolicy>(c);
    } else if (name == "coopnav-toy") {
      bundle.constants = Merge(CoopNavToJson(CoopNavConstants{}), overrides, name);
      const CoopNavConstants c = CoopNavFromJson(bundle.constants);
      bundle.env = std::make_shared<CoopNavEnvironment>(c);
      bundle.policy = std::make_shared<CoopNavGreedyPolicy>(c);
    } else if (name == "chain") {
      bundle.constants = Merge(ChainToJson(ChainConstants::Default()), overrides, name);
      bundle.env = std::make_shared<ChainEnvironment>(ChainFromJson(bundle.constants));
      bundle.policy = std::make_shared<NullPolicy>();
    } else {
      throw Error(ErrorCode::kInvalidConfig, "unknown environment '" + name + "'");
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig,
                name + " constants: " + std::string(e.what()));
  }
  return bundle;
}

}  // namespace mdpfuzz::envs
