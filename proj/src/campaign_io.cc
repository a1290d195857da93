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

#include "mdpfuzz/campaign_io.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <unistd.h>

#include "mdpfuzz/error.h"

namespace mdpfuzz {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Densities can overflow to inf; JSON has no literal for it, so non-finite
// values travel as strings.
json RealToJson(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

double RealFromJson(const json& j) {
  if (!j.is_string()) return j.get<double>();
  const std::string s = j.get<std::string>();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  throw Error(ErrorCode::kSnapshotFormat, "bad real '" + s + "'");
}

}  // namespace

void WriteFileAtomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error(ErrorCode::kIoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error(ErrorCode::kIoError, "rename to " + path.string() + ": " + ec.message());
  }
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json StateToJson(const State& s) {
  json a = json::array();
  for (int i = 0; i < s.size(); ++i) a.push_back(s[i]);
  return a;
}

State StateFromJson(const json& j) {
  if (!j.is_array()) throw Error(ErrorCode::kProtocolError, "state must be an array");
  State s(static_cast<int>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::kProtocolError, "state entries must be numbers");
    s[static_cast<int>(i)] = j[i].get<double>();
  }
  return s;
}

json ToJson(const CrashRecord& r) {
  json j;
  j["s0"] = StateToJson(r.s0);
  j["crash_step"] = r.crash_step;
  j["cumulative_reward"] = r.cumulative_reward;
  j["rng_seed"] = r.rng_seed;
  j["env"] = r.env;
  j["horizon"] = r.horizon;
  j["iteration"] = r.iteration;
  j["elapsed_s"] = r.elapsed_s;
  j["parent_id"] = r.parent_id ? json(*r.parent_id) : json(nullptr);
  return j;
}

CrashRecord CrashRecordFromJson(const json& j) {
  try {
    CrashRecord r;
    r.s0 = StateFromJson(j.at("s0"));
    r.crash_step = j.at("crash_step").get<int>();
    r.cumulative_reward = j.at("cumulative_reward").get<double>();
    r.rng_seed = j.at("rng_seed").get<uint64_t>();
    r.env = j.at("env").get<std::string>();
    r.horizon = j.at("horizon").get<int>();
    r.iteration = j.at("iteration").get<int64_t>();
    r.elapsed_s = j.at("elapsed_s").get<double>();
    if (j.contains("parent_id") && !j["parent_id"].is_null()) {
      r.parent_id = j["parent_id"].get<uint64_t>();
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIoError, std::string("bad crash record: ") + e.what());
  }
}

json ToJson(const Seed& s) {
  json j;
  j["id"] = s.id;
  j["s0"] = StateToJson(s.s0);
  j["reward"] = s.reward;
  j["energy"] = s.energy;
  if (s.density) {
    j["density"] = {{"raw_log_density", RealToJson(s.density->raw_log_density)},
                    {"step_density", RealToJson(s.density->step_density)},
                    {"length", s.density->length}};
  } else {
    j["density"] = nullptr;
  }
  j["parent_id"] = s.parent_id ? json(*s.parent_id) : json(nullptr);
  j["created_at_iteration"] = s.created_at_iteration;
  j["rollout_seed"] = s.rollout_seed;
  return j;
}

Seed SeedFromJson(const json& j) {
  try {
    Seed s;
    s.id = j.at("id").get<uint64_t>();
    s.s0 = StateFromJson(j.at("s0"));
    s.reward = j.at("reward").get<double>();
    s.energy = j.at("energy").get<double>();
    if (!j.at("density").is_null()) {
      const json& d = j["density"];
      s.density = SequenceDensity{RealFromJson(d.at("raw_log_density")),
                                  RealFromJson(d.at("step_density")),
                                  d.at("length").get<int>()};
    }
    if (!j.at("parent_id").is_null()) s.parent_id = j["parent_id"].get<uint64_t>();
    s.created_at_iteration = j.at("created_at_iteration").get<int64_t>();
    s.rollout_seed = j.at("rollout_seed").get<uint64_t>();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIoError, std::string("bad corpus record: ") + e.what());
  }
}

std::string CrashesJsonl(const std::vector<CrashRecord>& crashes) {
  std::string out;
  for (const CrashRecord& r : crashes) out += ToJson(r).dump() + "\n";
  return out;
}

std::string CorpusJsonl(const Corpus& corpus) {
  std::string out;
  for (const Seed& s : corpus.seeds()) out += ToJson(s).dump() + "\n";
  return out;
}

std::string StatsCsv(const CampaignStats& stats) {
  std::string out = std::string(kStatsHeader) + "\n";
  char buf[256];
  for (const StatsRow& r : stats.rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%lld,%lld,%lld,%lld,%.17g\n", r.elapsed_s,
                  static_cast<long long>(r.iterations), static_cast<long long>(r.mutations),
                  static_cast<long long>(r.crashes), static_cast<long long>(r.corpus_size),
                  r.mean_energy);
    out += buf;
  }
  return out;
}

namespace {

std::vector<json> ReadJsonl(const fs::path& path) {
  std::istringstream in(ReadFile(path));
  std::vector<json> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kIoError,
                  path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

std::vector<CrashRecord> ReadCrashes(const fs::path& path) {
  std::vector<CrashRecord> out;
  for (const json& j : ReadJsonl(path)) out.push_back(CrashRecordFromJson(j));
  return out;
}

CampaignStats ReadStatsCsv(const fs::path& path) {
  std::istringstream in(ReadFile(path));
  std::string line;
  if (!std::getline(in, line) || line != kStatsHeader) {
    throw Error(ErrorCode::kIoError, path.string() + ": missing or unexpected header");
  }
  CampaignStats stats;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    StatsRow r;
    long long it, mut, cr, cs;
    if (std::sscanf(line.c_str(), "%lf,%lld,%lld,%lld,%lld,%lf", &r.elapsed_s, &it, &mut,
                    &cr, &cs, &r.mean_energy) != 6) {
      throw Error(ErrorCode::kIoError, path.string() + ": bad row '" + line + "'");
    }
    r.iterations = it;
    r.mutations = mut;
    r.crashes = cr;
    r.corpus_size = cs;
    stats.rows.push_back(r);
  }
  return stats;
}

void WriteCampaignOutputs(const fs::path& dir, const Campaign& campaign) {
  fs::create_directories(dir);
  WriteFileAtomic(dir / kCrashesFile, CrashesJsonl(campaign.crashes()));
  WriteFileAtomic(dir / kCorpusFile, CorpusJsonl(campaign.corpus()));
  WriteFileAtomic(dir / kStatsFile, StatsCsv(campaign.stats()));
  WriteFileAtomic(dir / kConfigFile, ToJson(campaign.config()).dump(2) + "\n");
  if (const DensityModel* model = campaign.density_model()) {
    std::ostringstream snap;
    WriteDynEmSnapshot(snap, model->state());
    WriteFileAtomic(dir / kDynEmFile, snap.str());
  }
  json state;
  state["version"] = 1;
  state["iteration"] = campaign.iteration();
  state["mutations"] = campaign.mutations();
  state["next_seed_id"] = campaign.corpus().next_id();
  state["elapsed_s"] = campaign.Elapsed();
  state["last_density"] = RealToJson(
      campaign.stats().rows.empty() ? 0.0 : campaign.stats().rows.back().last_density);
  WriteFileAtomic(dir / kStateFile, state.dump(2) + "\n");
}

CampaignConfig ReadSavedConfig(const fs::path& dir) {
  try {
    return ConfigFromJson(json::parse(ReadFile(dir / kConfigFile)));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("config.json: ") + e.what());
  }
}

void ResumeCampaign(const fs::path& dir, Campaign& campaign) {
  json state;
  try {
    state = json::parse(ReadFile(dir / kStateFile));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kIoError, std::string("campaign_state.json: ") + e.what());
  }
  if (state.value("version", 0) != 1) {
    throw Error(ErrorCode::kSnapshotFormat, "unsupported campaign_state version");
  }
  Corpus corpus(campaign.config().corpus_capacity);
  for (const json& j : ReadJsonl(dir / kCorpusFile)) corpus.Restore(SeedFromJson(j));
  std::optional<DynEmState> dynem;
  if (fs::exists(dir / kDynEmFile)) {
    std::istringstream in(ReadFile(dir / kDynEmFile));
    dynem = ReadDynEmSnapshot(in);
  }
  CampaignStats stats = ReadStatsCsv(dir / kStatsFile);
  if (!stats.rows.empty() && state.contains("last_density")) {
    stats.rows.back().last_density = RealFromJson(state["last_density"]);
  }
  campaign.Restore(std::move(corpus), std::move(dynem), ReadCrashes(dir / kCrashesFile),
                   std::move(stats), state.at("iteration").get<int64_t>(),
                   state.at("mutations").get<int64_t>(), state.at("elapsed_s").get<double>());
}

}  // namespace mdpfuzz
