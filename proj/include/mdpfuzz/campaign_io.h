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

#ifndef MDPFUZZ_CAMPAIGN_IO_H_
#define MDPFUZZ_CAMPAIGN_IO_H_

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mdpfuzz/fuzzer.h"

namespace mdpfuzz {

inline constexpr const char* kCrashesFile = "crashes.jsonl";
inline constexpr const char* kCorpusFile = "corpus.jsonl";
inline constexpr const char* kStatsFile = "stats.csv";
inline constexpr const char* kConfigFile = "config.json";
inline constexpr const char* kDynEmFile = "dynem.snapshot";
inline constexpr const char* kStateFile = "campaign_state.json";
inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kStatsHeader =
    "elapsed_s,iterations,mutations,crashes,corpus_size,mean_energy";

// Writes to a sibling temp file, then renames over `path`.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view content);
std::string ReadFile(const std::filesystem::path& path);

nlohmann::json StateToJson(const State& s);
State StateFromJson(const nlohmann::json& j);

nlohmann::json ToJson(const CrashRecord& r);
CrashRecord CrashRecordFromJson(const nlohmann::json& j);
nlohmann::json ToJson(const Seed& s);
Seed SeedFromJson(const nlohmann::json& j);

std::string CrashesJsonl(const std::vector<CrashRecord>& crashes);
std::string CorpusJsonl(const Corpus& corpus);
std::string StatsCsv(const CampaignStats& stats);

std::vector<CrashRecord> ReadCrashes(const std::filesystem::path& path);
CampaignStats ReadStatsCsv(const std::filesystem::path& path);

// Writes the full output set (crashes, corpus, stats, config, DynEM
// snapshot, resume state), each file atomically.
void WriteCampaignOutputs(const std::filesystem::path& dir, const Campaign& campaign);

// Loads a directory written by WriteCampaignOutputs into a freshly
// constructed campaign whose config matches the saved one.
void ResumeCampaign(const std::filesystem::path& dir, Campaign& campaign);
CampaignConfig ReadSavedConfig(const std::filesystem::path& dir);

}  // namespace mdpfuzz

#endif  // MDPFUZZ_CAMPAIGN_IO_H_
