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

#ifndef MDPFUZZ_CLI_H_
#define MDPFUZZ_CLI_H_

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mdpfuzz/config.h"
#include "mdpfuzz/fuzzer.h"
#include "mdpfuzz/target.h"

namespace mdpfuzz {

inline constexpr const char* kToolVersion = "0.3.0";

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitEnvironment = 2,
  kExitNotReproduced = 3,
};

// Builds the target named by config.env: a built-in environment with its
// scripted policy, or a bridged peer when env == "bridge".
std::unique_ptr<FuzzTarget> MakeTarget(const CampaignConfig& config);

struct ReplayOutcome {
  bool reproduced = false;
  std::optional<int> crash_step;  // observed
  int length = 0;
  std::string message;
};
ReplayOutcome ReplayCrash(const CrashRecord& record, FuzzTarget& target);

// Entry point shared by the executable and the tests. `args` excludes the
// program name.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int RunCli(int argc, char** argv);

}  // namespace mdpfuzz

#endif  // MDPFUZZ_CLI_H_
