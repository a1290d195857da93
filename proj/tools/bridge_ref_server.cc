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

// Serves a built-in environment over the bridge protocol, on stdio or on a
// loopback TCP port.

#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "mdpfuzz/bridge.h"
#include "mdpfuzz/envs/registry.h"
#include "mdpfuzz/error.h"

int main(int argc, char** argv) {
  CLI::App app{"Reference bridge server for the built-in environments", "mdpfuzz-bridge-ref"};
  std::string env = "acas-toy";
  std::string constants = "{}";
  int port = -1;
  app.add_option("--env", env, "acas-toy | coopnav-toy | chain");
  app.add_option("--constants", constants, "JSON object of constant overrides");
  app.add_option("--listen", port, "serve TCP on 127.0.0.1:PORT (0 picks a port)");
  CLI11_PARSE(app, argc, argv);

  try {
    auto bundle = mdpfuzz::envs::MakeEnvironment(env, nlohmann::json::parse(constants));
    mdpfuzz::LocalTarget target(bundle.env, bundle.policy);
    if (port >= 0) {
      mdpfuzz::ServeTcp(target, port, [](int bound) {
        std::cout << "listening on 127.0.0.1:" << bound << std::endl;
      });
    } else {
      std::ios::sync_with_stdio(false);
      mdpfuzz::BridgeServer(target).Serve(std::cin, std::cout);
    }
  } catch (const std::exception& e) {
    std::cerr << "mdpfuzz-bridge-ref: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
