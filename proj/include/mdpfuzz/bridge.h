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

#ifndef MDPFUZZ_BRIDGE_H_
#define MDPFUZZ_BRIDGE_H_

#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "mdpfuzz/mdp.h"
#include "mdpfuzz/target.h"

namespace mdpfuzz {

inline constexpr int kBridgeProtocolVersion = 1;

// Newline-delimited message channel. Implementations are not thread-safe;
// one connection carries one request at a time.
class LineTransport {
 public:
  virtual ~LineTransport() = default;
  // `line` must not contain a newline; one is appended.
  virtual void WriteLine(const std::string& line) = 0;
  // Throws Timeout or TransportClosed.
  virtual std::string ReadLine(std::chrono::milliseconds timeout) = 0;
};

// Talks to a pair of file descriptors. Owns (and closes) them when
// `owns_fds` is set.
class FdTransport : public LineTransport {
 public:
  FdTransport(int read_fd, int write_fd, bool owns_fds);
  ~FdTransport() override;
  FdTransport(const FdTransport&) = delete;
  FdTransport& operator=(const FdTransport&) = delete;

  void WriteLine(const std::string& line) override;
  std::string ReadLine(std::chrono::milliseconds timeout) override;

 protected:
  void CloseFds();

 private:
  int read_fd_;
  int write_fd_;
  bool owns_fds_;
  std::string buffer_;
};

// Spawns `/bin/sh -c command` and speaks over its stdin/stdout. The child's
// stderr is inherited.
class ChildProcessTransport : public FdTransport {
 public:
  static std::unique_ptr<ChildProcessTransport> Spawn(const std::string& command);
  ~ChildProcessTransport() override;

 private:
  ChildProcessTransport(int read_fd, int write_fd, int pid);
  int pid_;
};

// TCP client connection; `endpoint` is "host:port".
std::unique_ptr<LineTransport> ConnectTcp(const std::string& endpoint);

struct BridgeSpec {
  int state_dim = 0;
  std::vector<Interval> bounds;
  int horizon_max = 1;
  int version = kBridgeProtocolVersion;

  // Every dimension is mutable: the wire schema carries no mask.
  EnvironmentSpec ToEnvironmentSpec() const;
};

// Client side of the wire protocol. Responses are checked structurally and
// must echo the request id.
class BridgeClient {
 public:
  BridgeClient(std::unique_ptr<LineTransport> transport,
               std::chrono::milliseconds timeout);

  BridgeSpec Handshake();
  State Sample(uint64_t rng_seed);
  bool Validate(const State& s);
  RolloutResult Rollout(const State& s0, int horizon, uint64_t rng_seed);

  const BridgeSpec& spec() const { return spec_; }

 private:
  nlohmann::json Call(nlohmann::json request);
  void RequireHandshake() const;
  void CheckDim(const State& s) const;

  std::unique_ptr<LineTransport> transport_;
  std::chrono::milliseconds timeout_;
  int64_t next_id_ = 1;
  bool handshaken_ = false;
  BridgeSpec spec_;
};

struct BridgeEndpoint {
  std::string command;  // child process command line, or
  std::string tcp;      // "host:port"
  double timeout_s = 30.0;

  std::unique_ptr<LineTransport> Open() const;
};

// FuzzTarget over the bridge. Fork opens a new connection.
class BridgeTarget : public FuzzTarget {
 public:
  explicit BridgeTarget(BridgeEndpoint endpoint);

  const EnvironmentSpec& spec() const override { return env_spec_; }
  State Sample(uint64_t seed) override { return client_.Sample(seed); }
  bool Validate(const State& s) override;
  RolloutResult Rollout(const State& s0, int horizon, uint64_t seed) override {
    return client_.Rollout(s0, horizon, seed);
  }
  std::unique_ptr<FuzzTarget> Fork() const override;

  const BridgeSpec& bridge_spec() const { return client_.spec(); }

 private:
  BridgeEndpoint endpoint_;
  BridgeClient client_;
  EnvironmentSpec env_spec_;
};

// Server side: answers one protocol line for the given target. Malformed
// input and target failures become error responses.
class BridgeServer {
 public:
  explicit BridgeServer(FuzzTarget& target) : target_(target) {}

  std::string HandleLine(const std::string& line);
  // Serves until EOF on `in`.
  void Serve(std::istream& in, std::ostream& out);

 private:
  nlohmann::json Handle(const nlohmann::json& request);

  FuzzTarget& target_;
};

// Accepts TCP connections on `port` (0 picks one) and serves each with a
// fresh fork of `target` on its own thread. `on_listening` receives the
// bound port. Returns only on a listen error.
void ServeTcp(const FuzzTarget& target, int port,
              const std::function<void(int)>& on_listening = {});

}  // namespace mdpfuzz

#endif  // MDPFUZZ_BRIDGE_H_
