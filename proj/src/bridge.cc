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

#include "mdpfuzz/bridge.h"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <thread>

#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include "mdpfuzz/campaign_io.h"
#include "mdpfuzz/error.h"

namespace mdpfuzz {

using nlohmann::json;

namespace {

void IgnoreSigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

std::string Errno(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

}  // namespace

FdTransport::FdTransport(int read_fd, int write_fd, bool owns_fds)
    : read_fd_(read_fd), write_fd_(write_fd), owns_fds_(owns_fds) {
  IgnoreSigpipe();
}

FdTransport::~FdTransport() { CloseFds(); }

void FdTransport::CloseFds() {
  if (!owns_fds_) return;
  if (read_fd_ >= 0) ::close(read_fd_);
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  read_fd_ = write_fd_ = -1;
}

void FdTransport::WriteLine(const std::string& line) {
  if (write_fd_ < 0) throw Error(ErrorCode::kTransportClosed, "transport closed");
  std::string data = line + "\n";
  size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::write(write_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EPIPE || errno == ECONNRESET) {
        throw Error(ErrorCode::kTransportClosed, "peer closed the connection");
      }
      throw Error(ErrorCode::kIoError, Errno("write"));
    }
    off += static_cast<size_t>(n);
  }
}

std::string FdTransport::ReadLine(std::chrono::milliseconds timeout) {
  if (read_fd_ < 0) throw Error(ErrorCode::kTransportClosed, "transport closed");
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    size_t nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw Error(ErrorCode::kTimeout, "no response from peer");
    pollfd pfd{read_fd_, POLLIN, 0};
    int rc = ::poll(&pfd, 1, static_cast<int>(std::min<int64_t>(left.count(), 1 << 30)));
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIoError, Errno("poll"));
    }
    if (rc == 0) continue;
    char chunk[65536];
    ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN) continue;
      if (errno == ECONNRESET) throw Error(ErrorCode::kTransportClosed, "connection reset");
      throw Error(ErrorCode::kIoError, Errno("read"));
    }
    if (n == 0) throw Error(ErrorCode::kTransportClosed, "peer closed the connection");
    buffer_.append(chunk, static_cast<size_t>(n));
  }
}

ChildProcessTransport::ChildProcessTransport(int read_fd, int write_fd, int pid)
    : FdTransport(read_fd, write_fd, true), pid_(pid) {}

std::unique_ptr<ChildProcessTransport> ChildProcessTransport::Spawn(
    const std::string& command) {
  IgnoreSigpipe();
  int to_child[2], from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw Error(ErrorCode::kIoError, Errno("pipe"));
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw Error(ErrorCode::kIoError, Errno("pipe"));
  }
  pid_t pid = ::fork();
  if (pid < 0) {
    for (int fd : {to_child[0], to_child[1], from_child[0], from_child[1]}) ::close(fd);
    throw Error(ErrorCode::kIoError, Errno("fork"));
  }
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    std::signal(SIGPIPE, SIG_DFL);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::unique_ptr<ChildProcessTransport>(
      new ChildProcessTransport(from_child[0], to_child[1], pid));
}

ChildProcessTransport::~ChildProcessTransport() {
  CloseFds();
  // The child sees EOF on stdin; give it a moment before killing it.
  for (int i = 0; i < 200; ++i) {
    int status;
    pid_t r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_ || r < 0) return;
    ::usleep(10000);
  }
  ::kill(pid_, SIGKILL);
  ::waitpid(pid_, nullptr, 0);
}

std::unique_ptr<LineTransport> ConnectTcp(const std::string& endpoint) {
  size_t colon = endpoint.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == endpoint.size()) {
    throw Error(ErrorCode::kInvalidConfig, "expected host:port, got '" + endpoint + "'");
  }
  std::string host = endpoint.substr(0, colon);
  std::string port = endpoint.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &res); rc != 0) {
    throw Error(ErrorCode::kTransportClosed,
                "resolve " + endpoint + ": " + ::gai_strerror(rc));
  }
  int fd = -1;
  std::string last_error = "no addresses";
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    last_error = std::strerror(errno);
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) throw Error(ErrorCode::kTransportClosed, "connect " + endpoint + ": " + last_error);
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return std::make_unique<FdTransport>(fd, fd, true);
}

EnvironmentSpec BridgeSpec::ToEnvironmentSpec() const {
  EnvironmentSpec spec;
  spec.name = "bridge";
  spec.state_dim = state_dim;
  spec.initial_state_bounds = bounds;
  spec.mutable_dims.assign(static_cast<size_t>(state_dim), true);
  spec.default_horizon = horizon_max;
  return spec;
}

BridgeClient::BridgeClient(std::unique_ptr<LineTransport> transport,
                           std::chrono::milliseconds timeout)
    : transport_(std::move(transport)), timeout_(timeout) {}

json BridgeClient::Call(json request) {
  const int64_t id = next_id_++;
  request["id"] = id;
  transport_->WriteLine(request.dump());
  const std::string line = transport_->ReadLine(timeout_);
  json response;
  try {
    response = json::parse(line);
  } catch (const json::exception&) {
    throw Error(ErrorCode::kProtocolError, "malformed response: " + line.substr(0, 200));
  }
  if (!response.is_object() || !response.contains("id")) {
    throw Error(ErrorCode::kProtocolError, "response without id");
  }
  const json& rid = response["id"];
  if (!rid.is_number_integer() || rid.get<int64_t>() != id) {
    throw Error(ErrorCode::kProtocolError,
                "response id " + rid.dump() + " does not match request " + std::to_string(id));
  }
  if (response.contains("error")) {
    const json& e = response["error"];
    throw Error(ErrorCode::kRemoteError, e.is_string() ? e.get<std::string>() : e.dump());
  }
  return response;
}

namespace {

const json& Field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::kProtocolError, std::string("missing field ") + key);
  return *it;
}

State ParseState(const json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    throw Error(ErrorCode::kProtocolError,
                "state must be an array of " + std::to_string(dim) + " numbers");
  }
  State s(dim);
  for (int i = 0; i < dim; ++i) {
    if (!j[static_cast<size_t>(i)].is_number()) {
      throw Error(ErrorCode::kProtocolError, "state entries must be numbers");
    }
    s[i] = j[static_cast<size_t>(i)].get<double>();
  }
  return s;
}

int ParsePositiveInt(const json& j, const char* name) {
  if (!j.is_number_integer() || j.get<int64_t>() < 1 || j.get<int64_t>() > (1 << 30)) {
    throw Error(ErrorCode::kProtocolError, std::string(name) + " must be a positive integer");
  }
  return j.get<int>();
}

}  // namespace

BridgeSpec BridgeClient::Handshake() {
  json r = Call({{"cmd", "spec"}});
  const json& version = Field(r, "version");
  if (!version.is_number_integer() || version.get<int>() != kBridgeProtocolVersion) {
    throw Error(ErrorCode::kProtocolError, "unsupported protocol version " + version.dump());
  }
  BridgeSpec spec;
  spec.version = version.get<int>();
  spec.state_dim = ParsePositiveInt(Field(r, "state_dim"), "state_dim");
  spec.horizon_max = ParsePositiveInt(Field(r, "horizon_max"), "horizon_max");
  const json& bounds = Field(r, "bounds");
  if (!bounds.is_array() || static_cast<int>(bounds.size()) != spec.state_dim) {
    throw Error(ErrorCode::kProtocolError, "bounds must have state_dim entries");
  }
  for (const json& b : bounds) {
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
      throw Error(ErrorCode::kProtocolError, "each bound must be [lo, hi]");
    }
    Interval iv{b[0].get<double>(), b[1].get<double>()};
    if (!(iv.lo <= iv.hi)) throw Error(ErrorCode::kProtocolError, "bound with lo > hi");
    spec.bounds.push_back(iv);
  }
  spec_ = spec;
  handshaken_ = true;
  return spec;
}

void BridgeClient::RequireHandshake() const {
  if (!handshaken_) throw Error(ErrorCode::kProtocolError, "handshake not completed");
}

void BridgeClient::CheckDim(const State& s) const {
  if (s.size() != spec_.state_dim) {
    throw Error(ErrorCode::kDimensionMismatch,
                "state has " + std::to_string(s.size()) + " entries, bridge expects " +
                    std::to_string(spec_.state_dim));
  }
}

State BridgeClient::Sample(uint64_t rng_seed) {
  RequireHandshake();
  json r = Call({{"cmd", "sample"}, {"rng", rng_seed}});
  return ParseState(Field(r, "state"), spec_.state_dim);
}

bool BridgeClient::Validate(const State& s) {
  RequireHandshake();
  CheckDim(s);
  json r = Call({{"cmd", "validate"}, {"state", StateToJson(s)}});
  const json& valid = Field(r, "valid");
  if (!valid.is_boolean()) throw Error(ErrorCode::kProtocolError, "valid must be a boolean");
  return valid.get<bool>();
}

RolloutResult BridgeClient::Rollout(const State& s0, int horizon, uint64_t rng_seed) {
  RequireHandshake();
  CheckDim(s0);
  json r = Call({{"cmd", "rollout"},
                 {"state", StateToJson(s0)},
                 {"horizon", horizon},
                 {"rng", rng_seed}});
  RolloutResult result;
  const json& states = Field(r, "states");
  if (!states.is_array() || states.empty() || static_cast<int>(states.size()) > horizon) {
    throw Error(ErrorCode::kProtocolError, "states must hold 1..horizon entries");
  }
  for (const json& s : states) result.states.push_back(ParseState(s, spec_.state_dim));
  const json& reward = Field(r, "reward");
  if (!reward.is_number()) throw Error(ErrorCode::kProtocolError, "reward must be a number");
  result.cumulative_reward = reward.get<double>();
  const json& crash = Field(r, "crash");
  const json& step = Field(r, "crash_step");
  if (!crash.is_boolean()) throw Error(ErrorCode::kProtocolError, "crash must be a boolean");
  if (crash.get<bool>()) {
    if (!step.is_number_integer()) {
      throw Error(ErrorCode::kProtocolError, "crash_step must be an integer when crash is true");
    }
    int cs = step.get<int>();
    if (cs < 0 || cs != result.length() - 1) {
      throw Error(ErrorCode::kProtocolError, "crash_step must index the last state");
    }
    result.crash_step = cs;
  } else if (!step.is_null()) {
    throw Error(ErrorCode::kProtocolError, "crash_step must be null without a crash");
  }
  return result;
}

std::unique_ptr<LineTransport> BridgeEndpoint::Open() const {
  if (!command.empty() && !tcp.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "bridge command and tcp endpoint are exclusive");
  }
  if (!command.empty()) return ChildProcessTransport::Spawn(command);
  if (!tcp.empty()) return ConnectTcp(tcp);
  throw Error(ErrorCode::kInvalidConfig, "bridge needs a command or a tcp endpoint");
}

namespace {

std::chrono::milliseconds ToMillis(double seconds) {
  return std::chrono::milliseconds(static_cast<int64_t>(seconds * 1000.0));
}

}  // namespace

BridgeTarget::BridgeTarget(BridgeEndpoint endpoint)
    : endpoint_(std::move(endpoint)),
      client_(endpoint_.Open(), ToMillis(endpoint_.timeout_s)) {
  env_spec_ = client_.Handshake().ToEnvironmentSpec();
  env_spec_.Check();
}

bool BridgeTarget::Validate(const State& s) {
  if (s.size() != env_spec_.state_dim) return false;
  return client_.Validate(s);
}

std::unique_ptr<FuzzTarget> BridgeTarget::Fork() const {
  return std::make_unique<BridgeTarget>(endpoint_);
}

json BridgeServer::Handle(const json& request) {
  if (!request.is_object()) throw Error(ErrorCode::kProtocolError, "request must be an object");
  auto cmd_it = request.find("cmd");
  if (cmd_it == request.end() || !cmd_it->is_string()) {
    throw Error(ErrorCode::kProtocolError, "missing cmd");
  }
  const std::string cmd = cmd_it->get<std::string>();
  const EnvironmentSpec& spec = target_.spec();
  auto rng = [&]() -> uint64_t {
    const json& r = Field(request, "rng");
    if (!r.is_number_unsigned() && !(r.is_number_integer() && r.get<int64_t>() >= 0)) {
      throw Error(ErrorCode::kProtocolError, "rng must be a non-negative integer");
    }
    return r.get<uint64_t>();
  };
  json response;
  if (cmd == "spec") {
    json bounds = json::array();
    for (const Interval& iv : spec.initial_state_bounds) bounds.push_back({iv.lo, iv.hi});
    response = {{"state_dim", spec.state_dim},
                {"bounds", bounds},
                {"horizon_max", spec.default_horizon},
                {"version", kBridgeProtocolVersion}};
  } else if (cmd == "sample") {
    response = {{"state", StateToJson(target_.Sample(rng()))}};
  } else if (cmd == "validate") {
    const json& s = Field(request, "state");
    bool valid = s.is_array() && static_cast<int>(s.size()) == spec.state_dim &&
                 target_.Validate(ParseState(s, spec.state_dim));
    response = {{"valid", valid}};
  } else if (cmd == "rollout") {
    State s0 = ParseState(Field(request, "state"), spec.state_dim);
    int horizon = ParsePositiveInt(Field(request, "horizon"), "horizon");
    RolloutResult r = target_.Rollout(s0, horizon, rng());
    json states = json::array();
    for (const State& s : r.states) states.push_back(StateToJson(s));
    response = {{"states", states},
                {"reward", r.cumulative_reward},
                {"crash", r.crashed()},
                {"crash_step", r.crash_step ? json(*r.crash_step) : json(nullptr)}};
  } else {
    throw Error(ErrorCode::kProtocolError, "unknown cmd '" + cmd + "'");
  }
  return response;
}

std::string BridgeServer::HandleLine(const std::string& line) {
  json request;
  try {
    request = json::parse(line);
  } catch (const json::exception& e) {
    return json({{"id", nullptr}, {"error", std::string("malformed JSON: ") + e.what()}}).dump();
  }
  json id = request.is_object() && request.contains("id") ? request["id"] : json(nullptr);
  json response;
  try {
    response = Handle(request);
  } catch (const std::exception& e) {
    response = {{"error", e.what()}};
  }
  response["id"] = id;
  return response.dump();
}

void BridgeServer::Serve(std::istream& in, std::ostream& out) {
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    out << HandleLine(line) << '\n';
    out.flush();
  }
}

void ServeTcp(const FuzzTarget& target, int port, const std::function<void(int)>& on_listening) {
  IgnoreSigpipe();
  int fd = ::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw Error(ErrorCode::kIoError, Errno("socket"));
  int one = 1;
  ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<uint16_t>(port));
  if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(fd, 16) != 0) {
    std::string msg = Errno("bind/listen");
    ::close(fd);
    throw Error(ErrorCode::kIoError, msg);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  if (on_listening) on_listening(ntohs(addr.sin_port));
  while (true) {
    int client = ::accept4(fd, nullptr, nullptr, SOCK_CLOEXEC);
    if (client < 0) {
      if (errno == EINTR || errno == ECONNABORTED) continue;
      std::string msg = Errno("accept");
      ::close(fd);
      throw Error(ErrorCode::kIoError, msg);
    }
    std::shared_ptr<FuzzTarget> local = target.Fork();
    std::thread([client, local] {
      FdTransport transport(client, client, true);
      BridgeServer server(*local);
      try {
        while (true) {
          std::string line;
          try {
            line = transport.ReadLine(std::chrono::hours(24));
          } catch (const Error& e) {
            if (e.code() == ErrorCode::kTimeout) continue;
            throw;
          }
          if (line.empty()) continue;
          transport.WriteLine(server.HandleLine(line));
        }
      } catch (const Error&) {
        // Connection closed.
      }
    }).detach();
  }
}

}  // namespace mdpfuzz
