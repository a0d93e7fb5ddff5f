//
// Copyright 2026 The seqleak Authors
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
//

#include "seqleak/bridge.hpp"

#include <netdb.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cmath>
#include <cstring>
#include <limits>

#include "seqleak/errors.hpp"

namespace seqleak {
namespace {

std::string errno_text() { return std::strerror(errno); }

void ignore_sigpipe() {
  static const bool once = [] {
    ::signal(SIGPIPE, SIG_IGN);
    return true;
  }();
  (void)once;
}

nlohmann::json encode_logprobs(const Logits& logits) {
  nlohmann::json arr = nlohmann::json::array();
  for (double v : logits.values()) {
    if (std::isinf(v)) {
      arr.push_back(nullptr);
    } else {
      arr.push_back(v);
    }
  }
  return arr;
}

}  // namespace

// ---------------------------------------------------------------------------
// Channels

FdChannel::FdChannel(int read_fd, int write_fd, bool owns_fds)
    : read_fd_(read_fd), write_fd_(write_fd), owns_(owns_fds) {
  ignore_sigpipe();
}

FdChannel::~FdChannel() {
  if (!owns_) return;
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (read_fd_ >= 0) ::close(read_fd_);
}

void FdChannel::close_write() {
  if (write_fd_ < 0) return;
  if (write_fd_ == read_fd_) {
    ::shutdown(write_fd_, SHUT_WR);
  } else {
    ::close(write_fd_);
  }
  write_fd_ = -1;
}

void FdChannel::write_line(const std::string& line) {
  if (write_fd_ < 0) throw ModelError("bridge channel is closed for writing", true);
  std::string data = line;
  data.push_back('\n');
  std::size_t off = 0;
  while (off < data.size()) {
    ssize_t n = ::write(write_fd_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ModelError("bridge write failed: " + errno_text(), true);
    }
    off += static_cast<std::size_t>(n);
  }
}

std::optional<std::string> FdChannel::read_line() {
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    char chunk[4096];
    ssize_t n = ::read(read_fd_, chunk, sizeof(chunk));
    if (n < 0) {
      if (errno == EINTR) continue;
      throw ModelError("bridge read failed: " + errno_text(), true);
    }
    if (n == 0) {
      if (buffer_.empty()) return std::nullopt;
      std::string line = std::move(buffer_);
      buffer_.clear();
      return line;
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

bool FdChannel::wait_readable(int timeout_ms) {
  if (buffer_.find('\n') != std::string::npos) return true;
  pollfd pfd{read_fd_, POLLIN, 0};
  int rc = ::poll(&pfd, 1, timeout_ms);
  return rc > 0;
}

namespace {

SpawnedProcess spawn_shell(const std::string& command) {
  ignore_sigpipe();
  int to_child[2];
  int from_child[2];
  if (::pipe(to_child) != 0) throw ModelError("pipe failed: " + errno_text(), true);
  if (::pipe(from_child) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw ModelError("pipe failed: " + errno_text(), true);
  }
  pid_t pid = ::fork();
  if (pid < 0) throw ModelError("fork failed: " + errno_text(), true);
  if (pid == 0) {
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::close(to_child[0]);
  ::close(from_child[1]);
  return {from_child[0], to_child[1], static_cast<int>(pid)};
}

}  // namespace

ProcessChannel::ProcessChannel(const std::string& command)
    : ProcessChannel(spawn_shell(command)) {}

ProcessChannel::ProcessChannel(SpawnedProcess s)
    : FdChannel(s.read_fd, s.write_fd, true), pid_(s.pid) {}

ProcessChannel::~ProcessChannel() {
  close_write();
  if (pid_ > 0) {
    int status = 0;
    ::waitpid(pid_, &status, 0);
  }
}

std::unique_ptr<FdChannel> connect_tcp(const std::string& host, int port) {
  ignore_sigpipe();
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  const std::string service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0) {
    throw ModelError("cannot resolve " + host + ": " + ::gai_strerror(rc), true);
  }
  int fd = -1;
  for (addrinfo* ai = res; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0) {
    throw ModelError("cannot connect to " + host + ":" + service, true);
  }
  return std::make_unique<FdChannel>(fd, fd, true);
}

std::pair<std::unique_ptr<FdChannel>, std::unique_ptr<FdChannel>> make_channel_pair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM, 0, fds) != 0) {
    throw ModelError("socketpair failed: " + errno_text(), true);
  }
  return {std::make_unique<FdChannel>(fds[0], fds[0], true),
          std::make_unique<FdChannel>(fds[1], fds[1], true)};
}

// ---------------------------------------------------------------------------
// Protocol

nlohmann::json parse_bridge_message(const std::string& line) {
  nlohmann::json msg;
  try {
    msg = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError("malformed bridge message at byte " + std::to_string(e.byte) +
                        ": " + line.substr(0, 80));
  }
  if (!msg.is_object() || !msg.contains("op") || !msg["op"].is_string()) {
    throw ProtocolError("bridge message lacks a string \"op\" field: " +
                        line.substr(0, 80));
  }
  return msg;
}

SessionInfo handshake(LineChannel& channel) {
  channel.write_line(
      nlohmann::json{{"op", "hello"}, {"version", kBridgeProtocolVersion}}.dump());
  std::optional<std::string> line = channel.read_line();
  if (!line) throw ModelError("bridge closed the connection during handshake", true);
  nlohmann::json reply = parse_bridge_message(*line);
  if (reply["op"] == "err") {
    throw ModelError("bridge refused handshake: " + reply.value("msg", std::string()));
  }
  if (reply["op"] != "hello") {
    throw ProtocolError("expected hello reply, got op " + reply["op"].dump());
  }
  SessionInfo info;
  try {
    info.version = reply.at("version").get<int>();
    info.vocab_size = reply.at("vocab_size").get<std::size_t>();
    info.name = reply.value("name", std::string("remote"));
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("incomplete hello reply: ") + e.what());
  }
  if (info.version != kBridgeProtocolVersion) {
    throw ProtocolError("bridge speaks protocol version " +
                        std::to_string(info.version) + ", client speaks " +
                        std::to_string(kBridgeProtocolVersion));
  }
  if (info.vocab_size == 0) throw ProtocolError("bridge advertised vocab_size 0");
  return info;
}

Logits decode_logprobs(const nlohmann::json& reply, std::size_t vocab_size) {
  if (!reply.contains("logprobs") || !reply["logprobs"].is_array()) {
    throw ProtocolError("dist reply lacks a logprobs array");
  }
  const auto& arr = reply["logprobs"];
  if (arr.size() != vocab_size) {
    throw ProtocolError("logprobs array has length " + std::to_string(arr.size()) +
                        ", expected " + std::to_string(vocab_size));
  }
  std::vector<double> values;
  values.reserve(arr.size());
  for (const auto& v : arr) {
    if (v.is_null()) {
      values.push_back(-std::numeric_limits<double>::infinity());
    } else if (v.is_number()) {
      values.push_back(v.get<double>());
    } else {
      throw ProtocolError("non-numeric logprob entry " + v.dump());
    }
  }
  try {
    return Logits(std::move(values));
  } catch (const Error& e) {
    throw ProtocolError(std::string("invalid logprobs: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// RemoteModel

RemoteModel::RemoteModel(std::unique_ptr<LineChannel> channel)
    : channel_(std::move(channel)) {
  session_ = handshake(*channel_);
}

std::unique_ptr<RemoteModel> RemoteModel::connect(const std::string& endpoint) {
  if (endpoint.rfind("exec:", 0) == 0) {
    return std::make_unique<RemoteModel>(
        std::make_unique<ProcessChannel>(endpoint.substr(5)));
  }
  if (endpoint.rfind("tcp:", 0) == 0) {
    std::string rest = endpoint.substr(4);
    auto colon = rest.rfind(':');
    if (colon == std::string::npos) {
      throw ConfigError("tcp endpoint must be tcp:HOST:PORT, got " + endpoint);
    }
    int port = 0;
    try {
      port = std::stoi(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError("bad port in endpoint " + endpoint);
    }
    return std::make_unique<RemoteModel>(connect_tcp(rest.substr(0, colon), port));
  }
  throw ConfigError("unknown bridge endpoint '" + endpoint +
                    "' (expected exec:COMMAND or tcp:HOST:PORT)");
}

Logits RemoteModel::next_logits(std::span<const Token> context) const {
  Context c(context.begin(), context.end());
  return next_logits_batch(std::span<const Context>(&c, 1)).front();
}

std::vector<Logits> RemoteModel::next_logits_batch(
    std::span<const Context> contexts) const {
  std::lock_guard lock(mu_);
  std::map<std::uint64_t, std::size_t> outstanding;
  for (std::size_t i = 0; i < contexts.size(); ++i) {
    const std::uint64_t id = next_id_++;
    outstanding.emplace(id, i);
    channel_->write_line(
        nlohmann::json{{"op", "next"}, {"id", id}, {"context", contexts[i]}}.dump());
  }
  std::vector<std::optional<Logits>> results(contexts.size());
  while (!outstanding.empty()) {
    std::optional<std::string> line = channel_->read_line();
    if (!line) throw ModelError("bridge closed the connection mid-request", true);
    nlohmann::json reply = parse_bridge_message(*line);
    if (!reply.contains("id") || !reply["id"].is_number_unsigned()) {
      if (reply["op"] == "err") {
        throw ModelError("bridge error: " + reply.value("msg", std::string()));
      }
      throw ProtocolError("bridge reply lacks a request id");
    }
    const auto id = reply["id"].get<std::uint64_t>();
    auto it = outstanding.find(id);
    if (it == outstanding.end()) {
      throw ProtocolError("bridge replied to unknown request id " + std::to_string(id));
    }
    if (reply["op"] == "err") {
      throw ModelError("bridge error for request " + std::to_string(id) + ": " +
                       reply.value("msg", std::string()));
    }
    if (reply["op"] != "dist") {
      throw ProtocolError("unexpected reply op " + reply["op"].dump());
    }
    results[it->second] = decode_logprobs(reply, session_.vocab_size);
    outstanding.erase(it);
  }
  std::vector<Logits> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

// ---------------------------------------------------------------------------
// Reference server

std::size_t serve_bridge(const LanguageModel& model, FdChannel& channel,
                         const BridgeServerOptions& options) {
  const std::size_t advertised = options.advertised_vocab.value_or(model.vocab_size());
  const std::size_t window = std::max<std::size_t>(options.reorder_window, 1);
  std::vector<std::string> pending;
  std::size_t answered = 0;

  auto flush = [&] {
    for (auto it = pending.rbegin(); it != pending.rend(); ++it) channel.write_line(*it);
    pending.clear();
  };

  auto answer = [&](const std::string& line) -> std::optional<std::string> {
    nlohmann::json msg;
    try {
      msg = parse_bridge_message(line);
    } catch (const ProtocolError& e) {
      return nlohmann::json{{"op", "err"}, {"msg", e.what()}}.dump();
    }
    nlohmann::json id = msg.contains("id") ? msg["id"] : nlohmann::json(nullptr);
    auto err = [&](const std::string& text) {
      nlohmann::json reply{{"op", "err"}, {"msg", text}};
      if (!id.is_null()) reply["id"] = id;
      return reply.dump();
    };
    const std::string op = msg["op"].get<std::string>();
    if (op == "hello") {
      // Always answer with our own version; the client rejects mismatches.
      return nlohmann::json{{"op", "hello"},
                            {"version", options.version},
                            {"vocab_size", advertised},
                            {"name", model.name()}}
          .dump();
    }
    if (op != "next") return err("unknown op '" + op + "'");
    if (!id.is_number_unsigned()) return err("next request needs an unsigned id");
    Context context;
    try {
      context = msg.at("context").get<Context>();
    } catch (const nlohmann::json::exception&) {
      return err("next request needs an integer context array");
    }
    if (context.empty()) return err("empty context");
    try {
      Logits logits = next_distribution(model, context);
      nlohmann::json arr = encode_logprobs(logits);
      return nlohmann::json{{"op", "dist"}, {"id", id}, {"logprobs", std::move(arr)}}
          .dump();
    } catch (const Error& e) {
      return err(e.what());
    }
  };

  for (;;) {
    if (!pending.empty() && !channel.wait_readable(5)) flush();
    std::optional<std::string> line = channel.read_line();
    if (!line) break;
    if (line->empty()) continue;
    std::optional<std::string> reply = answer(*line);
    if (!reply) continue;
    ++answered;
    const bool is_hello = reply->find("\"op\":\"hello\"") != std::string::npos;
    if (is_hello || window == 1) {
      flush();
      channel.write_line(*reply);
      continue;
    }
    pending.push_back(std::move(*reply));
    if (pending.size() >= window) flush();
  }
  flush();
  return answered;
}

}  // namespace seqleak
