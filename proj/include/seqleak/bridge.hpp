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

#ifndef SEQLEAK_BRIDGE_HPP_
#define SEQLEAK_BRIDGE_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "seqleak/models.hpp"

namespace seqleak {

// Line-delimited JSON over a byte stream:
//   -> {"op":"hello","version":1}
//   <- {"op":"hello","version":1,"vocab_size":V,"name":"..."}
//   -> {"op":"next","id":N,"context":[ids]}
//   <- {"op":"dist","id":N,"logprobs":[V numbers]}   (null encodes -inf)
//   <- {"op":"err","id":N,"msg":"..."}
// Requests may be pipelined; replies carry the id and may come back in any
// order.
inline constexpr int kBridgeProtocolVersion = 1;

class LineChannel {
 public:
  virtual ~LineChannel() = default;
  virtual void write_line(const std::string& line) = 0;
  // nullopt on end of stream.
  virtual std::optional<std::string> read_line() = 0;
};

// Reads and writes newline-terminated records on raw file descriptors.
class FdChannel : public LineChannel {
 public:
  FdChannel(int read_fd, int write_fd, bool owns_fds = true);
  ~FdChannel() override;
  FdChannel(const FdChannel&) = delete;
  FdChannel& operator=(const FdChannel&) = delete;

  void write_line(const std::string& line) override;
  std::optional<std::string> read_line() override;
  void close_write();
  // True when a complete line is buffered or the descriptor turns readable
  // within `timeout_ms`.
  bool wait_readable(int timeout_ms);

 private:
  int read_fd_;
  int write_fd_;
  bool owns_;
  std::string buffer_;
};

struct SpawnedProcess {
  int read_fd;
  int write_fd;
  int pid;
};

// Spawns `/bin/sh -c command` and talks to it over stdin/stdout.
class ProcessChannel final : public FdChannel {
 public:
  explicit ProcessChannel(const std::string& command);
  ~ProcessChannel() override;

 private:
  explicit ProcessChannel(SpawnedProcess spawned);
  int pid_;
};

std::unique_ptr<FdChannel> connect_tcp(const std::string& host, int port);

// Two connected in-process endpoints (a socketpair).
std::pair<std::unique_ptr<FdChannel>, std::unique_ptr<FdChannel>> make_channel_pair();

// Parses one protocol line into an object with a string "op". Failures throw
// ProtocolError carrying the byte offset reported by the JSON parser.
nlohmann::json parse_bridge_message(const std::string& line);

struct SessionInfo {
  int version = 0;
  std::size_t vocab_size = 0;
  std::string name;
};

SessionInfo handshake(LineChannel& channel);

// Decodes a "dist" payload and checks its length against the session V.
Logits decode_logprobs(const nlohmann::json& reply, std::size_t vocab_size);

// A model served by an external bridge process. Requests on one connection
// are serialized; batches are pipelined.
class RemoteModel final : public LanguageModel {
 public:
  explicit RemoteModel(std::unique_ptr<LineChannel> channel);

  // "exec:COMMAND" or "tcp:HOST:PORT".
  static std::unique_ptr<RemoteModel> connect(const std::string& endpoint);

  const SessionInfo& session() const { return session_; }
  std::size_t vocab_size() const override { return session_.vocab_size; }
  const std::string& name() const override { return session_.name; }
  Logits next_logits(std::span<const Token> context) const override;
  std::vector<Logits> next_logits_batch(
      std::span<const Context> contexts) const override;

 private:
  std::unique_ptr<LineChannel> channel_;
  SessionInfo session_;
  mutable std::mutex mu_;
  mutable std::uint64_t next_id_ = 1;
};

struct BridgeServerOptions {
  // Replies are buffered and flushed in reverse order once this many are
  // pending (or the input goes idle). 1 answers strictly in order.
  std::size_t reorder_window = 1;
  // Overrides the advertised vocabulary size; used to exercise client-side
  // length validation.
  std::optional<std::size_t> advertised_vocab;
  int version = kBridgeProtocolVersion;
};

// Reference server loop used by the mock bridge tool and the protocol tests.
// Serves `model` until the channel closes. Returns the number of requests
// answered.
std::size_t serve_bridge(const LanguageModel& model, FdChannel& channel,
                         const BridgeServerOptions& options = {});

}  // namespace seqleak

#endif  // SEQLEAK_BRIDGE_HPP_
