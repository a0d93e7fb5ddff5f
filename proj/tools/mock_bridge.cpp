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

// Serves a table or n-gram model over the bridge wire protocol, on stdio or
// on a single accepted TCP connection. Stands in for a real checkpoint
// bridge in tests and demos.

#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "seqleak/bridge.hpp"
#include "seqleak/cli.hpp"
#include "seqleak/errors.hpp"

namespace {

int accept_one(int port) {
  int listener = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listener < 0) throw seqleak::ModelError("socket failed");
  int yes = 1;
  ::setsockopt(listener, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = htons(static_cast<uint16_t>(port));
  if (::bind(listener, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(listener, 1) != 0) {
    ::close(listener);
    throw seqleak::ModelError("cannot listen on port " + std::to_string(port));
  }
  int fd = ::accept(listener, nullptr, nullptr);
  ::close(listener);
  if (fd < 0) throw seqleak::ModelError("accept failed");
  return fd;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app("Bridge-protocol server for table and n-gram models", "mock_bridge");
  std::string model_spec;
  std::size_t reorder = 1;
  std::size_t advertise = 0;
  int version = seqleak::kBridgeProtocolVersion;
  int tcp_port = 0;
  app.add_option("--model", model_spec, "table:PATH | ngram:PATH,ORDER,ALPHA")->required();
  app.add_option("--reorder", reorder, "answer pipelined requests in reversed groups of N");
  app.add_option("--advertise-vocab", advertise, "lie about the vocabulary size");
  app.add_option("--protocol-version", version, "protocol version to speak");
  app.add_option("--tcp", tcp_port, "serve one TCP connection on this loopback port");
  CLI11_PARSE(app, argc, argv);

  try {
    const auto spec = seqleak::cli::parse_model_spec(model_spec);
    if (spec.kind == seqleak::cli::ModelSpec::Kind::kBridge) {
      throw seqleak::ConfigError("mock_bridge serves table or ngram models only");
    }
    const auto model = seqleak::cli::open_model(spec, 1 << 16);
    seqleak::BridgeServerOptions options;
    options.reorder_window = reorder;
    if (advertise > 0) options.advertised_vocab = advertise;
    options.version = version;
    std::unique_ptr<seqleak::FdChannel> channel;
    if (tcp_port > 0) {
      int fd = accept_one(tcp_port);
      channel = std::make_unique<seqleak::FdChannel>(fd, fd, true);
    } else {
      channel = std::make_unique<seqleak::FdChannel>(STDIN_FILENO, STDOUT_FILENO, false);
    }
    seqleak::serve_bridge(*model, *channel, options);
  } catch (const std::exception& e) {
    std::cerr << "mock_bridge: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
