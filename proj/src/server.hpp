// Copyright 2026 The cfgfuzz Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>

#include "net.hpp"
#include "protocol.hpp"

namespace cfgfuzz {

struct ServerConfig {
  std::string bind_host = "0.0.0.0";
  std::uint16_t bind_port = 0;  // 0 only for tests that read on_listening
  std::filesystem::path definition_path;
  std::filesystem::path store_path;
  // One call per pushed change; defaults to stdout.
  std::function<void(const std::string&)> log;
  // Called once the listener is bound, with the bound port.
  std::function<void(std::uint16_t)> on_listening;
  // How long to keep answering after CONFIG_EXHAUSTION before exiting
  // without the client's disconnect.
  Millis linger{5000};
};

struct CampaignStatus {
  std::uint64_t changes_issued = 0;
  std::uint64_t changes_confirmed = 0;
  std::uint64_t results_recorded = 0;  // change+result sets stored
  ServerState state = ServerState::AwaitHandshake;
};

// "pushed name/value pair <name>:<value>"
std::string push_log_line(const ConfigChange& change);

// Runs one campaign for one client and returns once it is exhausted.
// Throws DefinitionError before binding when the definition is invalid,
// StoreError/NetworkError on setup failures, and ProtocolError when the
// client misbehaves or disconnects early (rows already stored remain).
CampaignStatus run_server(const ServerConfig& config);

}  // namespace cfgfuzz
