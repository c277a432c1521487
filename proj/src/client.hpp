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

// Client config file:
//   {"server_host": "127.0.0.1", "server_port": 9000,
//    "communicator": "./comm.py" | "builtin:mock",
//    "communicator_args": [...],
//    "mock_control_host": "127.0.0.1", "mock_control_port": 9001}

#include <cstdint>
#include <filesystem>
#include <string>

#include "communicator.hpp"
#include "json.hpp"

namespace cfgfuzz {

struct ClientConfig {
  std::string server_host = "127.0.0.1";
  std::uint16_t server_port = 0;
  CommunicatorSpec communicator;
  Millis connect_timeout{5000};
};

// Throws DefinitionError on unknown keys, wrong types or missing
// server_port/communicator.
ClientConfig client_config_from_json(const nlohmann::json& json);
ClientConfig load_client_config(const std::filesystem::path& path);

struct ClientSummary {
  std::uint64_t changes_applied = 0;
  std::uint64_t timeouts = 0;
};

// Runs until CONFIG_EXHAUSTION. The communicator is closed on every exit
// path. Throws NetworkError (server unreachable), ProtocolError, or
// SpawnError.
ClientSummary run_client(const ClientConfig& config);

}  // namespace cfgfuzz
