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

// Communicators apply changes to the target.
//
// Subprocess protocol, one JSON object per line:
//   client -> communicator  {"command":"CHANGE","config_change":{"Name":..,"Value":..,"Action":..}}
//                           {"command":"CLOSE"}
//   communicator -> client  {"status":"OK|ERROR|INVALID","extended_status":{...}}

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "change_generator.hpp"
#include "json.hpp"
#include "net.hpp"
#include "protocol.hpp"
#include "subprocess.hpp"

namespace cfgfuzz {

inline constexpr const char* kBuiltinMockCommunicator = "builtin:mock";
inline constexpr Millis kCommunicatorTimeout{30000};

struct CommunicatorResponse {
  ChangeStatus status = ChangeStatus::Ok;
  nlohmann::json extended_status = nlohmann::json::object();
  bool operator==(const CommunicatorResponse&) const = default;
};

// One request line including its LF.
std::string change_request_line(const ConfigChange& change);
std::string close_request_line();

// Anything that is not a JSON object with a valid "status" (and, if
// present, an object "extended_status") yields nullopt.
std::optional<CommunicatorResponse> parse_communicator_response(std::string_view line);

class Communicator {
 public:
  virtual ~Communicator() = default;
  // Failures are reported as ERROR with extended_status.reason; throws
  // SpawnError only when the program cannot be started.
  virtual CommunicatorResponse apply_change(const ConfigChange& change) = 0;
  virtual void close() = 0;
};

// External program, started on the first change and again on the change
// after it fails.
class ScriptCommunicator : public Communicator {
 public:
  explicit ScriptCommunicator(std::vector<std::string> argv, Millis timeout = kCommunicatorTimeout);
  ~ScriptCommunicator() override;

  CommunicatorResponse apply_change(const ConfigChange& change) override;
  void close() override;

  bool started() const { return process_.running(); }

 private:
  CommunicatorResponse fail(const std::string& reason);

  std::vector<std::string> argv_;
  Millis timeout_;
  Subprocess process_;
};

// server_tokens value -> banner string.
const std::map<std::string, std::string>& server_tokens_table();

// In-process communicator driving the mock target's control channel.
//   port                    -> SET port <n>
//   start_systemctl_service -> SET enabled <true|false>
//   server_tokens           -> SET banner <server_tokens_table()[value]>
//   server_signature        -> SET signature <banner> (On, EMail) or empty (Off)
class MockTargetCommunicator : public Communicator {
 public:
  MockTargetCommunicator(std::string control_host, std::uint16_t control_port);

  CommunicatorResponse apply_change(const ConfigChange& change) override;
  void close() override;

 private:
  std::optional<std::string> command_for(const ConfigChange& change, std::string& banner) const;
  // nullopt when the control channel is unreachable.
  std::optional<std::string> send(const std::string& command);

  std::string host_;
  std::uint16_t port_;
  TcpStream control_;
  std::string banner_;
};

struct CommunicatorSpec {
  std::string communicator;  // program path or "builtin:mock"
  std::vector<std::string> args;
  std::string mock_control_host = "127.0.0.1";
  std::uint16_t mock_control_port = 0;
  Millis timeout = kCommunicatorTimeout;
};

// Does not start anything. Throws SpawnError for a missing program and
// DefinitionError for a builtin without a control port.
std::unique_ptr<Communicator> make_communicator(const CommunicatorSpec& spec);

}  // namespace cfgfuzz
