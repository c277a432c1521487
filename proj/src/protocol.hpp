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

// Server/client wire protocol. Each message is one JSON object on one
// LF-terminated line, tagged by "type":
//
//   client -> server   HANDSHAKE_INIT, CONFIG_REQUEST, CONFIG_CONFIRMATION
//   server -> client   HANDSHAKE_ACK, CONFIG_FULFILLMENT, CONFIG_TIMEOUT,
//                      CONFIG_EXHAUSTION
//
// The session machines below are pure; sockets live in server.cpp and
// client.cpp.

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "change_generator.hpp"
#include "json.hpp"

namespace cfgfuzz {

inline constexpr std::int64_t kProtocolVersion = 1;

enum class MessageType {
  HandshakeInit,
  HandshakeAck,
  ConfigRequest,
  ConfigFulfillment,
  ConfigConfirmation,
  ConfigTimeout,
  ConfigExhaustion,
};

inline constexpr MessageType kAllMessageTypes[] = {
    MessageType::HandshakeInit,      MessageType::HandshakeAck,  MessageType::ConfigRequest,
    MessageType::ConfigFulfillment,  MessageType::ConfigConfirmation,
    MessageType::ConfigTimeout,      MessageType::ConfigExhaustion,
};

std::string_view to_string(MessageType type);

enum class ChangeStatus { Ok, Error, Invalid };

std::string_view to_string(ChangeStatus status);
std::optional<ChangeStatus> change_status_from_string(std::string_view text);

struct HandshakeInit {
  std::int64_t protocol_version = kProtocolVersion;
  bool operator==(const HandshakeInit&) const = default;
};
struct HandshakeAck {
  std::int64_t protocol_version = kProtocolVersion;
  bool operator==(const HandshakeAck&) const = default;
};
struct ConfigRequest {
  bool operator==(const ConfigRequest&) const = default;
};
struct ConfigFulfillment {
  ConfigChange change;
  bool operator==(const ConfigFulfillment&) const = default;
};
struct ConfigConfirmation {
  std::uint64_t change_id = 0;
  ChangeStatus status = ChangeStatus::Ok;
  nlohmann::json extended_status = nlohmann::json::object();
  bool operator==(const ConfigConfirmation&) const = default;
};
struct ConfigTimeout {
  std::int64_t wait_ms = 500;
  bool operator==(const ConfigTimeout&) const = default;
};
struct ConfigExhaustion {
  bool operator==(const ConfigExhaustion&) const = default;
};

// Alternative order matches MessageType.
using Message = std::variant<HandshakeInit, HandshakeAck, ConfigRequest, ConfigFulfillment,
                             ConfigConfirmation, ConfigTimeout, ConfigExhaustion>;

MessageType type_of(const Message& message);

// One line including the trailing LF.
std::string encode(const Message& message);

// Accepts the line with or without its LF. Throws ProtocolError.
Message decode(std::string_view line);

// ---------------------------------------------------------------------------
// Server session.

enum class ServerState { AwaitHandshake, AwaitRequest, AwaitConfirmation, Testing, Exhausted, Closed };

std::string_view to_string(ServerState state);

struct TestsFinished {};

using ServerEvent = std::variant<Message, TestsFinished>;

// What the state machine needs to know about the rest of the server.
struct ServerContext {
  bool change_available = false;
  std::uint64_t outstanding_change_id = 0;
};

enum class ServerActionKind { None, Send, StartTests };

struct ServerStep {
  ServerState next = ServerState::Closed;
  ServerActionKind action = ServerActionKind::None;
  MessageType send = MessageType::HandshakeAck;  // meaningful when action == Send
  std::string reason;                            // why the session closed
};

// Pure transition function. `state` must not be Closed.
ServerStep server_transition(ServerState state, const ServerEvent& event, const ServerContext& context);

// ---------------------------------------------------------------------------
// Client session.

enum class ClientState { Connecting, Handshaking, Requesting, Applying, Waiting, ShuttingDown, Closed };

std::string_view to_string(ClientState state);

struct Connected {};
struct CommunicatorDone {};
struct TimerExpired {};
struct CommunicatorClosed {};

using ClientEvent = std::variant<Message, Connected, CommunicatorDone, TimerExpired, CommunicatorClosed>;

enum class ClientAction {
  SendHandshakeInit,
  SendRequest,
  ForwardToCommunicator,
  SendConfirmation,
  Sleep,
  CloseCommunicator,
};

struct ClientStep {
  ClientState next = ClientState::Closed;
  std::vector<ClientAction> actions;
  std::string reason;
};

ClientStep client_transition(ClientState state, const ClientEvent& event);

}  // namespace cfgfuzz
