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
#include "protocol.hpp"

#include <set>

#include "error.hpp"

namespace cfgfuzz {

using nlohmann::json;
using nlohmann::ordered_json;

std::string_view to_string(MessageType type) {
  switch (type) {
    case MessageType::HandshakeInit:
      return "HANDSHAKE_INIT";
    case MessageType::HandshakeAck:
      return "HANDSHAKE_ACK";
    case MessageType::ConfigRequest:
      return "CONFIG_REQUEST";
    case MessageType::ConfigFulfillment:
      return "CONFIG_FULFILLMENT";
    case MessageType::ConfigConfirmation:
      return "CONFIG_CONFIRMATION";
    case MessageType::ConfigTimeout:
      return "CONFIG_TIMEOUT";
    case MessageType::ConfigExhaustion:
      return "CONFIG_EXHAUSTION";
  }
  return "?";
}

std::string_view to_string(ChangeStatus status) {
  switch (status) {
    case ChangeStatus::Ok:
      return "OK";
    case ChangeStatus::Error:
      return "ERROR";
    case ChangeStatus::Invalid:
      return "INVALID";
  }
  return "?";
}

std::optional<ChangeStatus> change_status_from_string(std::string_view text) {
  if (text == "OK") return ChangeStatus::Ok;
  if (text == "ERROR") return ChangeStatus::Error;
  if (text == "INVALID") return ChangeStatus::Invalid;
  return std::nullopt;
}

MessageType type_of(const Message& message) { return static_cast<MessageType>(message.index()); }

namespace {

ordered_json scalar_json(const Scalar& value) {
  return std::visit([](const auto& v) { return ordered_json(v); }, value);
}

struct Encoder {
  ordered_json& out;

  void operator()(const HandshakeInit& m) const { out["protocol_version"] = m.protocol_version; }
  void operator()(const HandshakeAck& m) const { out["protocol_version"] = m.protocol_version; }
  void operator()(const ConfigRequest&) const {}
  void operator()(const ConfigFulfillment& m) const {
    ordered_json change;
    change["id"] = m.change.id;
    change["name"] = m.change.name;
    change["action"] = to_string(m.change.action);
    change["value"] = scalar_json(m.change.value);
    out["change"] = std::move(change);
  }
  void operator()(const ConfigConfirmation& m) const {
    out["change_id"] = m.change_id;
    out["status"] = to_string(m.status);
    out["extended_status"] = ordered_json::parse(m.extended_status.dump());
  }
  void operator()(const ConfigTimeout& m) const { out["wait_ms"] = m.wait_ms; }
  void operator()(const ConfigExhaustion&) const {}
};

[[noreturn]] void reject(const std::string& what) { throw ProtocolError(what); }

// Rejects missing and unknown keys. Message objects also carry "type".
void expect_fields(const json& object, std::set<std::string> allowed, std::string_view type,
                   bool tagged = true) {
  if (tagged) allowed.insert("type");
  for (const auto& [key, value] : object.items()) {
    if (!allowed.contains(key)) {
      reject("unexpected field \"" + key + "\" in " + std::string(type));
    }
  }
  for (const auto& key : allowed) {
    if (!object.contains(key)) reject("missing field \"" + key + "\" in " + std::string(type));
  }
}

std::int64_t integer_field(const json& object, const char* key) {
  const json& value = object.at(key);
  if (!value.is_number_integer()) reject(std::string("field \"") + key + "\" must be an integer");
  return value.get<std::int64_t>();
}

std::uint64_t id_field(const json& object, const char* key) {
  const json& value = object.at(key);
  if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0)) {
    reject(std::string("field \"") + key + "\" must be a non-negative integer");
  }
  return value.get<std::uint64_t>();
}

std::string string_field(const json& object, const char* key) {
  const json& value = object.at(key);
  if (!value.is_string()) reject(std::string("field \"") + key + "\" must be a string");
  return value.get<std::string>();
}

ConfigChange decode_change(const json& node) {
  if (!node.is_object()) reject("\"change\" must be an object");
  expect_fields(node, {"id", "name", "action", "value"}, "change", false);
  ConfigChange change;
  change.id = id_field(node, "id");
  change.name = string_field(node, "name");
  std::string action = string_field(node, "action");
  auto parsed = change_action_from_string(action);
  if (!parsed) reject("unknown action \"" + action + "\"");
  change.action = *parsed;
  try {
    change.value = scalar_from_json(node.at("value"));
  } catch (const Error& e) {
    reject(std::string("bad change value: ") + e.what());
  }
  return change;
}

}  // namespace

std::string encode(const Message& message) {
  ordered_json out;
  out["type"] = to_string(type_of(message));
  std::visit(Encoder{out}, message);
  return out.dump() + "\n";
}

Message decode(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.find('\n') != std::string_view::npos) reject("frame contains an interior newline");

  json object;
  try {
    object = json::parse(line);
  } catch (const json::parse_error& e) {
    reject(std::string("malformed JSON: ") + e.what());
  }
  if (!object.is_object()) reject("frame is not a JSON object");
  auto type_it = object.find("type");
  if (type_it == object.end()) reject("missing message type");
  if (!type_it->is_string()) reject("message type must be a string");
  const std::string type = type_it->get<std::string>();

  if (type == "HANDSHAKE_INIT") {
    expect_fields(object, {"protocol_version"}, type);
    return HandshakeInit{integer_field(object, "protocol_version")};
  }
  if (type == "HANDSHAKE_ACK") {
    expect_fields(object, {"protocol_version"}, type);
    return HandshakeAck{integer_field(object, "protocol_version")};
  }
  if (type == "CONFIG_REQUEST") {
    expect_fields(object, {}, type);
    return ConfigRequest{};
  }
  if (type == "CONFIG_FULFILLMENT") {
    expect_fields(object, {"change"}, type);
    return ConfigFulfillment{decode_change(object.at("change"))};
  }
  if (type == "CONFIG_CONFIRMATION") {
    expect_fields(object, {"change_id", "status", "extended_status"}, type);
    ConfigConfirmation m;
    m.change_id = id_field(object, "change_id");
    std::string status = string_field(object, "status");
    auto parsed = change_status_from_string(status);
    if (!parsed) reject("unknown status \"" + status + "\"");
    m.status = *parsed;
    m.extended_status = object.at("extended_status");
    if (!m.extended_status.is_object()) reject("extended_status must be an object");
    return m;
  }
  if (type == "CONFIG_TIMEOUT") {
    expect_fields(object, {"wait_ms"}, type);
    std::int64_t wait = integer_field(object, "wait_ms");
    if (wait <= 0) reject("wait_ms must be positive");
    return ConfigTimeout{wait};
  }
  if (type == "CONFIG_EXHAUSTION") {
    expect_fields(object, {}, type);
    return ConfigExhaustion{};
  }
  reject("unknown message type \"" + type + "\"");
}

// ---------------------------------------------------------------------------

std::string_view to_string(ServerState state) {
  switch (state) {
    case ServerState::AwaitHandshake:
      return "AwaitHandshake";
    case ServerState::AwaitRequest:
      return "AwaitRequest";
    case ServerState::AwaitConfirmation:
      return "AwaitConfirmation";
    case ServerState::Testing:
      return "Testing";
    case ServerState::Exhausted:
      return "Exhausted";
    case ServerState::Closed:
      return "Closed";
  }
  return "?";
}

namespace {

ServerStep close_server(std::string reason) {
  return {ServerState::Closed, ServerActionKind::None, MessageType::HandshakeAck, std::move(reason)};
}

ServerStep send_from(ServerState next, MessageType type) {
  return {next, ServerActionKind::Send, type, {}};
}

}  // namespace

ServerStep server_transition(ServerState state, const ServerEvent& event, const ServerContext& context) {
  if (state == ServerState::Closed) return close_server("session already closed");

  if (std::holds_alternative<TestsFinished>(event)) {
    if (state == ServerState::Testing) return {ServerState::AwaitRequest, ServerActionKind::None, {}, {}};
    return close_server("tests finished outside the testing state");
  }

  const Message& message = std::get<Message>(event);
  const MessageType type = type_of(message);
  auto out_of_order = [&] {
    return close_server("unexpected " + std::string(to_string(type)) + " in state " +
                        std::string(to_string(state)));
  };

  switch (state) {
    case ServerState::AwaitHandshake:
      if (type != MessageType::HandshakeInit) return out_of_order();
      if (std::get<HandshakeInit>(message).protocol_version != kProtocolVersion) {
        return close_server("protocol version mismatch");
      }
      return send_from(ServerState::AwaitRequest, MessageType::HandshakeAck);

    case ServerState::AwaitRequest:
      if (type != MessageType::ConfigRequest) return out_of_order();
      if (context.change_available) {
        return send_from(ServerState::AwaitConfirmation, MessageType::ConfigFulfillment);
      }
      return send_from(ServerState::Exhausted, MessageType::ConfigExhaustion);

    case ServerState::AwaitConfirmation:
      if (type != MessageType::ConfigConfirmation) return out_of_order();
      if (std::get<ConfigConfirmation>(message).change_id != context.outstanding_change_id) {
        return close_server("confirmation for change " +
                            std::to_string(std::get<ConfigConfirmation>(message).change_id) +
                            ", expected " + std::to_string(context.outstanding_change_id));
      }
      return {ServerState::Testing, ServerActionKind::StartTests, {}, {}};

    case ServerState::Testing:
      if (type != MessageType::ConfigRequest) return out_of_order();
      return send_from(ServerState::Testing, MessageType::ConfigTimeout);

    case ServerState::Exhausted:
      if (type != MessageType::ConfigRequest) return out_of_order();
      return send_from(ServerState::Exhausted, MessageType::ConfigExhaustion);

    case ServerState::Closed:
      break;
  }
  return close_server("session already closed");
}

// ---------------------------------------------------------------------------

std::string_view to_string(ClientState state) {
  switch (state) {
    case ClientState::Connecting:
      return "Connecting";
    case ClientState::Handshaking:
      return "Handshaking";
    case ClientState::Requesting:
      return "Requesting";
    case ClientState::Applying:
      return "Applying";
    case ClientState::Waiting:
      return "Waiting";
    case ClientState::ShuttingDown:
      return "ShuttingDown";
    case ClientState::Closed:
      return "Closed";
  }
  return "?";
}

namespace {

std::string_view event_name(const ClientEvent& event) {
  struct Namer {
    std::string_view operator()(const Message& m) const { return to_string(type_of(m)); }
    std::string_view operator()(const Connected&) const { return "connected"; }
    std::string_view operator()(const CommunicatorDone&) const { return "communicator done"; }
    std::string_view operator()(const TimerExpired&) const { return "timer expiry"; }
    std::string_view operator()(const CommunicatorClosed&) const { return "communicator closed"; }
  };
  return std::visit(Namer{}, event);
}

std::optional<MessageType> message_type(const ClientEvent& event) {
  if (const auto* m = std::get_if<Message>(&event)) return type_of(*m);
  return std::nullopt;
}

}  // namespace

ClientStep client_transition(ClientState state, const ClientEvent& event) {
  auto unexpected = [&] {
    return ClientStep{ClientState::Closed, {},
                      "unexpected " + std::string(event_name(event)) + " in state " +
                          std::string(to_string(state))};
  };
  const auto type = message_type(event);

  switch (state) {
    case ClientState::Connecting:
      if (std::holds_alternative<Connected>(event)) {
        return {ClientState::Handshaking, {ClientAction::SendHandshakeInit}, {}};
      }
      return unexpected();

    case ClientState::Handshaking:
      if (type == MessageType::HandshakeAck) {
        if (std::get<HandshakeAck>(std::get<Message>(event)).protocol_version != kProtocolVersion) {
          return {ClientState::Closed, {}, "protocol version mismatch"};
        }
        return {ClientState::Requesting, {ClientAction::SendRequest}, {}};
      }
      return unexpected();

    case ClientState::Requesting:
      if (type == MessageType::ConfigFulfillment) {
        return {ClientState::Applying, {ClientAction::ForwardToCommunicator}, {}};
      }
      if (type == MessageType::ConfigTimeout) return {ClientState::Waiting, {ClientAction::Sleep}, {}};
      if (type == MessageType::ConfigExhaustion) {
        return {ClientState::ShuttingDown, {ClientAction::CloseCommunicator}, {}};
      }
      return unexpected();

    case ClientState::Applying:
      if (std::holds_alternative<CommunicatorDone>(event)) {
        return {ClientState::Requesting, {ClientAction::SendConfirmation, ClientAction::SendRequest}, {}};
      }
      return unexpected();

    case ClientState::Waiting:
      if (std::holds_alternative<TimerExpired>(event)) {
        return {ClientState::Requesting, {ClientAction::SendRequest}, {}};
      }
      return unexpected();

    case ClientState::ShuttingDown:
      if (std::holds_alternative<CommunicatorClosed>(event)) return {ClientState::Closed, {}, {}};
      return unexpected();

    case ClientState::Closed:
      break;
  }
  return {ClientState::Closed, {}, "session already closed"};
}

}  // namespace cfgfuzz
