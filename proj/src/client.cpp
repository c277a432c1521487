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
#include "client.hpp"

#include <algorithm>
#include <fstream>
#include <optional>
#include <sstream>
#include <thread>

#include "error.hpp"

namespace cfgfuzz {

namespace {

std::uint16_t port_value(const nlohmann::json& value, const std::string& key) {
  if (!value.is_number_integer()) throw DefinitionError(key + " must be an integer");
  auto port = value.get<std::int64_t>();
  if (port < 1 || port > 65535) throw DefinitionError(key + " outside 1-65535");
  return static_cast<std::uint16_t>(port);
}

std::string string_value(const nlohmann::json& value, const std::string& key) {
  if (!value.is_string()) throw DefinitionError(key + " must be a string");
  return value.get<std::string>();
}

}  // namespace

ClientConfig client_config_from_json(const nlohmann::json& json) {
  if (!json.is_object()) throw DefinitionError("client config must be a JSON object");
  ClientConfig config;
  bool have_port = false;
  for (const auto& [key, value] : json.items()) {
    if (key == "server_host") {
      config.server_host = string_value(value, key);
    } else if (key == "server_port") {
      config.server_port = port_value(value, key);
      have_port = true;
    } else if (key == "communicator") {
      config.communicator.communicator = string_value(value, key);
    } else if (key == "communicator_args") {
      if (!value.is_array()) throw DefinitionError("communicator_args must be an array");
      for (const auto& arg : value) config.communicator.args.push_back(string_value(arg, key));
    } else if (key == "mock_control_host") {
      config.communicator.mock_control_host = string_value(value, key);
    } else if (key == "mock_control_port") {
      config.communicator.mock_control_port = port_value(value, key);
    } else {
      throw DefinitionError("unknown client config key \"" + key + "\"");
    }
  }
  if (!have_port) throw DefinitionError("client config needs server_port");
  if (config.communicator.communicator.empty()) throw DefinitionError("client config needs communicator");
  return config;
}

ClientConfig load_client_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  auto json = nlohmann::json::parse(buffer.str(), nullptr, false);
  if (json.is_discarded()) throw ParseError("client config is not valid JSON", 0, 0);
  return client_config_from_json(json);
}

namespace {

class ClientSession {
 public:
  ClientSession(TcpStream server, Communicator& communicator)
      : server_(std::move(server)), communicator_(communicator) {}

  ClientSummary run() {
    ClientEvent event = Connected{};
    while (true) {
      ClientStep next = client_transition(state_, event);
      if (next.next == ClientState::Closed && !next.reason.empty()) throw ProtocolError(next.reason);
      state_ = next.next;
      std::optional<ClientEvent> internal;
      for (ClientAction action : next.actions) {
        if (auto produced = perform(action, event)) internal = produced;
      }
      if (state_ == ClientState::Closed) return summary_;
      event = internal ? std::move(*internal) : read_message();
    }
  }

 private:
  std::optional<ClientEvent> perform(ClientAction action, const ClientEvent& cause) {
    switch (action) {
      case ClientAction::SendHandshakeInit:
        server_.send(encode(HandshakeInit{}));
        return std::nullopt;
      case ClientAction::SendRequest:
        server_.send(encode(ConfigRequest{}));
        return std::nullopt;
      case ClientAction::ForwardToCommunicator: {
        const auto& change = std::get<ConfigFulfillment>(std::get<Message>(cause)).change;
        change_id_ = change.id;
        response_ = communicator_.apply_change(change);
        ++summary_.changes_applied;
        return CommunicatorDone{};
      }
      case ClientAction::SendConfirmation:
        server_.send(encode(ConfigConfirmation{change_id_, response_.status, response_.extended_status}));
        return std::nullopt;
      case ClientAction::Sleep: {
        ++summary_.timeouts;
        auto wait = std::get<ConfigTimeout>(std::get<Message>(cause)).wait_ms;
        std::this_thread::sleep_for(Millis{std::max<std::int64_t>(0, wait)});
        return TimerExpired{};
      }
      case ClientAction::CloseCommunicator:
        communicator_.close();
        return CommunicatorClosed{};
    }
    return std::nullopt;
  }

  ClientEvent read_message() {
    std::string line;
    if (server_.read_line(line) != ReadStatus::Line) {
      throw ProtocolError("server closed the connection in state " + std::string(to_string(state_)));
    }
    return decode(line);
  }

  TcpStream server_;
  Communicator& communicator_;
  ClientState state_ = ClientState::Connecting;
  std::uint64_t change_id_ = 0;
  CommunicatorResponse response_;
  ClientSummary summary_;
};

}  // namespace

ClientSummary run_client(const ClientConfig& config) {
  auto communicator = make_communicator(config.communicator);
  TcpStream server = TcpStream::connect(config.server_host, config.server_port, config.connect_timeout);
  ClientSession session(std::move(server), *communicator);
  try {
    auto summary = session.run();
    return summary;
  } catch (...) {
    communicator->close();
    throw;
  }
}

}  // namespace cfgfuzz
