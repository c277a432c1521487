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
#include "mock_target.hpp"

#include <poll.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <list>
#include <optional>

#include "error.hpp"
#include "net.hpp"

namespace cfgfuzz {

nlohmann::json to_json(const MockTargetState& state) {
  return {{"enabled", state.enabled},
          {"service_port", state.service_port},
          {"banner", state.banner},
          {"signature", state.signature}};
}

MockTargetState mock_state_from_json(const nlohmann::json& json) {
  if (!json.is_object()) throw DefinitionError("mock state must be a JSON object");
  MockTargetState state;
  for (const auto& [key, value] : json.items()) {
    if (key == "enabled") {
      if (!value.is_boolean()) throw DefinitionError("enabled must be a boolean");
      state.enabled = value.get<bool>();
    } else if (key == "service_port" || key == "port") {
      if (!value.is_number_integer()) throw DefinitionError("service_port must be an integer");
      state.service_port = value.get<std::int64_t>();
      if (state.service_port < 1 || state.service_port > 65535) {
        throw DefinitionError("service_port outside 1-65535");
      }
    } else if (key == "banner" || key == "signature") {
      if (!value.is_string()) throw DefinitionError(key + " must be a string");
      (key == "banner" ? state.banner : state.signature) = value.get<std::string>();
    } else {
      throw DefinitionError("unknown mock state key \"" + key + "\"");
    }
  }
  return state;
}

namespace {

std::string_view trim(std::string_view text) {
  const char* blank = " \t";
  auto first = text.find_first_not_of(blank);
  if (first == std::string_view::npos) return {};
  auto last = text.find_last_not_of(blank);
  return text.substr(first, last - first + 1);
}

std::pair<std::string_view, std::string_view> split_word(std::string_view text) {
  auto space = text.find(' ');
  if (space == std::string_view::npos) return {text, {}};
  return {text.substr(0, space), text.substr(space + 1)};
}

}  // namespace

std::string apply_control(MockTargetState& state, const MockTargetState& initial, std::string_view command) {
  auto [verb, rest] = split_word(command);
  if (verb == "RESET") {
    if (!trim(rest).empty()) return "ERR parse";
    state = initial;
    return "OK";
  }
  if (verb != "SET") return "ERR parse";
  auto [key, value] = split_word(rest);
  if (key == "port") {
    value = trim(value);
    if (value.empty() || !std::all_of(value.begin(), value.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return "ERR parse";
    }
    std::int64_t port = 0;
    auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), port);
    if (ec == std::errc::result_out_of_range) return "ERR range";
    if (ec != std::errc() || end != value.data() + value.size()) return "ERR parse";
    if (port < 1 || port > 65535) return "ERR range";
    state.service_port = port;
    return "OK";
  }
  if (key == "enabled") {
    value = trim(value);
    if (value == "true") {
      state.enabled = true;
    } else if (value == "false") {
      state.enabled = false;
    } else {
      return "ERR parse";
    }
    return "OK";
  }
  if (key == "banner") {
    state.banner = std::string(value);
    return "OK";
  }
  if (key == "signature") {
    state.signature = std::string(value);
    return "OK";
  }
  return "ERR parse";
}

std::string serve_request(const MockTargetState& state, std::string_view request) {
  if (!state.enabled) return "ERR disabled";
  auto [verb, rest] = split_word(request);
  if (verb == "HEAD") return "BANNER " + state.banner;
  if (verb == "GET") {
    auto signature = trim(state.signature);
    if (signature.empty()) return "ERRORPAGE <no version number found>";
    return "ERRORPAGE " + std::string(signature) + " Server at " + kMockHost + " Port " +
           std::to_string(state.service_port);
  }
  return "ERR verb";
}

struct MockTarget::Impl {
  enum class Channel { Control, Service };

  struct Connection {
    TcpStream stream;
    Channel channel;
  };

  MockTargetState initial;
  mutable std::mutex mutex;
  MockTargetState state;

  TcpListener control;
  std::optional<TcpListener> service;
  std::list<Connection> connections;
  WakePipe wake;
  std::atomic<bool> stopping{false};
  std::thread thread;

  // Opens or closes the service listener to match `next`. false on bind
  // failure, leaving the current listener untouched.
  bool sync_service(const MockTargetState& next, const MockTargetState& current, bool force) {
    bool same = next.enabled == current.enabled && next.service_port == current.service_port;
    if (same && !force) return true;
    if (!next.enabled) {
      service.reset();
      return true;
    }
    if (service && service->port() == next.service_port) return true;
    try {
      service = TcpListener::bind(kMockHost, static_cast<std::uint16_t>(next.service_port));
    } catch (const NetworkError&) {
      return false;
    }
    return true;
  }

  std::string handle_control(std::string_view line) {
    std::lock_guard lock(mutex);
    MockTargetState next = state;
    std::string reply = apply_control(next, initial, line);
    if (reply != "OK") return reply;
    if (!sync_service(next, state, false)) return "ERR bind";
    state = next;
    return reply;
  }

  std::string handle_service(std::string_view line) {
    std::lock_guard lock(mutex);
    return serve_request(state, line);
  }

  void accept_from(TcpListener& listener, Channel channel) {
    try {
      connections.push_back({listener.accept(), channel});
    } catch (const NetworkError&) {
    }
  }

  // false once the peer is gone.
  bool serve(Connection& connection) {
    auto& reader = connection.stream.reader();
    try {
      bool alive = reader.fill();
      std::string line;
      while (reader.pop_line(line)) {
        std::string reply =
            connection.channel == Channel::Control ? handle_control(line) : handle_service(line);
        connection.stream.send(reply + "\n");
      }
      return alive;
    } catch (const NetworkError&) {
      return false;
    }
  }

  void run() {
    while (!stopping.load()) {
      std::vector<pollfd> fds;
      fds.push_back({wake.read_fd(), POLLIN, 0});
      fds.push_back({control.fd(), POLLIN, 0});
      int service_fd = service ? service->fd() : -1;
      fds.push_back({service_fd, POLLIN, 0});
      std::vector<Connection*> polled;
      for (auto& connection : connections) {
        fds.push_back({connection.stream.fd(), POLLIN, 0});
        polled.push_back(&connection);
      }
      if (::poll(fds.data(), fds.size(), -1) < 0) continue;
      if (fds[0].revents) wake.drain();
      if (stopping.load()) break;

      std::vector<Connection*> closed;
      for (std::size_t i = 0; i < polled.size(); ++i) {
        if (fds[i + 3].revents && !serve(*polled[i])) closed.push_back(polled[i]);
      }
      connections.remove_if([&closed](const Connection& c) {
        return std::find(closed.begin(), closed.end(), &c) != closed.end();
      });
      if (fds[1].revents) accept_from(control, Channel::Control);
      // The listener may have been replaced while serving control lines.
      if (fds[2].revents && service && service->fd() == service_fd) accept_from(*service, Channel::Service);
    }
  }
};

MockTarget::MockTarget(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}

std::unique_ptr<MockTarget> MockTarget::start(std::uint16_t control_port, const MockTargetState& initial) {
  auto impl = std::make_unique<Impl>();
  impl->initial = initial;
  impl->state = initial;
  impl->control = TcpListener::bind(kMockHost, control_port);
  if (initial.enabled) {
    impl->service = TcpListener::bind(kMockHost, static_cast<std::uint16_t>(initial.service_port));
  }
  impl->thread = std::thread([raw = impl.get()] { raw->run(); });
  return std::unique_ptr<MockTarget>(new MockTarget(std::move(impl)));
}

MockTarget::~MockTarget() { stop(); }

std::uint16_t MockTarget::control_port() const { return impl_->control.port(); }

MockTargetState MockTarget::state() const {
  std::lock_guard lock(impl_->mutex);
  return impl_->state;
}

void MockTarget::stop() {
  if (!impl_->thread.joinable()) return;
  impl_->stopping.store(true);
  impl_->wake.notify();
  impl_->thread.join();
}

}  // namespace cfgfuzz
