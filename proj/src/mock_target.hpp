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

// Controllable stand-in target. Both channels speak LF-terminated lines on
// loopback.
//
// Control:  SET port <n> | SET banner <text> | SET signature <text>
//           | SET enabled <true|false> | RESET        -> OK | ERR <reason>
// Service:  HEAD  -> BANNER <banner>
//           GET * -> ERRORPAGE <signature> Server at 127.0.0.1 Port <n>
//                    ERRORPAGE <no version number found>  (empty signature)

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

#include "json.hpp"

namespace cfgfuzz {

inline constexpr const char* kMockHost = "127.0.0.1";
inline constexpr const char* kDefaultBanner = "Apache/2.4.53 (Debian)";

struct MockTargetState {
  bool enabled = true;
  std::int64_t service_port = 80;
  std::string banner = kDefaultBanner;
  std::string signature = kDefaultBanner;
  bool operator==(const MockTargetState&) const = default;
};

nlohmann::json to_json(const MockTargetState& state);
// Missing keys keep their defaults. Throws DefinitionError on bad types,
// unknown keys, or a port outside 1-65535.
MockTargetState mock_state_from_json(const nlohmann::json& json);

// Applies one control command to `state`. RESET copies `initial`.
std::string apply_control(MockTargetState& state, const MockTargetState& initial, std::string_view command);

std::string serve_request(const MockTargetState& state, std::string_view request);

// Runs the control and service listeners on a background thread.
class MockTarget {
 public:
  // Throws NetworkError when the control port (or the initial service
  // port) cannot be bound. control_port 0 picks a free port.
  static std::unique_ptr<MockTarget> start(std::uint16_t control_port, const MockTargetState& initial);

  ~MockTarget();
  MockTarget(const MockTarget&) = delete;
  MockTarget& operator=(const MockTarget&) = delete;

  std::uint16_t control_port() const;
  MockTargetState state() const;
  void stop();

 private:
  struct Impl;
  explicit MockTarget(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

}  // namespace cfgfuzz
