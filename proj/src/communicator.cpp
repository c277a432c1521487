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
#include "communicator.hpp"

#include <filesystem>

#include "error.hpp"
#include "mock_target.hpp"

namespace cfgfuzz {

std::string change_request_line(const ConfigChange& change) {
  nlohmann::ordered_json config_change;
  config_change["Name"] = change.name;
  config_change["Value"] = to_json(change.value);
  config_change["Action"] = to_string(change.action);
  nlohmann::ordered_json request;
  request["command"] = "CHANGE";
  request["config_change"] = std::move(config_change);
  return request.dump() + "\n";
}

std::string close_request_line() { return R"({"command":"CLOSE"})" "\n"; }

std::optional<CommunicatorResponse> parse_communicator_response(std::string_view line) {
  auto json = nlohmann::json::parse(line, nullptr, false);
  if (json.is_discarded() || !json.is_object()) return std::nullopt;
  auto status = json.find("status");
  if (status == json.end() || !status->is_string()) return std::nullopt;
  auto parsed = change_status_from_string(status->get<std::string>());
  if (!parsed) return std::nullopt;
  CommunicatorResponse response{*parsed, nlohmann::json::object()};
  auto extended = json.find("extended_status");
  if (extended != json.end() && !extended->is_null()) {
    if (!extended->is_object()) return std::nullopt;
    response.extended_status = *extended;
  }
  return response;
}

namespace {

CommunicatorResponse error_response(const std::string& reason) {
  return {ChangeStatus::Error, {{"reason", reason}}};
}

}  // namespace

ScriptCommunicator::ScriptCommunicator(std::vector<std::string> argv, Millis timeout)
    : argv_(std::move(argv)), timeout_(timeout) {}

ScriptCommunicator::~ScriptCommunicator() { close(); }

CommunicatorResponse ScriptCommunicator::fail(const std::string& reason) {
  process_.kill();
  return error_response(reason);
}

CommunicatorResponse ScriptCommunicator::apply_change(const ConfigChange& change) {
  if (!process_.running()) process_ = Subprocess::spawn(argv_);
  try {
    process_.write(change_request_line(change));
  } catch (const NetworkError&) {
    return fail("communicator exited");
  }
  std::string line;
  ReadStatus status;
  try {
    status = process_.read_line(line, timeout_);
  } catch (const NetworkError&) {
    return fail("malformed response");
  }
  if (status == ReadStatus::Timeout) return fail("timeout");
  if (status == ReadStatus::Eof) return fail("communicator exited");
  auto response = parse_communicator_response(line);
  if (!response) return fail("malformed response");
  return *response;
}

void ScriptCommunicator::close() {
  if (!process_.running()) return;
  try {
    process_.write(close_request_line());
  } catch (const NetworkError&) {
  }
  process_.close_stdin();
  if (!process_.wait(Millis{5000})) process_.kill();
}

const std::map<std::string, std::string>& server_tokens_table() {
  static const std::map<std::string, std::string> table{
      {"Full", "Apache/2.4.53 (Debian)"}, {"Prod", "Apache"},        {"Major", "Apache/2"},
      {"Minor", "Apache/2.4"},            {"Min", "Apache/2.4.53"}, {"OS", "Apache/2.4.53 (Debian)"},
  };
  return table;
}

MockTargetCommunicator::MockTargetCommunicator(std::string control_host, std::uint16_t control_port)
    : host_(std::move(control_host)), port_(control_port), banner_(kDefaultBanner) {}

std::optional<std::string> MockTargetCommunicator::command_for(const ConfigChange& change,
                                                               std::string& banner) const {
  const std::string value = render(change.value);
  if (change.name == "port") return "SET port " + value;
  if (change.name == "start_systemctl_service") {
    Scalar flag = coerce(change.value, ParamType::Bool);
    if (!std::holds_alternative<bool>(flag)) return std::nullopt;
    return std::string("SET enabled ") + (std::get<bool>(flag) ? "true" : "false");
  }
  if (change.name == "server_tokens") {
    auto it = server_tokens_table().find(value);
    if (it == server_tokens_table().end()) return std::nullopt;
    banner = it->second;
    return "SET banner " + banner;
  }
  if (change.name == "server_signature") {
    if (value == "On" || value == "EMail") return "SET signature " + banner;
    if (value == "Off") return "SET signature ";
    return std::nullopt;
  }
  return std::nullopt;
}

std::optional<std::string> MockTargetCommunicator::send(const std::string& command) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      if (!control_.valid()) control_ = TcpStream::connect(host_, port_);
      control_.send(command + "\n");
      std::string reply;
      if (control_.read_line(reply, kCommunicatorTimeout) == ReadStatus::Line) return reply;
    } catch (const NetworkError&) {
    }
    // Stale connection; retry once on a fresh one.
    control_ = TcpStream();
  }
  return std::nullopt;
}

CommunicatorResponse MockTargetCommunicator::apply_change(const ConfigChange& change) {
  std::string banner = banner_;
  auto command = command_for(change, banner);
  if (!command) {
    return {ChangeStatus::Invalid, {{"reason", "unsupported value for " + change.name}}};
  }
  auto reply = send(*command);
  if (!reply) return error_response("mock target unreachable");
  if (*reply != "OK") return error_response(*reply);
  banner_ = banner;
  return {};
}

void MockTargetCommunicator::close() { control_ = TcpStream(); }

std::unique_ptr<Communicator> make_communicator(const CommunicatorSpec& spec) {
  if (spec.communicator == kBuiltinMockCommunicator) {
    if (spec.mock_control_port == 0) throw DefinitionError("builtin:mock needs a mock control port");
    return std::make_unique<MockTargetCommunicator>(spec.mock_control_host, spec.mock_control_port);
  }
  if (spec.communicator.empty()) throw SpawnError("no communicator given");
  std::vector<std::string> argv;
  const std::string& program = spec.communicator;
  if (program.find('/') != std::string::npos) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(program, ec)) throw SpawnError("no such communicator: " + program);
    if (!is_executable(program)) {
      if (std::filesystem::path(program).extension() != ".py") {
        throw SpawnError("communicator is not executable: " + program);
      }
      argv.push_back("python3");
    }
  }
  argv.push_back(program);
  argv.insert(argv.end(), spec.args.begin(), spec.args.end());
  return std::make_unique<ScriptCommunicator>(std::move(argv), spec.timeout);
}

}  // namespace cfgfuzz
