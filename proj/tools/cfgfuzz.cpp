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

// Exit codes: 0 success, 1 runtime failure, 2 usage error.

#include <signal.h>

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cfgfuzz/cfgfuzz.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

int report(cfgfuzz_status status) {
  if (status == CFGFUZZ_OK) return kExitOk;
  std::cerr << "error: " << cfgfuzz_last_error() << '\n';
  return status == CFGFUZZ_E_INVALID_ARGUMENT ? kExitUsage : kExitFailure;
}

struct ServerArgs {
  std::uint16_t port = 0;
  std::string bind = "0.0.0.0";
  std::string definition;
  std::string store;
};

int run_server(const ServerArgs& args) {
  cfgfuzz_server_options options;
  cfgfuzz_server_options_init(&options);
  options.bind_host = args.bind.c_str();
  options.bind_port = args.port;
  options.definition_path = args.definition.c_str();
  options.store_path = args.store.c_str();
  options.on_listening = [](std::uint16_t port, void*) {
    std::cerr << "listening on port " << port << std::endl;
  };
  cfgfuzz_campaign_status status{};
  int code = report(cfgfuzz_server_run(&options, &status));
  if (code == kExitOk) std::cerr << "campaign exhausted after " << status.changes_issued << " changes\n";
  return code;
}

struct ClientArgs {
  std::string config;
  std::string server_host = "127.0.0.1";
  std::uint16_t server_port = 0;
  std::string communicator;
  std::vector<std::string> communicator_args;
  std::string mock_control_host = "127.0.0.1";
  std::uint16_t mock_control_port = 0;
};

int run_client(const ClientArgs& args) {
  if (!args.config.empty()) return report(cfgfuzz_client_run_config(args.config.c_str()));
  std::vector<const char*> argv;
  for (const auto& arg : args.communicator_args) argv.push_back(arg.c_str());
  cfgfuzz_client_options options;
  cfgfuzz_client_options_init(&options);
  options.server_host = args.server_host.c_str();
  options.server_port = args.server_port;
  options.communicator = args.communicator.c_str();
  options.communicator_args = argv.data();
  options.communicator_arg_count = argv.size();
  options.mock_control_host = args.mock_control_host.c_str();
  options.mock_control_port = args.mock_control_port;
  return report(cfgfuzz_client_run(&options));
}

struct MockArgs {
  std::uint16_t control_port = 0;
  std::string initial_state;
};

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path);
  if (!in) return false;
  std::stringstream buffer;
  buffer << in.rdbuf();
  out = buffer.str();
  return true;
}

int run_mock_target(const MockArgs& args) {
  std::string initial;
  if (!args.initial_state.empty()) {
    auto first = args.initial_state.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && args.initial_state[first] == '{') {
      initial = args.initial_state;
    } else if (!read_file(args.initial_state, initial)) {
      std::cerr << "error: cannot read " << args.initial_state << '\n';
      return kExitFailure;
    }
  }

  // Blocked before any thread starts so only sigwait sees them.
  sigset_t stop_signals;
  sigemptyset(&stop_signals);
  sigaddset(&stop_signals, SIGINT);
  sigaddset(&stop_signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &stop_signals, nullptr);

  cfgfuzz_mock_target* target = nullptr;
  int code = report(cfgfuzz_mock_target_start(args.control_port, initial.empty() ? nullptr : initial.c_str(), &target));
  if (code != kExitOk) return code;
  std::cerr << "mock target control on port " << cfgfuzz_mock_target_control_port(target) << std::endl;
  int received = 0;
  sigwait(&stop_signals, &received);
  cfgfuzz_mock_target_stop(target);
  return kExitOk;
}

int run_plan(const std::string& definition_path) {
  cfgfuzz_definition* definition = nullptr;
  int code = report(cfgfuzz_definition_load(definition_path.c_str(), &definition));
  if (code != kExitOk) return code;
  cfgfuzz_generator* generator = nullptr;
  code = report(cfgfuzz_generator_create(definition, &generator));
  if (code == kExitOk) {
    std::string out;
    cfgfuzz_change change;
    cfgfuzz_status status;
    while ((status = cfgfuzz_generator_next(generator, &change)) == CFGFUZZ_OK) {
      out += std::to_string(change.id) + '\t' + change.name + '\t' + change.value + '\n';
    }
    if (status != CFGFUZZ_EXHAUSTED) code = report(status);
    std::fwrite(out.data(), 1, out.size(), stdout);
    cfgfuzz_generator_free(generator);
  }
  cfgfuzz_definition_free(definition);
  return code;
}

int run_export(const std::string& store_path, const std::string& out_path) {
  cfgfuzz_store* store = nullptr;
  int code = report(cfgfuzz_store_open(store_path.c_str(), &store));
  if (code != kExitOk) return code;
  char* csv = nullptr;
  code = report(cfgfuzz_store_export_csv(store, &csv));
  cfgfuzz_store_close(store);
  if (code != kExitOk) return code;
  std::string text(csv);
  cfgfuzz_string_free(csv);
  if (out_path.empty()) {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return kExitOk;
  }
  std::ofstream out(out_path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write " << out_path << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Configuration fuzzer"};
  app.require_subcommand(1);

  ServerArgs server_args;
  auto* server = app.add_subcommand("server", "Run a fuzzing campaign");
  server->add_option("--port", server_args.port, "Port to listen on")->required()->check(CLI::Range(1, 65535));
  server->add_option("--bind", server_args.bind, "Address to bind")->capture_default_str();
  server->add_option("--definition", server_args.definition, "Config definition file")->required();
  server->add_option("--store", server_args.store, "Results database")->required();

  ClientArgs client_args;
  auto* client = app.add_subcommand("client", "Connect a communicator to a server");
  auto* config = client->add_option("--config", client_args.config, "Client config file");
  auto* host = client->add_option("--server-host", client_args.server_host, "Server address");
  auto* port = client->add_option("--server-port", client_args.server_port, "Server port")->check(CLI::Range(1, 65535));
  auto* communicator = client->add_option("--communicator", client_args.communicator,
                                          "Communicator program or builtin:mock");
  auto* communicator_arg = client->add_option("--communicator-arg", client_args.communicator_args,
                                              "Argument passed to the communicator (repeatable)");
  auto* mock_host = client->add_option("--mock-control-host", client_args.mock_control_host,
                                       "Mock target control address for builtin:mock");
  auto* mock_port = client->add_option("--mock-control-port", client_args.mock_control_port,
                                       "Mock target control port for builtin:mock")
                        ->check(CLI::Range(1, 65535));
  for (auto* option : {host, port, communicator, communicator_arg, mock_host, mock_port}) config->excludes(option);
  port->needs(communicator);
  communicator->needs(port);

  MockArgs mock_args;
  auto* mock = app.add_subcommand("mock-target", "Run the controllable mock target");
  mock->add_option("--control-port", mock_args.control_port, "Control channel port")
      ->required()
      ->check(CLI::Range(0, 65535));
  mock->add_option("--initial-state", mock_args.initial_state, "Initial state as JSON text or a file path");

  std::string plan_definition;
  auto* plan = app.add_subcommand("plan", "Print the change schedule");
  plan->add_option("--definition", plan_definition, "Config definition file")->required();

  std::string export_store, export_out;
  auto* export_cmd = app.add_subcommand("export", "Export a results database as CSV");
  export_cmd->add_option("--store", export_store, "Results database")->required();
  export_cmd->add_option("--out", export_out, "Output file (default stdout)");

  try {
    app.parse(argc, argv);
    if (client->parsed() && client_args.config.empty() && client_args.communicator.empty()) {
      throw CLI::RequiredError("--config or --server-port with --communicator");
    }
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (server->parsed()) return run_server(server_args);
  if (client->parsed()) return run_client(client_args);
  if (mock->parsed()) return run_mock_target(mock_args);
  if (plan->parsed()) return run_plan(plan_definition);
  if (export_cmd->parsed()) return run_export(export_store, export_out);
  return kExitUsage;
}
