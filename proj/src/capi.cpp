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
#include "cfgfuzz/cfgfuzz.h"

#include <cstdlib>
#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "change_generator.hpp"
#include "client.hpp"
#include "config_model.hpp"
#include "error.hpp"
#include "mock_target.hpp"
#include "results_store.hpp"
#include "server.hpp"

struct cfgfuzz_definition {
  cfgfuzz::ConfigDefinition def;
  std::vector<std::string> violations;
};

struct cfgfuzz_generator {
  explicit cfgfuzz_generator(const cfgfuzz::ConfigDefinition& def) : generator(def) {}
  cfgfuzz::ChangeGenerator generator;
  cfgfuzz::ConfigChange current;
  std::string value;
};

struct cfgfuzz_mock_target {
  std::unique_ptr<cfgfuzz::MockTarget> target;
};

struct cfgfuzz_store {
  explicit cfgfuzz_store(cfgfuzz::ResultsStore s) : store(std::move(s)) {}
  cfgfuzz::ResultsStore store;
};

namespace {

thread_local std::string last_error;

cfgfuzz_status fail(cfgfuzz_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <typename Body>
cfgfuzz_status guarded(Body&& body) {
  try {
    return body();
  } catch (const cfgfuzz::ParseError& e) {
    return fail(CFGFUZZ_E_PARSE, e.what());
  } catch (const cfgfuzz::DefinitionError& e) {
    return fail(CFGFUZZ_E_DEFINITION, e.what());
  } catch (const cfgfuzz::ProtocolError& e) {
    return fail(CFGFUZZ_E_PROTOCOL, e.what());
  } catch (const cfgfuzz::StoreError& e) {
    return fail(CFGFUZZ_E_STORE, e.what());
  } catch (const cfgfuzz::NetworkError& e) {
    return fail(CFGFUZZ_E_NETWORK, e.what());
  } catch (const cfgfuzz::SpawnError& e) {
    return fail(CFGFUZZ_E_SPAWN, e.what());
  } catch (const cfgfuzz::Error& e) {
    return fail(CFGFUZZ_E_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(CFGFUZZ_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(CFGFUZZ_E_INTERNAL, e.what());
  } catch (...) {
    return fail(CFGFUZZ_E_INTERNAL, "unknown failure");
  }
}

char* duplicate(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

cfgfuzz_status wrap_definition(cfgfuzz::ConfigDefinition def, cfgfuzz_definition** out) {
  auto handle = std::make_unique<cfgfuzz_definition>();
  for (const auto& violation : cfgfuzz::validate_definition(def)) {
    handle->violations.push_back(cfgfuzz::to_string(violation));
  }
  handle->def = std::move(def);
  *out = handle.release();
  return CFGFUZZ_OK;
}

#define CFGFUZZ_REQUIRE(cond)                                                      \
  do {                                                                             \
    if (!(cond)) return fail(CFGFUZZ_E_INVALID_ARGUMENT, "invalid argument: " #cond); \
  } while (0)

}  // namespace

extern "C" {

const char* cfgfuzz_status_name(cfgfuzz_status status) {
  switch (status) {
    case CFGFUZZ_OK:
      return "ok";
    case CFGFUZZ_EXHAUSTED:
      return "exhausted";
    case CFGFUZZ_E_INVALID_ARGUMENT:
      return "invalid argument";
    case CFGFUZZ_E_PARSE:
      return "parse error";
    case CFGFUZZ_E_DEFINITION:
      return "definition error";
    case CFGFUZZ_E_PROTOCOL:
      return "protocol error";
    case CFGFUZZ_E_STORE:
      return "store error";
    case CFGFUZZ_E_NETWORK:
      return "network error";
    case CFGFUZZ_E_SPAWN:
      return "spawn error";
    case CFGFUZZ_E_IO:
      return "i/o error";
    case CFGFUZZ_E_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

const char* cfgfuzz_last_error(void) { return last_error.c_str(); }

const char* cfgfuzz_version(void) { return "1.0.0"; }

void cfgfuzz_string_free(char* text) { std::free(text); }

cfgfuzz_status cfgfuzz_definition_load(const char* path, cfgfuzz_definition** out) {
  CFGFUZZ_REQUIRE(path != nullptr && out != nullptr);
  return guarded([&] { return wrap_definition(cfgfuzz::load_definition(path), out); });
}

cfgfuzz_status cfgfuzz_definition_parse(const char* text, size_t length, cfgfuzz_definition** out) {
  CFGFUZZ_REQUIRE((text != nullptr || length == 0) && out != nullptr);
  return guarded([&] {
    return wrap_definition(cfgfuzz::parse_definition(std::string_view(text ? text : "", length)), out);
  });
}

void cfgfuzz_definition_free(cfgfuzz_definition* definition) { delete definition; }

size_t cfgfuzz_definition_violation_count(const cfgfuzz_definition* definition) {
  return definition ? definition->violations.size() : 0;
}

const char* cfgfuzz_definition_violation(const cfgfuzz_definition* definition, size_t index) {
  if (definition == nullptr || index >= definition->violations.size()) return nullptr;
  return definition->violations[index].c_str();
}

cfgfuzz_status cfgfuzz_definition_plan_count(const cfgfuzz_definition* definition, uint64_t* out) {
  CFGFUZZ_REQUIRE(definition != nullptr && out != nullptr);
  return guarded([&] {
    *out = cfgfuzz::plan_changes(definition->def);
    return CFGFUZZ_OK;
  });
}

cfgfuzz_status cfgfuzz_generator_create(const cfgfuzz_definition* definition, cfgfuzz_generator** out) {
  CFGFUZZ_REQUIRE(definition != nullptr && out != nullptr);
  if (!definition->violations.empty()) {
    std::string text = "invalid definition:";
    for (const auto& v : definition->violations) text += "\n  " + v;
    return fail(CFGFUZZ_E_DEFINITION, text);
  }
  return guarded([&] {
    *out = new cfgfuzz_generator(definition->def);
    return CFGFUZZ_OK;
  });
}

cfgfuzz_status cfgfuzz_generator_next(cfgfuzz_generator* generator, cfgfuzz_change* out) {
  CFGFUZZ_REQUIRE(generator != nullptr && out != nullptr);
  return guarded([&] {
    auto change = generator->generator.next();
    if (!change) return CFGFUZZ_EXHAUSTED;
    generator->current = std::move(*change);
    generator->value = cfgfuzz::render(generator->current.value);
    out->id = generator->current.id;
    out->name = generator->current.name.c_str();
    out->action = cfgfuzz::to_string(generator->current.action).data();
    out->value = generator->value.c_str();
    return CFGFUZZ_OK;
  });
}

void cfgfuzz_generator_free(cfgfuzz_generator* generator) { delete generator; }

void cfgfuzz_server_options_init(cfgfuzz_server_options* options) {
  if (options == nullptr) return;
  *options = cfgfuzz_server_options{};
  options->bind_host = "0.0.0.0";
}

cfgfuzz_status cfgfuzz_server_run(const cfgfuzz_server_options* options, cfgfuzz_campaign_status* status) {
  CFGFUZZ_REQUIRE(options != nullptr && options->definition_path != nullptr && options->store_path != nullptr);
  return guarded([&] {
    cfgfuzz::ServerConfig config;
    if (options->bind_host != nullptr) config.bind_host = options->bind_host;
    config.bind_port = options->bind_port;
    config.definition_path = options->definition_path;
    config.store_path = options->store_path;
    if (options->log != nullptr) {
      config.log = [fn = options->log, user = options->user](const std::string& line) { fn(line.c_str(), user); };
    }
    if (options->on_listening != nullptr) {
      config.on_listening = [fn = options->on_listening, user = options->user](std::uint16_t port) {
        fn(port, user);
      };
    }
    auto result = cfgfuzz::run_server(config);
    if (status != nullptr) {
      status->changes_issued = result.changes_issued;
      status->changes_confirmed = result.changes_confirmed;
      status->results_recorded = result.results_recorded;
    }
    return CFGFUZZ_OK;
  });
}

void cfgfuzz_client_options_init(cfgfuzz_client_options* options) {
  if (options == nullptr) return;
  *options = cfgfuzz_client_options{};
  options->server_host = "127.0.0.1";
  options->mock_control_host = "127.0.0.1";
}

cfgfuzz_status cfgfuzz_client_run(const cfgfuzz_client_options* options) {
  CFGFUZZ_REQUIRE(options != nullptr && options->communicator != nullptr && options->server_port != 0);
  CFGFUZZ_REQUIRE(options->communicator_arg_count == 0 || options->communicator_args != nullptr);
  return guarded([&] {
    cfgfuzz::ClientConfig config;
    if (options->server_host != nullptr) config.server_host = options->server_host;
    config.server_port = options->server_port;
    config.communicator.communicator = options->communicator;
    for (size_t i = 0; i < options->communicator_arg_count; ++i) {
      config.communicator.args.emplace_back(options->communicator_args[i]);
    }
    if (options->mock_control_host != nullptr) config.communicator.mock_control_host = options->mock_control_host;
    config.communicator.mock_control_port = options->mock_control_port;
    cfgfuzz::run_client(config);
    return CFGFUZZ_OK;
  });
}

cfgfuzz_status cfgfuzz_client_run_config(const char* path) {
  CFGFUZZ_REQUIRE(path != nullptr);
  return guarded([&] {
    cfgfuzz::run_client(cfgfuzz::load_client_config(path));
    return CFGFUZZ_OK;
  });
}

cfgfuzz_status cfgfuzz_mock_target_start(uint16_t control_port, const char* initial_state_json,
                                         cfgfuzz_mock_target** out) {
  CFGFUZZ_REQUIRE(out != nullptr);
  return guarded([&] {
    cfgfuzz::MockTargetState initial;
    if (initial_state_json != nullptr) {
      auto json = nlohmann::json::parse(initial_state_json, nullptr, false);
      if (json.is_discarded()) throw cfgfuzz::ParseError("initial state is not valid JSON", 0, 0);
      initial = cfgfuzz::mock_state_from_json(json);
    }
    auto handle = std::make_unique<cfgfuzz_mock_target>();
    handle->target = cfgfuzz::MockTarget::start(control_port, initial);
    *out = handle.release();
    return CFGFUZZ_OK;
  });
}

uint16_t cfgfuzz_mock_target_control_port(const cfgfuzz_mock_target* target) {
  return target ? target->target->control_port() : 0;
}

cfgfuzz_status cfgfuzz_mock_target_state(const cfgfuzz_mock_target* target, char** out) {
  CFGFUZZ_REQUIRE(target != nullptr && out != nullptr);
  return guarded([&] {
    *out = duplicate(cfgfuzz::to_json(target->target->state()).dump());
    return CFGFUZZ_OK;
  });
}

void cfgfuzz_mock_target_stop(cfgfuzz_mock_target* target) { delete target; }

cfgfuzz_status cfgfuzz_store_open(const char* path, cfgfuzz_store** out) {
  CFGFUZZ_REQUIRE(path != nullptr && out != nullptr);
  return guarded([&] {
    *out = new cfgfuzz_store(cfgfuzz::ResultsStore::open(path));
    return CFGFUZZ_OK;
  });
}

cfgfuzz_status cfgfuzz_store_export_csv(const cfgfuzz_store* store, char** out) {
  CFGFUZZ_REQUIRE(store != nullptr && out != nullptr);
  return guarded([&] {
    *out = duplicate(store->store.export_csv());
    return CFGFUZZ_OK;
  });
}

void cfgfuzz_store_close(cfgfuzz_store* store) { delete store; }

}  // extern "C"
