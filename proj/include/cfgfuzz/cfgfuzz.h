/*
 * Copyright 2026 The cfgfuzz Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef CFGFUZZ_CFGFUZZ_H_
#define CFGFUZZ_CFGFUZZ_H_

/*
 * C interface to the configuration fuzzer.
 *
 * Every fallible call returns a cfgfuzz_status. On failure the calling
 * thread's cfgfuzz_last_error() describes it until the next failing call.
 * Handles are opaque and released by their matching *_free/_close/_stop.
 * Strings handed out by the library are UTF-8 and NUL-terminated.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(CFGFUZZ_BUILDING_LIBRARY)
#define CFGFUZZ_API __attribute__((visibility("default")))
#else
#define CFGFUZZ_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum cfgfuzz_status {
  CFGFUZZ_OK = 0,
  CFGFUZZ_EXHAUSTED = 1, /* generator has no further changes */
  CFGFUZZ_E_INVALID_ARGUMENT = -1,
  CFGFUZZ_E_PARSE = -2,      /* malformed JSON */
  CFGFUZZ_E_DEFINITION = -3, /* definition or config fails validation */
  CFGFUZZ_E_PROTOCOL = -4,
  CFGFUZZ_E_STORE = -5,
  CFGFUZZ_E_NETWORK = -6,
  CFGFUZZ_E_SPAWN = -7,
  CFGFUZZ_E_IO = -8,
  CFGFUZZ_E_INTERNAL = -9
} cfgfuzz_status;

CFGFUZZ_API const char* cfgfuzz_status_name(cfgfuzz_status status);
CFGFUZZ_API const char* cfgfuzz_last_error(void);
CFGFUZZ_API const char* cfgfuzz_version(void);

/* Releases strings returned through char** out-parameters. */
CFGFUZZ_API void cfgfuzz_string_free(char* text);

/* ---- Definitions ------------------------------------------------------- */

typedef struct cfgfuzz_definition cfgfuzz_definition;

CFGFUZZ_API cfgfuzz_status cfgfuzz_definition_load(const char* path, cfgfuzz_definition** out);
CFGFUZZ_API cfgfuzz_status cfgfuzz_definition_parse(const char* text, size_t length, cfgfuzz_definition** out);
CFGFUZZ_API void cfgfuzz_definition_free(cfgfuzz_definition* definition);

/* Validation problems, each rendered as one line. Index < count. */
CFGFUZZ_API size_t cfgfuzz_definition_violation_count(const cfgfuzz_definition* definition);
CFGFUZZ_API const char* cfgfuzz_definition_violation(const cfgfuzz_definition* definition, size_t index);

/* Number of changes the definition produces. */
CFGFUZZ_API cfgfuzz_status cfgfuzz_definition_plan_count(const cfgfuzz_definition* definition, uint64_t* out);

/* ---- Change generation -------------------------------------------------- */

typedef struct cfgfuzz_generator cfgfuzz_generator;

/* Borrowed view; valid until the next call on the same generator. */
typedef struct cfgfuzz_change {
  uint64_t id;
  const char* name;
  const char* action; /* modify, add, delete or reset */
  const char* value;  /* rendered: decimal, verbatim string, TRUE/FALSE */
} cfgfuzz_change;

/* Fails with CFGFUZZ_E_DEFINITION when the definition has violations. */
CFGFUZZ_API cfgfuzz_status cfgfuzz_generator_create(const cfgfuzz_definition* definition,
                                                    cfgfuzz_generator** out);
/* CFGFUZZ_OK with *out filled, or CFGFUZZ_EXHAUSTED. */
CFGFUZZ_API cfgfuzz_status cfgfuzz_generator_next(cfgfuzz_generator* generator, cfgfuzz_change* out);
CFGFUZZ_API void cfgfuzz_generator_free(cfgfuzz_generator* generator);

/* ---- Server ------------------------------------------------------------- */

typedef void (*cfgfuzz_log_fn)(const char* line, void* user);
typedef void (*cfgfuzz_listening_fn)(uint16_t port, void* user);

typedef struct cfgfuzz_server_options {
  const char* bind_host; /* default "0.0.0.0" */
  uint16_t bind_port;
  const char* definition_path;
  const char* store_path;
  cfgfuzz_log_fn log; /* NULL: one line per pushed change on stdout */
  cfgfuzz_listening_fn on_listening;
  void* user;
} cfgfuzz_server_options;

typedef struct cfgfuzz_campaign_status {
  uint64_t changes_issued;
  uint64_t changes_confirmed;
  uint64_t results_recorded;
} cfgfuzz_campaign_status;

CFGFUZZ_API void cfgfuzz_server_options_init(cfgfuzz_server_options* options);
/* Blocks until the campaign is exhausted. `status` may be NULL. */
CFGFUZZ_API cfgfuzz_status cfgfuzz_server_run(const cfgfuzz_server_options* options,
                                              cfgfuzz_campaign_status* status);

/* ---- Client ------------------------------------------------------------- */

typedef struct cfgfuzz_client_options {
  const char* server_host; /* default "127.0.0.1" */
  uint16_t server_port;
  const char* communicator; /* program path or "builtin:mock" */
  const char* const* communicator_args;
  size_t communicator_arg_count;
  const char* mock_control_host; /* default "127.0.0.1" */
  uint16_t mock_control_port;
} cfgfuzz_client_options;

CFGFUZZ_API void cfgfuzz_client_options_init(cfgfuzz_client_options* options);
CFGFUZZ_API cfgfuzz_status cfgfuzz_client_run(const cfgfuzz_client_options* options);
/* Reads a JSON client config file. */
CFGFUZZ_API cfgfuzz_status cfgfuzz_client_run_config(const char* path);

/* ---- Mock target -------------------------------------------------------- */

typedef struct cfgfuzz_mock_target cfgfuzz_mock_target;

/* `initial_state_json` may be NULL for the defaults. control_port 0 picks
 * a free port. */
CFGFUZZ_API cfgfuzz_status cfgfuzz_mock_target_start(uint16_t control_port, const char* initial_state_json,
                                                     cfgfuzz_mock_target** out);
CFGFUZZ_API uint16_t cfgfuzz_mock_target_control_port(const cfgfuzz_mock_target* target);
/* Current state as a JSON object; release with cfgfuzz_string_free. */
CFGFUZZ_API cfgfuzz_status cfgfuzz_mock_target_state(const cfgfuzz_mock_target* target, char** out);
/* Stops the listeners and releases the handle. */
CFGFUZZ_API void cfgfuzz_mock_target_stop(cfgfuzz_mock_target* target);

/* ---- Results store ------------------------------------------------------ */

typedef struct cfgfuzz_store cfgfuzz_store;

CFGFUZZ_API cfgfuzz_status cfgfuzz_store_open(const char* path, cfgfuzz_store** out);
CFGFUZZ_API cfgfuzz_status cfgfuzz_store_export_csv(const cfgfuzz_store* store, char** out);
CFGFUZZ_API void cfgfuzz_store_close(cfgfuzz_store* store);

#ifdef __cplusplus
}
#endif

#endif /* CFGFUZZ_CFGFUZZ_H_ */
