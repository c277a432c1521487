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

// Typed form of the JSON campaign file:
//
//   {
//     "meta": { "target": {...}, "tests": [...], "timeout_wait_ms": 500, ... },
//     "parameters": [
//       { "pname": "port", "ptype": "number", "pdefault": "4999",
//         "pvalues": [ { "value_type": "range",
//                        "value": { "start": 5000, "end": 5010 } } ] }
//     ]
//   }
//
// `//` line comments are accepted and ignored.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "scalar.hpp"

namespace cfgfuzz {

enum class ChangeAction { Modify, Add, Delete, Reset };

std::string_view to_string(ChangeAction action);
std::optional<ChangeAction> change_action_from_string(std::string_view text);

enum class ValueKind { Discrete, Range, Regex };

std::string_view to_string(ValueKind kind);

// Half-open: start, start+step, ... while < end.
struct IntRange {
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::int64_t step = 1;
  bool operator==(const IntRange&) const = default;
};

struct ValueSpec {
  ValueKind kind = ValueKind::Discrete;
  std::vector<Scalar> discrete;
  IntRange range;
  std::string pattern;
  // Per-spec override of the emitted action; modify when absent.
  std::optional<ChangeAction> action;
  bool operator==(const ValueSpec&) const = default;
};

struct ParameterDefinition {
  std::string name;
  ParamType type = ParamType::String;
  Scalar default_value;
  std::vector<ValueSpec> values;
  bool operator==(const ParameterDefinition&) const = default;
};

struct TargetLocation {
  std::string host = "127.0.0.1";
  std::int64_t port = 80;
  bool operator==(const TargetLocation&) const = default;
};

enum class TestKind { BuiltinPortScan, External };

std::string_view to_string(TestKind kind);

struct TestSpec {
  std::string name;
  TestKind kind = TestKind::External;
  std::string exec_path;
  std::vector<std::string> args;
  std::map<std::string, Scalar> params;
  std::int64_t timeout_ms = 60000;
  bool operator==(const TestSpec&) const = default;
};

struct Meta {
  TargetLocation target;
  std::vector<TestSpec> tests;
  std::int64_t timeout_wait_ms = 500;
  std::int64_t regex_max_repeat = 3;
  std::int64_t max_values_per_parameter = 1000;
  // Unrecognised keys under "meta", kept verbatim.
  nlohmann::json extra = nlohmann::json::object();
  bool operator==(const Meta&) const = default;
};

struct ConfigDefinition {
  Meta meta;
  std::vector<ParameterDefinition> parameters;
  // JSON paths of keys the schema does not know (outside "meta").
  std::vector<std::string> unknown_keys;
  bool operator==(const ConfigDefinition&) const = default;
};

struct Violation {
  std::string parameter;  // empty for document-level problems
  std::string rule;
  std::string detail;
  bool operator==(const Violation&) const = default;
};

std::string to_string(const Violation& violation);

// Throws ParseError (malformed JSON) or DefinitionError (well-formed JSON
// that cannot be typed). Everything representable is left to
// validate_definition.
ConfigDefinition parse_definition(std::string_view text);

ConfigDefinition load_definition(const std::filesystem::path& path);

std::vector<Violation> validate_definition(const ConfigDefinition& def);

// Canonical JSON form; parse_definition(serialize_definition(d)) == d.
std::string serialize_definition(const ConfigDefinition& def);

// Blanks `//` comments outside string literals, preserving byte offsets.
std::string strip_line_comments(std::string_view text);

}  // namespace cfgfuzz
