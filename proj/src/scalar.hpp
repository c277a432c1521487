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

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "json.hpp"

namespace cfgfuzz {

// A configuration value. Numbers are integral only.
using Scalar = std::variant<bool, std::int64_t, std::string>;

enum class ParamType { String, Number, Bool };

std::string_view to_string(ParamType type);
std::optional<ParamType> param_type_from_string(std::string_view text);

// True when the scalar's alternative is the one `type` stores.
bool holds_type(const Scalar& value, ParamType type);

// Textual rendering used by logs, the results store and the CSV export:
// integers in decimal, strings verbatim, booleans as TRUE/FALSE.
std::string render(const Scalar& value);

// Converts a string scalar to `type` when it spells a value of that type
// ("4999" -> 4999, "true" -> true). Other scalars are returned unchanged.
Scalar coerce(const Scalar& value, ParamType type);

nlohmann::json to_json(const Scalar& value);

// Throws DefinitionError for non-scalar JSON and for non-integral numbers.
Scalar scalar_from_json(const nlohmann::json& value);

}  // namespace cfgfuzz
