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
#include "scalar.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>

#include "error.hpp"

namespace cfgfuzz {

std::string_view to_string(ParamType type) {
  switch (type) {
    case ParamType::String:
      return "string";
    case ParamType::Number:
      return "number";
    case ParamType::Bool:
      return "bool";
  }
  return "?";
}

std::optional<ParamType> param_type_from_string(std::string_view text) {
  if (text == "string") return ParamType::String;
  if (text == "number") return ParamType::Number;
  if (text == "bool") return ParamType::Bool;
  return std::nullopt;
}

bool holds_type(const Scalar& value, ParamType type) {
  switch (type) {
    case ParamType::String:
      return std::holds_alternative<std::string>(value);
    case ParamType::Number:
      return std::holds_alternative<std::int64_t>(value);
    case ParamType::Bool:
      return std::holds_alternative<bool>(value);
  }
  return false;
}

std::string render(const Scalar& value) {
  if (const auto* b = std::get_if<bool>(&value)) return *b ? "TRUE" : "FALSE";
  if (const auto* i = std::get_if<std::int64_t>(&value)) return std::to_string(*i);
  return std::get<std::string>(value);
}

Scalar coerce(const Scalar& value, ParamType type) {
  const auto* text = std::get_if<std::string>(&value);
  if (text == nullptr) return value;

  if (type == ParamType::Number) {
    std::int64_t parsed = 0;
    const char* first = text->data();
    const char* last = first + text->size();
    auto [ptr, ec] = std::from_chars(first, last, parsed);
    if (ec == std::errc{} && ptr == last && !text->empty()) return parsed;
    return value;
  }
  if (type == ParamType::Bool) {
    std::string lower(*text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "true") return true;
    if (lower == "false") return false;
  }
  return value;
}

nlohmann::json to_json(const Scalar& value) {
  return std::visit([](const auto& v) { return nlohmann::json(v); }, value);
}

Scalar scalar_from_json(const nlohmann::json& value) {
  if (value.is_boolean()) return value.get<bool>();
  if (value.is_number_unsigned() &&
      value.get<std::uint64_t>() > static_cast<std::uint64_t>(INT64_MAX)) {
    throw DefinitionError("integer out of range " + value.dump());
  }
  if (value.is_number_integer()) return value.get<std::int64_t>();
  if (value.is_number_float()) {
    double d = value.get<double>();
    if (std::trunc(d) == d && std::abs(d) < 9.0e15) return static_cast<std::int64_t>(d);
    throw DefinitionError("non-integer number " + value.dump());
  }
  if (value.is_string()) return value.get<std::string>();
  throw DefinitionError("expected a scalar, got " + std::string(value.type_name()));
}

}  // namespace cfgfuzz
