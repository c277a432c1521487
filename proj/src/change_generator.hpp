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
#include <vector>

#include "config_model.hpp"

namespace cfgfuzz {

struct ConfigChange {
  std::uint64_t id = 0;
  std::string name;
  ChangeAction action = ChangeAction::Modify;
  Scalar value;
  bool operator==(const ConfigChange&) const = default;
};

struct ValueExpansion {
  std::vector<Scalar> values;
  bool truncated = false;
};

// Values one ValueSpec contributes, in emission order, capped at `cap`.
ValueExpansion expand_value_spec(const ValueSpec& spec, ParamType type, int regex_max_repeat,
                                 std::size_t cap);

struct ScheduledValue {
  Scalar value;
  ChangeAction action = ChangeAction::Modify;
};

// Everything one parameter emits before its reset.
struct ParameterSchedule {
  std::string name;
  std::vector<ScheduledValue> values;
  Scalar reset_value;
  bool truncated = false;
};

// Expands every parameter; truncation notices are appended to `warnings`.
std::vector<ParameterSchedule> expand_parameters(const ConfigDefinition& def,
                                                 std::vector<std::string>* warnings = nullptr);

// Number of changes the definition produces: every value plus one reset per
// parameter.
std::size_t plan_changes(const ConfigDefinition& def);

// Emits one change at a time: a parameter's values in order, then its reset
// to pdefault, then the next parameter. Ids run 1..N without gaps. Once
// exhausted, stays exhausted.
class ChangeGenerator {
 public:
  explicit ChangeGenerator(const ConfigDefinition& def);

  std::optional<ConfigChange> next();
  bool exhausted() const;
  std::uint64_t issued() const { return next_id_ - 1; }
  const std::vector<std::string>& warnings() const { return warnings_; }

 private:
  std::vector<std::string> warnings_;  // filled while schedule_ is built
  std::vector<ParameterSchedule> schedule_;
  std::size_t parameter_ = 0;
  std::size_t value_ = 0;  // == values.size() means the reset is next
  std::uint64_t next_id_ = 1;
};

}  // namespace cfgfuzz
