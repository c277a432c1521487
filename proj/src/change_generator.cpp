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
#include "change_generator.hpp"

#include <algorithm>
#include <cstdint>

#include "regex_enum.hpp"

namespace cfgfuzz {

ValueExpansion expand_value_spec(const ValueSpec& spec, ParamType type, int regex_max_repeat,
                                 std::size_t cap) {
  ValueExpansion out;
  switch (spec.kind) {
    case ValueKind::Discrete:
      for (const auto& value : spec.discrete) {
        if (out.values.size() == cap) {
          out.truncated = true;
          break;
        }
        out.values.push_back(coerce(value, type));
      }
      break;
    case ValueKind::Range: {
      const IntRange& r = spec.range;
      if (r.step <= 0) break;
      for (std::int64_t v = r.start; v < r.end; v += r.step) {
        if (out.values.size() == cap) {
          out.truncated = true;
          break;
        }
        out.values.emplace_back(v);
        if (v > INT64_MAX - r.step) break;
      }
      break;
    }
    case ValueKind::Regex: {
      RegexEnumeration strings = enumerate_regex(spec.pattern, regex_max_repeat, cap);
      out.truncated = strings.truncated;
      for (auto& s : strings.strings) out.values.emplace_back(std::move(s));
      break;
    }
  }
  return out;
}

std::vector<ParameterSchedule> expand_parameters(const ConfigDefinition& def,
                                                 std::vector<std::string>* warnings) {
  const auto cap = static_cast<std::size_t>(std::max<std::int64_t>(1, def.meta.max_values_per_parameter));
  const int max_repeat = static_cast<int>(def.meta.regex_max_repeat);

  std::vector<ParameterSchedule> schedule;
  schedule.reserve(def.parameters.size());
  for (const auto& param : def.parameters) {
    ParameterSchedule entry;
    entry.name = param.name;
    entry.reset_value = param.default_value;

    if (param.type == ParamType::Bool && param.values.empty()) {
      entry.values = {{false, ChangeAction::Modify}, {true, ChangeAction::Modify}};
    }
    for (const auto& spec : param.values) {
      std::size_t room = cap - entry.values.size();
      ValueExpansion expansion = expand_value_spec(spec, param.type, max_repeat, room);
      entry.truncated = entry.truncated || expansion.truncated;
      ChangeAction action = spec.action.value_or(ChangeAction::Modify);
      for (auto& value : expansion.values) entry.values.push_back({std::move(value), action});
      if (entry.values.size() == cap) {
        // Later specs only count as truncation if they would add something.
        if (&spec != &param.values.back()) entry.truncated = true;
        break;
      }
    }
    if (entry.truncated && warnings != nullptr) {
      warnings->push_back("parameter '" + param.name + "': values truncated at " +
                          std::to_string(cap));
    }
    schedule.push_back(std::move(entry));
  }
  return schedule;
}

std::size_t plan_changes(const ConfigDefinition& def) {
  std::size_t total = 0;
  for (const auto& entry : expand_parameters(def)) total += entry.values.size() + 1;
  return total;
}

ChangeGenerator::ChangeGenerator(const ConfigDefinition& def)
    : schedule_(expand_parameters(def, &warnings_)) {}

bool ChangeGenerator::exhausted() const { return parameter_ >= schedule_.size(); }

std::optional<ConfigChange> ChangeGenerator::next() {
  if (exhausted()) return std::nullopt;
  const ParameterSchedule& entry = schedule_[parameter_];
  ConfigChange change;
  change.id = next_id_++;
  change.name = entry.name;
  if (value_ < entry.values.size()) {
    change.value = entry.values[value_].value;
    change.action = entry.values[value_].action;
    ++value_;
  } else {
    change.value = entry.reset_value;
    change.action = ChangeAction::Reset;
    ++parameter_;
    value_ = 0;
  }
  return change;
}

}  // namespace cfgfuzz
