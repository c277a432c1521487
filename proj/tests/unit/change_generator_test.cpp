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

#include <gtest/gtest.h>

#include <map>

#include "generators.hpp"
#include "support.hpp"

namespace cfgfuzz {
namespace {

using testing::fixture_path;

std::vector<ConfigChange> drain(ChangeGenerator& gen) {
  std::vector<ConfigChange> out;
  while (auto change = gen.next()) out.push_back(*change);
  return out;
}

std::vector<ConfigChange> drain(const ConfigDefinition& def) {
  ChangeGenerator gen(def);
  return drain(gen);
}

Scalar num(std::int64_t v) { return Scalar{v}; }
Scalar str(const char* s) { return Scalar{std::string(s)}; }

TEST(ExpandValueSpec, RangeIsEndExclusive) {
  ValueSpec spec;
  spec.kind = ValueKind::Range;
  spec.range = {5000, 5010, 1};
  auto values = expand_value_spec(spec, ParamType::Number, 3, 1000).values;
  ASSERT_EQ(values.size(), 10u);
  EXPECT_EQ(values.front(), num(5000));
  EXPECT_EQ(values.back(), num(5009));

  spec.range = {30000, 30100, 1};
  values = expand_value_spec(spec, ParamType::Number, 3, 1000).values;
  ASSERT_EQ(values.size(), 100u);
  EXPECT_EQ(values.back(), num(30099));

  spec.range = {0, 10, 4};
  EXPECT_EQ(expand_value_spec(spec, ParamType::Number, 3, 1000).values, (std::vector<Scalar>{num(0), num(4), num(8)}));
}

TEST(ExpandValueSpec, DiscreteKeepsOrder) {
  ValueSpec spec;
  spec.discrete = {str("Full"), str("Prod"), str("Major"), str("Minor"), str("Min"), str("OS")};
  EXPECT_EQ(expand_value_spec(spec, ParamType::String, 3, 1000).values, spec.discrete);
}

TEST(ExpandValueSpec, CapTruncates) {
  ValueSpec spec;
  spec.kind = ValueKind::Range;
  spec.range = {0, 100, 1};
  auto expansion = expand_value_spec(spec, ParamType::Number, 3, 7);
  EXPECT_TRUE(expansion.truncated);
  EXPECT_EQ(expansion.values.size(), 7u);
}

TEST(ExpandValueSpec, RegexValues) {
  ValueSpec spec;
  spec.kind = ValueKind::Regex;
  spec.pattern = "(on|off)";
  EXPECT_EQ(expand_value_spec(spec, ParamType::String, 3, 1000).values, (std::vector<Scalar>{str("on"), str("off")}));
}

TEST(PlanChanges, Examples) {
  EXPECT_EQ(plan_changes(load_definition(fixture_path("port_range.json"))), 11u);
  EXPECT_EQ(plan_changes(load_definition(fixture_path("apache_campaign.json"))), 115u);
  EXPECT_EQ(plan_changes(parse_definition(R"({"meta":{},"parameters":[]})")), 0u);
}

TEST(ChangeGenerator, PortRangeSequence) {
  auto changes = drain(load_definition(fixture_path("port_range.json")));
  ASSERT_EQ(changes.size(), 11u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_EQ(changes[i].id, i + 1);
    EXPECT_EQ(changes[i].name, "port");
    EXPECT_EQ(changes[i].action, ChangeAction::Modify);
    EXPECT_EQ(changes[i].value, num(5000 + static_cast<std::int64_t>(i)));
  }
  EXPECT_EQ(changes[10], (ConfigChange{11, "port", ChangeAction::Reset, num(4999)}));
}

TEST(ChangeGenerator, ApacheCampaignSegments) {
  auto changes = drain(load_definition(fixture_path("apache_campaign.json")));
  ASSERT_EQ(changes.size(), 115u);
  EXPECT_EQ(changes[0].value, Scalar{false});
  EXPECT_EQ(changes[1].value, Scalar{true});
  EXPECT_EQ(changes[2], (ConfigChange{3, "start_systemctl_service", ChangeAction::Reset, Scalar{true}}));
  EXPECT_EQ(changes[3].value, num(30000));
  EXPECT_EQ(changes[102].value, num(30099));
  EXPECT_EQ(changes[103], (ConfigChange{104, "port", ChangeAction::Reset, num(80)}));
  std::vector<std::string> signature;
  for (std::size_t i = 104; i < 108; ++i) signature.push_back(render(changes[i].value));
  EXPECT_EQ(signature, (std::vector<std::string>{"On", "Off", "EMail", "On"}));
  EXPECT_EQ(changes[107].action, ChangeAction::Reset);
  std::vector<std::string> tokens;
  for (std::size_t i = 108; i < 115; ++i) tokens.push_back(render(changes[i].value));
  EXPECT_EQ(tokens, (std::vector<std::string>{"Full", "Prod", "Major", "Minor", "Min", "OS", "OS"}));
}

TEST(ChangeGenerator, StaysExhausted) {
  ChangeGenerator gen(load_definition(fixture_path("port_range.json")));
  EXPECT_FALSE(gen.exhausted());
  drain(gen);
  EXPECT_TRUE(gen.exhausted());
  EXPECT_EQ(gen.issued(), 11u);
  for (int i = 0; i < 3; ++i) EXPECT_FALSE(gen.next());
  EXPECT_EQ(gen.issued(), 11u);
}

TEST(ChangeGenerator, EmptyDefinitionIsExhausted) {
  ChangeGenerator gen(parse_definition(R"({"meta":{},"parameters":[]})"));
  EXPECT_TRUE(gen.exhausted());
  EXPECT_FALSE(gen.next());
}

TEST(ChangeGenerator, ActionOverrideForwarded) {
  auto def = parse_definition(R"({"meta":{},"parameters":[{"pname":"mod","ptype":"string","pdefault":"a",
      "pvalues":[{"value_type":"discrete","value":["x"],"action":"add"},
                 {"value_type":"discrete","value":["y"],"action":"delete"}]}]})");
  auto changes = drain(def);
  ASSERT_EQ(changes.size(), 3u);
  EXPECT_EQ(changes[0].action, ChangeAction::Add);
  EXPECT_EQ(changes[1].action, ChangeAction::Delete);
  EXPECT_EQ(changes[2].action, ChangeAction::Reset);
}

TEST(ChangeGenerator, TruncationWarns) {
  auto def = parse_definition(R"({"meta":{"max_values_per_parameter":5},"parameters":[{"pname":"p","ptype":"number",
      "pdefault":0,"pvalues":[{"value_type":"range","value":{"start":0,"end":100}}]}]})");
  ChangeGenerator gen(def);
  EXPECT_FALSE(gen.warnings().empty());
  EXPECT_EQ(drain(gen).size(), 6u);
  EXPECT_EQ(plan_changes(def), 6u);
}

// Per parameter: the emitted values are exactly the expansion followed by
// one pdefault, ids are 1..N, and the total matches the plan.
TEST(ChangeGeneratorProperty, RandomDefinitions) {
  testing::Gen gen(4242);
  for (int round = 0; round < 300; ++round) {
    auto def = gen.definition();
    auto changes = drain(def);
    ASSERT_EQ(changes.size(), plan_changes(def)) << serialize_definition(def);

    for (std::size_t i = 0; i < changes.size(); ++i) ASSERT_EQ(changes[i].id, i + 1);

    auto schedule = expand_parameters(def);
    std::size_t at = 0;
    for (std::size_t p = 0; p < def.parameters.size(); ++p) {
      const auto& param = def.parameters[p];
      for (const auto& scheduled : schedule[p].values) {
        ASSERT_LT(at, changes.size());
        EXPECT_EQ(changes[at].name, param.name);
        EXPECT_EQ(changes[at].value, scheduled.value);
        EXPECT_EQ(changes[at].action, scheduled.action);
        ++at;
      }
      ASSERT_LT(at, changes.size());
      EXPECT_EQ(changes[at], (ConfigChange{at + 1, param.name, ChangeAction::Reset, param.default_value}));
      ++at;
    }
    EXPECT_EQ(at, changes.size());
  }
}

}  // namespace
}  // namespace cfgfuzz
