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

// Bounded regular-language enumeration.
//
// Supported syntax: literals, escaped metacharacters, \d \w \s (and their
// negations), \t \n \r \f \v \xHH, `.`, character classes with ranges and
// negation, alternation, groups (plain and `(?:`), and the quantifiers
// ? * + {m} {m,} {m,n}. Star and plus are bounded to {0,R} and {1,R} where
// R is `max_repeat`; {m,} becomes {m,max(m,R)}. Negated sets range over
// printable ASCII (0x20-0x7E).
//
// Anchors, word boundaries, backreferences and lookaround have no finite
// language meaning here and are rejected with DefinitionError.
//
// Order: leftmost alternative first, fewest repetitions first, class
// members in the order written; concatenation varies the rightmost factor
// fastest. Strings that appear twice are reported once, at their first
// position.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace cfgfuzz {

struct RegexEnumeration {
  std::vector<std::string> strings;
  // The language has more than `cap` members.
  bool truncated = false;
};

RegexEnumeration enumerate_regex(std::string_view pattern, int max_repeat, std::size_t cap);

// Parses without enumerating; throws DefinitionError on unsupported input.
void check_regex(std::string_view pattern);

}  // namespace cfgfuzz
