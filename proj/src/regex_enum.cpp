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
#include "regex_enum.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <optional>
#include <unordered_set>

#include "error.hpp"

namespace cfgfuzz {
namespace {

constexpr int kMaxRepetitionBound = 1000;

struct Node {
  enum class Kind { Empty, Set, Concat, Alternation, Repeat };
  Kind kind = Kind::Empty;
  std::string members;  // Set: distinct characters in emission order
  std::vector<Node> children;
  int min = 0;
  int max = 0;
};

std::string printable_ascii() {
  std::string out;
  for (int c = 0x20; c <= 0x7e; ++c) out.push_back(static_cast<char>(c));
  return out;
}

void append_unique(std::string& members, char c) {
  if (members.find(c) == std::string::npos) members.push_back(c);
}

std::string complement(const std::string& members) {
  std::string out;
  for (char c : printable_ascii()) {
    if (members.find(c) == std::string::npos) out.push_back(c);
  }
  return out;
}

Node make_set(std::string members) {
  Node node;
  node.kind = Node::Kind::Set;
  node.members = std::move(members);
  return node;
}

class Parser {
 public:
  Parser(std::string_view pattern, int max_repeat) : pattern_(pattern), max_repeat_(max_repeat) {}

  Node parse() {
    Node root = parse_alternation();
    if (!at_end()) fail("unmatched ')'");
    return root;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw DefinitionError("regex \"" + std::string(pattern_) + "\" at offset " +
                          std::to_string(pos_) + ": " + what);
  }

  bool at_end() const { return pos_ >= pattern_.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos_ + ahead < pattern_.size() ? pattern_[pos_ + ahead] : '\0';
  }
  char take() { return pattern_[pos_++]; }

  Node parse_alternation() {
    Node alt;
    alt.kind = Node::Kind::Alternation;
    alt.children.push_back(parse_concatenation());
    while (!at_end() && peek() == '|') {
      ++pos_;
      alt.children.push_back(parse_concatenation());
    }
    if (alt.children.size() == 1) return std::move(alt.children.front());
    return alt;
  }

  Node parse_concatenation() {
    Node concat;
    concat.kind = Node::Kind::Concat;
    while (!at_end() && peek() != '|' && peek() != ')') {
      concat.children.push_back(parse_quantified());
    }
    if (concat.children.empty()) return Node{};
    if (concat.children.size() == 1) return std::move(concat.children.front());
    return concat;
  }

  Node parse_quantified() {
    Node atom = parse_atom();
    int min = 0;
    int max = 0;
    if (!parse_quantifier(min, max)) return atom;
    if (!at_end() && peek() == '?') ++pos_;  // lazy: same language
    int ignored_min = 0;
    int ignored_max = 0;
    std::size_t here = pos_;
    if (parse_quantifier(ignored_min, ignored_max)) {
      pos_ = here;
      fail("multiple quantifiers on one atom");
    }
    Node repeat;
    repeat.kind = Node::Kind::Repeat;
    repeat.min = min;
    repeat.max = max;
    repeat.children.push_back(std::move(atom));
    return repeat;
  }

  // Consumes a quantifier if one starts here.
  bool parse_quantifier(int& min, int& max) {
    if (at_end()) return false;
    switch (peek()) {
      case '?':
        ++pos_;
        min = 0;
        max = 1;
        return true;
      case '*':
        ++pos_;
        min = 0;
        max = max_repeat_;
        return true;
      case '+':
        ++pos_;
        min = 1;
        max = std::max(1, max_repeat_);
        return true;
      case '{':
        return parse_braces(min, max);
      default:
        return false;
    }
  }

  std::optional<int> parse_number() {
    std::size_t start = pos_;
    long value = 0;
    while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) {
      value = value * 10 + (take() - '0');
      if (value > kMaxRepetitionBound) fail("repetition bound exceeds " + std::to_string(kMaxRepetitionBound));
    }
    if (pos_ == start) return std::nullopt;
    return static_cast<int>(value);
  }

  bool parse_braces(int& min, int& max) {
    std::size_t start = pos_;
    ++pos_;  // '{'
    auto low = parse_number();
    if (!low) {
      pos_ = start;
      fail("malformed quantifier");
    }
    min = *low;
    if (!at_end() && peek() == '}') {
      ++pos_;
      max = min;
      return true;
    }
    if (at_end() || take() != ',') {
      pos_ = start;
      fail("malformed quantifier");
    }
    if (!at_end() && peek() == '}') {
      ++pos_;
      max = std::max(min, max_repeat_);
      return true;
    }
    auto high = parse_number();
    if (!high || at_end() || take() != '}') {
      pos_ = start;
      fail("malformed quantifier");
    }
    max = *high;
    if (min > max) {
      pos_ = start;
      fail("quantifier minimum exceeds maximum");
    }
    return true;
  }

  Node parse_atom() {
    char c = peek();
    switch (c) {
      case '(':
        return parse_group();
      case '[':
        return parse_class();
      case '.':
        ++pos_;
        return make_set(printable_ascii());
      case '\\':
        return parse_escape();
      case '^':
      case '$':
        fail("anchors are not supported");
      case '*':
      case '+':
      case '?':
        fail("nothing to repeat");
      case '{': {
        int min = 0;
        int max = 0;
        std::size_t here = pos_;
        try {
          parse_braces(min, max);
        } catch (const DefinitionError&) {
          pos_ = here;
          fail("unescaped '{'");
        }
        pos_ = here;
        fail("nothing to repeat");
      }
      default:
        ++pos_;
        return make_set(std::string(1, c));
    }
  }

  Node parse_group() {
    std::size_t open = pos_;
    ++pos_;
    if (peek() == '?') {
      if (peek(1) == ':') {
        pos_ += 2;
      } else if (peek(1) == '=' || peek(1) == '!' || peek(1) == '<') {
        fail("lookaround and named groups are not supported");
      } else {
        fail("unsupported group syntax");
      }
    }
    Node inner = parse_alternation();
    if (at_end() || peek() != ')') {
      pos_ = open;
      fail("unterminated group");
    }
    ++pos_;
    return inner;
  }

  // Shorthand classes shared by both escape contexts; empty when `c` is not one.
  static std::string shorthand(char c) {
    std::string out;
    switch (std::tolower(static_cast<unsigned char>(c))) {
      case 'd':
        for (char d = '0'; d <= '9'; ++d) out.push_back(d);
        break;
      case 'w':
        for (char d = '0'; d <= '9'; ++d) out.push_back(d);
        for (char d = 'A'; d <= 'Z'; ++d) out.push_back(d);
        out.push_back('_');
        for (char d = 'a'; d <= 'z'; ++d) out.push_back(d);
        break;
      case 's':
        out = "\t\n\v\f\r ";
        break;
      default:
        return {};
    }
    if (std::isupper(static_cast<unsigned char>(c))) out = complement(out);
    return out;
  }

  std::optional<char> control_escape(char c) {
    switch (c) {
      case 't':
        return '\t';
      case 'n':
        return '\n';
      case 'r':
        return '\r';
      case 'f':
        return '\f';
      case 'v':
        return '\v';
      case 'x': {
        auto hex = [](char h) -> int {
          if (h >= '0' && h <= '9') return h - '0';
          if (h >= 'a' && h <= 'f') return h - 'a' + 10;
          if (h >= 'A' && h <= 'F') return h - 'A' + 10;
          return -1;
        };
        int hi = hex(peek());
        int lo = hex(peek(1));
        if (hi < 0 || lo < 0) fail("malformed \\x escape");
        pos_ += 2;
        return static_cast<char>(hi * 16 + lo);
      }
      default:
        return std::nullopt;
    }
  }

  // Returns the set an escape denotes, with pos_ just past the backslash.
  std::string escape_members(bool in_class) {
    if (at_end()) fail("trailing backslash");
    char c = take();
    std::string set = shorthand(c);
    if (!set.empty()) return set;
    if (auto ch = control_escape(c)) return std::string(1, *ch);
    if (c >= '1' && c <= '9') fail("backreferences are not supported");
    if (c == 'b' || c == 'B') {
      fail(in_class ? "\\b in a class is not supported" : "word boundaries are not supported");
    }
    if (std::isalnum(static_cast<unsigned char>(c))) {
      fail(std::string("unsupported escape \\") + c);
    }
    return std::string(1, c);
  }

  Node parse_escape() {
    ++pos_;
    return make_set(escape_members(false));
  }

  Node parse_class() {
    std::size_t open = pos_;
    ++pos_;
    bool negated = false;
    if (peek() == '^') {
      negated = true;
      ++pos_;
    }
    std::string members;
    bool first = true;
    while (true) {
      if (at_end()) {
        pos_ = open;
        fail("unterminated character class");
      }
      char c = peek();
      if (c == ']' && !first) {
        ++pos_;
        break;
      }
      if (c == ']' && first) fail("empty character class");
      first = false;

      // One class atom: either a single character or a shorthand set.
      std::string atom;
      if (c == '\\') {
        ++pos_;
        atom = escape_members(true);
      } else {
        ++pos_;
        atom = std::string(1, c);
      }

      if (atom.size() == 1 && peek() == '-' && peek(1) != ']' && pos_ + 1 < pattern_.size()) {
        ++pos_;  // '-'
        std::string upper;
        if (peek() == '\\') {
          ++pos_;
          upper = escape_members(true);
        } else {
          upper = std::string(1, take());
        }
        if (upper.size() != 1) fail("class range bound must be a single character");
        auto lo = static_cast<unsigned char>(atom[0]);
        auto hi = static_cast<unsigned char>(upper[0]);
        if (lo > hi) fail("class range out of order");
        for (unsigned v = lo; v <= hi; ++v) append_unique(members, static_cast<char>(v));
        continue;
      }
      for (char m : atom) append_unique(members, m);
    }
    if (negated) members = complement(members);
    if (members.empty()) fail("character class matches nothing");
    return make_set(std::move(members));
  }

  std::string_view pattern_;
  std::size_t pos_ = 0;
  int max_repeat_;
};

using Strings = std::vector<std::string>;

// Appends `candidate` unless already present. Returns true when full.
bool push_unique(Strings& out, std::unordered_set<std::string>& seen, std::string candidate,
                 std::size_t limit) {
  if (seen.insert(candidate).second) out.push_back(std::move(candidate));
  return out.size() >= limit;
}

// First `limit` distinct strings of left·right, left-major.
Strings product(const Strings& left, const Strings& right, std::size_t limit) {
  Strings out;
  std::unordered_set<std::string> seen;
  for (const auto& a : left) {
    for (const auto& b : right) {
      if (push_unique(out, seen, a + b, limit)) return out;
    }
  }
  return out;
}

// Every helper returns the first `limit` distinct strings of the node's
// language in emission order. Truncating operands to `limit` is exact: with
// a non-empty right operand, distinct left prefixes already yield `limit`
// distinct products before any later prefix is reached.
Strings enumerate(const Node& node, std::size_t limit) {
  switch (node.kind) {
    case Node::Kind::Empty:
      return {""};
    case Node::Kind::Set: {
      Strings out;
      for (char c : node.members) {
        if (out.size() >= limit) break;
        out.emplace_back(1, c);
      }
      return out;
    }
    case Node::Kind::Concat: {
      Strings acc{""};
      for (const auto& child : node.children) acc = product(acc, enumerate(child, limit), limit);
      return acc;
    }
    case Node::Kind::Alternation: {
      Strings out;
      std::unordered_set<std::string> seen;
      for (const auto& child : node.children) {
        for (auto& s : enumerate(child, limit)) {
          if (push_unique(out, seen, std::move(s), limit)) return out;
        }
      }
      return out;
    }
    case Node::Kind::Repeat: {
      Strings base = enumerate(node.children.front(), limit);
      Strings power{""};
      for (int k = 0; k < node.min; ++k) power = product(power, base, limit);
      Strings out;
      std::unordered_set<std::string> seen;
      for (int k = node.min;; ++k) {
        for (const auto& s : power) {
          if (push_unique(out, seen, s, limit)) return out;
        }
        if (k == node.max) break;
        Strings next = product(power, base, limit);
        // A nullable-only base stops growing; later powers add nothing.
        if (next == power) break;
        power = std::move(next);
      }
      return out;
    }
  }
  return {};
}

}  // namespace

void check_regex(std::string_view pattern) { Parser(pattern, 1).parse(); }

RegexEnumeration enumerate_regex(std::string_view pattern, int max_repeat, std::size_t cap) {
  if (max_repeat < 0) throw DefinitionError("max_repeat must be non-negative");
  Node root = Parser(pattern, max_repeat).parse();
  RegexEnumeration result;
  if (cap == 0) {
    result.truncated = true;
    return result;
  }
  std::size_t limit = cap == std::numeric_limits<std::size_t>::max() ? cap : cap + 1;
  result.strings = enumerate(root, limit);
  if (result.strings.size() > cap) {
    result.strings.resize(cap);
    result.truncated = true;
  }
  return result;
}

}  // namespace cfgfuzz
