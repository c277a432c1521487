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
#include "config_model.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "error.hpp"
#include "regex_enum.hpp"

namespace cfgfuzz {

using nlohmann::json;

std::string_view to_string(ChangeAction action) {
  switch (action) {
    case ChangeAction::Modify:
      return "modify";
    case ChangeAction::Add:
      return "add";
    case ChangeAction::Delete:
      return "delete";
    case ChangeAction::Reset:
      return "reset";
  }
  return "?";
}

std::optional<ChangeAction> change_action_from_string(std::string_view text) {
  if (text == "modify") return ChangeAction::Modify;
  if (text == "add") return ChangeAction::Add;
  if (text == "delete") return ChangeAction::Delete;
  if (text == "reset") return ChangeAction::Reset;
  return std::nullopt;
}

std::string_view to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::Discrete:
      return "discrete";
    case ValueKind::Range:
      return "range";
    case ValueKind::Regex:
      return "regex";
  }
  return "?";
}

std::string_view to_string(TestKind kind) {
  return kind == TestKind::BuiltinPortScan ? "builtin_port_scan" : "external";
}

std::string to_string(const Violation& violation) {
  std::string out;
  if (!violation.parameter.empty()) out += "parameter '" + violation.parameter + "': ";
  out += violation.rule;
  if (!violation.detail.empty()) out += " (" + violation.detail + ")";
  return out;
}

std::string strip_line_comments(std::string_view text) {
  std::string out(text);
  bool in_string = false;
  for (std::size_t i = 0; i < out.size(); ++i) {
    char c = out[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '/' && i + 1 < out.size() && out[i + 1] == '/') {
      while (i < out.size() && out[i] != '\n') out[i++] = ' ';
    }
  }
  return out;
}

namespace {

// Walks one JSON object, handing out known keys and remembering the rest.
class ObjectReader {
 public:
  ObjectReader(const json& object, std::string path, std::vector<std::string>* unknown)
      : object_(object), path_(std::move(path)), unknown_(unknown) {
    if (!object_.is_object()) {
      throw DefinitionError(describe() + " must be an object");
    }
  }

  ObjectReader(const ObjectReader&) = delete;
  ObjectReader& operator=(const ObjectReader&) = delete;

  ~ObjectReader() = default;

  const json* optional(const std::string& key) {
    seen_.insert(key);
    auto it = object_.find(key);
    return it == object_.end() ? nullptr : &*it;
  }

  const json& required(const std::string& key, const std::string& parameter = {}) {
    const json* value = optional(key);
    if (value == nullptr) {
      throw DefinitionError("missing \"" + key + "\" in " + describe(), parameter);
    }
    return *value;
  }

  // Call once all known keys were requested.
  void finish() {
    if (unknown_ == nullptr) return;
    for (const auto& [key, value] : object_.items()) {
      if (!seen_.contains(key)) unknown_->push_back(child(key));
    }
  }

  std::string child(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  std::string describe() const { return path_.empty() ? "document root" : path_; }

 private:
  const json& object_;
  std::string path_;
  std::vector<std::string>* unknown_;
  std::set<std::string> seen_;
};

std::string as_string(const json& value, const std::string& what,
                      const std::string& parameter = {}) {
  if (!value.is_string()) throw DefinitionError(what + " must be a string", parameter);
  return value.get<std::string>();
}

std::int64_t as_integer(const json& value, const std::string& what,
                        const std::string& parameter = {}) {
  if (!value.is_number()) throw DefinitionError(what + " must be an integer", parameter);
  try {
    Scalar s = scalar_from_json(value);
    return std::get<std::int64_t>(s);
  } catch (const DefinitionError& e) {
    throw DefinitionError(what + ": " + e.what(), parameter);
  }
}

Scalar as_scalar(const json& value, const std::string& what, const std::string& parameter) {
  try {
    return scalar_from_json(value);
  } catch (const DefinitionError& e) {
    throw DefinitionError(what + ": " + e.what(), parameter);
  }
}

ValueSpec parse_value_spec(const json& node, const std::string& path, ParamType type,
                           const std::string& pname, std::vector<std::string>* unknown) {
  ObjectReader reader(node, path, unknown);
  ValueSpec spec;
  std::string kind = as_string(reader.required("value_type", pname), "value_type", pname);
  const json& payload = reader.required("value", pname);

  if (kind == "discrete") {
    spec.kind = ValueKind::Discrete;
    if (!payload.is_array()) throw DefinitionError("discrete value must be a list", pname);
    for (const auto& element : payload) {
      spec.discrete.push_back(coerce(as_scalar(element, "discrete element", pname), type));
    }
  } else if (kind == "range") {
    spec.kind = ValueKind::Range;
    ObjectReader range(payload, path + ".value", unknown);
    spec.range.start = as_integer(range.required("start", pname), "range start", pname);
    spec.range.end = as_integer(range.required("end", pname), "range end", pname);
    if (const json* step = range.optional("step")) {
      spec.range.step = as_integer(*step, "range step", pname);
    }
    range.finish();
  } else if (kind == "regex") {
    spec.kind = ValueKind::Regex;
    spec.pattern = as_string(payload, "regex value", pname);
  } else {
    throw DefinitionError("unknown value_type \"" + kind + "\"", pname);
  }

  if (const json* action = reader.optional("action")) {
    std::string text = as_string(*action, "action", pname);
    auto parsed = change_action_from_string(text);
    if (!parsed) throw DefinitionError("unknown action \"" + text + "\"", pname);
    spec.action = parsed;
  }
  reader.finish();
  return spec;
}

ParameterDefinition parse_parameter(const json& node, const std::string& path,
                                    std::vector<std::string>* unknown) {
  ObjectReader reader(node, path, unknown);
  ParameterDefinition param;
  param.name = as_string(reader.required("pname"), path + ".pname");

  std::string type_text = as_string(reader.required("ptype", param.name), "ptype", param.name);
  auto type = param_type_from_string(type_text);
  if (!type) throw DefinitionError("unknown ptype \"" + type_text + "\"", param.name);
  param.type = *type;

  param.default_value =
      coerce(as_scalar(reader.required("pdefault", param.name), "pdefault", param.name),
             param.type);

  if (const json* values = reader.optional("pvalues")) {
    if (!values->is_array()) throw DefinitionError("pvalues must be a list", param.name);
    for (std::size_t i = 0; i < values->size(); ++i) {
      param.values.push_back(parse_value_spec((*values)[i],
                                              path + ".pvalues[" + std::to_string(i) + "]",
                                              param.type, param.name, unknown));
    }
  }
  reader.finish();
  return param;
}

TestSpec parse_test(const json& node, const std::string& path, std::vector<std::string>* unknown) {
  ObjectReader reader(node, path, unknown);
  TestSpec spec;
  spec.name = as_string(reader.required("name"), path + ".name");
  std::string kind = as_string(reader.required("kind"), path + ".kind");
  if (kind == "builtin_port_scan") {
    spec.kind = TestKind::BuiltinPortScan;
  } else if (kind == "external") {
    spec.kind = TestKind::External;
  } else {
    throw DefinitionError("unknown test kind \"" + kind + "\" in " + path);
  }
  if (const json* exec = reader.optional("exec")) spec.exec_path = as_string(*exec, path + ".exec");
  if (const json* args = reader.optional("args")) {
    if (!args->is_array()) throw DefinitionError(path + ".args must be a list");
    for (const auto& arg : *args) spec.args.push_back(as_string(arg, path + ".args[]"));
  }
  if (const json* params = reader.optional("params")) {
    if (!params->is_object()) throw DefinitionError(path + ".params must be an object");
    for (const auto& [key, value] : params->items()) {
      spec.params.emplace(key, as_scalar(value, path + ".params." + key, {}));
    }
  }
  if (const json* timeout = reader.optional("timeout_ms")) {
    spec.timeout_ms = as_integer(*timeout, path + ".timeout_ms");
  }
  reader.finish();
  return spec;
}

Meta parse_meta(const json& node, std::vector<std::string>* unknown) {
  ObjectReader reader(node, "meta", nullptr);
  Meta meta;
  if (const json* target = reader.optional("target")) {
    ObjectReader t(*target, "meta.target", unknown);
    if (const json* host = t.optional("host")) meta.target.host = as_string(*host, "meta.target.host");
    if (const json* port = t.optional("port")) meta.target.port = as_integer(*port, "meta.target.port");
    t.finish();
  }
  if (const json* tests = reader.optional("tests")) {
    if (!tests->is_array()) throw DefinitionError("meta.tests must be a list");
    for (std::size_t i = 0; i < tests->size(); ++i) {
      meta.tests.push_back(parse_test((*tests)[i], "meta.tests[" + std::to_string(i) + "]", unknown));
    }
  }
  if (const json* v = reader.optional("timeout_wait_ms")) {
    meta.timeout_wait_ms = as_integer(*v, "meta.timeout_wait_ms");
  }
  if (const json* v = reader.optional("regex_max_repeat")) {
    meta.regex_max_repeat = as_integer(*v, "meta.regex_max_repeat");
  }
  if (const json* v = reader.optional("max_values_per_parameter")) {
    meta.max_values_per_parameter = as_integer(*v, "meta.max_values_per_parameter");
  }
  static const std::set<std::string> known = {"target", "tests", "timeout_wait_ms",
                                              "regex_max_repeat", "max_values_per_parameter"};
  for (const auto& [key, value] : node.items()) {
    if (!known.contains(key)) meta.extra[key] = value;
  }
  return meta;
}

std::pair<std::size_t, std::size_t> line_and_column(std::string_view text, std::size_t offset) {
  std::size_t line = 1;
  std::size_t column = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace

ConfigDefinition parse_definition(std::string_view text) {
  std::string stripped = strip_line_comments(text);
  json document;
  try {
    document = json::parse(stripped);
  } catch (const json::parse_error& e) {
    // nlohmann reports the byte just past the offending token.
    std::size_t offset = e.byte > 0 ? e.byte - 1 : 0;
    auto [line, column] = line_and_column(stripped, offset);
    throw ParseError("malformed JSON at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + e.what(),
                     line, column);
  }

  ConfigDefinition def;
  ObjectReader root(document, "", &def.unknown_keys);
  if (const json* meta = root.optional("meta")) def.meta = parse_meta(*meta, &def.unknown_keys);
  if (const json* params = root.optional("parameters")) {
    if (!params->is_array()) throw DefinitionError("parameters must be a list");
    for (std::size_t i = 0; i < params->size(); ++i) {
      def.parameters.push_back(
          parse_parameter((*params)[i], "parameters[" + std::to_string(i) + "]", &def.unknown_keys));
    }
  }
  root.finish();
  return def;
}

ConfigDefinition load_definition(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read definition " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_definition(buffer.str());
}

namespace {

void validate_value_spec(const ParameterDefinition& param, const ValueSpec& spec,
                         std::vector<Violation>& out) {
  auto add = [&](std::string rule, std::string detail = {}) {
    out.push_back({param.name, std::move(rule), std::move(detail)});
  };
  switch (spec.kind) {
    case ValueKind::Discrete:
      if (spec.discrete.empty()) add("empty discrete list");
      for (const auto& element : spec.discrete) {
        if (!holds_type(element, param.type)) {
          add("discrete element type mismatch",
              to_json(element).dump() + " is not a " + std::string(to_string(param.type)));
        }
      }
      break;
    case ValueKind::Range:
      if (param.type != ParamType::Number) add("range requires number");
      if (spec.range.start >= spec.range.end) {
        add("empty range", "start=" + std::to_string(spec.range.start) +
                               ", end=" + std::to_string(spec.range.end));
      }
      if (spec.range.step <= 0) add("non-positive step", std::to_string(spec.range.step));
      break;
    case ValueKind::Regex:
      if (param.type != ParamType::String) add("regex requires string");
      try {
        check_regex(spec.pattern);
      } catch (const DefinitionError& e) {
        add("unsupported regex", e.what());
      }
      break;
  }
  if (spec.action == ChangeAction::Reset) add("reset action override", "reset is emitted automatically");
}

bool valid_port(std::int64_t port) { return port >= 1 && port <= 65535; }

void validate_test(const TestSpec& test, std::set<std::string>& names, std::vector<Violation>& out) {
  auto add = [&](std::string rule, std::string detail = {}) {
    out.push_back({{}, std::move(rule), "test '" + test.name + "'" + (detail.empty() ? "" : ": " + detail)});
  };
  if (test.name.empty()) add("empty test name");
  if (!names.insert(test.name).second) add("duplicate test name");
  if (test.timeout_ms <= 0) add("non-positive test timeout");
  if (test.kind == TestKind::External && test.exec_path.empty()) add("external test without exec");
  if (test.kind == TestKind::BuiltinPortScan) {
    auto port_param = [&](const char* key) -> std::optional<std::int64_t> {
      auto it = test.params.find(key);
      if (it == test.params.end()) {
        add("missing port scan parameter", key);
        return std::nullopt;
      }
      Scalar value = coerce(it->second, ParamType::Number);
      if (!holds_type(value, ParamType::Number) || !valid_port(std::get<std::int64_t>(value))) {
        add("invalid port scan parameter", key);
        return std::nullopt;
      }
      return std::get<std::int64_t>(value);
    };
    auto start = port_param("port_start");
    auto end = port_param("port_end");
    if (start && end && *start > *end) add("port_start > port_end");
  }
}

}  // namespace

std::vector<Violation> validate_definition(const ConfigDefinition& def) {
  std::vector<Violation> out;

  for (const auto& key : def.unknown_keys) out.push_back({{}, "unknown key", key});

  const Meta& meta = def.meta;
  if (meta.timeout_wait_ms <= 0) out.push_back({{}, "timeout_wait_ms must be positive", {}});
  if (meta.regex_max_repeat <= 0) out.push_back({{}, "regex_max_repeat must be positive", {}});
  if (meta.max_values_per_parameter < 1) {
    out.push_back({{}, "max_values_per_parameter must be at least 1", {}});
  }
  if (meta.target.host.empty()) out.push_back({{}, "empty target host", {}});
  if (!valid_port(meta.target.port)) {
    out.push_back({{}, "target port out of range", std::to_string(meta.target.port)});
  }
  std::set<std::string> test_names;
  for (const auto& test : meta.tests) validate_test(test, test_names, out);

  std::set<std::string> names;
  for (const auto& param : def.parameters) {
    if (param.name.empty()) out.push_back({{}, "empty pname", {}});
    if (!names.insert(param.name).second) out.push_back({param.name, "duplicate name", {}});
    if (!holds_type(param.default_value, param.type)) {
      out.push_back({param.name, "pdefault type mismatch",
                     to_json(param.default_value).dump() + " is not a " +
                         std::string(to_string(param.type))});
    }
    for (const auto& spec : param.values) validate_value_spec(param, spec, out);
  }
  return out;
}

std::string serialize_definition(const ConfigDefinition& def) {
  using ordered = nlohmann::ordered_json;
  auto scalar = [](const Scalar& value) {
    return std::visit([](const auto& v) { return ordered(v); }, value);
  };
  ordered meta = ordered::object();
  meta["target"] = {{"host", def.meta.target.host}, {"port", def.meta.target.port}};
  ordered tests = ordered::array();
  for (const auto& test : def.meta.tests) {
    ordered t = {{"name", test.name}, {"kind", to_string(test.kind)}};
    if (!test.exec_path.empty()) t["exec"] = test.exec_path;
    if (!test.args.empty()) t["args"] = test.args;
    ordered params = ordered::object();
    for (const auto& [key, value] : test.params) params[key] = scalar(value);
    t["params"] = params;
    t["timeout_ms"] = test.timeout_ms;
    tests.push_back(t);
  }
  meta["tests"] = tests;
  meta["timeout_wait_ms"] = def.meta.timeout_wait_ms;
  meta["regex_max_repeat"] = def.meta.regex_max_repeat;
  meta["max_values_per_parameter"] = def.meta.max_values_per_parameter;
  for (const auto& [key, value] : def.meta.extra.items()) meta[key] = ordered::parse(value.dump());

  ordered params = ordered::array();
  for (const auto& param : def.parameters) {
    ordered p;
    p["pname"] = param.name;
    p["ptype"] = to_string(param.type);
    p["pdefault"] = scalar(param.default_value);
    ordered values = ordered::array();
    for (const auto& spec : param.values) {
      ordered v;
      v["value_type"] = to_string(spec.kind);
      switch (spec.kind) {
        case ValueKind::Discrete: {
          ordered list = ordered::array();
          for (const auto& element : spec.discrete) list.push_back(scalar(element));
          v["value"] = list;
          break;
        }
        case ValueKind::Range:
          v["value"] = {{"start", spec.range.start}, {"end", spec.range.end}, {"step", spec.range.step}};
          break;
        case ValueKind::Regex:
          v["value"] = spec.pattern;
          break;
      }
      if (spec.action) v["action"] = to_string(*spec.action);
      values.push_back(v);
    }
    p["pvalues"] = values;
    params.push_back(p);
  }
  ordered root;
  root["meta"] = meta;
  root["parameters"] = params;
  return root.dump(2);
}

}  // namespace cfgfuzz
