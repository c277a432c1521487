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

// Server and client together, in process.

#include <gtest/gtest.h>

#include <condition_variable>
#include <mutex>
#include <thread>

#include "client.hpp"
#include "error.hpp"
#include "mock_target.hpp"
#include "oracles/csv_reader.hpp"
#include "results_store.hpp"
#include "server.hpp"
#include "support.hpp"

namespace cfgfuzz {
namespace {

using nlohmann::json;
using testing::TempDir;

class ServerThread {
 public:
  ServerThread(const std::filesystem::path& definition, const std::filesystem::path& store, Millis linger = Millis{5000}) {
    ServerConfig config;
    config.bind_host = "127.0.0.1";
    config.bind_port = 0;
    config.definition_path = definition;
    config.store_path = store;
    config.linger = linger;
    config.log = [this](const std::string& line) {
      std::lock_guard<std::mutex> lock(mutex_);
      log_.push_back(line);
    };
    config.on_listening = [this](std::uint16_t port) {
      std::lock_guard<std::mutex> lock(mutex_);
      port_ = port;
      ready_.notify_all();
    };
    thread_ = std::thread([this, config] {
      try {
        status_ = run_server(config);
      } catch (...) {
        error_ = std::current_exception();
      }
      std::lock_guard<std::mutex> lock(mutex_);
      finished_ = true;
      ready_.notify_all();
    });
  }
  ~ServerThread() {
    if (thread_.joinable()) thread_.join();
  }

  // 0 when the server failed before listening.
  std::uint16_t port() {
    std::unique_lock<std::mutex> lock(mutex_);
    ready_.wait(lock, [this] { return port_ != 0 || finished_; });
    return port_;
  }
  void join() { thread_.join(); }
  const CampaignStatus& status() const { return status_; }
  std::exception_ptr error() const { return error_; }
  std::vector<std::string> log() {
    std::lock_guard<std::mutex> lock(mutex_);
    return log_;
  }

 private:
  std::mutex mutex_;
  std::condition_variable ready_;
  std::uint16_t port_ = 0;
  bool finished_ = false;
  std::vector<std::string> log_;
  CampaignStatus status_;
  std::exception_ptr error_;
  std::thread thread_;
};

void rethrow(std::exception_ptr error) {
  if (error) std::rethrow_exception(error);
}

// One port parameter over [base+1, base+11) with default base, scanned
// over [base, base+10] in compact mode.
json port_campaign(std::uint16_t base) {
  json def;
  def["meta"]["target"] = {{"host", "127.0.0.1"}, {"port", base}};
  def["meta"]["timeout_wait_ms"] = 10;
  def["meta"]["tests"] = json::array({{{"name", "port scan"},
                                       {"kind", "builtin_port_scan"},
                                       {"params",
                                        {{"port_start", base},
                                         {"port_end", base + 10},
                                         {"compact", true},
                                         {"connect_timeout_ms", 500}}}}});
  def["parameters"] = json::array({{{"pname", "port"},
                                    {"ptype", "number"},
                                    {"pdefault", std::to_string(base)},
                                    {"pvalues", json::array({{{"value_type", "range"},
                                                              {"value", {{"start", base + 1}, {"end", base + 11}}}}})}}});
  return def;
}

json probe_test(const std::string& name, const std::string& mode, int timeout_ms = 10000) {
  return {{"name", name}, {"kind", "external"}, {"exec", PROBE_TEST_PATH}, {"args", {mode}}, {"timeout_ms", timeout_ms}};
}

json small_campaign(std::vector<json> tests) {
  json def;
  def["meta"]["timeout_wait_ms"] = 10;
  def["meta"]["tests"] = tests;
  def["parameters"] = json::array({{{"pname", "n"},
                                    {"ptype", "number"},
                                    {"pdefault", 0},
                                    {"pvalues", json::array({{{"value_type", "discrete"}, {"value", {1, 2, 3}}}})}}});
  return def;
}

std::filesystem::path write_definition(const TempDir& dir, const json& def) {
  auto path = dir / "definition.json";
  testing::write_file(path, def.dump(2));
  return path;
}

ClientConfig client_for(std::uint16_t server_port, CommunicatorSpec spec) {
  ClientConfig config;
  config.server_host = "127.0.0.1";
  config.server_port = server_port;
  config.communicator = std::move(spec);
  return config;
}

CommunicatorSpec builtin_mock(std::uint16_t control_port) {
  CommunicatorSpec spec;
  spec.communicator = kBuiltinMockCommunicator;
  spec.mock_control_port = control_port;
  return spec;
}

CommunicatorSpec fixture_communicator(const std::string& log, std::vector<std::string> extra = {}) {
  CommunicatorSpec spec;
  spec.communicator = FIXTURE_COMMUNICATOR_PATH;
  spec.args = {"--log", log};
  spec.args.insert(spec.args.end(), extra.begin(), extra.end());
  return spec;
}

std::vector<ConfigChange> planned(const std::filesystem::path& definition) {
  ChangeGenerator gen(load_definition(definition));
  std::vector<ConfigChange> out;
  while (auto c = gen.next()) out.push_back(*c);
  return out;
}

void expect_stored_sequence(const ResultsStore& store, const std::vector<ConfigChange>& expected) {
  auto rows = store.changes();
  ASSERT_EQ(rows.size(), expected.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].change_id, expected[i].id);
    EXPECT_EQ(rows[i].change_name, expected[i].name);
    EXPECT_EQ(rows[i].action, to_string(expected[i].action));
    EXPECT_EQ(rows[i].change_value, render(expected[i].value));
  }
}

TEST(Campaign, PortCampaignAgainstMock) {
  TempDir dir;
  auto base = testing::free_port_block(11, 7);
  MockTargetState initial;
  initial.service_port = base;
  auto mock = MockTarget::start(0, initial);
  auto definition = write_definition(dir, port_campaign(base));

  ServerThread server(definition, dir / "run.db");
  ASSERT_NE(server.port(), 0);
  auto summary = run_client(client_for(server.port(), builtin_mock(mock->control_port())));
  server.join();
  rethrow(server.error());

  EXPECT_EQ(summary.changes_applied, 11u);
  std::vector<std::string> expected_log;
  for (int i = 1; i <= 10; ++i) expected_log.push_back("pushed name/value pair port:" + std::to_string(base + i));
  expected_log.push_back("pushed name/value pair port:" + std::to_string(base));
  EXPECT_EQ(server.log(), expected_log);
  EXPECT_EQ(server.status().changes_issued, 11u);
  EXPECT_EQ(server.status().changes_confirmed, 11u);
  EXPECT_EQ(server.status().results_recorded, 11u);
  EXPECT_EQ(server.status().state, ServerState::Exhausted);

  auto store = ResultsStore::open(dir / "run.db");
  expect_stored_sequence(store, planned(definition));
  for (const auto& row : store.changes()) EXPECT_EQ(row.status, "OK");
  auto csv = oracle::read_csv(store.export_csv());
  ASSERT_TRUE(csv);
  ASSERT_EQ(csv->size(), 12u);
  EXPECT_EQ((*csv)[0], (oracle::CsvRow{"changeName", "changeResult", "ports_open"}));
  for (std::size_t i = 1; i < csv->size(); ++i) EXPECT_EQ((*csv)[i][2], (*csv)[i][1]);
}

TEST(Campaign, EmptyDefinitionExhaustsImmediately) {
  TempDir dir;
  auto definition = write_definition(dir, json::parse(R"({"meta":{},"parameters":[]})"));
  ServerThread server(definition, dir / "run.db");
  ASSERT_NE(server.port(), 0);
  auto summary = run_client(client_for(server.port(), fixture_communicator((dir / "log").string())));
  server.join();
  rethrow(server.error());
  EXPECT_EQ(summary.changes_applied, 0u);
  EXPECT_EQ(server.status().changes_issued, 0u);
  EXPECT_TRUE(ResultsStore::open(dir / "run.db").changes().empty());
  // Never started, so never closed.
  EXPECT_EQ(testing::read_file(dir / "log"), "");
}

TEST(Campaign, ProxyTransparencyAndCloseOrdering) {
  TempDir dir;
  auto definition = write_definition(dir, small_campaign({probe_test("echo", "echo")}));
  auto log = (dir / "log").string();
  ServerThread server(definition, dir / "run.db");
  ASSERT_NE(server.port(), 0);
  run_client(client_for(server.port(), fixture_communicator(log)));
  server.join();
  rethrow(server.error());

  auto lines = testing::split_lines(testing::read_file(log));
  auto expected = planned(definition);
  ASSERT_EQ(lines.size(), expected.size() + 2);
  EXPECT_EQ(lines.front().rfind("START ", 0), 0u);
  for (std::size_t i = 0; i < expected.size(); ++i) {
    EXPECT_EQ(lines[i + 1], "CHANGE " + expected[i].name + "=" + render(expected[i].value) + " " +
                                std::string(to_string(expected[i].action)) + " " + to_json(expected[i].value).dump());
  }
  EXPECT_EQ(lines.back(), "CLOSE");

  // The external test saw the change it was run for.
  auto store = ResultsStore::open(dir / "run.db");
  auto results = store.results();
  ASSERT_EQ(results.size(), expected.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    auto ctx = json::parse(results[i].result_summary);
    EXPECT_EQ(ctx["change"]["id"], expected[i].id);
    EXPECT_EQ(ctx["change"]["value"], to_json(expected[i].value));
  }
}

TEST(Campaign, InvalidStatusStoredWithResults) {
  TempDir dir;
  auto definition = write_definition(dir, small_campaign({probe_test("cve", "echo")}));
  ServerThread server(definition, dir / "run.db");
  ASSERT_NE(server.port(), 0);
  run_client(client_for(server.port(), fixture_communicator((dir / "log").string(), {"--reject", "2"})));
  server.join();
  rethrow(server.error());

  auto store = ResultsStore::open(dir / "run.db");
  auto changes = store.changes();
  ASSERT_EQ(changes.size(), 4u);
  EXPECT_EQ(changes[0].status, "OK");
  EXPECT_EQ(changes[1].status, "INVALID");
  EXPECT_EQ(changes[1].change_value, "2");
  std::size_t for_rejected = 0;
  for (const auto& r : store.results()) for_rejected += r.change_id == changes[1].change_id;
  EXPECT_EQ(for_rejected, 1u);
}

TEST(Campaign, CommunicatorCrashIsErrorAndCampaignContinues) {
  TempDir dir;
  auto definition = write_definition(dir, small_campaign({}));
  auto log = (dir / "log").string();
  ServerThread server(definition, dir / "run.db");
  ASSERT_NE(server.port(), 0);
  run_client(client_for(server.port(), fixture_communicator(log, {"--crash-on", "2"})));
  server.join();
  rethrow(server.error());

  auto store = ResultsStore::open(dir / "run.db");
  std::vector<std::string> statuses;
  for (const auto& row : store.changes()) statuses.push_back(row.status);
  EXPECT_EQ(statuses, (std::vector<std::string>{"OK", "ERROR", "OK", "OK"}));
  expect_stored_sequence(store, planned(definition));
}

TEST(Campaign, ApacheCampaignStoresAllChanges) {
  TempDir dir;
  auto def = load_definition(testing::fixture_path("apache_campaign.json"));
  def.meta.timeout_wait_ms = 5;
  def.meta.tests[0].params["connect_timeout_ms"] = std::int64_t{500};
  auto definition = dir / "apache.json";
  testing::write_file(definition, serialize_definition(def));

  MockTargetState initial;
  initial.service_port = testing::free_port();
  auto mock = MockTarget::start(0, initial);
  ServerThread server(definition, dir / "run.db");
  ASSERT_NE(server.port(), 0);
  run_client(client_for(server.port(), builtin_mock(mock->control_port())));
  server.join();
  rethrow(server.error());

  auto store = ResultsStore::open(dir / "run.db");
  expect_stored_sequence(store, planned(definition));
  auto changes = store.changes();
  ASSERT_EQ(changes.size(), 115u);
  EXPECT_EQ(changes.front().change_id, 1u);
  EXPECT_EQ(changes.back().change_id, 115u);
  EXPECT_EQ(store.results().size(), 115u);
  // Change 10 moved the service to 30006; the scan saw exactly that port.
  auto results = store.results();
  EXPECT_NE(results[9].result_summary.find("(30006, True)"), std::string::npos);
  EXPECT_EQ(results[9].result_summary.find("(30005, True)"), std::string::npos);
}

// ---------------------------------------------------------------------------
// Raw protocol sessions.

class RawSession {
 public:
  explicit RawSession(std::uint16_t port) : stream_(TcpStream::connect("127.0.0.1", port)) {}
  void send(const Message& message) { stream_.send(encode(message)); }
  void send_line(const std::string& line) { stream_.send(line + "\n"); }
  std::optional<Message> receive(Millis timeout = Millis{5000}) {
    std::string line;
    if (stream_.read_line(line, timeout) != ReadStatus::Line) return std::nullopt;
    return decode(line);
  }
  void close() { stream_.close(); }

 private:
  TcpStream stream_;
};

ConfigConfirmation confirm(std::uint64_t id) { return ConfigConfirmation{id, ChangeStatus::Ok, json::object()}; }

template <typename T>
const T& expect_message(const std::optional<Message>& message) {
  static const T empty{};
  EXPECT_TRUE(message && std::holds_alternative<T>(*message));
  if (!message || !std::holds_alternative<T>(*message)) return empty;
  return std::get<T>(*message);
}

TEST(CampaignProtocol, RequestDuringTestsGetsTimeoutQuickly) {
  TempDir dir;
  auto definition = write_definition(dir, small_campaign({probe_test("slow", "sleep", 1500)}));
  ServerThread server(definition, dir / "run.db");
  ASSERT_NE(server.port(), 0);
  RawSession session(server.port());
  session.send(HandshakeInit{});
  expect_message<HandshakeAck>(session.receive());
  session.send(ConfigRequest{});
  auto first = expect_message<ConfigFulfillment>(session.receive()).change;
  EXPECT_EQ(first.id, 1u);
  session.send(confirm(1));
  session.send(ConfigRequest{});
  auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(expect_message<ConfigTimeout>(session.receive()).wait_ms, 10);
  EXPECT_LT(std::chrono::steady_clock::now() - start, Millis{1000});

  // Poll until the tests finish and change 2 arrives.
  std::optional<Message> reply;
  do {
    std::this_thread::sleep_for(Millis{50});
    session.send(ConfigRequest{});
    reply = session.receive();
  } while (reply && std::holds_alternative<ConfigTimeout>(*reply));
  EXPECT_EQ(expect_message<ConfigFulfillment>(reply).change.id, 2u);

  // Leaving mid-campaign aborts it; change 1 stays stored.
  session.close();
  server.join();
  EXPECT_THROW(rethrow(server.error()), ProtocolError);
  auto store = ResultsStore::open(dir / "run.db");
  ASSERT_EQ(store.changes().size(), 1u);
  EXPECT_EQ(store.results().size(), 1u);
  EXPECT_EQ(store.results()[0].result_summary, "<test failed: timeout>");
  EXPECT_EQ(store.orphan_result_count(), 0u);
}

TEST(CampaignProtocol, MismatchedConfirmationCloses) {
  TempDir dir;
  auto definition = write_definition(dir, small_campaign({}));
  ServerThread server(definition, dir / "run.db");
  ASSERT_NE(server.port(), 0);
  RawSession session(server.port());
  session.send(HandshakeInit{});
  expect_message<HandshakeAck>(session.receive());
  session.send(ConfigRequest{});
  expect_message<ConfigFulfillment>(session.receive());
  session.send(confirm(99));
  EXPECT_FALSE(session.receive());
  server.join();
  EXPECT_THROW(rethrow(server.error()), ProtocolError);
}

TEST(CampaignProtocol, RequestBeforeHandshakeCloses) {
  TempDir dir;
  ServerThread server(write_definition(dir, small_campaign({})), dir / "run.db");
  ASSERT_NE(server.port(), 0);
  RawSession session(server.port());
  session.send(ConfigRequest{});
  EXPECT_FALSE(session.receive());
  server.join();
  EXPECT_THROW(rethrow(server.error()), ProtocolError);
}

TEST(CampaignProtocol, GarbageCloses) {
  TempDir dir;
  ServerThread server(write_definition(dir, small_campaign({})), dir / "run.db");
  ASSERT_NE(server.port(), 0);
  RawSession session(server.port());
  session.send_line("hello?");
  EXPECT_FALSE(session.receive());
  server.join();
  EXPECT_THROW(rethrow(server.error()), ProtocolError);
}

TEST(CampaignProtocol, SecondClientIsDropped) {
  TempDir dir;
  ServerThread server(write_definition(dir, small_campaign({})), dir / "run.db");
  ASSERT_NE(server.port(), 0);
  RawSession first(server.port());
  first.send(HandshakeInit{});
  expect_message<HandshakeAck>(first.receive());

  RawSession second(server.port());
  second.send(HandshakeInit{});
  EXPECT_FALSE(second.receive(Millis{2000}));

  first.send(ConfigRequest{});
  expect_message<ConfigFulfillment>(first.receive());
  first.close();
  server.join();
}

TEST(CampaignProtocol, ExhaustedServerKeepsAnsweringThenExits) {
  TempDir dir;
  ServerThread server(write_definition(dir, json::parse(R"({"meta":{},"parameters":[]})")), dir / "run.db",
                      Millis{300});
  ASSERT_NE(server.port(), 0);
  RawSession session(server.port());
  session.send(HandshakeInit{});
  expect_message<HandshakeAck>(session.receive());
  for (int i = 0; i < 3; ++i) {
    session.send(ConfigRequest{});
    expect_message<ConfigExhaustion>(session.receive());
  }
  // No disconnect: the linger period ends the server anyway.
  server.join();
  rethrow(server.error());
  EXPECT_EQ(server.status().state, ServerState::Exhausted);
}

TEST(CampaignSetup, InvalidDefinitionFailsBeforeListening) {
  TempDir dir;
  auto definition = write_definition(dir, json::parse(R"({"meta":{},"parameters":[{"pname":"p","ptype":"number",
      "pdefault":1,"pvalues":[{"value_type":"range","value":{"start":10,"end":10}}]}]})"));
  ServerThread server(definition, dir / "run.db");
  EXPECT_EQ(server.port(), 0);
  server.join();
  EXPECT_THROW(rethrow(server.error()), DefinitionError);
}

TEST(CampaignSetup, ClientWithoutServer) {
  CommunicatorSpec spec;
  spec.communicator = FIXTURE_COMMUNICATOR_PATH;
  try {
    run_client(client_for(testing::free_port(), spec));
    FAIL() << "expected NetworkError";
  } catch (const NetworkError& e) {
    EXPECT_EQ(std::string(e.what()), "connection refused");
  }
}

TEST(ClientConfigFile, Keys) {
  auto config = client_config_from_json(json::parse(R"({"server_host":"10.0.0.2","server_port":9000,
      "communicator":"builtin:mock","mock_control_host":"127.0.0.1","mock_control_port":9001})"));
  EXPECT_EQ(config.server_host, "10.0.0.2");
  EXPECT_EQ(config.server_port, 9000);
  EXPECT_EQ(config.communicator.communicator, "builtin:mock");
  EXPECT_EQ(config.communicator.mock_control_port, 9001);

  config = client_config_from_json(
      json::parse(R"({"server_port":9000,"communicator":"./comm.py","communicator_args":["-v","x"]})"));
  EXPECT_EQ(config.server_host, "127.0.0.1");
  EXPECT_EQ(config.communicator.args, (std::vector<std::string>{"-v", "x"}));

  EXPECT_THROW(client_config_from_json(json::parse(R"({"server_port":9000,"communicator":"x","extra":1})")),
               DefinitionError);
  EXPECT_THROW(client_config_from_json(json::parse(R"({"communicator":"x"})")), DefinitionError);
  EXPECT_THROW(client_config_from_json(json::parse(R"({"server_port":70000,"communicator":"x"})")), DefinitionError);
  EXPECT_THROW(client_config_from_json(json::parse(R"({"server_port":9000})")), DefinitionError);
}

}  // namespace
}  // namespace cfgfuzz
