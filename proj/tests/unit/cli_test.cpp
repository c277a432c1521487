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

// The cfgfuzz binary, run as a subprocess.

#include <gtest/gtest.h>

#include "cli_campaign.hpp"
#include "json.hpp"
#include "oracles/csv_reader.hpp"
#include "results_store.hpp"
#include "support.hpp"

namespace cfgfuzz {
namespace {

using nlohmann::json;
using testing::run_command;
using testing::TempDir;

const std::string kCli = CFGFUZZ_CLI_PATH;

TEST(Cli, PlanPortRange) {
  auto result = run_command({kCli, "plan", "--definition", testing::fixture_path("port_range.json")});
  EXPECT_EQ(result.exit_code, 0);
  auto lines = testing::split_lines(result.out);
  ASSERT_EQ(lines.size(), 11u);
  EXPECT_EQ(lines.front(), "1\tport\t5000");
  EXPECT_EQ(lines.back(), "11\tport\t4999");
}

TEST(Cli, PlanApacheCampaign) {
  auto result = run_command({kCli, "plan", "--definition", testing::fixture_path("apache_campaign.json")});
  EXPECT_EQ(result.exit_code, 0);
  EXPECT_EQ(testing::split_lines(result.out).size(), 115u);
}

TEST(Cli, PlanInvalidDefinitionFails) {
  TempDir dir;
  testing::write_file(dir / "d.json", R"({"meta":{},"parameters":[{"pname":"p","ptype":"float","pdefault":1}]})");
  auto result = run_command({kCli, "plan", "--definition", (dir / "d.json").string()});
  EXPECT_EQ(result.exit_code, 1);
  EXPECT_EQ(result.out, "");
  EXPECT_EQ(run_command({kCli, "plan", "--definition", (dir / "missing.json").string()}).exit_code, 1);
}

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run_command({kCli}).exit_code, 2);
  EXPECT_EQ(run_command({kCli, "frobnicate"}).exit_code, 2);
  EXPECT_EQ(run_command({kCli, "server", "--port", "9000", "--store", "x.db"}).exit_code, 2);
  EXPECT_EQ(run_command({kCli, "server", "--port", "0", "--definition", "d", "--store", "x.db"}).exit_code, 2);
  EXPECT_EQ(run_command({kCli, "client"}).exit_code, 2);
  EXPECT_EQ(run_command({kCli, "client", "--server-port", "9000"}).exit_code, 2);
  EXPECT_EQ(run_command({kCli, "client", "--config", "c.json", "--server-port", "9000", "--communicator", "x"})
                .exit_code,
            2);
  EXPECT_EQ(run_command({kCli, "export"}).exit_code, 2);
  EXPECT_EQ(run_command({kCli, "--help"}).exit_code, 0);
}

TEST(Cli, ExportMatchesLibrary) {
  TempDir dir;
  auto db = dir / "r.db";
  {
    auto store = ResultsStore::open(db);
    std::vector<TestResult> results{{"header version", "Apache/2.4.49 (Unix)"}, {"CVE-2021-41773", "a, \"b\""}};
    store.record_change_with_results(ConfigChange{1, "server_tokens", ChangeAction::Modify, std::string("Full")},
                                     ChangeStatus::Ok, results);
  }
  auto expected = ResultsStore::open(db).export_csv();
  auto result = run_command({kCli, "export", "--store", db.string()});
  EXPECT_EQ(result.exit_code, 0);
  EXPECT_EQ(result.out, expected);

  auto out = dir / "out.csv";
  result = run_command({kCli, "export", "--store", db.string(), "--out", out.string()});
  EXPECT_EQ(result.exit_code, 0);
  EXPECT_EQ(result.out, "");
  EXPECT_EQ(testing::read_file(out), expected);

  EXPECT_EQ(run_command({kCli, "export", "--store", "/nonexistent/r.db"}).exit_code, 1);
}

TEST(Cli, MockTargetBusyControlPort) {
  auto busy = TcpListener::bind("127.0.0.1", 0);
  auto result = run_command({kCli, "mock-target", "--control-port", std::to_string(busy.port())}, Millis{5000});
  EXPECT_EQ(result.exit_code, 1);
  EXPECT_EQ(run_command({kCli, "mock-target", "--control-port", "0", "--initial-state", "/nonexistent.json"},
                        Millis{5000})
                .exit_code,
            1);
}

TEST(Cli, ClientWithoutServerFails) {
  auto result = run_command({kCli, "client", "--server-port", std::to_string(testing::free_port()),
                             "--communicator", FIXTURE_COMMUNICATOR_PATH});
  EXPECT_EQ(result.exit_code, 1);
}

TEST(Cli, ThreeProcessCampaign) {
  TempDir dir;
  auto base = testing::free_port_block(6, 3);
  json def = {{"meta",
               {{"target", {{"host", "127.0.0.1"}, {"port", base}}},
                {"timeout_wait_ms", 10},
                {"tests", json::array({{{"name", "port scan"},
                                        {"kind", "builtin_port_scan"},
                                        {"params", {{"port_start", base}, {"port_end", base + 5}, {"compact", true}}}}})}}},
              {"parameters",
               json::array({{{"pname", "port"},
                             {"ptype", "number"},
                             {"pdefault", base},
                             {"pvalues", json::array({{{"value_type", "range"},
                                                       {"value", {{"start", base + 1}, {"end", base + 6}}}}})}}})}};
  testing::write_file(dir / "d.json", def.dump());
  auto db = (dir / "r.db").string();
  auto run = testing::run_cli_campaign((dir / "d.json").string(), db, json{{"service_port", base}}.dump());
  ASSERT_EQ(run.failure, "");
  EXPECT_EQ(run.client_exit, 0);
  EXPECT_EQ(run.server_exit, 0);
  ASSERT_EQ(run.server_lines.size(), 6u);
  EXPECT_EQ(run.server_lines[0], "pushed name/value pair port:" + std::to_string(base + 1));
  EXPECT_EQ(run.server_lines[5], "pushed name/value pair port:" + std::to_string(base));

  auto csv = oracle::read_csv(run_command({kCli, "export", "--store", db}).out);
  ASSERT_TRUE(csv);
  ASSERT_EQ(csv->size(), 7u);
  for (std::size_t i = 1; i < csv->size(); ++i) EXPECT_EQ((*csv)[i][2], (*csv)[i][1]);
}

}  // namespace
}  // namespace cfgfuzz
