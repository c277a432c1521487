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

// SQLite-backed campaign store.
//
//   changes(change_id INTEGER PRIMARY KEY, change_name, action, change_value,
//           status, created_at)
//   results(result_id INTEGER PRIMARY KEY, change_id REFERENCES changes,
//           result_name, result_summary)
//
// All values are stored as text renderings.

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "change_generator.hpp"
#include "protocol.hpp"

struct sqlite3;

namespace cfgfuzz {

struct TestResult {
  std::string result_name;
  std::string result_summary;
  bool operator==(const TestResult&) const = default;
};

struct ChangeRecord {
  std::uint64_t change_id = 0;
  std::string change_name;
  std::string action;
  std::string change_value;
  std::string status;
  std::string created_at;  // ISO-8601 UTC
  bool operator==(const ChangeRecord&) const = default;
};

struct ResultRecord {
  std::int64_t result_id = 0;
  std::uint64_t change_id = 0;
  std::string result_name;
  std::string result_summary;
  bool operator==(const ResultRecord&) const = default;
};

class ResultsStore {
 public:
  // Creates the schema if absent. Throws StoreError for unwritable paths
  // and files that are not SQLite databases.
  static ResultsStore open(const std::filesystem::path& path);

  ResultsStore(ResultsStore&&) noexcept = default;
  ResultsStore& operator=(ResultsStore&&) noexcept = default;
  ~ResultsStore();

  // The generator's change id is the key. Throws StoreError on duplicates.
  std::uint64_t record_change(const ConfigChange& change, ChangeStatus status);

  // Throws StoreError when change_id is unknown.
  void record_results(std::uint64_t change_id, std::span<const TestResult> results);

  // Change row first, then its results, in one transaction.
  void record_change_with_results(const ConfigChange& change, ChangeStatus status,
                                  std::span<const TestResult> results);

  std::vector<ChangeRecord> changes() const;
  std::vector<ResultRecord> results() const;
  std::size_t orphan_result_count() const;

  // Header: changeName,changeResult,<result names by first appearance>.
  std::string export_csv() const;

  // Raw handle for tests that need to simulate partial writes.
  sqlite3* handle() const { return db_.get(); }

 private:
  struct Closer {
    void operator()(sqlite3* db) const;
  };

  explicit ResultsStore(sqlite3* db) : db_(db) {}
  void exec(const char* sql) const;

  std::unique_ptr<sqlite3, Closer> db_;
};

// RFC-4180 style cell; quoted when it holds a comma, quote, CR/LF or bracket.
std::string csv_cell(std::string_view text);

}  // namespace cfgfuzz
