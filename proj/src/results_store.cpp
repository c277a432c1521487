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
#include "results_store.hpp"

#include <sqlite3.h>

#include <chrono>
#include <cstdio>
#include <ctime>
#include <map>

#include "error.hpp"

namespace cfgfuzz {

namespace {

constexpr const char* kSchema = R"sql(
CREATE TABLE IF NOT EXISTS changes (
  change_id    INTEGER PRIMARY KEY,
  change_name  TEXT NOT NULL,
  action       TEXT NOT NULL,
  change_value TEXT NOT NULL,
  status       TEXT NOT NULL,
  created_at   TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS results (
  result_id      INTEGER PRIMARY KEY AUTOINCREMENT,
  change_id      INTEGER NOT NULL REFERENCES changes(change_id),
  result_name    TEXT NOT NULL,
  result_summary TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS results_by_change ON results(change_id);
)sql";

class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw StoreError(std::string("prepare: ") + sqlite3_errmsg(db));
    }
  }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;
  ~Statement() { sqlite3_finalize(stmt_); }

  void bind(int index, std::int64_t value) { check(sqlite3_bind_int64(stmt_, index, value)); }
  void bind(int index, const std::string& value) {
    check(sqlite3_bind_text(stmt_, index, value.data(), static_cast<int>(value.size()), SQLITE_TRANSIENT));
  }

  // true while rows remain.
  bool step() {
    int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw StoreError(sqlite3_errmsg(db_));
  }
  void reset() {
    sqlite3_reset(stmt_);
    sqlite3_clear_bindings(stmt_);
  }

  std::int64_t integer(int column) const { return sqlite3_column_int64(stmt_, column); }
  std::string text(int column) const {
    const auto* data = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, column));
    int size = sqlite3_column_bytes(stmt_, column);
    return data ? std::string(data, static_cast<std::size_t>(size)) : std::string();
  }

 private:
  void check(int rc) const {
    if (rc != SQLITE_OK) throw StoreError(std::string("bind: ") + sqlite3_errmsg(db_));
  }

  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

std::string utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t seconds = std::chrono::system_clock::to_time_t(now);
  auto millis = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&seconds, &tm);
  char buf[40];
  std::size_t n = std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%S", &tm);
  std::snprintf(buf + n, sizeof(buf) - n, ".%03dZ", static_cast<int>(millis));
  return buf;
}

// Rolls back unless committed.
class Transaction {
 public:
  explicit Transaction(sqlite3* db) : db_(db) { run("BEGIN IMMEDIATE"); }
  ~Transaction() {
    if (!done_) sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
  }
  void commit() {
    run("COMMIT");
    done_ = true;
  }

 private:
  void run(const char* sql) {
    char* message = nullptr;
    if (sqlite3_exec(db_, sql, nullptr, nullptr, &message) != SQLITE_OK) {
      std::string text = message ? message : "unknown error";
      sqlite3_free(message);
      throw StoreError(text);
    }
  }

  sqlite3* db_;
  bool done_ = false;
};

}  // namespace

void ResultsStore::Closer::operator()(sqlite3* db) const { sqlite3_close_v2(db); }

ResultsStore::~ResultsStore() = default;

void ResultsStore::exec(const char* sql) const {
  char* message = nullptr;
  if (sqlite3_exec(db_.get(), sql, nullptr, nullptr, &message) != SQLITE_OK) {
    std::string text = message ? message : sqlite3_errmsg(db_.get());
    sqlite3_free(message);
    throw StoreError(text);
  }
}

ResultsStore ResultsStore::open(const std::filesystem::path& path) {
  sqlite3* raw = nullptr;
  int rc = sqlite3_open_v2(path.c_str(), &raw, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr);
  if (rc != SQLITE_OK) {
    std::string message = raw ? sqlite3_errmsg(raw) : "out of memory";
    sqlite3_close_v2(raw);
    throw StoreError("cannot open store " + path.string() + ": " + message);
  }
  ResultsStore store(raw);
  sqlite3_busy_timeout(raw, 5000);
  try {
    store.exec("PRAGMA foreign_keys = ON");
    store.exec(kSchema);
  } catch (const StoreError& e) {
    throw StoreError("cannot open store " + path.string() + ": " + e.what());
  }
  return store;
}

namespace {

void insert_change(sqlite3* db, const ConfigChange& change, ChangeStatus status) {
  Statement stmt(db,
                 "INSERT INTO changes (change_id, change_name, action, change_value, status, created_at) "
                 "VALUES (?, ?, ?, ?, ?, ?)");
  stmt.bind(1, static_cast<std::int64_t>(change.id));
  stmt.bind(2, change.name);
  stmt.bind(3, std::string(to_string(change.action)));
  stmt.bind(4, render(change.value));
  stmt.bind(5, std::string(to_string(status)));
  stmt.bind(6, utc_now());
  try {
    stmt.step();
  } catch (const StoreError& e) {
    throw StoreError("change " + std::to_string(change.id) + ": " + e.what());
  }
}

void insert_results(sqlite3* db, std::uint64_t change_id, std::span<const TestResult> results) {
  {
    Statement exists(db, "SELECT 1 FROM changes WHERE change_id = ?");
    exists.bind(1, static_cast<std::int64_t>(change_id));
    if (!exists.step()) throw StoreError("unknown change id " + std::to_string(change_id));
  }
  Statement stmt(db, "INSERT INTO results (change_id, result_name, result_summary) VALUES (?, ?, ?)");
  for (const auto& result : results) {
    stmt.reset();
    stmt.bind(1, static_cast<std::int64_t>(change_id));
    stmt.bind(2, result.result_name);
    stmt.bind(3, result.result_summary);
    stmt.step();
  }
}

}  // namespace

std::uint64_t ResultsStore::record_change(const ConfigChange& change, ChangeStatus status) {
  insert_change(db_.get(), change, status);
  return change.id;
}

void ResultsStore::record_results(std::uint64_t change_id, std::span<const TestResult> results) {
  Transaction tx(db_.get());
  insert_results(db_.get(), change_id, results);
  tx.commit();
}

void ResultsStore::record_change_with_results(const ConfigChange& change, ChangeStatus status,
                                              std::span<const TestResult> results) {
  Transaction tx(db_.get());
  insert_change(db_.get(), change, status);
  insert_results(db_.get(), change.id, results);
  tx.commit();
}

std::vector<ChangeRecord> ResultsStore::changes() const {
  Statement stmt(db_.get(),
                 "SELECT change_id, change_name, action, change_value, status, created_at "
                 "FROM changes ORDER BY change_id");
  std::vector<ChangeRecord> rows;
  while (stmt.step()) {
    rows.push_back({static_cast<std::uint64_t>(stmt.integer(0)), stmt.text(1), stmt.text(2), stmt.text(3),
                    stmt.text(4), stmt.text(5)});
  }
  return rows;
}

std::vector<ResultRecord> ResultsStore::results() const {
  Statement stmt(db_.get(),
                 "SELECT result_id, change_id, result_name, result_summary FROM results ORDER BY result_id");
  std::vector<ResultRecord> rows;
  while (stmt.step()) {
    rows.push_back({stmt.integer(0), static_cast<std::uint64_t>(stmt.integer(1)), stmt.text(2), stmt.text(3)});
  }
  return rows;
}

std::size_t ResultsStore::orphan_result_count() const {
  Statement stmt(db_.get(),
                 "SELECT COUNT(*) FROM results r LEFT JOIN changes c ON r.change_id = c.change_id "
                 "WHERE c.change_id IS NULL");
  stmt.step();
  return static_cast<std::size_t>(stmt.integer(0));
}

std::string csv_cell(std::string_view text) {
  if (text.find_first_of(",\"\r\n[]") == std::string_view::npos) return std::string(text);
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string ResultsStore::export_csv() const {
  const auto change_rows = changes();
  const auto result_rows = results();

  std::vector<std::string> columns;
  std::map<std::string, std::size_t> column_of;
  // (change_id, column) -> summary; a later duplicate name overwrites.
  std::map<std::pair<std::uint64_t, std::size_t>, std::string> cells;
  for (const auto& row : result_rows) {
    auto [it, inserted] = column_of.emplace(row.result_name, columns.size());
    if (inserted) columns.push_back(row.result_name);
    cells[{row.change_id, it->second}] = row.result_summary;
  }

  std::string out = "changeName,changeResult";
  for (const auto& name : columns) out += "," + csv_cell(name);
  out += '\n';
  for (const auto& change : change_rows) {
    out += csv_cell(change.change_name);
    out += ',';
    out += csv_cell(change.change_value);
    for (std::size_t column = 0; column < columns.size(); ++column) {
      out += ',';
      auto it = cells.find({change.change_id, column});
      if (it != cells.end()) out += csv_cell(it->second);
    }
    out += '\n';
  }
  return out;
}

}  // namespace cfgfuzz
