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
#include "server.hpp"

#include <poll.h>

#include <cstdio>
#include <iostream>
#include <optional>
#include <thread>

#include "change_generator.hpp"
#include "config_model.hpp"
#include "error.hpp"
#include "results_store.hpp"
#include "test_harness.hpp"

namespace cfgfuzz {

std::string push_log_line(const ConfigChange& change) {
  return "pushed name/value pair " + change.name + ":" + render(change.value);
}

namespace {

void stdout_log(const std::string& line) {
  std::fwrite(line.data(), 1, line.size(), stdout);
  std::fputc('\n', stdout);
  std::fflush(stdout);
}

// Runs the battery for one change off the socket thread.
class TestRun {
 public:
  TestRun(const Meta& meta, ConfigChange change, ChangeStatus status, WakePipe& wake)
      : change_(std::move(change)), status_(status) {
    thread_ = std::thread([this, &meta, &wake] {
      results_ = run_all_tests(meta.tests, meta.target, change_);
      wake.notify();
    });
  }
  ~TestRun() {
    if (thread_.joinable()) thread_.join();
  }

  void join() { thread_.join(); }
  const ConfigChange& change() const { return change_; }
  ChangeStatus status() const { return status_; }
  const std::vector<TestResult>& results() const { return results_; }

 private:
  ConfigChange change_;
  ChangeStatus status_;
  std::vector<TestResult> results_;
  std::thread thread_;
};

class Session {
 public:
  Session(const ConfigDefinition& def, ResultsStore& store, const ServerConfig& config)
      : def_(def), store_(store), config_(config), generator_(def) {
    for (const auto& warning : generator_.warnings()) std::cerr << "warning: " << warning << '\n';
  }

  CampaignStatus run(TcpListener& listener) {
    TcpStream client = accept_client(listener);
    std::optional<std::chrono::steady_clock::time_point> linger_until;

    while (true) {
      std::optional<Millis> wait;
      if (linger_until) {
        wait = std::chrono::duration_cast<Millis>(*linger_until - std::chrono::steady_clock::now());
        if (wait->count() <= 0) break;
      }
      pollfd fds[3] = {{client.fd(), POLLIN, 0}, {wake_.read_fd(), POLLIN, 0}, {listener.fd(), POLLIN, 0}};
      int rc = ::poll(fds, 3, wait ? static_cast<int>(wait->count()) : -1);
      if (rc < 0) {
        if (errno == EINTR) continue;
        throw NetworkError("poll failed");
      }
      if (fds[1].revents) {
        wake_.drain();
        finish_tests();
      }
      if (fds[2].revents) {
        // One client per campaign.
        try {
          listener.accept();
        } catch (const NetworkError&) {
        }
      }
      if (fds[0].revents) {
        bool alive = client.reader().fill();
        std::string line;
        while (status_.state != ServerState::Closed && client.reader().pop_line(line)) handle_line(client, line);
        if (!alive) {
          if (status_.state == ServerState::Exhausted) break;
          abort("client disconnected in state " + std::string(to_string(status_.state)));
        }
      }
      if (status_.state == ServerState::Exhausted && !linger_until) {
        linger_until = std::chrono::steady_clock::now() + config_.linger;
      }
    }
    return status_;
  }

 private:
  TcpStream accept_client(TcpListener& listener) {
    while (true) {
      pollfd fd{listener.fd(), POLLIN, 0};
      if (::poll(&fd, 1, -1) > 0) return listener.accept();
      if (errno != EINTR) throw NetworkError("poll failed");
    }
  }

  [[noreturn]] void abort(const std::string& reason) {
    status_.state = ServerState::Closed;
    throw ProtocolError(reason);
  }

  void step(TcpStream& client, const ServerEvent& event) {
    ServerContext context{!generator_.exhausted(), outstanding_ ? outstanding_->id : 0};
    ServerStep next = server_transition(status_.state, event, context);
    if (next.next == ServerState::Closed) abort(next.reason);

    if (next.action == ServerActionKind::Send) {
      switch (next.send) {
        case MessageType::HandshakeAck:
          client.send(encode(HandshakeAck{}));
          break;
        case MessageType::ConfigFulfillment: {
          outstanding_ = generator_.next();
          ++status_.changes_issued;
          client.send(encode(ConfigFulfillment{*outstanding_}));
          (config_.log ? config_.log : stdout_log)(push_log_line(*outstanding_));
          break;
        }
        case MessageType::ConfigTimeout:
          client.send(encode(ConfigTimeout{def_.meta.timeout_wait_ms}));
          break;
        case MessageType::ConfigExhaustion:
          client.send(encode(ConfigExhaustion{}));
          break;
        default:
          abort("server cannot send " + std::string(to_string(next.send)));
      }
    } else if (next.action == ServerActionKind::StartTests) {
      const auto& confirmation = std::get<ConfigConfirmation>(std::get<Message>(event));
      ++status_.changes_confirmed;
      tests_.emplace(def_.meta, *outstanding_, confirmation.status, wake_);
      outstanding_.reset();
    }
    status_.state = next.next;
  }

  void handle_line(TcpStream& client, const std::string& line) {
    Message message;
    try {
      message = decode(line);
    } catch (const ProtocolError& e) {
      abort(std::string("malformed message: ") + e.what());
    }
    step(client, message);
  }

  void finish_tests() {
    if (!tests_) return;
    tests_->join();
    store_.record_change_with_results(tests_->change(), tests_->status(), tests_->results());
    ++status_.results_recorded;
    tests_.reset();
    ServerContext context{!generator_.exhausted(), 0};
    ServerStep next = server_transition(status_.state, TestsFinished{}, context);
    if (next.next == ServerState::Closed) abort(next.reason);
    status_.state = next.next;
  }

  const ConfigDefinition& def_;
  ResultsStore& store_;
  const ServerConfig& config_;
  ChangeGenerator generator_;
  WakePipe wake_;
  std::optional<ConfigChange> outstanding_;
  std::optional<TestRun> tests_;
  CampaignStatus status_;
};

}  // namespace

CampaignStatus run_server(const ServerConfig& config) {
  ConfigDefinition def = load_definition(config.definition_path);
  auto violations = validate_definition(def);
  if (!violations.empty()) {
    std::string text = "invalid definition:";
    for (const auto& v : violations) text += "\n  " + to_string(v);
    throw DefinitionError(text);
  }
  ResultsStore store = ResultsStore::open(config.store_path);
  TcpListener listener = TcpListener::bind(config.bind_host, config.bind_port);
  if (config.on_listening) config.on_listening(listener.port());
  Session session(def, store, config);
  return session.run(listener);
}

}  // namespace cfgfuzz
