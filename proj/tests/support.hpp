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

// Shared helpers for the unit and acceptance binaries.

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "net.hpp"
#include "subprocess.hpp"

namespace cfgfuzz::testing {

inline std::string fixture_path(const std::string& name) { return std::string(FIXTURES_DIR) + "/" + name; }

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

class TempDir {
 public:
  TempDir() {
    std::string pattern = (std::filesystem::temp_directory_path() / "cfgfuzz-XXXXXX").string();
    std::vector<char> buffer(pattern.begin(), pattern.end());
    buffer.push_back('\0');
    if (::mkdtemp(buffer.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = buffer.data();
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// A loopback port that was free a moment ago.
inline std::uint16_t free_port() {
  int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  addr.sin_port = 0;
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr));
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

// First port of `count` consecutive loopback ports that were all free a
// moment ago.
inline std::uint16_t free_port_block(int count, std::uint32_t seed = 1) {
  std::uint32_t state = seed * 2654435761u + 12345u;
  for (int attempt = 0; attempt < 200; ++attempt) {
    state = state * 1103515245u + 12345u;
    auto base = static_cast<std::uint16_t>(20000 + (state >> 8) % 30000);
    std::vector<TcpListener> held;
    try {
      for (int i = 0; i < count; ++i) held.push_back(TcpListener::bind("127.0.0.1", static_cast<std::uint16_t>(base + i)));
      return base;
    } catch (const std::exception&) {
    }
  }
  throw std::runtime_error("no free port block");
}

inline bool wait_for_port(std::uint16_t port, Millis timeout = Millis{5000}) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (std::chrono::steady_clock::now() < deadline) {
    try {
      TcpStream::connect("127.0.0.1", port, Millis{200});
      return true;
    } catch (const std::exception&) {
      std::this_thread::sleep_for(Millis{10});
    }
  }
  return false;
}

// Waits for an IPv4 socket in LISTEN state on `port`, read from
// /proc/net/tcp. The server treats its first connection as the campaign
// client, so connecting to find out would end the campaign.
inline bool wait_for_listener(std::uint16_t port, Millis timeout = Millis{5000}) {
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  char wanted[8];
  std::snprintf(wanted, sizeof(wanted), ":%04X", port);
  while (std::chrono::steady_clock::now() < deadline) {
    std::ifstream table("/proc/net/tcp");
    std::string line;
    std::getline(table, line);
    while (std::getline(table, line)) {
      std::istringstream fields(line);
      std::string slot, local, remote, state;
      fields >> slot >> local >> remote >> state;
      if (state == "0A" && local.size() >= 5 && local.compare(local.size() - 5, 5, wanted) == 0) return true;
    }
    std::this_thread::sleep_for(Millis{10});
  }
  return false;
}

struct CommandResult {
  int exit_code = -1;
  std::string out;
};

// Runs to completion, collecting stdout. Killed after `timeout`.
inline CommandResult run_command(const std::vector<std::string>& argv, Millis timeout = Millis{60000}) {
  auto child = Subprocess::spawn(argv);
  child.close_stdin();
  CommandResult result;
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  std::string line;
  while (true) {
    auto remaining = std::chrono::duration_cast<Millis>(deadline - std::chrono::steady_clock::now());
    if (remaining.count() <= 0) {
      child.kill();
      return result;
    }
    auto status = child.read_line(line, remaining);
    if (status != ReadStatus::Line) break;
    result.out += line + "\n";
  }
  auto exit = child.wait(std::max(Millis{0}, std::chrono::duration_cast<Millis>(
                                                  deadline - std::chrono::steady_clock::now())));
  if (!exit) {
    child.kill();
    return result;
  }
  result.exit_code = exit->exited ? exit->code : 128 + exit->signal;
  return result;
}

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string line;
  std::istringstream in(text);
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

}  // namespace cfgfuzz::testing
