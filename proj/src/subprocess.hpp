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

#include <sys/types.h>

#include <optional>
#include <string>
#include <vector>

#include "net.hpp"

namespace cfgfuzz {

struct ExitStatus {
  bool exited = false;  // false: killed by `signal`
  int code = 0;
  int signal = 0;

  bool success() const { return exited && code == 0; }
  std::string describe() const;
};

// Child process with its stdin and stdout connected to pipes; stderr is
// inherited. The destructor kills and reaps a child that is still running.
class Subprocess {
 public:
  // argv[0] is resolved through PATH when it has no slash. Throws
  // SpawnError when the program cannot be started.
  static Subprocess spawn(const std::vector<std::string>& argv);

  Subprocess() = default;
  Subprocess(Subprocess&& other) noexcept;
  Subprocess& operator=(Subprocess&& other) noexcept;
  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;
  ~Subprocess();

  pid_t pid() const { return pid_; }
  bool running() const { return pid_ > 0 && !status_; }

  // Throws NetworkError (EPIPE) when the child stopped reading.
  void write(std::string_view data) { write_all(stdin_.get(), data); }
  void close_stdin() { stdin_.reset(); }
  ReadStatus read_line(std::string& line, std::optional<Millis> timeout = std::nullopt) {
    return stdout_reader_.read_line(line, timeout);
  }

  // Waits up to `timeout` (forever when absent); nullopt if still running.
  std::optional<ExitStatus> wait(std::optional<Millis> timeout = std::nullopt);
  // SIGKILL and reap.
  ExitStatus kill();

 private:
  pid_t pid_ = -1;
  FileDescriptor stdin_;
  FileDescriptor stdout_;
  LineReader stdout_reader_;
  std::optional<ExitStatus> status_;
};

// Executable check used before spawning.
bool is_executable(const std::string& path);

}  // namespace cfgfuzz
