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
#include "subprocess.hpp"

#include <fcntl.h>
#include <signal.h>
#include <spawn.h>
#include <sys/stat.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <thread>

#include "error.hpp"

extern char** environ;

namespace cfgfuzz {

std::string ExitStatus::describe() const {
  if (exited) return "exit " + std::to_string(code);
  return "signal " + std::to_string(signal);
}

bool is_executable(const std::string& path) {
  struct stat st {};
  return ::stat(path.c_str(), &st) == 0 && S_ISREG(st.st_mode) && ::access(path.c_str(), X_OK) == 0;
}

namespace {

ExitStatus decode_status(int raw) {
  ExitStatus status;
  if (WIFEXITED(raw)) {
    status.exited = true;
    status.code = WEXITSTATUS(raw);
  } else if (WIFSIGNALED(raw)) {
    status.signal = WTERMSIG(raw);
  }
  return status;
}

}  // namespace

Subprocess Subprocess::spawn(const std::vector<std::string>& argv) {
  if (argv.empty()) throw SpawnError("empty command line");
  const std::string& program = argv.front();
  if (program.find('/') != std::string::npos && !is_executable(program)) {
    throw SpawnError("not an executable file: " + program);
  }

  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) < 0) throw SpawnError(std::string("pipe: ") + std::strerror(errno));
  FileDescriptor in_read(in_pipe[0]);
  FileDescriptor in_write(in_pipe[1]);
  if (::pipe2(out_pipe, O_CLOEXEC) < 0) throw SpawnError(std::string("pipe: ") + std::strerror(errno));
  FileDescriptor out_read(out_pipe[0]);
  FileDescriptor out_write(out_pipe[1]);

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_read.get(), STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_write.get(), STDOUT_FILENO);

  // Children start with a clean signal state even if this thread blocks
  // signals (the mock-target CLI does).
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  sigset_t empty, defaults;
  sigemptyset(&empty);
  sigemptyset(&defaults);
  sigaddset(&defaults, SIGPIPE);
  sigaddset(&defaults, SIGINT);
  sigaddset(&defaults, SIGTERM);
  posix_spawnattr_setsigmask(&attr, &empty);
  posix_spawnattr_setsigdefault(&attr, &defaults);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETSIGMASK | POSIX_SPAWN_SETSIGDEF);

  std::vector<char*> raw;
  raw.reserve(argv.size() + 1);
  for (const auto& arg : argv) raw.push_back(const_cast<char*>(arg.c_str()));
  raw.push_back(nullptr);

  pid_t pid = -1;
  int rc = ::posix_spawnp(&pid, program.c_str(), &actions, &attr, raw.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  if (rc != 0) throw SpawnError("cannot start " + program + ": " + std::strerror(rc));

  Subprocess child;
  child.pid_ = pid;
  child.stdin_ = std::move(in_write);
  child.stdout_ = std::move(out_read);
  child.stdout_reader_.reset(child.stdout_.get());
  return child;
}

Subprocess::Subprocess(Subprocess&& other) noexcept
    : pid_(other.pid_),
      stdin_(std::move(other.stdin_)),
      stdout_(std::move(other.stdout_)),
      stdout_reader_(std::move(other.stdout_reader_)),
      status_(other.status_) {
  other.pid_ = -1;
}

Subprocess& Subprocess::operator=(Subprocess&& other) noexcept {
  if (this != &other) {
    if (running()) kill();
    pid_ = other.pid_;
    stdin_ = std::move(other.stdin_);
    stdout_ = std::move(other.stdout_);
    stdout_reader_ = std::move(other.stdout_reader_);
    status_ = other.status_;
    other.pid_ = -1;
  }
  return *this;
}

Subprocess::~Subprocess() {
  if (running()) kill();
}

std::optional<ExitStatus> Subprocess::wait(std::optional<Millis> timeout) {
  if (status_) return status_;
  if (pid_ <= 0) return std::nullopt;
  const auto deadline = std::chrono::steady_clock::now() + timeout.value_or(Millis{0});
  Millis backoff{1};
  while (true) {
    int raw = 0;
    pid_t rc = ::waitpid(pid_, &raw, timeout ? WNOHANG : 0);
    if (rc == pid_) {
      status_ = decode_status(raw);
      return status_;
    }
    if (rc < 0 && errno != EINTR) {
      // Already reaped elsewhere; report as unknown exit.
      status_ = ExitStatus{};
      return status_;
    }
    if (timeout && std::chrono::steady_clock::now() >= deadline) return std::nullopt;
    if (timeout) {
      std::this_thread::sleep_for(backoff);
      backoff = std::min(backoff * 2, Millis{20});
    }
  }
}

ExitStatus Subprocess::kill() {
  if (status_) return *status_;
  if (pid_ > 0) ::kill(pid_, SIGKILL);
  stdin_.reset();
  return wait().value_or(ExitStatus{});
}

}  // namespace cfgfuzz
