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

#include <netinet/in.h>

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace cfgfuzz {

using Millis = std::chrono::milliseconds;

class FileDescriptor {
 public:
  FileDescriptor() = default;
  explicit FileDescriptor(int fd) : fd_(fd) {}
  FileDescriptor(FileDescriptor&& other) noexcept : fd_(other.release()) {}
  FileDescriptor& operator=(FileDescriptor&& other) noexcept;
  FileDescriptor(const FileDescriptor&) = delete;
  FileDescriptor& operator=(const FileDescriptor&) = delete;
  ~FileDescriptor() { reset(); }

  int get() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release();
  void reset(int fd = -1);

 private:
  int fd_ = -1;
};

enum class ReadStatus { Line, Timeout, Eof };

// Splits a byte stream into LF-terminated lines. The LF (and a preceding
// CR) is stripped. Does not own the descriptor.
class LineReader {
 public:
  static constexpr std::size_t kMaxLine = 1 << 20;

  explicit LineReader(int fd = -1) : fd_(fd) {}

  // Blocks until a full line, EOF, or the timeout (none = wait forever).
  ReadStatus read_line(std::string& line, std::optional<Millis> timeout = std::nullopt);

  // One read() of whatever is available; false once EOF was seen.
  bool fill();
  bool pop_line(std::string& line);
  bool eof() const { return eof_; }

  void reset(int fd) {
    fd_ = fd;
    buffer_.clear();
    eof_ = false;
  }

 private:
  int fd_;
  std::string buffer_;
  bool eof_ = false;
};

// IPv4 resolution; nullopt when the name does not resolve.
std::optional<sockaddr_in> resolve_ipv4(const std::string& host, std::uint16_t port);

// Writes everything or throws NetworkError. Never raises SIGPIPE.
void write_all(int fd, std::string_view data);

class TcpStream {
 public:
  TcpStream() = default;
  explicit TcpStream(FileDescriptor fd);

  // Throws NetworkError ("connection refused", "could not resolve", ...).
  static TcpStream connect(const std::string& host, std::uint16_t port, Millis timeout = Millis{5000});

  int fd() const { return fd_.get(); }
  bool valid() const { return fd_.valid(); }
  void send(std::string_view data) { write_all(fd_.get(), data); }
  ReadStatus read_line(std::string& line, std::optional<Millis> timeout = std::nullopt) {
    return reader_.read_line(line, timeout);
  }
  LineReader& reader() { return reader_; }
  void close() { fd_.reset(); }

 private:
  FileDescriptor fd_;
  LineReader reader_;
};

class TcpListener {
 public:
  // Throws NetworkError when the address is in use or invalid.
  static TcpListener bind(const std::string& host, std::uint16_t port);

  int fd() const { return fd_.get(); }
  std::uint16_t port() const { return port_; }
  TcpStream accept();

 private:
  FileDescriptor fd_;
  std::uint16_t port_ = 0;
};

// Self-pipe for waking a poll() loop from another thread.
class WakePipe {
 public:
  WakePipe();
  int read_fd() const { return read_.get(); }
  void notify();
  void drain();

 private:
  FileDescriptor read_;
  FileDescriptor write_;
};

}  // namespace cfgfuzz
