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
#include "net.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <signal.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "error.hpp"

namespace cfgfuzz {

FileDescriptor& FileDescriptor::operator=(FileDescriptor&& other) noexcept {
  if (this != &other) reset(other.release());
  return *this;
}

int FileDescriptor::release() {
  int fd = fd_;
  fd_ = -1;
  return fd;
}

void FileDescriptor::reset(int fd) {
  if (fd_ >= 0) ::close(fd_);
  fd_ = fd;
}

namespace {

std::string errno_text(int err) { return std::strerror(err); }

int poll_one(int fd, short events, std::optional<Millis> timeout) {
  pollfd p{fd, events, 0};
  int ms = timeout ? static_cast<int>(std::max<Millis::rep>(0, timeout->count())) : -1;
  while (true) {
    int rc = ::poll(&p, 1, ms);
    if (rc >= 0) return rc;
    if (errno != EINTR) throw NetworkError("poll: " + errno_text(errno));
  }
}

}  // namespace

bool LineReader::fill() {
  if (eof_) return false;
  char chunk[4096];
  while (true) {
    ssize_t n = ::read(fd_, chunk, sizeof(chunk));
    if (n > 0) {
      buffer_.append(chunk, static_cast<std::size_t>(n));
      if (buffer_.size() > kMaxLine && buffer_.find('\n') == std::string::npos) {
        throw NetworkError("line exceeds " + std::to_string(kMaxLine) + " bytes");
      }
      return true;
    }
    if (n == 0) {
      eof_ = true;
      return false;
    }
    if (errno == EINTR) continue;
    if (errno == EAGAIN || errno == EWOULDBLOCK) return true;
    if (errno == ECONNRESET) {
      eof_ = true;
      return false;
    }
    throw NetworkError("read: " + errno_text(errno));
  }
}

bool LineReader::pop_line(std::string& line) {
  auto newline = buffer_.find('\n');
  if (newline == std::string::npos) return false;
  line.assign(buffer_, 0, newline);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  buffer_.erase(0, newline + 1);
  return true;
}

ReadStatus LineReader::read_line(std::string& line, std::optional<Millis> timeout) {
  const auto deadline = timeout ? std::optional(std::chrono::steady_clock::now() + *timeout) : std::nullopt;
  while (true) {
    if (pop_line(line)) return ReadStatus::Line;
    if (eof_) return ReadStatus::Eof;
    std::optional<Millis> remaining;
    if (deadline) {
      remaining = std::chrono::duration_cast<Millis>(*deadline - std::chrono::steady_clock::now());
      if (remaining->count() <= 0) return ReadStatus::Timeout;
    }
    if (poll_one(fd_, POLLIN, remaining) == 0) continue;
    fill();
  }
}

std::optional<sockaddr_in> resolve_ipv4(const std::string& host, std::uint16_t port) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (::getaddrinfo(host.c_str(), nullptr, &hints, &found) != 0 || found == nullptr) {
    return std::nullopt;
  }
  sockaddr_in addr{};
  std::memcpy(&addr, found->ai_addr, sizeof(addr));
  ::freeaddrinfo(found);
  addr.sin_port = htons(port);
  return addr;
}

void write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0 && errno == ENOTSOCK) {
      // Pipes: block SIGPIPE for this thread and swallow any that is raised.
      sigset_t pipe_set, old_set;
      sigemptyset(&pipe_set);
      sigaddset(&pipe_set, SIGPIPE);
      pthread_sigmask(SIG_BLOCK, &pipe_set, &old_set);
      n = ::write(fd, data.data(), data.size());
      int saved = errno;
      if (n < 0 && saved == EPIPE) {
        timespec zero{0, 0};
        while (sigtimedwait(&pipe_set, nullptr, &zero) > 0) {
        }
      }
      pthread_sigmask(SIG_SETMASK, &old_set, nullptr);
      errno = saved;
    }
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN) {
        poll_one(fd, POLLOUT, Millis{1000});
        continue;
      }
      throw NetworkError("write: " + errno_text(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

TcpStream::TcpStream(FileDescriptor fd) : fd_(std::move(fd)), reader_(fd_.get()) {}

TcpStream TcpStream::connect(const std::string& host, std::uint16_t port, Millis timeout) {
  auto addr = resolve_ipv4(host, port);
  if (!addr) throw NetworkError("could not resolve " + host);

  FileDescriptor fd(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC | SOCK_NONBLOCK, 0));
  if (!fd.valid()) throw NetworkError("socket: " + errno_text(errno));

  int rc = ::connect(fd.get(), reinterpret_cast<const sockaddr*>(&*addr), sizeof(*addr));
  if (rc < 0 && errno != EINPROGRESS) {
    throw NetworkError(errno == ECONNREFUSED ? "connection refused" : "connect: " + errno_text(errno));
  }
  if (rc < 0) {
    if (poll_one(fd.get(), POLLOUT, timeout) == 0) throw NetworkError("connect timed out");
    int err = 0;
    socklen_t len = sizeof(err);
    ::getsockopt(fd.get(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) {
      throw NetworkError(err == ECONNREFUSED ? "connection refused" : "connect: " + errno_text(err));
    }
  }
  int flags = ::fcntl(fd.get(), F_GETFL);
  ::fcntl(fd.get(), F_SETFL, flags & ~O_NONBLOCK);
  int one = 1;
  ::setsockopt(fd.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return TcpStream(std::move(fd));
}

TcpListener TcpListener::bind(const std::string& host, std::uint16_t port) {
  auto addr = resolve_ipv4(host, port);
  if (!addr) throw NetworkError("could not resolve " + host);

  TcpListener listener;
  listener.fd_.reset(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!listener.fd_.valid()) throw NetworkError("socket: " + errno_text(errno));
  int one = 1;
  ::setsockopt(listener.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (::bind(listener.fd(), reinterpret_cast<const sockaddr*>(&*addr), sizeof(*addr)) < 0) {
    throw NetworkError("bind " + host + ":" + std::to_string(port) + ": " + errno_text(errno));
  }
  if (::listen(listener.fd(), 16) < 0) throw NetworkError("listen: " + errno_text(errno));

  sockaddr_in bound{};
  socklen_t len = sizeof(bound);
  ::getsockname(listener.fd(), reinterpret_cast<sockaddr*>(&bound), &len);
  listener.port_ = ntohs(bound.sin_port);
  return listener;
}

TcpStream TcpListener::accept() {
  while (true) {
    int fd = ::accept4(fd_.get(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd >= 0) {
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      return TcpStream(FileDescriptor(fd));
    }
    if (errno != EINTR && errno != ECONNABORTED) throw NetworkError("accept: " + errno_text(errno));
  }
}

WakePipe::WakePipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC | O_NONBLOCK) < 0) throw Error("pipe: " + errno_text(errno));
  read_.reset(fds[0]);
  write_.reset(fds[1]);
}

void WakePipe::notify() {
  char byte = 1;
  while (::write(write_.get(), &byte, 1) < 0 && errno == EINTR) {
  }
}

void WakePipe::drain() {
  char buf[64];
  while (::read(read_.get(), buf, sizeof(buf)) > 0) {
  }
}

}  // namespace cfgfuzz
