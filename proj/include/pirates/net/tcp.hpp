#pragma once

#include <chrono>
#include <cstdint>

#include "pirates/common/bytes.hpp"
#include "pirates/wire/messages.hpp"

namespace pirates::net {

// Owning socket descriptor.
class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release();
  void close();
  void shutdown_write();
  void shutdown_both();

 private:
  int fd_ = -1;
};

// Binds and listens; port 0 picks an ephemeral port.
Socket listen_on(const wire::Endpoint& ep, wire::Endpoint* bound = nullptr);
// Retries until the deadline passes; throws IoError.
Socket connect_to(const wire::Endpoint& ep, std::chrono::milliseconds timeout = std::chrono::seconds(10));
// Returns an invalid socket when the listener was shut down.
Socket accept_from(const Socket& listener);

void send_all(const Socket& s, ByteView data);
// Returns 0 on orderly shutdown; throws IoError on failure.
std::size_t recv_some(const Socket& s, std::uint8_t* buf, std::size_t len);

}  // namespace pirates::net
