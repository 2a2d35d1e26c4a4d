#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <thread>

#include "pirates/net/tcp.hpp"
#include "pirates/nodes/node.hpp"

namespace pirates::net {

// Drives one node over TCP: a reader thread per connection feeds a single
// event loop, which alone touches node state and writes to sockets. The
// first frame on every connection is a HELLO naming the sender.
class TcpRuntime {
 public:
  struct Options {
    // Abort with DeadlineOverrun when the node is not finished by then
    // (0 = no limit).
    std::chrono::milliseconds max_duration{0};
    // How long to wait for peers to close after the node finished.
    std::chrono::milliseconds linger{2000};
  };

  TcpRuntime() = default;
  ~TcpRuntime();
  TcpRuntime(const TcpRuntime&) = delete;
  TcpRuntime& operator=(const TcpRuntime&) = delete;

  // Starts accepting connections; returns the bound endpoint.
  wire::Endpoint listen(const wire::Endpoint& ep);
  void run(nodes::Node& node, nodes::Recorder& rec, Options options);
  void run(nodes::Node& node, nodes::Recorder& rec) { run(node, rec, Options{}); }

 private:
  struct Conn {
    std::uint64_t id = 0;
    Socket sock;
    std::optional<nodes::PeerId> peer;
    std::thread reader;
    bool open = true;
  };
  struct Event {
    enum class Kind { Accepted, Frame, Closed };
    Kind kind = Kind::Frame;
    std::uint64_t conn = 0;
    Socket sock;
    wire::Frame frame;
    std::string detail;
  };

  void push(Event ev);
  Conn& add_conn(Socket sock, std::optional<nodes::PeerId> peer);
  void apply(nodes::Outbox& out, nodes::Recorder& rec);
  void handle(Event& ev, nodes::Node& node, nodes::Recorder& rec, nodes::Outbox& out);
  void stop_all();

  Socket listener_;
  std::thread acceptor_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<Event> queue_;
  std::uint64_t next_conn_ = 1;
  std::map<std::uint64_t, std::unique_ptr<Conn>> conns_;
  std::map<nodes::PeerId, std::uint64_t> routes_;
};

}  // namespace pirates::net
