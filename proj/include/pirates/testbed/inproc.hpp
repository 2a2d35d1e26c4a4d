#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pirates/nodes/node.hpp"
#include "pirates/testbed/artifacts.hpp"
#include "pirates/testbed/scenario.hpp"

namespace pirates::nodes {
class Coordinator;
class Relay;
class Worker;
}  // namespace pirates::nodes
namespace pirates::client {
class Client;
}

namespace pirates::testbed {

// Time only moves when every queue is empty and some node waits on a
// deadline.
class VirtualClock final : public nodes::Clock {
 public:
  std::int64_t now_us() const override { return now_; }
  void advance_to(std::int64_t t) {
    if (t > now_) now_ = t;
  }

 private:
  std::int64_t now_ = 1'000'000;
};

// Delivers frames between nodes in one thread, in global FIFO order, with
// the same HELLO-based peer naming as the TCP runtime.
class InProcessNetwork {
 public:
  explicit InProcessNetwork(VirtualClock& clock) : clock_(clock) {}

  // The node must outlive the network. `listen` is the endpoint other nodes
  // use to connect to it.
  void add(std::string name, nodes::Node& node, nodes::Recorder& rec, std::optional<wire::Endpoint> listen);

  // Runs until every node has finished. Returns false when it stalls or hits
  // the step limit; `problem` then says why.
  bool run(std::uint64_t max_steps = 50'000'000);
  const std::string& problem() const { return problem_; }

 private:
  struct Slot {
    std::string name;
    nodes::Node* node = nullptr;
    nodes::Recorder* rec = nullptr;
    std::map<nodes::PeerId, std::size_t> routes;  // peer label -> slot
    std::map<std::size_t, nodes::PeerId> labels;  // slot -> peer label
  };
  struct Pending {
    std::size_t from;
    std::size_t to;
    wire::Frame frame;
  };

  void apply(std::size_t from, nodes::Outbox& out);
  void deliver(Pending& p);

  VirtualClock& clock_;
  std::vector<Slot> slots_;
  std::map<std::pair<std::uint32_t, std::uint16_t>, std::size_t> endpoints_;
  std::deque<Pending> queue_;
  std::uint32_t next_conn_ = 1;
  std::string problem_;
};

struct InprocNodes {
  nodes::Coordinator* coordinator = nullptr;
  std::vector<nodes::Relay*> relays;
  std::vector<nodes::Worker*> workers;
  std::vector<client::Client*> clients;  // clients[k-1] is client k
};

// Coordinator, relays, workers and clients (in that order, so client k gets
// mailbox k) driven on a virtual clock. `inspect` sees the nodes after the
// run, before they are destroyed.
RunResult run_scenario_inproc(const Scenario& scenario,
                              const std::function<void(const InprocNodes&)>& inspect = {});

}  // namespace pirates::testbed
