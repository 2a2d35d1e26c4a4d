#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pirates/common/bytes.hpp"
#include "pirates/wire/frame.hpp"
#include "pirates/wire/messages.hpp"

namespace pirates::nodes {

using wire::Role;

// Peers not yet assigned an index carry kPendingBit plus a runtime-chosen
// connection number.
inline constexpr std::uint32_t kPendingBit = 0x80000000u;

struct PeerId {
  Role role = Role::Client;
  std::uint32_t index = 0;

  static PeerId coordinator() { return {Role::Coordinator, 0}; }
  static PeerId pending(Role role, std::uint32_t n) { return {role, kPendingBit | n}; }
  bool is_pending() const { return (index & kPendingBit) != 0; }
  std::string str() const;
  auto operator<=>(const PeerId&) const = default;
};

// Node time in microseconds on a monotonic clock. The in-process runtime
// substitutes a virtual clock.
class Clock {
 public:
  virtual ~Clock() = default;
  virtual std::int64_t now_us() const = 0;
};

class SteadyClock final : public Clock {
 public:
  std::int64_t now_us() const override;
};

// Wall-clock microseconds since the Unix epoch; used for cross-process
// timestamps embedded in frames.
std::int64_t wall_us();

class Outbox {
 public:
  struct Send {
    PeerId to;
    wire::Frame frame;
  };
  struct Connect {
    PeerId peer;
    wire::Endpoint endpoint;
  };
  struct Rebind {
    PeerId from;
    PeerId to;
  };
  using Action = std::variant<Send, Connect, Rebind>;

  void send(PeerId to, wire::Frame frame) { actions_.push_back(Send{to, std::move(frame)}); }
  void connect(PeerId peer, wire::Endpoint endpoint) { actions_.push_back(Connect{peer, endpoint}); }
  void rebind(PeerId from, PeerId to) { actions_.push_back(Rebind{from, to}); }

  std::vector<Action>& actions() { return actions_; }
  void clear() { actions_.clear(); }

 private:
  std::vector<Action> actions_;
};

enum class Phase : std::uint8_t { Registration, Mapping, Dialing, Communication, Teardown };
const char* to_string(Phase phase);
Phase phase_of(const wire::Frame& frame);

struct FrameRecord {
  bool outgoing = false;
  PeerId peer;
  wire::MessageType type = wire::MessageType::Hello;
  Phase phase = Phase::Registration;
  std::uint64_t size = 0;  // whole frame including the header
};

struct TimingRecord {
  std::string name;
  std::uint64_t epoch = 0;
  std::uint32_t round = 0;
  std::uint32_t subject = 0;  // mailbox id or server index
  std::int64_t value = 0;     // microseconds (durations) or wall timestamp
};

struct OutputRecord {
  std::uint64_t epoch = 0;
  std::uint32_t round = 0;
  std::uint32_t receiver = 0;
  std::uint32_t sender = 0;  // 0 for the mixed output
  Bytes payload;
};

struct DecisionRecord {
  std::uint64_t epoch = 0;
  std::uint32_t client = 0;
  std::string group;  // empty when not in a call
  bool dialed = false;
  bool all_random = false;
  std::vector<std::uint32_t> targets;
};

struct EventRecord {
  std::string name;
  std::string detail;
};

// Per-node log of everything a run produces. Not thread-safe; owned by the
// node's event loop.
class Recorder {
 public:
  void frame(bool outgoing, const PeerId& peer, const wire::Frame& f);
  void timing(std::string name, std::uint64_t epoch, std::uint32_t round, std::uint32_t subject,
              std::int64_t value);
  void output(OutputRecord r) { outputs.push_back(std::move(r)); }
  void decision(DecisionRecord r) { decisions.push_back(std::move(r)); }
  void event(std::string name, std::string detail = {}) {
    events.push_back({std::move(name), std::move(detail)});
  }

  // One JSON object per line.
  std::string to_jsonl(const std::string& node_name) const;
  void write_jsonl(const std::string& path, const std::string& node_name) const;
  // Inverse of to_jsonl; returns the node name found in the log.
  static std::string read_jsonl(const std::string& text, Recorder& into);

  std::vector<FrameRecord> frames;
  std::vector<TimingRecord> timings;
  std::vector<OutputRecord> outputs;
  std::vector<DecisionRecord> decisions;
  std::vector<EventRecord> events;
};

class Node {
 public:
  virtual ~Node() = default;

  virtual PeerId id() const = 0;
  // Initial actions (connect to the coordinator, say hello).
  virtual void start(Outbox&) {}
  virtual void on_frame(const PeerId& from, const wire::Frame& frame, Outbox& out) = 0;
  // Earliest time at which on_deadline wants to run.
  virtual std::optional<std::int64_t> deadline() const { return std::nullopt; }
  virtual void on_deadline(Outbox&) {}
  virtual bool finished() const = 0;
};

}  // namespace pirates::nodes
