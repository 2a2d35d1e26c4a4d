#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "pirates/nodes/node.hpp"
#include "pirates/testbed/latency.hpp"
#include "pirates/testbed/scenario.hpp"

namespace pirates::testbed {

struct NodeLog {
  std::string name;
  wire::Role role = wire::Role::Client;
  std::uint32_t index = 0;   // server index, or mailbox id for clients
  std::uint32_t client = 0;  // scenario client number; 0 for servers
  nodes::Recorder rec;
};

struct RunResult {
  Scenario scenario;
  std::vector<NodeLog> nodes;
  bool completed = false;
  std::vector<std::string> problems;

  const NodeLog* find(wire::Role role, std::uint32_t index) const;
  const NodeLog* client(std::uint32_t number) const;
};

// (direction, phase, message type, frame size) -> count.
using ShapeKey = std::tuple<std::string, std::string, std::string, std::uint64_t>;
using Shape = std::map<ShapeKey, std::uint64_t>;

Shape shape_of(const nodes::Recorder& rec);
// Keyed by node name, coordinator, relays and workers only.
std::map<std::string, Shape> server_shapes(const RunResult& run);
// Human-readable differences; empty when the server transcripts agree.
std::vector<std::string> compare_server_shapes(const RunResult& a, const RunResult& b);

struct CallCheck {
  std::uint64_t expected = 0;   // (receiver, sender, round) payloads due
  std::uint64_t recovered = 0;  // of those, delivered byte-exact
  std::uint64_t unexpected = 0; // outputs nobody should have produced
  std::uint64_t mixed_bad = 0;  // mixed outputs not matching the parts
  std::uint64_t decisions_wrong = 0;
  std::uint64_t call_attempts = 0;  // decisions that picked a group
  std::uint64_t fallbacks = 0;      // of those, with all-random selection
  std::vector<std::string> problems;

  bool ok() const { return recovered == expected && unexpected == 0 && mixed_bad == 0 && decisions_wrong == 0; }
  double fallback_rate() const {
    return call_attempts == 0 ? 0.0 : static_cast<double>(fallbacks) / static_cast<double>(call_attempts);
  }
};

// Recomputes, from the scenario alone, which call each client should join
// and which snippets it must hear, then compares against the logs.
// Selection fallbacks are read from the decision records.
CallCheck check_calls(const RunResult& run);

// One row per (epoch, round, receiver) that heard someone; values in ms.
std::vector<LatencyBreakdown> measure_breakdowns(const RunResult& run);

// logs/<node>.jsonl, breakdown.csv, transcript.csv, outputs.csv,
// decisions.csv and summary.json.
void write_run(const RunResult& run, const std::string& out_dir);
RunResult read_run_logs(const Scenario& scenario, const std::string& log_dir);

}  // namespace pirates::testbed
