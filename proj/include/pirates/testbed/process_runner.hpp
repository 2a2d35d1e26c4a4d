#pragma once

#include <chrono>
#include <string>

#include "pirates/testbed/artifacts.hpp"
#include "pirates/testbed/scenario.hpp"

namespace pirates::testbed {

struct ProcessOptions {
  std::string bin_dir;  // holds coordinator, relay, worker and client
  std::string work_dir; // group files, port file and logs/ go here
  std::chrono::seconds timeout{300};
};

// Runs every node as its own process over loopback TCP and reads the logs
// back. Throws SpawnFailure when a binary cannot be started or the
// coordinator never reports its port.
RunResult run_scenario_processes(const Scenario& scenario, const ProcessOptions& options);

}  // namespace pirates::testbed
