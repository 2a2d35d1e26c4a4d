#pragma once

#include <string>
#include <vector>

#include "pirates/testbed/dialing_bench.hpp"
#include "pirates/testbed/latency.hpp"
#include "pirates/testbed/scalability.hpp"

namespace pirates::testbed {

struct RunResult;

// All writers throw IoError when the file cannot be written.
void write_breakdown_csv(const std::string& path, const std::vector<LatencyBreakdown>& rows);
// node, dir, phase, type, size, count
void write_transcript_csv(const std::string& path, const RunResult& run);
void write_outputs_csv(const std::string& path, const RunResult& run);
void write_decisions_csv(const std::string& path, const RunResult& run);
void write_scalability_csv(const std::string& path, const std::vector<ScalabilityRow>& rows);
void write_dialing_csv(const std::string& path, const std::vector<DialBenchResult>& rows);

}  // namespace pirates::testbed
