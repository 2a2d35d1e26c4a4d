#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pirates::testbed {

enum class DialMode { Pirates, Gaddra };
DialMode parse_dial_mode(const std::string& text);
const char* to_string(DialMode mode);

struct DialBenchResult {
  DialMode mode = DialMode::Pirates;
  std::uint32_t n = 0;
  std::uint32_t group = 0;
  std::uint32_t reps = 0;
  double mean_us = 0;
  double stddev_us = 0;
};

// Times invite processing for one client holding one group of size
// `group` against `n` received invites (one of them real), over `reps`
// repetitions with fresh corpora. Corpus construction is not timed.
DialBenchResult bench_dialing(std::uint32_t n, std::uint32_t group, DialMode mode, std::uint32_t reps,
                              std::uint64_t seed);

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 0;
};
LinearFit fit_linear(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace pirates::testbed
