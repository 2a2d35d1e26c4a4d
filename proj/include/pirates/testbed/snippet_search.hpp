#pragma once

#include <cstdint>
#include <functional>
#include <vector>

namespace pirates::testbed {

inline constexpr double kFeasibleRatio = 1.1;

struct SnippetCandidate {
  std::uint32_t snippet_ms = 0;
  double processing_ms = 0;  // mean worker processing time per round
  double ratio = 0;          // processing_ms / snippet_ms
  bool feasible = false;
};

struct SnippetSearchResult {
  std::vector<SnippetCandidate> candidates;
  std::uint32_t best_ms = 0;
};

// Returns mean processing milliseconds for a given snippet length.
using ProcessingProbe = std::function<double(std::uint32_t snippet_ms)>;

// Tries from..to in steps and reports the smallest length whose processing
// keeps up with the snippet rate. Throws NoFeasible when none does.
SnippetSearchResult search_snippet(std::uint32_t from, std::uint32_t to, std::uint32_t step,
                                   const ProcessingProbe& probe);

}  // namespace pirates::testbed
