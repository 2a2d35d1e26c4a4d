#include "pirates/testbed/snippet_search.hpp"

#include "pirates/common/errors.hpp"

namespace pirates::testbed {

SnippetSearchResult search_snippet(std::uint32_t from, std::uint32_t to, std::uint32_t step,
                                   const ProcessingProbe& probe) {
  if (from == 0 || step == 0 || to < from) throw Error(ErrorCode::InvalidArgument, "bad snippet range");
  SnippetSearchResult res;
  for (std::uint32_t ms = from; ms <= to; ms += step) {
    SnippetCandidate c;
    c.snippet_ms = ms;
    c.processing_ms = probe(ms);
    c.ratio = c.processing_ms / ms;
    c.feasible = c.ratio <= kFeasibleRatio;
    res.candidates.push_back(c);
    if (c.feasible && res.best_ms == 0) res.best_ms = ms;
  }
  if (res.best_ms == 0) throw Error(ErrorCode::NoFeasible, "no snippet length in range keeps up");
  return res;
}

}  // namespace pirates::testbed
