#include <limits>
#include <queue>
#include <vector>

#include "pirates/mapping/bucket_mapping.hpp"

namespace pirates::mapping {

// Hopcroft-Karp. Left vertices are targets, right vertices are buckets.
std::vector<int> max_bipartite_matching(const std::vector<std::vector<int>>& adjacency, int n_right) {
  constexpr int kInf = std::numeric_limits<int>::max();
  const int n_left = static_cast<int>(adjacency.size());
  std::vector<int> match_left(n_left, -1);
  std::vector<int> match_right(n_right, -1);
  std::vector<int> dist(n_left);

  auto bfs = [&] {
    std::queue<int> queue;
    bool found = false;
    for (int u = 0; u < n_left; ++u) {
      if (match_left[u] < 0) {
        dist[u] = 0;
        queue.push(u);
      } else {
        dist[u] = kInf;
      }
    }
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop();
      for (int v : adjacency[u]) {
        int w = match_right[v];
        if (w < 0) {
          found = true;
        } else if (dist[w] == kInf) {
          dist[w] = dist[u] + 1;
          queue.push(w);
        }
      }
    }
    return found;
  };

  auto dfs = [&](auto&& self, int u) -> bool {
    for (int v : adjacency[u]) {
      int w = match_right[v];
      if (w < 0 || (dist[w] == dist[u] + 1 && self(self, w))) {
        match_left[u] = v;
        match_right[v] = u;
        return true;
      }
    }
    dist[u] = kInf;
    return false;
  };

  while (bfs()) {
    for (int u = 0; u < n_left; ++u) {
      if (match_left[u] < 0) dfs(dfs, u);
    }
  }
  return match_left;
}

}  // namespace pirates::mapping
