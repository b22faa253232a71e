#include "tgt/neighbor_index.hpp"

#include <algorithm>
#include <stdexcept>

namespace tgt {

void NeighborIndex::update(const Edge& edge) {
  if (edge.ts < last_ts_) {
    throw std::invalid_argument("out-of-order insertion into NeighborIndex");
  }
  last_ts_ = edge.ts;
  histories_[edge.src].push_back({edge.dst, edge.ts});
  if (bidirectional_) histories_[edge.dst].push_back({edge.src, edge.ts});
}

std::vector<NeighborEvent> NeighborIndex::recent_neighbors(
    node_id u, timestamp t, std::size_t m) const {
  auto it = histories_.find(u);
  if (it == histories_.end() || m == 0) return {};
  const auto& hist = it->second;
  // first entry with ts >= t
  auto end = std::lower_bound(
      hist.begin(), hist.end(), t,
      [](const NeighborEvent& e, timestamp v) { return e.ts < v; });
  const auto available = static_cast<std::size_t>(end - hist.begin());
  const auto take = std::min(m, available);
  return std::vector<NeighborEvent>(end - static_cast<std::ptrdiff_t>(take),
                                    end);
}

const std::vector<NeighborEvent>& NeighborIndex::history(node_id u) const {
  static const std::vector<NeighborEvent> empty;
  auto it = histories_.find(u);
  return it == histories_.end() ? empty : it->second;
}

std::unordered_set<node_id> khop_bruteforce(const EdgeStream& stream,
                                            node_id u, timestamp t,
                                            std::size_t k) {
  if (k == 0) throw std::invalid_argument("k must be >= 1");

  std::unordered_map<node_id, std::unordered_set<node_id>> adj;
  for (const auto& e : stream.edges()) {
    if (e.ts >= t) break;
    adj[e.src].insert(e.dst);
    adj[e.dst].insert(e.src);
  }

  std::unordered_set<node_id> frontier{u};
  for (std::size_t step = 0; step < k; ++step) {
    std::unordered_set<node_id> next;
    for (node_id v : frontier) {
      auto it = adj.find(v);
      if (it == adj.end()) continue;
      next.insert(it->second.begin(), it->second.end());
    }
    frontier = std::move(next);
    if (frontier.empty()) break;
  }
  return frontier;
}

}  // namespace tgt
