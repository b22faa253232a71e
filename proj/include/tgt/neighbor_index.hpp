#pragma once

#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tgt/edge_stream.hpp"

namespace tgt {

/// One past interaction of a node: who it touched and when.
struct NeighborEvent {
  node_id neighbor{0};
  timestamp ts{0};

  friend bool operator==(const NeighborEvent&, const NeighborEvent&) = default;
};

/// Per-node append-only interaction history, advanced in stream order by a
/// single writer. Queries are read-only and never see same-instant edges
/// (strict ts < t cutoff).
class NeighborIndex {
 public:
  explicit NeighborIndex(bool bidirectional = true)
      : bidirectional_(bidirectional) {}

  /// Records src->dst (and dst->src when bidirectional). Throws on
  /// out-of-order insertion.
  void update(const Edge& edge);

  /// Last min(m, available) interactions of u with ts < t, chronological.
  std::vector<NeighborEvent> recent_neighbors(node_id u, timestamp t,
                                              std::size_t m) const;

  /// Full history of u (chronological); unknown node yields empty.
  const std::vector<NeighborEvent>& history(node_id u) const;

 private:
  bool bidirectional_;
  timestamp last_ts_{-1};
  std::unordered_map<node_id, std::vector<NeighborEvent>> histories_;
};

/// All nodes reachable from u by a walk of exactly length k in the cumulative
/// undirected graph of edges with ts < t. Test oracle; k >= 1.
std::unordered_set<node_id> khop_bruteforce(const EdgeStream& stream,
                                            node_id u, timestamp t,
                                            std::size_t k);

}  // namespace tgt
