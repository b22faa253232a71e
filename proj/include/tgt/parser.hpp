#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgt/edge_stream.hpp"

namespace tgt {

enum class ParseStatus { kExactTemplate, kFallbackInteger, kUnparseable };

struct ParsedPrediction {
  std::uint64_t query_id{0};
  std::vector<node_id> ranked;  // deduplicated, best first
  ParseStatus status{ParseStatus::kUnparseable};
};

/// Half-open range of ids a prediction may name. For bipartite graphs this
/// is the destination partition, which keeps echoed timestamps from being
/// mistaken for node ids.
struct ValidIdRange {
  node_id begin{0};
  node_id end{0};

  bool contains(node_id v) const { return v >= begin && v < end; }
};

/// First tries the canonical "Destination Node' is <int>" template (tolerant
/// of quote-mark variants and surrounding prose); otherwise falls back to
/// every in-range integer in order of appearance.
ParsedPrediction parse_prediction(const std::string& text,
                                  const ValidIdRange& valid_ids);

const char* to_string(ParseStatus status);

}  // namespace tgt
