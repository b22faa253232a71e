#pragma once

#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tgt/client.hpp"
#include "tgt/edge_stream.hpp"
#include "tgt/neg_sampler.hpp"
#include "tgt/parser.hpp"
#include "tgt/prompt.hpp"

namespace tgt {

struct PredictionRecord {
  std::uint64_t query_id{0};
  node_id src{0};
  node_id true_dst{0};
  timestamp ts{0};
  std::string method;
  std::vector<node_id> ranked;
  NegativeSet candidates;
  double reciprocal_rank{0.0};
  ParseStatus parse_status{ParseStatus::kUnparseable};
  std::optional<std::string> error;
};

/// RR of true_dst within {true_dst} ∪ candidates: the ranked list is
/// filtered to that pool; position k of the positive gives 1/k, absence 0.
double reciprocal_rank(const std::vector<node_id>& ranked, node_id true_dst,
                       const NegativeSet& candidates);

inline constexpr timestamp kInfiniteWindow =
    std::numeric_limits<timestamp>::max();

/// Memorization baseline: predicts a pair iff it was seen before (infinite
/// variant) or within the last w time units (time-window variant).
class EdgeBank {
 public:
  enum class Variant { kInfinite, kTimeWindow };

  EdgeBank(Variant variant, timestamp window = kInfiniteWindow);

  void update(const Edge& edge);
  int score(node_id src, node_id dst, timestamp t) const;

  /// Binary scores give massive ties; the positive's rank is
  /// 1 + (#candidates scoring strictly higher) + (#ties)/2, in exact
  /// arithmetic, and the reciprocal of that rank is returned.
  double rank_rr(node_id src, node_id true_dst, const NegativeSet& candidates,
                 timestamp t) const;

 private:
  Variant variant_;
  timestamp window_;
  struct PairHash {
    std::size_t operator()(const std::pair<node_id, node_id>& p) const {
      return std::hash<std::uint64_t>{}(
          static_cast<std::uint64_t>(p.first) * 0x9e3779b97f4a7c15ULL ^
          static_cast<std::uint64_t>(p.second));
    }
  };
  std::unordered_map<std::pair<node_id, node_id>, timestamp, PairHash>
      last_seen_;
};

struct EvalConfig {
  PromptConfig prompt;
  EndpointConfig endpoint;
  std::size_t negatives{20};
  std::uint64_t seed{42};
  bool strict_hits1{false};
  bool bidirectional_neighbors{true};
  std::string method_label{"tgtalker"};
};

struct EvalResult {
  std::vector<PredictionRecord> records;
  double mrr{0.0};
  std::size_t error_count{0};
};

using FixedNegatives = std::map<std::uint64_t, NegativeSet>;

/// Streaming evaluation over the test split: per batch, build shared
/// background/examples at the batch's first timestamp, prompt, parse and
/// score every query, then fold the batch's edges into the index.
EvalResult run_eval(const EdgeStream& stream, const EvalConfig& config,
                    ChatClient& client, const NegativeSampler& sampler,
                    const FixedNegatives* fixed = nullptr);

/// Rebuilds the prompt bundles of the first `limit` test queries under the
/// same batch protocol as run_eval (deterministic given the same config).
std::vector<PromptBundle> rebuild_test_bundles(const EdgeStream& stream,
                                               const EvalConfig& config,
                                               std::size_t limit);

/// Same streaming protocol for the deterministic EdgeBank baselines.
EvalResult run_edgebank(const EdgeStream& stream, EdgeBank::Variant variant,
                        timestamp window, std::size_t batch_size,
                        const NegativeSampler& sampler,
                        const FixedNegatives* fixed = nullptr);

/// Window convention when none is given: the train split's duration.
timestamp default_tw_window(const EdgeStream& stream);

void save_records(const std::vector<PredictionRecord>& records,
                  const std::string& path);
std::vector<PredictionRecord> load_records(const std::string& path);

}  // namespace tgt
