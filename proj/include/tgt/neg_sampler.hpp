#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "tgt/edge_stream.hpp"

namespace tgt {

/// Deterministic counter-style generator (splitmix64). Each (seed, query_id)
/// pair opens an independent stream, so negative sets are reproducible
/// regardless of evaluation order.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) : state_(state) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  std::uint64_t below(std::uint64_t n) { return next() % n; }

 private:
  std::uint64_t state_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t query_id) {
  return SplitMix64(seed ^ (query_id * 0xd6e8feb86659fd93ULL)).next();
}

struct NegativeSet {
  std::uint64_t query_id{0};
  std::vector<node_id> candidates;
  std::size_t historical_count{0};
  std::uint64_t seed{0};
};

struct LinkQuery {
  std::uint64_t query_id{0};
  node_id src{0};
  node_id true_dst{0};
  timestamp ts{0};
};

/// Source-conditioned historical pool: distinct train destinations of the
/// query source, built once per stream.
class NegativeSampler {
 public:
  /// global_pool: draw historical candidates from all train destinations
  /// instead of conditioning on the query source.
  NegativeSampler(const EdgeStream& stream, std::size_t n, std::uint64_t seed,
                  bool global_pool = false);

  /// ceil(n/2) historical (train destinations of src, excluding true_dst)
  /// plus random fill from the destination space; shortfall filled randomly.
  NegativeSet generate(const LinkQuery& query) const;

  std::size_t candidate_count() const { return n_; }
  std::uint64_t seed() const { return seed_; }

 private:
  const EdgeStream& stream_;
  std::size_t n_;
  std::uint64_t seed_;
  bool global_pool_;
  // per-source sorted distinct train destinations
  std::unordered_map<node_id, std::vector<node_id>> train_dsts_;
  std::vector<node_id> global_dsts_;
};

/// JSONL: {"query_id": int, "candidates": [...], "historical_count": int,
/// "seed": int} per line.
void save_negatives(const std::vector<NegativeSet>& sets,
                    const std::string& path);
std::map<std::uint64_t, NegativeSet> load_fixed_negatives(
    const std::string& path);

}  // namespace tgt
