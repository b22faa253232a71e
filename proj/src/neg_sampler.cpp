#include "tgt/neg_sampler.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <unordered_set>

#include "json.hpp"

namespace tgt {

NegativeSampler::NegativeSampler(const EdgeStream& stream, std::size_t n,
                                 std::uint64_t seed, bool global_pool)
    : stream_(stream), n_(n), seed_(seed), global_pool_(global_pool) {
  if (n == 0) throw std::invalid_argument("candidate count must be >= 1");
  if (!stream.has_split()) {
    throw std::invalid_argument("negative sampling requires a split");
  }
  std::unordered_map<node_id, std::set<node_id>> per_src;
  std::set<node_id> global;
  const auto& edges = stream.edges();
  for (std::size_t i = 0; i < stream.train_end(); ++i) {
    per_src[edges[i].src].insert(edges[i].dst);
    global.insert(edges[i].dst);
  }
  for (auto& [src, dsts] : per_src) {
    train_dsts_[src] = std::vector<node_id>(dsts.begin(), dsts.end());
  }
  global_dsts_.assign(global.begin(), global.end());
}

NegativeSet NegativeSampler::generate(const LinkQuery& query) const {
  const auto& map = stream_.node_map();
  const node_id lo = map.dst_id_begin();
  const node_id hi = map.dst_id_end();
  const auto space = static_cast<std::size_t>(hi - lo);
  if (space < n_ + 1) {
    throw std::invalid_argument(
        "destination space too small for requested candidate count");
  }

  SplitMix64 rng(mix_seed(seed_, query.query_id));

  NegativeSet out;
  out.query_id = query.query_id;
  out.seed = seed_;

  // historical half
  const std::size_t want_hist = (n_ + 1) / 2;
  std::vector<node_id> pool;
  if (global_pool_) {
    pool = global_dsts_;
  } else if (auto it = train_dsts_.find(query.src); it != train_dsts_.end()) {
    pool = it->second;
  }
  std::erase(pool, query.true_dst);
  // Fisher-Yates with the per-query stream, then take a prefix
  for (std::size_t i = pool.size(); i > 1; --i) {
    std::swap(pool[i - 1], pool[rng.below(i)]);
  }
  std::unordered_set<node_id> chosen;
  for (node_id d : pool) {
    if (out.candidates.size() >= want_hist) break;
    out.candidates.push_back(d);
    chosen.insert(d);
  }
  out.historical_count = out.candidates.size();

  // random fill
  while (out.candidates.size() < n_) {
    const node_id d = lo + static_cast<node_id>(rng.below(space));
    if (d == query.true_dst || chosen.count(d)) continue;
    out.candidates.push_back(d);
    chosen.insert(d);
  }
  return out;
}

void save_negatives(const std::vector<NegativeSet>& sets,
                    const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write negatives: " + path);
  for (const auto& s : sets) {
    nlohmann::ordered_json j;
    j["query_id"] = s.query_id;
    j["candidates"] = s.candidates;
    j["historical_count"] = s.historical_count;
    j["seed"] = s.seed;
    out << j.dump() << "\n";
  }
}

std::map<std::uint64_t, NegativeSet> load_fixed_negatives(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open negatives: " + path);
  std::map<std::uint64_t, NegativeSet> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      NegativeSet s;
      s.query_id = j.at("query_id").get<std::uint64_t>();
      s.candidates = j.at("candidates").get<std::vector<node_id>>();
      s.historical_count = j.at("historical_count").get<std::size_t>();
      s.seed = j.value("seed", std::uint64_t{0});
      out[s.query_id] = std::move(s);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("malformed negative record at line " +
                               std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace tgt
