#include "tgt/eval.hpp"

#include <algorithm>
#include <fstream>
#include <unordered_set>

#include "json.hpp"

#include "tgt/neighbor_index.hpp"

namespace tgt {

double reciprocal_rank(const std::vector<node_id>& ranked, node_id true_dst,
                       const NegativeSet& candidates) {
  std::unordered_set<node_id> pool(candidates.candidates.begin(),
                                   candidates.candidates.end());
  pool.insert(true_dst);
  std::size_t position = 0;
  for (node_id id : ranked) {
    if (!pool.count(id)) continue;
    ++position;
    if (id == true_dst) return 1.0 / static_cast<double>(position);
  }
  return 0.0;
}

EdgeBank::EdgeBank(Variant variant, timestamp window)
    : variant_(variant), window_(window) {
  if (variant_ == Variant::kTimeWindow && window_ <= 0) {
    throw std::invalid_argument("time window must be positive");
  }
}

void EdgeBank::update(const Edge& edge) {
  auto [it, inserted] =
      last_seen_.try_emplace({edge.src, edge.dst}, edge.ts);
  if (!inserted) it->second = std::max(it->second, edge.ts);
}

int EdgeBank::score(node_id src, node_id dst, timestamp t) const {
  auto it = last_seen_.find({src, dst});
  if (it == last_seen_.end()) return 0;
  if (variant_ == Variant::kInfinite || window_ == kInfiniteWindow) return 1;
  return (t - it->second) < window_ ? 1 : 0;
}

double EdgeBank::rank_rr(node_id src, node_id true_dst,
                         const NegativeSet& candidates, timestamp t) const {
  const int pos_score = score(src, true_dst, t);
  std::size_t higher = 0;
  std::size_t ties = 0;
  for (node_id d : candidates.candidates) {
    const int s = score(src, d, t);
    if (s > pos_score) ++higher;
    else if (s == pos_score) ++ties;
  }
  const double rank = 1.0 + static_cast<double>(higher) +
                      static_cast<double>(ties) / 2.0;
  return 1.0 / rank;
}

timestamp default_tw_window(const EdgeStream& stream) {
  if (stream.train_end() == 0) return kInfiniteWindow;
  const auto& edges = stream.edges();
  const timestamp span =
      edges[stream.train_end() - 1].ts - edges.front().ts;
  return span > 0 ? span : 1;
}

namespace {

NegativeSet negatives_for(const NegativeSampler& sampler,
                          const FixedNegatives* fixed, const LinkQuery& q) {
  if (fixed) {
    auto it = fixed->find(q.query_id);
    if (it != fixed->end()) return it->second;
  }
  return sampler.generate(q);
}

double score_ranked(const std::vector<node_id>& ranked, node_id true_dst,
                    const NegativeSet& negs, bool strict_hits1) {
  if (strict_hits1) {
    return (!ranked.empty() && ranked.front() == true_dst) ? 1.0 : 0.0;
  }
  return reciprocal_rank(ranked, true_dst, negs);
}

// Shared context is computed once at the batch's first timestamp and reused
// by every query in the batch.
std::vector<PromptBundle> make_batch_bundles(const EdgeStream& stream,
                                             const EvalConfig& config,
                                             const NeighborIndex& index,
                                             std::size_t batch_start,
                                             std::size_t batch_end,
                                             std::size_t test_begin) {
  const auto& edges = stream.edges();
  const timestamp t0 = edges[batch_start].ts;

  const auto bg = config.prompt.include_background
                      ? background_edges(stream, t0,
                                         config.prompt.background_size)
                      : std::vector<Edge>{};
  const std::string examples =
      config.prompt.include_examples
          ? build_examples(stream, index, t0, config.prompt.shots,
                           config.prompt.neighbors)
          : "";

  std::vector<PromptBundle> bundles;
  bundles.reserve(batch_end - batch_start);
  for (std::size_t i = batch_start; i < batch_end; ++i) {
    const std::uint64_t qid = i - test_begin;
    const std::size_t m =
        config.prompt.include_neighbors ? config.prompt.neighbors : 0;
    const std::string query = encode_query(index, edges[i].src, edges[i].ts, m);
    bundles.push_back(assemble(config.prompt, qid, bg, examples, query));
  }
  return bundles;
}

}  // namespace

std::vector<PromptBundle> rebuild_test_bundles(const EdgeStream& stream,
                                               const EvalConfig& config,
                                               std::size_t limit) {
  if (!stream.has_split() || stream.test_size() == 0) {
    throw std::invalid_argument("stream has no test split");
  }
  const auto& edges = stream.edges();
  const std::size_t test_begin = stream.val_end();
  NeighborIndex index(config.bidirectional_neighbors);
  for (std::size_t i = 0; i < test_begin; ++i) index.update(edges[i]);

  std::vector<PromptBundle> out;
  const std::size_t batch_size =
      std::max<std::size_t>(config.prompt.batch_size, 1);
  for (std::size_t batch_start = test_begin;
       batch_start < edges.size() && out.size() < limit;
       batch_start += batch_size) {
    const std::size_t batch_end =
        std::min(batch_start + batch_size, edges.size());
    auto bundles = make_batch_bundles(stream, config, index, batch_start,
                                      batch_end, test_begin);
    for (auto& b : bundles) {
      if (out.size() >= limit) break;
      out.push_back(std::move(b));
    }
    for (std::size_t i = batch_start; i < batch_end; ++i) {
      index.update(edges[i]);
    }
  }
  return out;
}

EvalResult run_eval(const EdgeStream& stream, const EvalConfig& config,
                    ChatClient& client, const NegativeSampler& sampler,
                    const FixedNegatives* fixed) {
  if (!stream.has_split() || stream.test_size() == 0) {
    throw std::invalid_argument("run_eval requires a non-empty test split");
  }
  const auto& edges = stream.edges();
  const std::size_t test_begin = stream.val_end();

  NeighborIndex index(config.bidirectional_neighbors);
  for (std::size_t i = 0; i < test_begin; ++i) index.update(edges[i]);

  const ValidIdRange valid{stream.node_map().dst_id_begin(),
                           stream.node_map().dst_id_end()};

  EvalResult result;
  result.records.reserve(stream.test_size());

  const std::size_t batch_size = std::max<std::size_t>(config.prompt.batch_size, 1);
  for (std::size_t batch_start = test_begin; batch_start < edges.size();
       batch_start += batch_size) {
    const std::size_t batch_end =
        std::min(batch_start + batch_size, edges.size());
    const auto bundles = make_batch_bundles(stream, config, index, batch_start,
                                            batch_end, test_begin);
    const auto completions = complete_batch(config.endpoint, client, bundles);

    for (std::size_t i = batch_start; i < batch_end; ++i) {
      const auto& completion = completions[i - batch_start];
      const Edge& e = edges[i];
      PredictionRecord rec;
      rec.query_id = i - test_begin;
      rec.src = e.src;
      rec.true_dst = e.dst;
      rec.ts = e.ts;
      rec.method = config.method_label;
      rec.candidates = negatives_for(
          sampler, fixed, {rec.query_id, e.src, e.dst, e.ts});
      if (completion.error) {
        rec.error = completion.error;
        rec.reciprocal_rank = 0.0;
        ++result.error_count;
      } else {
        const auto parsed = parse_prediction(completion.text, valid);
        rec.ranked = parsed.ranked;
        rec.parse_status = parsed.status;
        rec.reciprocal_rank = score_ranked(rec.ranked, e.dst, rec.candidates,
                                           config.strict_hits1);
      }
      result.records.push_back(std::move(rec));
    }

    // streaming update happens strictly after the batch is scored
    for (std::size_t i = batch_start; i < batch_end; ++i) {
      index.update(edges[i]);
    }
  }

  double sum = 0.0;
  for (const auto& r : result.records) sum += r.reciprocal_rank;
  result.mrr = result.records.empty()
                   ? 0.0
                   : sum / static_cast<double>(result.records.size());
  return result;
}

EvalResult run_edgebank(const EdgeStream& stream, EdgeBank::Variant variant,
                        timestamp window, std::size_t batch_size,
                        const NegativeSampler& sampler,
                        const FixedNegatives* fixed) {
  if (!stream.has_split() || stream.test_size() == 0) {
    throw std::invalid_argument("run_edgebank requires a non-empty test split");
  }
  const auto& edges = stream.edges();
  const std::size_t test_begin = stream.val_end();

  EdgeBank bank(variant, window);
  for (std::size_t i = 0; i < test_begin; ++i) bank.update(edges[i]);

  EvalResult result;
  result.records.reserve(stream.test_size());
  batch_size = std::max<std::size_t>(batch_size, 1);

  for (std::size_t batch_start = test_begin; batch_start < edges.size();
       batch_start += batch_size) {
    const std::size_t batch_end =
        std::min(batch_start + batch_size, edges.size());
    for (std::size_t i = batch_start; i < batch_end; ++i) {
      const Edge& e = edges[i];
      PredictionRecord rec;
      rec.query_id = i - test_begin;
      rec.src = e.src;
      rec.true_dst = e.dst;
      rec.ts = e.ts;
      rec.method = variant == EdgeBank::Variant::kInfinite ? "edgebank_inf"
                                                           : "edgebank_tw";
      rec.candidates = negatives_for(
          sampler, fixed, {rec.query_id, e.src, e.dst, e.ts});
      rec.reciprocal_rank = bank.rank_rr(e.src, e.dst, rec.candidates, e.ts);
      result.records.push_back(std::move(rec));
    }
    for (std::size_t i = batch_start; i < batch_end; ++i) bank.update(edges[i]);
  }

  double sum = 0.0;
  for (const auto& r : result.records) sum += r.reciprocal_rank;
  result.mrr = result.records.empty()
                   ? 0.0
                   : sum / static_cast<double>(result.records.size());
  return result;
}

void save_records(const std::vector<PredictionRecord>& records,
                  const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write records: " + path);
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["query_id"] = r.query_id;
    j["src"] = r.src;
    j["true_dst"] = r.true_dst;
    j["ts"] = r.ts;
    j["method"] = r.method;
    j["ranked"] = r.ranked;
    j["candidates"] = r.candidates.candidates;
    j["historical_count"] = r.candidates.historical_count;
    j["reciprocal_rank"] = r.reciprocal_rank;
    j["parse_status"] = to_string(r.parse_status);
    if (r.error) j["error"] = *r.error;
    out << j.dump() << "\n";
  }
}

std::vector<PredictionRecord> load_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open records: " + path);
  std::vector<PredictionRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    PredictionRecord r;
    r.query_id = j.at("query_id").get<std::uint64_t>();
    r.src = j.at("src").get<node_id>();
    r.true_dst = j.at("true_dst").get<node_id>();
    r.ts = j.at("ts").get<timestamp>();
    r.method = j.at("method").get<std::string>();
    r.ranked = j.at("ranked").get<std::vector<node_id>>();
    r.candidates.query_id = r.query_id;
    r.candidates.candidates = j.at("candidates").get<std::vector<node_id>>();
    r.candidates.historical_count = j.at("historical_count").get<std::size_t>();
    r.reciprocal_rank = j.at("reciprocal_rank").get<double>();
    const std::string status = j.value("parse_status", "unparseable");
    r.parse_status = status == "exact-template" ? ParseStatus::kExactTemplate
                     : status == "fallback-integer"
                         ? ParseStatus::kFallbackInteger
                         : ParseStatus::kUnparseable;
    if (j.contains("error")) r.error = j["error"].get<std::string>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace tgt
