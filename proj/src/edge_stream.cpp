#include "tgt/edge_stream.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <tuple>
#include <unordered_set>

#include "json.hpp"

namespace tgt {

namespace {

struct PairHash {
  std::size_t operator()(const std::pair<node_id, node_id>& p) const {
    return std::hash<std::uint64_t>{}(
        static_cast<std::uint64_t>(p.first) * 0x9e3779b97f4a7c15ULL ^
        static_cast<std::uint64_t>(p.second));
  }
};

using PairSet =
    std::unordered_set<std::pair<node_id, node_id>, PairHash>;

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, delim)) out.push_back(field);
  return out;
}

timestamp parse_ts(const std::string& raw, std::size_t row) {
  std::string s = raw;
  // trim
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw IngestError("row " + std::to_string(row) +
                      ": timestamp is not a non-negative integer: '" + raw +
                      "'");
  }
  return static_cast<timestamp>(std::stoll(s));
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

EdgeStream build_stream(
    const std::vector<std::tuple<std::string, std::string, timestamp>>& rows,
    bool bipartite) {
  if (rows.empty()) throw IngestError("empty edge list");

  NodeIdMap map;
  map.bipartite = bipartite;

  std::vector<Edge> edges;
  edges.reserve(rows.size());

  if (!bipartite) {
    node_id next = 0;
    for (const auto& [s, d, ts] : rows) {
      auto [is, inserted_s] = map.raw_to_id.try_emplace(s, next);
      if (inserted_s) ++next;
      auto [id_, inserted_d] = map.raw_to_id.try_emplace(d, next);
      if (inserted_d) ++next;
      edges.push_back({is->second, id_->second, ts});
    }
    map.src_partition_size = static_cast<std::size_t>(next);
    map.dst_partition_size = 0;
  } else {
    // First pass fixes the source-partition size; destination ids are
    // offset by it so the two ranges never overlap.
    std::unordered_map<std::string, node_id> src_ids;
    for (const auto& [s, d, ts] : rows) {
      src_ids.try_emplace(s, static_cast<node_id>(src_ids.size()));
    }
    const auto offset = static_cast<node_id>(src_ids.size());
    std::unordered_map<std::string, node_id> dst_ids;
    for (const auto& [s, d, ts] : rows) {
      auto dit = dst_ids.try_emplace(
          d, offset + static_cast<node_id>(dst_ids.size()));
      edges.push_back({src_ids.at(s), dit.first->second, ts});
    }
    map.src_partition_size = static_cast<std::size_t>(offset);
    map.dst_partition_size = dst_ids.size();
    for (const auto& [raw, id] : src_ids) map.raw_to_id["s:" + raw] = id;
    for (const auto& [raw, id] : dst_ids) map.raw_to_id["d:" + raw] = id;
  }

  return EdgeStream(std::move(edges), std::move(map));
}

}  // namespace

EdgeStream::EdgeStream(std::vector<Edge> edges, NodeIdMap node_map)
    : edges_(std::move(edges)), node_map_(std::move(node_map)) {
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i - 1].ts > edges_[i].ts) {
      throw IngestError("edges are not in non-decreasing timestamp order at "
                        "index " +
                        std::to_string(i));
    }
  }
}

void EdgeStream::set_split(std::size_t train_end, std::size_t val_end) {
  if (train_end > val_end || val_end > edges_.size()) {
    throw std::invalid_argument("invalid split indices");
  }
  train_end_ = train_end;
  val_end_ = val_end;
}

EdgeStream ingest_csv(const std::string& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open file: " + path);

  std::vector<std::tuple<std::string, std::string, timestamp>> rows;
  std::string line;
  std::size_t row = 0;
  bool skipped_header = !options.has_header;
  timestamp prev_ts = -1;
  while (std::getline(in, line)) {
    ++row;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    if (trim(line).empty()) continue;
    auto fields = split_fields(line, options.delimiter);
    if (fields.size() < 3) {
      throw IngestError("row " + std::to_string(row) +
                        ": expected at least 3 fields, got " +
                        std::to_string(fields.size()));
    }
    const timestamp ts = parse_ts(fields[2], row);
    if (!options.sort_by_ts && ts < prev_ts) {
      throw IngestError("row " + std::to_string(row) +
                        ": decreasing timestamp (pass sort option to accept "
                        "unordered input)");
    }
    prev_ts = ts;
    rows.emplace_back(trim(fields[0]), trim(fields[1]), ts);
  }
  if (rows.empty()) throw IngestError("empty file: " + path);
  if (options.sort_by_ts) {
    std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      return std::get<2>(a) < std::get<2>(b);
    });
  }
  return build_stream(rows, options.bipartite);
}

EdgeStream ingest_rows(
    const std::vector<std::tuple<std::string, std::string, timestamp>>& rows,
    bool bipartite) {
  return build_stream(rows, bipartite);
}

EdgeStream make_stream(std::vector<Edge> edges, bool bipartite,
                       std::size_t src_partition_size, std::size_t num_nodes) {
  NodeIdMap map;
  map.bipartite = bipartite;
  map.src_partition_size = bipartite ? src_partition_size : num_nodes;
  map.dst_partition_size = bipartite ? num_nodes - src_partition_size : 0;
  return EdgeStream(std::move(edges), std::move(map));
}

void chronological_split(EdgeStream& stream, double train_frac,
                         double val_frac) {
  if (!(train_frac > 0.0) || val_frac < 0.0 || train_frac + val_frac >= 1.0) {
    throw std::invalid_argument("split fractions out of range");
  }
  const auto& edges = stream.edges();
  const auto n = edges.size();

  // Advance a cut forward until the boundary timestamp no longer straddles
  // it; boundary-ts edges stay in the earlier split.
  auto cut = [&](double frac) {
    std::size_t c = static_cast<std::size_t>(
        std::floor(static_cast<double>(n) * frac));
    while (c > 0 && c < n && edges[c].ts == edges[c - 1].ts) ++c;
    return c;
  };

  const std::size_t train_end = cut(train_frac);
  std::size_t val_end = cut(train_frac + val_frac);
  if (val_end < train_end) val_end = train_end;
  stream.set_split(train_end, val_end);
}

double surprise_index(const EdgeStream& stream) {
  if (!stream.has_split() || stream.test_size() == 0) {
    throw std::invalid_argument("surprise_index requires a non-empty test set");
  }
  const auto& edges = stream.edges();
  PairSet train_pairs;
  for (std::size_t i = 0; i < stream.train_end(); ++i) {
    train_pairs.insert({edges[i].src, edges[i].dst});
  }
  std::size_t unseen = 0;
  for (std::size_t i = stream.val_end(); i < edges.size(); ++i) {
    if (!train_pairs.count({edges[i].src, edges[i].dst})) ++unseen;
  }
  return static_cast<double>(unseen) / static_cast<double>(stream.test_size());
}

DatasetStats compute_stats(const EdgeStream& stream) {
  const auto& edges = stream.edges();
  if (edges.empty()) throw std::invalid_argument("empty stream");

  DatasetStats stats;
  stats.num_nodes = stream.num_nodes();
  stats.num_edges = edges.size();

  PairSet pairs;
  std::unordered_set<timestamp> steps;
  for (const auto& e : edges) {
    pairs.insert({e.src, e.dst});
    steps.insert(e.ts);
  }
  stats.num_unique_edges = pairs.size();
  stats.num_unique_steps = steps.size();
  stats.min_ts = edges.front().ts;
  stats.max_ts = edges.back().ts;
  if (stream.has_split() && stream.test_size() > 0) {
    stats.surprise = surprise_index(stream);
  }
  return stats;
}

void save_manifest(const EdgeStream& stream, const std::string& path) {
  nlohmann::ordered_json j;
  j["train_end"] = stream.train_end();
  j["val_end"] = stream.val_end();
  j["bipartite"] = stream.bipartite();
  j["src_partition_size"] = stream.node_map().src_partition_size;
  j["num_nodes"] = stream.num_nodes();
  nlohmann::ordered_json ids = nlohmann::ordered_json::object();
  // stable order for bit-exact reproduction
  std::vector<std::pair<std::string, node_id>> entries(
      stream.node_map().raw_to_id.begin(), stream.node_map().raw_to_id.end());
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.second < b.second; });
  for (const auto& [raw, id] : entries) ids[raw] = id;
  j["raw_to_id"] = std::move(ids);
  std::ofstream out(path);
  if (!out) throw IngestError("cannot write manifest: " + path);
  out << j.dump(2) << "\n";
}

EdgeStream load_with_manifest(const std::string& csv_path,
                              const std::string& manifest_path,
                              const IngestOptions& options) {
  std::ifstream in(manifest_path);
  if (!in) throw IngestError("cannot open manifest: " + manifest_path);
  nlohmann::json j;
  in >> j;

  IngestOptions opts = options;
  opts.bipartite = j.at("bipartite").get<bool>();
  EdgeStream stream = ingest_csv(csv_path, opts);
  stream.set_split(j.at("train_end").get<std::size_t>(),
                   j.at("val_end").get<std::size_t>());
  if (stream.num_nodes() != j.at("num_nodes").get<std::size_t>()) {
    throw IngestError("manifest/node-count mismatch for " + csv_path);
  }
  return stream;
}

}  // namespace tgt
