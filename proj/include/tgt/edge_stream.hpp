#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace tgt {

using node_id = std::int64_t;
using timestamp = std::int64_t;

/// One timestamped interaction (src, dst, ts). Node ids are the integer
/// encoding assigned at ingest; timestamps are dataset-native integer units.
struct Edge {
  node_id src{0};
  node_id dst{0};
  timestamp ts{0};

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Maps raw node labels to contiguous integer ids in first-appearance order.
/// For bipartite graphs the destination partition is offset by the final
/// source-partition size so the two id ranges never overlap.
struct NodeIdMap {
  std::unordered_map<std::string, node_id> raw_to_id;
  // (source partition size, destination partition size) when bipartite,
  // else (total, 0).
  std::size_t src_partition_size{0};
  std::size_t dst_partition_size{0};
  bool bipartite{false};

  std::size_t num_nodes() const {
    return bipartite ? src_partition_size + dst_partition_size
                     : src_partition_size;
  }
  // Half-open id range of valid destination candidates.
  node_id dst_id_begin() const {
    return bipartite ? static_cast<node_id>(src_partition_size) : 0;
  }
  node_id dst_id_end() const { return static_cast<node_id>(num_nodes()); }
};

struct DatasetStats {
  std::size_t num_nodes{0};
  std::size_t num_edges{0};
  std::size_t num_unique_edges{0};
  std::size_t num_unique_steps{0};
  double surprise{0.0};
  timestamp min_ts{0};
  timestamp max_ts{0};
};

/// Chronologically ordered edge stream with split markers. Immutable once
/// finalized; safe to share across concurrent readers.
class EdgeStream {
 public:
  EdgeStream() = default;
  EdgeStream(std::vector<Edge> edges, NodeIdMap node_map);

  const std::vector<Edge>& edges() const { return edges_; }
  const NodeIdMap& node_map() const { return node_map_; }
  bool bipartite() const { return node_map_.bipartite; }
  std::size_t num_nodes() const { return node_map_.num_nodes(); }

  std::size_t train_end() const { return train_end_; }
  std::size_t val_end() const { return val_end_; }
  bool has_split() const { return val_end_ > 0 || train_end_ > 0; }
  std::size_t test_size() const { return edges_.size() - val_end_; }

  void set_split(std::size_t train_end, std::size_t val_end);

 private:
  std::vector<Edge> edges_;
  NodeIdMap node_map_;
  std::size_t train_end_{0};
  std::size_t val_end_{0};
};

struct IngestOptions {
  bool bipartite{false};
  char delimiter{','};
  bool has_header{false};
  bool sort_by_ts{false};  // stable sort when rows arrive out of order
};

struct IngestError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Reads a `src,dst,ts[,extra...]` edge list, assigning integer ids by
/// chronological first appearance (per partition when bipartite).
EdgeStream ingest_csv(const std::string& path, const IngestOptions& options);

/// Same id-assignment rules over in-memory rows; used by tests and synthetic
/// stream builders.
EdgeStream ingest_rows(
    const std::vector<std::tuple<std::string, std::string, timestamp>>& rows,
    bool bipartite);

/// Builds a stream directly from already-encoded edges (toy fixtures).
EdgeStream make_stream(std::vector<Edge> edges, bool bipartite,
                       std::size_t src_partition_size, std::size_t num_nodes);

/// Sets split indices so roughly train_frac / val_frac of edges land in
/// train / validation. Edges sharing a boundary timestamp stay together on
/// the earlier side, keeping every train ts strictly before every test ts.
void chronological_split(EdgeStream& stream, double train_frac,
                         double val_frac);

/// Fraction of test edges whose (src,dst) pair never occurs in train.
double surprise_index(const EdgeStream& stream);

DatasetStats compute_stats(const EdgeStream& stream);

/// Sidecar manifest: split indices, bipartite flag and id map, so a run is
/// reproducible bit-exactly from the same CSV.
void save_manifest(const EdgeStream& stream, const std::string& path);
EdgeStream load_with_manifest(const std::string& csv_path,
                              const std::string& manifest_path,
                              const IngestOptions& options);

}  // namespace tgt
