#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tgt/edge_stream.hpp"
#include "tgt/neighbor_index.hpp"

namespace tgt {

struct PromptConfig {
  std::size_t background_size{300};
  std::size_t neighbors{2};
  std::size_t shots{5};
  std::size_t batch_size{200};
  std::size_t max_prompt_chars{48000};
  bool include_background{true};
  bool include_examples{true};
  bool include_neighbors{true};
};

/// Assembled prompt blocks for one query, in fixed order: system prompt,
/// temporal-graph preamble, background set, example set, query.
struct PromptBundle {
  std::uint64_t query_id{0};
  std::string system;
  std::string tg_preamble;
  std::string background;
  std::string examples;
  std::string query;
  std::string assembled;
};

namespace prompts {
extern const char* const kSystem;
extern const char* const kTgPreamble;
}  // namespace prompts

std::string render_edge(const Edge& e);

/// The b most recent edges with ts < t_start, ascending, as "(s,d,t), ...".
std::string build_background(const EdgeStream& stream, timestamp t_start,
                             std::size_t b);

/// Same selection as build_background but as edges, for truncation-aware
/// assembly.
std::vector<Edge> background_edges(const EdgeStream& stream, timestamp t_start,
                                   std::size_t b);

/// Question/answer demonstrations from the `shots` most recent edges before
/// t_start; neighbor tuples are sampled strictly before each example's ts.
std::string build_examples(const EdgeStream& stream, const NeighborIndex& index,
                           timestamp t_start, std::size_t shots, std::size_t m);

/// The query template without the answer clause.
std::string encode_query(const NeighborIndex& index, node_id src, timestamp ts,
                         std::size_t m);

/// Concatenates non-empty blocks in fixed order. If the result exceeds
/// max_prompt_chars, oldest background edges are dropped first; examples and
/// the query are never truncated.
PromptBundle assemble(const PromptConfig& config, std::uint64_t query_id,
                      const std::vector<Edge>& background,
                      const std::string& examples, const std::string& query);

}  // namespace tgt
