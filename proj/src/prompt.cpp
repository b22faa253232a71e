#include "tgt/prompt.hpp"

#include <algorithm>
#include <stdexcept>

namespace tgt {

namespace prompts {
const char* const kSystem =
    "You are an expert temporal graph learning agent. Your task is to predict "
    "the next interaction (i.e. Destination Node) given the `Source Node' and "
    "`Timestamp'.";
const char* const kTgPreamble =
    "Description of the temporal graph is provided below, where each line is "
    "a tuple of (`Source Node`, `Destination Node`, `Timestamp`).";
}  // namespace prompts

std::string render_edge(const Edge& e) {
  return "(" + std::to_string(e.src) + "," + std::to_string(e.dst) + "," +
         std::to_string(e.ts) + ")";
}

namespace {

std::string render_edge_list(const std::vector<Edge>& edges) {
  std::string out;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    if (i > 0) out += ", ";
    out += render_edge(edges[i]);
  }
  return out;
}

std::string render_interactions(node_id src,
                                const std::vector<NeighborEvent>& events) {
  std::string out;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (i > 0) out += ", ";
    out += render_edge({src, events[i].neighbor, events[i].ts});
  }
  return out;
}

std::string question_text(node_id src, timestamp ts,
                          const std::vector<NeighborEvent>& events) {
  std::string out = "`Source Node' " + std::to_string(src);
  if (events.empty()) {
    out += " has no past interactions.";
  } else {
    out += " has the following past interactions: " +
           render_interactions(src, events) + ".";
  }
  out += " Please predict the most likely `Destination Node' for `Source "
         "Node' " +
         std::to_string(src) + " at `Timestamp' " + std::to_string(ts) + ".";
  return out;
}

}  // namespace

std::vector<Edge> background_edges(const EdgeStream& stream, timestamp t_start,
                                   std::size_t b) {
  const auto& edges = stream.edges();
  auto end = std::lower_bound(
      edges.begin(), edges.end(), t_start,
      [](const Edge& e, timestamp v) { return e.ts < v; });
  const auto available = static_cast<std::size_t>(end - edges.begin());
  const auto take = std::min(b, available);
  return std::vector<Edge>(end - static_cast<std::ptrdiff_t>(take), end);
}

std::string build_background(const EdgeStream& stream, timestamp t_start,
                             std::size_t b) {
  return render_edge_list(background_edges(stream, t_start, b));
}

std::string build_examples(const EdgeStream& stream, const NeighborIndex& index,
                           timestamp t_start, std::size_t shots,
                           std::size_t m) {
  const auto recent = background_edges(stream, t_start, shots);
  std::string out;
  for (const auto& e : recent) {
    if (!out.empty()) out += "\n";
    out += question_text(e.src, e.ts, index.recent_neighbors(e.src, e.ts, m));
    out += " Answer: `Destination Node' is " + std::to_string(e.dst) + ".";
  }
  return out;
}

std::string encode_query(const NeighborIndex& index, node_id src, timestamp ts,
                         std::size_t m) {
  return question_text(src, ts, index.recent_neighbors(src, ts, m));
}

PromptBundle assemble(const PromptConfig& config, std::uint64_t query_id,
                      const std::vector<Edge>& background,
                      const std::string& examples, const std::string& query) {
  PromptBundle bundle;
  bundle.query_id = query_id;
  bundle.system = prompts::kSystem;
  bundle.tg_preamble = prompts::kTgPreamble;
  bundle.examples = config.include_examples ? examples : "";
  bundle.query = query;

  std::vector<Edge> bg =
      config.include_background ? background : std::vector<Edge>{};

  auto concat = [&](const std::string& bg_text) {
    std::string out;
    for (const std::string* block : std::initializer_list<const std::string*>{
             &bundle.system, &bundle.tg_preamble, &bg_text, &bundle.examples,
             &bundle.query}) {
      if (block->empty()) continue;
      if (!out.empty()) out += "\n\n";
      out += *block;
    }
    return out;
  };

  bundle.background = render_edge_list(bg);
  bundle.assembled = concat(bundle.background);
  // drop oldest background edges until the budget holds
  while (bundle.assembled.size() > config.max_prompt_chars && !bg.empty()) {
    bg.erase(bg.begin());
    bundle.background = render_edge_list(bg);
    bundle.assembled = concat(bundle.background);
  }
  if (bundle.assembled.size() > config.max_prompt_chars) {
    throw std::length_error("query block alone exceeds the prompt budget");
  }
  return bundle;
}

}  // namespace tgt
