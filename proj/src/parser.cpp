#include "tgt/parser.hpp"

#include <algorithm>
#include <regex>

namespace tgt {

namespace {

// `Destination Node' is 8228 — with any quote-mark flavor or none.
const std::regex kTemplateRe(
    R"([`'"]?Destination Node[`'"]?\s+is\s+[`'"]?(\d+))",
    std::regex::icase);

const std::regex kIntRe(R"(\d+)");

}  // namespace

ParsedPrediction parse_prediction(const std::string& text,
                                  const ValidIdRange& valid_ids) {
  ParsedPrediction out;

  std::smatch m;
  if (std::regex_search(text, m, kTemplateRe)) {
    const node_id id = std::stoll(m[1]);
    if (valid_ids.contains(id)) {
      out.ranked.push_back(id);
      out.status = ParseStatus::kExactTemplate;
    }
  }

  // fallback scan; also appends secondary candidates after a template hit
  for (auto it = std::sregex_iterator(text.begin(), text.end(), kIntRe);
       it != std::sregex_iterator(); ++it) {
    const std::string token = it->str();
    if (token.size() > 18) continue;  // would overflow, cannot be an id
    const node_id id = std::stoll(token);
    if (!valid_ids.contains(id)) continue;
    if (std::find(out.ranked.begin(), out.ranked.end(), id) !=
        out.ranked.end()) {
      continue;
    }
    out.ranked.push_back(id);
    if (out.status == ParseStatus::kUnparseable) {
      out.status = ParseStatus::kFallbackInteger;
    }
  }

  return out;
}

const char* to_string(ParseStatus status) {
  switch (status) {
    case ParseStatus::kExactTemplate: return "exact-template";
    case ParseStatus::kFallbackInteger: return "fallback-integer";
    case ParseStatus::kUnparseable: return "unparseable";
  }
  return "unparseable";
}

}  // namespace tgt
