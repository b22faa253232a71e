#include "tgt/explain.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>

#include "json.hpp"

namespace tgt {

namespace {

constexpr const char* kExplainInstruction =
    "Explain the reasoning behind this prediction, referring to the past "
    "interactions and the temporal graph above.";

constexpr const char* kClassifyHeader =
    "Classify the explanation below into exactly one of the following "
    "categories.";

constexpr const char* kClassifyFooter =
    "Respond with a single line of the form \"Category: <label>\". If you "
    "choose Others, respond with \"Others: <proposed new category name>\" and "
    "a brief justification.";

const std::array<CategoryInfo, kNumCategories> kCategories = {{
    {ExplanationCategory::kMostRecentInteraction, "Most Recent Interaction",
     "the model predicts the destination node as the one with which the "
     "source node had its most recent interaction before (or closest to) the "
     "given timestamp."},
    {ExplanationCategory::kRepeatedInteractionPattern,
     "Repeated Interaction Pattern",
     "if a source node has repeatedly interacted with the same destination "
     "node at multiple timestamps, the model predicts that this pattern will "
     "continue."},
    {ExplanationCategory::kMostFrequentPastDestination,
     "Most Frequent Past Destination",
     "when multiple past interactions exist, the explanation chooses the "
     "destination node that appears most frequently in the interaction "
     "history."},
    {ExplanationCategory::kPatternContinuation, "Pattern Continuation",
     "The model infers the next likely destination by extrapolating from "
     "observed interaction patterns, even when the exact match isn’t "
     "present."},
    {ExplanationCategory::kSequenceOrAlternationLogic,
     "Sequence or Alternation Logic",
     "the model uses the order of interactions (e.g., alternating between "
     "nodes) to predict the next likely destination."},
    {ExplanationCategory::kDefaultOrMostCommonNode,
     "Default or Most Common Node",
     "in the absence of a clear match, the explanation may default to the "
     "most common or logical node, or state that any node could be chosen."},
    {ExplanationCategory::kLackOfData, "Lack of Data",
     "when no clear pattern or sufficient data is available, the model "
     "defaults to a plausible guess, sometimes stating the lack of "
     "information."},
    {ExplanationCategory::kNewNode, "New Node",
     "the model infers that the next interaction might be with a new node "
     "that hasn’t appeared in the source node’s history, especially "
     "if all previous interactions are exhausted."},
    {ExplanationCategory::kAmbiguousCandidates, "Ambiguous Candidates",
     "the explanation discusses more than one plausible destination (e.g., "
     "similar timestamps), and may use additional heuristics to select among "
     "them."},
    {ExplanationCategory::kOthers, "Others",
     "use this only if none of the above apply. Include a proposed new "
     "category name and brief justification in the required format."},
}};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

}  // namespace

const std::array<CategoryInfo, kNumCategories>& category_table() {
  return kCategories;
}

const char* category_label(ExplanationCategory c) {
  for (const auto& info : kCategories) {
    if (info.category == c) return info.label;
  }
  return "Others";
}

std::optional<ExplanationCategory> category_from_label(const std::string& s) {
  const std::string needle = lower(s);
  for (const auto& info : kCategories) {
    if (lower(info.label) == needle) return info.category;
  }
  return std::nullopt;
}

std::string build_explanation_prompt(const PromptBundle& bundle,
                                     const std::string& answer_text) {
  std::string out = bundle.assembled;
  out += "\n\nAnswer: " + answer_text;
  out += "\n\n";
  out += kExplainInstruction;
  return out;
}

std::string build_classification_prompt(const std::string& query_text,
                                        const std::string& answer_text,
                                        const std::string& explanation_text) {
  std::string out = kClassifyHeader;
  out += "\n\n";
  for (const auto& info : kCategories) {
    out += std::string("- ") + info.label + ": " + info.description + "\n";
  }
  out += "\nQuestion: " + query_text;
  out += "\nAnswer: " + answer_text;
  out += "\nExplanation: " + explanation_text;
  out += "\n\n";
  out += kClassifyFooter;
  return out;
}

ExplanationCategory parse_category(const std::string& text,
                                   std::optional<std::string>& proposed) {
  proposed.reset();

  // "Others: <proposed name>"
  static const std::regex others_re(R"(Others\s*:\s*([^\n.]+))",
                                    std::regex::icase);
  std::smatch m;
  if (std::regex_search(text, m, others_re)) {
    std::string name = m[1];
    name.erase(0, name.find_first_not_of(" \t"));
    name.erase(name.find_last_not_of(" \t") + 1);
    if (!name.empty()) proposed = name;
    return ExplanationCategory::kOthers;
  }

  // "Category: <label>" or the bare label anywhere in the reply
  static const std::regex cat_re(R"(Category\s*:\s*([^\n]+))",
                                 std::regex::icase);
  std::string candidate = text;
  if (std::regex_search(text, m, cat_re)) candidate = m[1];
  candidate.erase(0, candidate.find_first_not_of(" \t"));
  candidate.erase(candidate.find_last_not_of(" \t\r.") + 1);
  if (auto c = category_from_label(candidate)) return *c;

  const std::string hay = lower(text);
  for (const auto& info : kCategories) {
    if (info.category == ExplanationCategory::kOthers) continue;
    if (hay.find(lower(info.label)) != std::string::npos) return info.category;
  }

  // unparseable classifier output: keep the raw text as the proposal
  if (!text.empty()) proposed = text;
  return ExplanationCategory::kOthers;
}

ExplanationRecord classify_explanation(const EndpointConfig& config,
                                       ChatClient& client,
                                       std::uint64_t query_id,
                                       const std::string& query_text,
                                       const std::string& answer_text,
                                       const std::string& explanation_text) {
  PromptBundle bundle;
  bundle.query_id = query_id;
  bundle.query = build_classification_prompt(query_text, answer_text,
                                             explanation_text);
  bundle.assembled = bundle.query;

  const Completion completion = complete(config, client, bundle);

  ExplanationRecord rec;
  rec.query_id = query_id;
  rec.explanation_text = explanation_text;
  rec.classifier_model = config.model_name;
  if (completion.error) {
    rec.error = completion.error;
    rec.category = ExplanationCategory::kOthers;
    return rec;
  }
  rec.category = parse_category(completion.text, rec.proposed_new_category);
  return rec;
}

CategoryReport aggregate_report(
    const std::vector<PredictionRecord>& predictions,
    const std::vector<ExplanationRecord>& explanations) {
  std::map<std::uint64_t, double> rr_by_query;
  for (const auto& p : predictions) rr_by_query[p.query_id] = p.reciprocal_rank;

  std::array<std::size_t, kNumCategories> counts{};
  std::array<double, kNumCategories> rr_sums{};
  double overall_sum = 0.0;
  std::size_t total = 0;
  for (const auto& e : explanations) {
    auto it = rr_by_query.find(e.query_id);
    if (it == rr_by_query.end()) {
      throw std::invalid_argument("explanation query_id " +
                                  std::to_string(e.query_id) +
                                  " has no matching prediction record");
    }
    const auto idx = static_cast<std::size_t>(e.category);
    ++counts[idx];
    rr_sums[idx] += it->second;
    overall_sum += it->second;
    ++total;
  }

  CategoryReport report;
  report.total = total;
  report.overall_mrr = total ? overall_sum / static_cast<double>(total) : 0.0;
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    CategoryReportEntry entry;
    entry.label = kCategories[i].label;
    entry.count = counts[i];
    entry.fraction =
        total ? static_cast<double>(counts[i]) / static_cast<double>(total)
              : 0.0;
    if (counts[i] > 0) {
      entry.mrr = rr_sums[i] / static_cast<double>(counts[i]);
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

ExplainResult run_explain(const EdgeStream& stream, const EvalConfig& config,
                          ChatClient& client,
                          const std::vector<PredictionRecord>& predictions,
                          std::size_t first_n) {
  const std::size_t n = std::min(first_n, predictions.size());
  const auto bundles = rebuild_test_bundles(stream, config, n);

  // explanation pass (batch fan-out, same contract as prediction)
  std::vector<PromptBundle> explain_bundles;
  std::vector<std::string> answers;
  explain_bundles.reserve(n);
  answers.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& pred = predictions[i];
    const std::string answer =
        pred.ranked.empty()
            ? "`Destination Node' is unknown."
            : "`Destination Node' is " + std::to_string(pred.ranked.front()) +
                  ".";
    answers.push_back(answer);
    PromptBundle eb = bundles[i];
    eb.query = build_explanation_prompt(bundles[i], answer);
    eb.assembled = eb.query;
    explain_bundles.push_back(std::move(eb));
  }
  const auto explanations =
      complete_batch(config.endpoint, client, explain_bundles);

  ExplainResult result;
  result.records.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (explanations[i].error) {
      ExplanationRecord rec;
      rec.query_id = predictions[i].query_id;
      rec.category = ExplanationCategory::kOthers;
      rec.classifier_model = config.endpoint.model_name;
      rec.error = explanations[i].error;
      result.records.push_back(std::move(rec));
      continue;
    }
    result.records.push_back(classify_explanation(
        config.endpoint, client, predictions[i].query_id, bundles[i].query,
        answers[i], explanations[i].text));
  }

  result.report = aggregate_report(
      std::vector<PredictionRecord>(predictions.begin(),
                                    predictions.begin() +
                                        static_cast<std::ptrdiff_t>(n)),
      result.records);
  return result;
}

std::string MockExplainClient::send(const PromptBundle& bundle) {
  const std::string& text = bundle.assembled;

  if (text.find(kClassifyHeader) != std::string::npos) {
    const auto pos = text.find("Explanation: ");
    const std::string explanation =
        pos == std::string::npos ? text : text.substr(pos + 13);
    const auto category = keyword_classify(explanation);
    if (category == ExplanationCategory::kOthers) {
      return "Others: Unrecognized Heuristic";
    }
    return std::string("Category: ") + category_label(category);
  }

  // explanation request: read the final query sentence's tuples the same way
  // the recency and frequency mocks do
  static const std::regex tuple_re(R"(\((\d+),(\d+),(\d+)\))");
  std::vector<node_id> dsts;
  const auto predict_pos = text.rfind(" Please predict");
  if (predict_pos != std::string::npos) {
    const auto start = text.rfind("`Source Node'", predict_pos);
    const std::string sentence = text.substr(
        start == std::string::npos ? 0 : start,
        predict_pos - (start == std::string::npos ? 0 : start));
    for (auto it =
             std::sregex_iterator(sentence.begin(), sentence.end(), tuple_re);
         it != std::sregex_iterator(); ++it) {
      dsts.push_back(std::stoll((*it)[2]));
    }
  }
  if (dsts.empty()) {
    return "There is no data for this source node, so the prediction is a "
           "plausible guess given the lack of information.";
  }
  const bool all_same =
      std::all_of(dsts.begin(), dsts.end(),
                  [&](node_id d) { return d == dsts.front(); });
  if (all_same && dsts.size() > 1) {
    return "The source node has repeatedly interacted with node " +
           std::to_string(dsts.front()) +
           " at multiple timestamps, so the pattern will continue.";
  }
  return "The source node's most recent interaction was with node " +
         std::to_string(dsts.back()) +
         ", which is closest to the given timestamp.";
}

ExplanationCategory MockExplainClient::keyword_classify(
    const std::string& explanation) {
  const std::string hay = lower(explanation);
  auto has = [&](const char* needle) {
    return hay.find(needle) != std::string::npos;
  };
  if (has("most recent")) return ExplanationCategory::kMostRecentInteraction;
  if (has("repeatedly")) return ExplanationCategory::kRepeatedInteractionPattern;
  if (has("most frequent")) {
    return ExplanationCategory::kMostFrequentPastDestination;
  }
  if (has("extrapolat")) return ExplanationCategory::kPatternContinuation;
  if (has("alternat")) return ExplanationCategory::kSequenceOrAlternationLogic;
  if (has("most common") || has("default")) {
    return ExplanationCategory::kDefaultOrMostCommonNode;
  }
  if (has("lack of information") || has("no data") || has("insufficient")) {
    return ExplanationCategory::kLackOfData;
  }
  if (has("new node")) return ExplanationCategory::kNewNode;
  if (has("ambiguous") || has("plausible candidates")) {
    return ExplanationCategory::kAmbiguousCandidates;
  }
  return ExplanationCategory::kOthers;
}

void save_explanations(const std::vector<ExplanationRecord>& records,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write explanations: " + path);
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["query_id"] = r.query_id;
    j["explanation"] = r.explanation_text;
    j["category"] = category_label(r.category);
    if (r.proposed_new_category) {
      j["proposed_new_category"] = *r.proposed_new_category;
    }
    j["classifier_model"] = r.classifier_model;
    if (r.error) j["error"] = *r.error;
    out << j.dump() << "\n";
  }
}

std::vector<ExplanationRecord> load_explanations(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open explanations: " + path);
  std::vector<ExplanationRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    ExplanationRecord r;
    r.query_id = j.at("query_id").get<std::uint64_t>();
    r.explanation_text = j.value("explanation", "");
    r.category = category_from_label(j.at("category").get<std::string>())
                     .value_or(ExplanationCategory::kOthers);
    if (j.contains("proposed_new_category")) {
      r.proposed_new_category = j["proposed_new_category"].get<std::string>();
    }
    r.classifier_model = j.value("classifier_model", "");
    out.push_back(std::move(r));
  }
  return out;
}

void save_report_json(const CategoryReport& report, const std::string& path) {
  nlohmann::ordered_json j;
  j["total"] = report.total;
  j["overall_mrr"] = report.overall_mrr;
  nlohmann::ordered_json cats = nlohmann::ordered_json::array();
  for (const auto& e : report.entries) {
    nlohmann::ordered_json c;
    c["label"] = e.label;
    c["count"] = e.count;
    c["fraction"] = e.fraction;
    if (e.mrr) c["mrr"] = *e.mrr;
    cats.push_back(std::move(c));
  }
  j["categories"] = std::move(cats);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << j.dump(2) << "\n";
}

void save_report_csv(const CategoryReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write report csv: " + path);
  out << "category,count,fraction,mrr\n";
  for (const auto& e : report.entries) {
    if (e.count == 0) continue;
    out << '"' << e.label << '"' << ',' << e.count << ',' << e.fraction << ','
        << (e.mrr ? std::to_string(*e.mrr) : "") << "\n";
  }
}

}  // namespace tgt
