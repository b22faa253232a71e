#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "tgt/client.hpp"
#include "tgt/eval.hpp"

namespace tgt {

enum class ExplanationCategory {
  kMostRecentInteraction,
  kRepeatedInteractionPattern,
  kMostFrequentPastDestination,
  kPatternContinuation,
  kSequenceOrAlternationLogic,
  kDefaultOrMostCommonNode,
  kLackOfData,
  kNewNode,
  kAmbiguousCandidates,
  kOthers,
};

inline constexpr std::size_t kNumCategories = 10;

struct CategoryInfo {
  ExplanationCategory category;
  const char* label;
  const char* description;
};

const std::array<CategoryInfo, kNumCategories>& category_table();
const char* category_label(ExplanationCategory c);
std::optional<ExplanationCategory> category_from_label(const std::string& s);

struct ExplanationRecord {
  std::uint64_t query_id{0};
  std::string explanation_text;
  ExplanationCategory category{ExplanationCategory::kOthers};
  std::optional<std::string> proposed_new_category;  // Others only
  std::string classifier_model;
  std::optional<std::string> error;
};

/// Original context blocks + the model's answer + an instruction to explain.
std::string build_explanation_prompt(const PromptBundle& bundle,
                                     const std::string& answer_text);

/// Lists the ten labels with their descriptions and demands a single-label
/// answer ("Category: <label>", Others with a proposed name).
std::string build_classification_prompt(const std::string& query_text,
                                        const std::string& answer_text,
                                        const std::string& explanation_text);

/// Parses classifier output: the label alone or "Category: <label>";
/// "Others: <proposed name>" captures the proposal. Unparseable output maps
/// to Others with the raw text preserved.
ExplanationCategory parse_category(const std::string& text,
                                   std::optional<std::string>& proposed);

ExplanationRecord classify_explanation(const EndpointConfig& config,
                                       ChatClient& client,
                                       std::uint64_t query_id,
                                       const std::string& query_text,
                                       const std::string& answer_text,
                                       const std::string& explanation_text);

struct CategoryReportEntry {
  std::string label;
  std::size_t count{0};
  double fraction{0.0};
  std::optional<double> mrr;  // undefined when the category is empty
};

struct CategoryReport {
  std::vector<CategoryReportEntry> entries;  // all ten, fixed order
  std::size_t total{0};
  double overall_mrr{0.0};
};

/// Joins predictions and explanations on query_id; fractions are over
/// classified records and sum to 1.
CategoryReport aggregate_report(const std::vector<PredictionRecord>& predictions,
                                const std::vector<ExplanationRecord>& explanations);

struct ExplainResult {
  std::vector<ExplanationRecord> records;
  CategoryReport report;
};

/// Two-call pipeline over the first `first_n` test predictions: rebuild the
/// prediction bundle, request an explanation, then classify it with the same
/// client.
ExplainResult run_explain(const EdgeStream& stream, const EvalConfig& config,
                          ChatClient& client,
                          const std::vector<PredictionRecord>& predictions,
                          std::size_t first_n);

/// Deterministic offline stand-in: answers explanation prompts with a
/// templated reading of the query's neighbor tuples, and classification
/// prompts with a keyword-rule table.
class MockExplainClient : public ChatClient {
 public:
  std::string send(const PromptBundle& bundle) override;

  /// The keyword rules alone, usable as an independent oracle in tests.
  static ExplanationCategory keyword_classify(const std::string& explanation);
};

void save_explanations(const std::vector<ExplanationRecord>& records,
                       const std::string& path);
std::vector<ExplanationRecord> load_explanations(const std::string& path);
void save_report_json(const CategoryReport& report, const std::string& path);
/// Bar-plot export: empty categories are omitted.
void save_report_csv(const CategoryReport& report, const std::string& path);

}  // namespace tgt
