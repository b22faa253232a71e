#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tgt/prompt.hpp"

namespace tgt {

struct EndpointConfig {
  std::string base_url;
  std::string model_name;
  std::string api_key_env_var{"TGT_API_KEY"};
  std::size_t max_parallel{4};
  double timeout_seconds{60.0};
  std::size_t max_retries{2};
  double temperature{0.0};
  std::size_t max_tokens{256};
  std::string transcript_path;  // optional JSONL audit log
};

struct Completion {
  std::uint64_t query_id{0};
  std::string text;
  double latency_ms{0.0};
  std::size_t attempt_count{0};
  std::optional<std::string> error;
};

/// One delivery attempt. Implementations report transient failures by
/// throwing TransportError; complete_batch retries those with backoff.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string send(const PromptBundle& bundle) = 0;
};

struct TransportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct AuthError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// POSTs {model, messages, temperature, max_tokens} to
/// {base_url}/chat/completions with a bearer token from the configured env
/// var.
class HttpChatClient : public ChatClient {
 public:
  explicit HttpChatClient(EndpointConfig config);
  std::string send(const PromptBundle& bundle) override;

 private:
  EndpointConfig config_;
  std::string api_key_;
};

/// Deterministic in-process stand-ins for the evaluation and explanation
/// pipelines. All of them are pure functions of the bundle (plus the
/// true-answer table for perfect/always_wrong), so runs are reproducible.
enum class MockKind {
  kPerfect,       // answers the true destination
  kAlwaysWrong,   // answers a guaranteed-wrong destination
  kRecency,       // answers the most recent neighbor tuple in the query
  kFrequency,     // answers the most frequent neighbor in the query
  kScripted,      // answers from a query_id -> text file
};

class MockChatClient : public ChatClient {
 public:
  MockChatClient(MockKind kind,
                 std::map<std::uint64_t, node_id> true_answers = {});
  static std::unique_ptr<MockChatClient> scripted_from_file(
      const std::string& path);

  std::string send(const PromptBundle& bundle) override;

 private:
  MockKind kind_;
  std::map<std::uint64_t, node_id> true_answers_;
  std::map<std::uint64_t, std::string> scripted_;
};

std::optional<MockKind> mock_kind_from_name(const std::string& name);

/// Retries transient failures with exponential backoff, then delivers the
/// whole batch with at most max_parallel requests in flight. Output order
/// equals input order; per-query failures are recorded in-place.
Completion complete(const EndpointConfig& config, ChatClient& client,
                    const PromptBundle& bundle);
std::vector<Completion> complete_batch(const EndpointConfig& config,
                                       ChatClient& client,
                                       const std::vector<PromptBundle>& bundles);

}  // namespace tgt
