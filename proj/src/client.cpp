#include "tgt/client.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <regex>
#include <thread>

#include "httplib.h"
#include "json.hpp"

namespace tgt {

namespace {

std::string answer_text(node_id d) {
  return "`Destination Node' is " + std::to_string(d) + ".";
}

struct Tuple3 {
  node_id src, dst;
  timestamp ts;
};

// (a,b,c) groups in the query text; the mock's view of the neighbor context.
std::vector<Tuple3> extract_tuples(const std::string& text) {
  static const std::regex re(R"(\((\d+),(\d+),(\d+)\))");
  std::vector<Tuple3> out;
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
       it != std::sregex_iterator(); ++it) {
    out.push_back({std::stoll((*it)[1]), std::stoll((*it)[2]),
                   std::stoll((*it)[3])});
  }
  return out;
}

}  // namespace

MockChatClient::MockChatClient(MockKind kind,
                               std::map<std::uint64_t, node_id> true_answers)
    : kind_(kind), true_answers_(std::move(true_answers)) {}

std::unique_ptr<MockChatClient> MockChatClient::scripted_from_file(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open script: " + path);
  auto client = std::make_unique<MockChatClient>(MockKind::kScripted);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    client->scripted_[j.at("query_id").get<std::uint64_t>()] =
        j.at("text").get<std::string>();
  }
  return client;
}

std::string MockChatClient::send(const PromptBundle& bundle) {
  switch (kind_) {
    case MockKind::kPerfect: {
      auto it = true_answers_.find(bundle.query_id);
      if (it == true_answers_.end()) return "";
      return answer_text(it->second);
    }
    case MockKind::kAlwaysWrong: {
      auto it = true_answers_.find(bundle.query_id);
      if (it == true_answers_.end()) return answer_text(-1);
      return answer_text(it->second + 1);
    }
    case MockKind::kRecency: {
      const auto tuples = extract_tuples(bundle.query);
      if (tuples.empty()) return "`Destination Node' is unknown.";
      return answer_text(tuples.back().dst);
    }
    case MockKind::kFrequency: {
      const auto tuples = extract_tuples(bundle.query);
      if (tuples.empty()) return "`Destination Node' is unknown.";
      std::map<node_id, std::size_t> counts;
      for (const auto& t : tuples) ++counts[t.dst];
      node_id best = tuples.back().dst;
      std::size_t best_count = 0;
      // ties resolved toward the most recent occurrence
      for (auto it = tuples.rbegin(); it != tuples.rend(); ++it) {
        if (counts[it->dst] > best_count) {
          best = it->dst;
          best_count = counts[it->dst];
        }
      }
      return answer_text(best);
    }
    case MockKind::kScripted: {
      auto it = scripted_.find(bundle.query_id);
      return it == scripted_.end() ? "" : it->second;
    }
  }
  return "";
}

std::optional<MockKind> mock_kind_from_name(const std::string& name) {
  if (name == "perfect") return MockKind::kPerfect;
  if (name == "always-wrong") return MockKind::kAlwaysWrong;
  if (name == "recency") return MockKind::kRecency;
  if (name == "frequency") return MockKind::kFrequency;
  if (name == "scripted") return MockKind::kScripted;
  return std::nullopt;
}

HttpChatClient::HttpChatClient(EndpointConfig config)
    : config_(std::move(config)) {
  if (!config_.api_key_env_var.empty()) {
    if (const char* key = std::getenv(config_.api_key_env_var.c_str())) {
      api_key_ = key;
    }
  }
}

std::string HttpChatClient::send(const PromptBundle& bundle) {
  // split base_url into origin + path prefix
  std::string origin = config_.base_url;
  std::string prefix;
  const auto scheme_end = origin.find("://");
  if (scheme_end != std::string::npos) {
    const auto path_start = origin.find('/', scheme_end + 3);
    if (path_start != std::string::npos) {
      prefix = origin.substr(path_start);
      origin = origin.substr(0, path_start);
    }
  }
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();

  httplib::Client cli(origin);
  cli.set_connection_timeout(std::chrono::milliseconds(
      static_cast<int>(config_.timeout_seconds * 1000)));
  cli.set_read_timeout(std::chrono::milliseconds(
      static_cast<int>(config_.timeout_seconds * 1000)));
  if (!api_key_.empty()) cli.set_bearer_token_auth(api_key_);

  // system block becomes the system message, the rest the user message
  std::string user = bundle.assembled;
  if (!bundle.system.empty() && user.rfind(bundle.system, 0) == 0) {
    user = user.substr(bundle.system.size());
    if (user.rfind("\n\n", 0) == 0) user = user.substr(2);
  }

  nlohmann::json body{
      {"model", config_.model_name},
      {"messages",
       {{{"role", "system"}, {"content", bundle.system}},
        {{"role", "user"}, {"content", user}}}},
      {"temperature", config_.temperature},
      {"max_tokens", config_.max_tokens}};

  auto res = cli.Post(prefix + "/chat/completions", body.dump(),
                      "application/json");
  if (!res) {
    throw TransportError("transport failure: " +
                         httplib::to_string(res.error()));
  }
  if (res->status == 401 || res->status == 403) {
    throw AuthError("authentication failed (" + std::to_string(res->status) +
                    ")");
  }
  if (res->status != 200) {
    throw TransportError("http status " + std::to_string(res->status));
  }

  nlohmann::json j;
  try {
    j = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(std::string("unparseable response body: ") + e.what());
  }
  if (!j.contains("choices") || j["choices"].empty() ||
      !j["choices"][0].contains("message") ||
      !j["choices"][0]["message"].contains("content")) {
    throw TransportError("response missing completion text");
  }
  std::string text = j["choices"][0]["message"]["content"].get<std::string>();

  if (!config_.transcript_path.empty()) {
    static std::mutex log_mutex;
    std::lock_guard<std::mutex> lock(log_mutex);
    std::ofstream log(config_.transcript_path, std::ios::app);
    nlohmann::ordered_json rec;
    rec["query_id"] = bundle.query_id;
    rec["request"] = body;
    rec["response"] = text;
    log << rec.dump() << "\n";
  }
  return text;
}

Completion complete(const EndpointConfig& config, ChatClient& client,
                    const PromptBundle& bundle) {
  Completion out;
  out.query_id = bundle.query_id;
  const auto start = std::chrono::steady_clock::now();
  std::chrono::milliseconds backoff(100);
  for (std::size_t attempt = 0; attempt <= config.max_retries; ++attempt) {
    out.attempt_count = attempt + 1;
    try {
      out.text = client.send(bundle);
      out.error.reset();
      break;
    } catch (const TransportError& e) {
      out.error = e.what();
      if (attempt < config.max_retries) {
        std::this_thread::sleep_for(backoff);
        backoff *= 2;
      }
    } catch (const std::exception& e) {
      // non-transient (auth, malformed config): no retry
      out.error = e.what();
      break;
    }
  }
  out.latency_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return out;
}

std::vector<Completion> complete_batch(
    const EndpointConfig& config, ChatClient& client,
    const std::vector<PromptBundle>& bundles) {
  std::vector<Completion> out(bundles.size());
  const std::size_t workers =
      std::min(std::max<std::size_t>(config.max_parallel, 1), bundles.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < bundles.size(); ++i) {
      out[i] = complete(config, client, bundles[i]);
    }
    return out;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < bundles.size();
           i = next.fetch_add(1)) {
        out[i] = complete(config, client, bundles[i]);
      }
    });
  }
  for (auto& t : pool) t.join();
  return out;
}

}  // namespace tgt
