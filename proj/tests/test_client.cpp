#include "tgt/client.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>

#include "doctest.h"

using namespace tgt;

namespace {

PromptBundle bundle_with_query(std::uint64_t id, std::string query) {
  PromptBundle b;
  b.query_id = id;
  b.query = std::move(query);
  b.assembled = b.query;
  return b;
}

struct FlakyClient : ChatClient {
  explicit FlakyClient(std::size_t failures) : failures_left(failures) {}
  std::atomic<std::size_t> failures_left;
  std::atomic<std::size_t> calls{0};
  std::string send(const PromptBundle& bundle) override {
    ++calls;
    std::size_t left = failures_left.load();
    while (left > 0 && !failures_left.compare_exchange_weak(left, left - 1)) {
    }
    if (left > 0) throw TransportError("injected fault");
    return "ok " + std::to_string(bundle.query_id);
  }
};

struct AuthFailClient : ChatClient {
  std::size_t calls{0};
  std::string send(const PromptBundle&) override {
    ++calls;
    throw AuthError("bad key");
  }
};

EndpointConfig fast_config() {
  EndpointConfig c;
  c.max_retries = 2;
  return c;
}

}  // namespace

TEST_CASE("perfect and always-wrong mocks use the true-answer table") {
  std::map<std::uint64_t, node_id> answers{{0, 8228}, {1, 9}};
  MockChatClient perfect(MockKind::kPerfect, answers);
  MockChatClient wrong(MockKind::kAlwaysWrong, answers);

  CHECK(perfect.send(bundle_with_query(0, "")) ==
        "`Destination Node' is 8228.");
  CHECK(perfect.send(bundle_with_query(1, "")) == "`Destination Node' is 9.");
  CHECK(wrong.send(bundle_with_query(0, "")) != "`Destination Node' is 8228.");
  CHECK(wrong.send(bundle_with_query(1, "")) != "`Destination Node' is 9.");
}

TEST_CASE("recency mock answers the last tuple in the query") {
  MockChatClient recency(MockKind::kRecency);
  const auto b = bundle_with_query(
      0,
      "`Source Node' 1 has the following past interactions: (1,8228,36), "
      "(1,8230,77). Please predict the most likely `Destination Node' for "
      "`Source Node' 1 at `Timestamp' 150.");
  CHECK(recency.send(b) == "`Destination Node' is 8230.");
  CHECK(recency.send(bundle_with_query(1, "`Source Node' 5 has no past "
                                          "interactions.")) ==
        "`Destination Node' is unknown.");
}

TEST_CASE("frequency mock counts tuples, ties break toward recency") {
  MockChatClient freq(MockKind::kFrequency);
  CHECK(freq.send(bundle_with_query(
            0, "(1,7,1), (1,8,2), (1,7,3), (1,9,4)")) ==
        "`Destination Node' is 7.");
  // all singletons: the most recent wins
  CHECK(freq.send(bundle_with_query(0, "(1,7,1), (1,8,2), (1,9,3)")) ==
        "`Destination Node' is 9.");
}

TEST_CASE("scripted mock replays a jsonl file") {
  const std::string path = "/tmp/tgt_test_script.jsonl";
  {
    std::ofstream out(path);
    out << R"({"query_id":0,"text":"first reply"})" << "\n";
    out << R"({"query_id":2,"text":"third reply"})" << "\n";
  }
  auto client = MockChatClient::scripted_from_file(path);
  CHECK(client->send(bundle_with_query(0, "")) == "first reply");
  CHECK(client->send(bundle_with_query(2, "")) == "third reply");
  CHECK(client->send(bundle_with_query(1, "")) == "");
  std::remove(path.c_str());
  CHECK_THROWS(MockChatClient::scripted_from_file(path));
}

TEST_CASE("mock names map to kinds") {
  CHECK(mock_kind_from_name("perfect") == MockKind::kPerfect);
  CHECK(mock_kind_from_name("always-wrong") == MockKind::kAlwaysWrong);
  CHECK(mock_kind_from_name("recency") == MockKind::kRecency);
  CHECK(mock_kind_from_name("frequency") == MockKind::kFrequency);
  CHECK(mock_kind_from_name("scripted") == MockKind::kScripted);
  CHECK(!mock_kind_from_name("nope").has_value());
}

TEST_CASE("complete retries transient faults with bounded attempts") {
  SUBCASE("recovers within the retry budget") {
    FlakyClient flaky(2);
    const auto c = complete(fast_config(), flaky, bundle_with_query(7, ""));
    CHECK(c.query_id == 7);
    CHECK(c.text == "ok 7");
    CHECK(c.attempt_count == 3);
    CHECK(!c.error.has_value());
  }
  SUBCASE("gives up after max_retries+1 attempts") {
    FlakyClient flaky(100);
    const auto c = complete(fast_config(), flaky, bundle_with_query(0, ""));
    CHECK(c.attempt_count == 3);
    CHECK(flaky.calls == 3);
    REQUIRE(c.error.has_value());
    CHECK(c.error->find("injected fault") != std::string::npos);
  }
  SUBCASE("auth failures are not retried") {
    AuthFailClient auth;
    const auto c = complete(fast_config(), auth, bundle_with_query(0, ""));
    CHECK(auth.calls == 1);
    CHECK(c.attempt_count == 1);
    REQUIRE(c.error.has_value());
  }
}

TEST_CASE("complete_batch keeps input order at any parallelism") {
  MockChatClient perfect(MockKind::kPerfect, [] {
    std::map<std::uint64_t, node_id> m;
    for (std::uint64_t i = 0; i < 64; ++i) m[i] = static_cast<node_id>(1000 + i);
    return m;
  }());
  std::vector<PromptBundle> bundles;
  for (std::uint64_t i = 0; i < 64; ++i) bundles.push_back(bundle_with_query(i, ""));

  EndpointConfig serial = fast_config();
  serial.max_parallel = 1;
  EndpointConfig wide = fast_config();
  wide.max_parallel = 8;

  const auto a = complete_batch(serial, perfect, bundles);
  const auto b = complete_batch(wide, perfect, bundles);
  REQUIRE(a.size() == 64);
  REQUIRE(b.size() == 64);
  for (std::size_t i = 0; i < 64; ++i) {
    CHECK(a[i].query_id == i);
    CHECK(a[i].text == "`Destination Node' is " + std::to_string(1000 + i) + ".");
    CHECK(b[i].query_id == a[i].query_id);
    CHECK(b[i].text == a[i].text);
  }
}

TEST_CASE("batch with faults records per-query errors in place") {
  struct EvenFails : ChatClient {
    std::string send(const PromptBundle& b) override {
      if (b.query_id % 2 == 0) throw TransportError("even ids fail");
      return "odd ok";
    }
  } client;
  std::vector<PromptBundle> bundles;
  for (std::uint64_t i = 0; i < 10; ++i) bundles.push_back(bundle_with_query(i, ""));
  EndpointConfig cfg = fast_config();
  cfg.max_retries = 0;
  cfg.max_parallel = 4;
  const auto out = complete_batch(cfg, client, bundles);
  for (std::size_t i = 0; i < 10; ++i) {
    CHECK(out[i].error.has_value() == (i % 2 == 0));
    if (i % 2 == 1) CHECK(out[i].text == "odd ok");
  }
}

TEST_CASE("http client fails fast on an unreachable endpoint") {
  EndpointConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";  // nothing listens on port 1
  cfg.model_name = "m";
  cfg.timeout_seconds = 1.0;
  HttpChatClient client(cfg);
  CHECK_THROWS_AS(client.send(bundle_with_query(0, "hello")),
                  TransportError);
}
