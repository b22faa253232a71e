#include "tgt/neighbor_index.hpp"

#include "doctest.h"
#include "oracles.hpp"

using namespace tgt;

TEST_CASE("update and query basics") {
  NeighborIndex index;
  index.update({1, 2, 10});
  CHECK(index.recent_neighbors(1, 100, 10) ==
        std::vector<NeighborEvent>{{2, 10}});
  // bidirectional by default
  CHECK(index.recent_neighbors(2, 100, 10) ==
        std::vector<NeighborEvent>{{1, 10}});

  index.update({1, 3, 12});
  CHECK(index.recent_neighbors(1, 100, 10) ==
        std::vector<NeighborEvent>{{2, 10}, {3, 12}});
}

TEST_CASE("directed mode records only src->dst") {
  NeighborIndex index(/*bidirectional=*/false);
  index.update({1, 2, 10});
  CHECK(index.recent_neighbors(2, 100, 10).empty());
}

TEST_CASE("strict cutoff excludes same-instant interactions") {
  NeighborIndex index;
  index.update({1, 2, 10});
  index.update({1, 3, 12});
  index.update({1, 2, 15});
  CHECK(index.recent_neighbors(1, 15, 2) ==
        std::vector<NeighborEvent>{{2, 10}, {3, 12}});
}

TEST_CASE("unknown node and m=0 yield empty") {
  NeighborIndex index;
  CHECK(index.recent_neighbors(99, 100, 5).empty());
  index.update({1, 2, 10});
  CHECK(index.recent_neighbors(1, 100, 0).empty());
}

TEST_CASE("out-of-order insertion rejected") {
  NeighborIndex index;
  index.update({1, 2, 10});
  CHECK_THROWS_AS(index.update({3, 4, 5}), std::invalid_argument);
}

TEST_CASE("recent_neighbors equals the full-scan oracle") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto s = oracles::random_stream(seed, {.num_edges = 1000, .num_nodes = 100});
    NeighborIndex index;
    for (const auto& e : s.edges()) index.update(e);

    std::mt19937_64 rng(seed + 999);
    for (int trial = 0; trial < 50; ++trial) {
      const node_id u = static_cast<node_id>(rng() % 100);
      const timestamp t = static_cast<timestamp>(rng() % 3000);
      for (std::size_t m : {0, 1, 2, 5, 10}) {
        CHECK(index.recent_neighbors(u, t, m) ==
              oracles::recent_neighbors_bruteforce(s, u, t, m, true,
                                                   s.edges().size()));
      }
    }
  }
}

TEST_CASE("suffix and monotonicity properties") {
  auto s = oracles::random_stream(3, {.num_edges = 500, .num_nodes = 40});
  NeighborIndex index;
  for (const auto& e : s.edges()) index.update(e);

  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const node_id u = static_cast<node_id>(rng() % 40);
    const timestamp t = static_cast<timestamp>(rng() % 2000);
    const auto full = index.recent_neighbors(u, t, 100000);
    for (std::size_t m1 : {1, 2, 5}) {
      const auto r1 = index.recent_neighbors(u, t, m1);
      // suffix of the unbounded result
      REQUIRE(r1.size() <= full.size());
      CHECK(std::equal(r1.begin(), r1.end(), full.end() - r1.size()));
      for (const auto& ev : r1) CHECK(ev.ts < t);
    }
  }
}

TEST_CASE("khop walk semantics") {
  SUBCASE("path graph: walks of length 2 reach both ends") {
    auto s = make_stream({{0, 1, 0}, {1, 2, 1}}, false, 3, 3);
    auto hop2 = khop_bruteforce(s, 0, 10, 2);
    CHECK(hop2 == std::unordered_set<node_id>{0, 2});
  }
  SUBCASE("no edges before t gives empty set") {
    auto s = make_stream({{0, 1, 5}}, false, 2, 2);
    CHECK(khop_bruteforce(s, 0, 5, 1).empty());
  }
  SUBCASE("k=0 rejected") {
    auto s = make_stream({{0, 1, 0}}, false, 2, 2);
    CHECK_THROWS_AS(khop_bruteforce(s, 0, 10, 0), std::invalid_argument);
  }
  SUBCASE("matches the adjacency-power oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto s = oracles::random_stream(seed, {.num_edges = 100, .num_nodes = 30});
      std::mt19937_64 rng(seed);
      for (int trial = 0; trial < 10; ++trial) {
        const node_id u = static_cast<node_id>(rng() % 30);
        const timestamp t = static_cast<timestamp>(rng() % 300);
        for (std::size_t k : {1, 2, 3}) {
          CHECK(khop_bruteforce(s, u, t, k) ==
                oracles::khop_matrix_oracle(s, u, t, k));
        }
      }
    }
  }
}
