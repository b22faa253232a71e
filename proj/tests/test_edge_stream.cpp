#include "tgt/edge_stream.hpp"

#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "oracles.hpp"

using namespace tgt;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  const std::string path = "/tmp/tgt_test_" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("bipartite ingest assigns ids chronologically per partition") {
  EdgeStream s = ingest_rows(
      {{"a", "X", 0}, {"b", "Y", 36}, {"b", "Y", 77}}, /*bipartite=*/true);
  // a->0, b->1, X->2, Y->3 (destinations offset by source-partition size 2)
  REQUIRE(s.edges().size() == 3);
  CHECK(s.edges()[0] == Edge{0, 2, 0});
  CHECK(s.edges()[1] == Edge{1, 3, 36});
  CHECK(s.edges()[2] == Edge{1, 3, 77});
  CHECK(s.node_map().src_partition_size == 2);
  CHECK(s.node_map().dst_partition_size == 2);
  CHECK(s.node_map().dst_id_begin() == 2);
}

TEST_CASE("ties at one timestamp get ids in row order") {
  EdgeStream s = ingest_rows(
      {{"p", "q", 5}, {"r", "s", 5}}, /*bipartite=*/false);
  CHECK(s.edges()[0] == Edge{0, 1, 5});
  CHECK(s.edges()[1] == Edge{2, 3, 5});
}

TEST_CASE("csv ingest: header, extra columns, malformed rows") {
  SUBCASE("header and extras ignored") {
    auto path = write_temp("ok.csv", "src,dst,ts,feat\nu,v,1,0.5\nv,w,2,0.9\n");
    IngestOptions opts;
    opts.has_header = true;
    auto s = ingest_csv(path, opts);
    CHECK(s.edges().size() == 2);
    CHECK(s.num_nodes() == 3);
    std::remove(path.c_str());
  }
  SUBCASE("malformed row reports the row number") {
    auto path = write_temp("bad.csv", "u,v,1\nu,nonsense\n");
    CHECK_THROWS_WITH_AS(ingest_csv(path, {}),
                         doctest::Contains("row 2"), IngestError);
    std::remove(path.c_str());
  }
  SUBCASE("fractional timestamps rejected") {
    auto path = write_temp("frac.csv", "u,v,1.5\n");
    CHECK_THROWS_AS(ingest_csv(path, {}), IngestError);
    std::remove(path.c_str());
  }
  SUBCASE("decreasing timestamps rejected without sort option") {
    auto path = write_temp("dec.csv", "u,v,5\nv,w,3\n");
    CHECK_THROWS_AS(ingest_csv(path, {}), IngestError);
    IngestOptions opts;
    opts.sort_by_ts = true;
    auto s = ingest_csv(path, opts);
    CHECK(s.edges()[0].ts == 3);
    std::remove(path.c_str());
  }
  SUBCASE("empty file rejected") {
    auto path = write_temp("empty.csv", "");
    CHECK_THROWS_AS(ingest_csv(path, {}), IngestError);
    std::remove(path.c_str());
  }
}

TEST_CASE("chronological split") {
  SUBCASE("distinct timestamps give floor-fraction indices") {
    std::vector<Edge> edges;
    for (int i = 0; i < 1000; ++i) edges.push_back({0, 1, i});
    auto s = make_stream(std::move(edges), false, 2, 2);
    chronological_split(s, 0.70, 0.15);
    CHECK(s.train_end() == 700);
    CHECK(s.val_end() == 850);
  }
  SUBCASE("all edges at one timestamp land in train") {
    std::vector<Edge> edges(10, Edge{0, 1, 0});
    auto s = make_stream(std::move(edges), false, 2, 2);
    chronological_split(s, 0.70, 0.15);
    CHECK(s.train_end() == 10);
    CHECK(s.val_end() == 10);
  }
  SUBCASE("no later-timestamp edge lands in an earlier split") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      auto s = oracles::random_stream(seed, {.num_edges = 100, .num_nodes = 10,
                                             .max_step = 1});
      chronological_split(s, 0.70, 0.15);
      const auto& e = s.edges();
      if (s.train_end() > 0 && s.train_end() < e.size()) {
        CHECK(e[s.train_end() - 1].ts < e[s.train_end()].ts);
      }
      if (s.val_end() > 0 && s.val_end() < e.size()) {
        CHECK(e[s.val_end() - 1].ts < e[s.val_end()].ts);
      }
    }
  }
  SUBCASE("fractions out of range") {
    auto s = make_stream({{0, 1, 0}}, false, 2, 2);
    CHECK_THROWS_AS(chronological_split(s, 0.0, 0.2), std::invalid_argument);
    CHECK_THROWS_AS(chronological_split(s, 0.9, 0.2), std::invalid_argument);
  }
}

TEST_CASE("surprise index") {
  SUBCASE("test repeating only train pairs gives zero") {
    std::vector<Edge> edges{{0, 1, 0}, {0, 1, 1}, {0, 1, 2}, {0, 1, 3}};
    auto s = make_stream(std::move(edges), false, 2, 2);
    s.set_split(2, 3);
    CHECK(surprise_index(s) == 0.0);
  }
  SUBCASE("matches the brute-force pair-set oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      auto s = oracles::random_stream(seed, {.num_edges = 200, .num_nodes = 15});
      chronological_split(s, 0.70, 0.15);
      if (s.test_size() == 0) continue;
      CHECK(surprise_index(s) ==
            doctest::Approx(oracles::surprise_bruteforce(s)).epsilon(1e-12));
    }
  }
  SUBCASE("empty test set rejected") {
    auto s = make_stream({{0, 1, 0}}, false, 2, 2);
    s.set_split(1, 1);
    CHECK_THROWS_AS(surprise_index(s), std::invalid_argument);
  }
}

TEST_CASE("compute_stats") {
  SUBCASE("single edge") {
    auto s = make_stream({{0, 1, 5}}, false, 2, 2);
    const auto stats = compute_stats(s);
    CHECK(stats.num_nodes == 2);
    CHECK(stats.num_edges == 1);
    CHECK(stats.num_unique_edges == 1);
    CHECK(stats.num_unique_steps == 1);
    CHECK(stats.min_ts == 5);
    CHECK(stats.max_ts == 5);
  }
  SUBCASE("random stream matches a naive recount") {
    auto s = oracles::random_stream(7, {.num_edges = 500, .num_nodes = 25});
    const auto stats = compute_stats(s);
    std::set<std::pair<node_id, node_id>> pairs;
    std::set<timestamp> steps;
    for (const auto& e : s.edges()) {
      pairs.insert({e.src, e.dst});
      steps.insert(e.ts);
    }
    CHECK(stats.num_edges == 500);
    CHECK(stats.num_unique_edges == pairs.size());
    CHECK(stats.num_unique_steps == steps.size());
  }
}

TEST_CASE("manifest round trip reproduces the id-mapped edge sequence") {
  auto csv = write_temp("roundtrip.csv", "a,X,0\nb,Y,36\nb,Y,77\nc,X,90\n");
  IngestOptions opts;
  opts.bipartite = true;
  auto s = ingest_csv(csv, opts);
  chronological_split(s, 0.5, 0.25);

  auto manifest = write_temp("roundtrip.json", "");
  save_manifest(s, manifest);
  auto s2 = load_with_manifest(csv, manifest, {});
  CHECK(s2.edges() == s.edges());
  CHECK(s2.train_end() == s.train_end());
  CHECK(s2.val_end() == s.val_end());
  std::remove(csv.c_str());
  std::remove(manifest.c_str());
}

TEST_CASE("first-appearance order implies id order within a partition") {
  auto s = oracles::random_stream(11, {.num_edges = 300, .num_nodes = 20});
  // re-ingest through the raw-label path and scan first appearances
  std::vector<std::tuple<std::string, std::string, timestamp>> rows;
  for (const auto& e : s.edges()) {
    rows.emplace_back("n" + std::to_string(e.src), "n" + std::to_string(e.dst),
                      e.ts);
  }
  auto t = ingest_rows(rows, false);
  std::vector<node_id> first_seen;
  std::set<node_id> seen;
  for (const auto& e : t.edges()) {
    for (node_id v : {e.src, e.dst}) {
      if (seen.insert(v).second) first_seen.push_back(v);
    }
  }
  for (std::size_t i = 0; i < first_seen.size(); ++i) {
    CHECK(first_seen[i] == static_cast<node_id>(i));
  }
}
