#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tgt/client.hpp"
#include "tgt/edge_stream.hpp"
#include "tgt/eval.hpp"
#include "tgt/explain.hpp"
#include "tgt/neg_sampler.hpp"
#include "tgt/prompt.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitEndpoint = 3;

struct RunConfig {
  std::string dataset;
  bool bipartite{false};
  std::string delimiter{","};
  bool has_header{false};
  bool sort_by_ts{false};
  double train_frac{0.70};
  double val_frac{0.15};

  tgt::PromptConfig prompt;
  tgt::EndpointConfig endpoint;
  std::string mock;  // perfect | always-wrong | recency | frequency | scripted
  std::string script_path;

  std::size_t negatives{20};
  std::string negatives_file;
  bool global_negative_pool{false};
  std::uint64_t seed{42};
  bool strict_hits1{false};
  bool directed_neighbors{false};

  std::string baseline;  // "", edgebank-inf, edgebank-tw
  std::int64_t edgebank_window{0};  // 0 -> train duration

  std::string out_dir{"runs/latest"};
  std::size_t first_n{5000};
};

ordered_json config_to_json(const RunConfig& c) {
  ordered_json j;
  j["dataset"] = c.dataset;
  j["bipartite"] = c.bipartite;
  j["delimiter"] = c.delimiter;
  j["has_header"] = c.has_header;
  j["sort_by_ts"] = c.sort_by_ts;
  j["train_frac"] = c.train_frac;
  j["val_frac"] = c.val_frac;
  j["background_size"] = c.prompt.background_size;
  j["neighbors"] = c.prompt.neighbors;
  j["shots"] = c.prompt.shots;
  j["batch_size"] = c.prompt.batch_size;
  j["max_prompt_chars"] = c.prompt.max_prompt_chars;
  j["include_background"] = c.prompt.include_background;
  j["include_examples"] = c.prompt.include_examples;
  j["include_neighbors"] = c.prompt.include_neighbors;
  j["endpoint_url"] = c.endpoint.base_url;
  j["model"] = c.endpoint.model_name;
  j["api_key_env"] = c.endpoint.api_key_env_var;
  j["max_parallel"] = c.endpoint.max_parallel;
  j["timeout_seconds"] = c.endpoint.timeout_seconds;
  j["max_retries"] = c.endpoint.max_retries;
  j["temperature"] = c.endpoint.temperature;
  j["max_tokens"] = c.endpoint.max_tokens;
  j["mock"] = c.mock;
  j["script_path"] = c.script_path;
  j["negatives"] = c.negatives;
  j["negatives_file"] = c.negatives_file;
  j["global_negative_pool"] = c.global_negative_pool;
  j["seed"] = c.seed;
  j["strict_hits1"] = c.strict_hits1;
  j["directed_neighbors"] = c.directed_neighbors;
  j["baseline"] = c.baseline;
  j["edgebank_window"] = c.edgebank_window;
  j["out_dir"] = c.out_dir;
  j["first_n"] = c.first_n;
  return j;
}

void apply_config_file(RunConfig& c, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  nlohmann::json j;
  in >> j;
  auto get = [&](const char* key, auto& slot) {
    if (j.contains(key)) slot = j.at(key).get<std::decay_t<decltype(slot)>>();
  };
  get("dataset", c.dataset);
  get("bipartite", c.bipartite);
  get("delimiter", c.delimiter);
  get("has_header", c.has_header);
  get("sort_by_ts", c.sort_by_ts);
  get("train_frac", c.train_frac);
  get("val_frac", c.val_frac);
  get("background_size", c.prompt.background_size);
  get("neighbors", c.prompt.neighbors);
  get("shots", c.prompt.shots);
  get("batch_size", c.prompt.batch_size);
  get("max_prompt_chars", c.prompt.max_prompt_chars);
  get("include_background", c.prompt.include_background);
  get("include_examples", c.prompt.include_examples);
  get("include_neighbors", c.prompt.include_neighbors);
  get("endpoint_url", c.endpoint.base_url);
  get("model", c.endpoint.model_name);
  get("api_key_env", c.endpoint.api_key_env_var);
  get("max_parallel", c.endpoint.max_parallel);
  get("timeout_seconds", c.endpoint.timeout_seconds);
  get("max_retries", c.endpoint.max_retries);
  get("temperature", c.endpoint.temperature);
  get("max_tokens", c.endpoint.max_tokens);
  get("mock", c.mock);
  get("script_path", c.script_path);
  get("negatives", c.negatives);
  get("negatives_file", c.negatives_file);
  get("global_negative_pool", c.global_negative_pool);
  get("seed", c.seed);
  get("strict_hits1", c.strict_hits1);
  get("directed_neighbors", c.directed_neighbors);
  get("baseline", c.baseline);
  get("edgebank_window", c.edgebank_window);
  get("out_dir", c.out_dir);
  get("first_n", c.first_n);
}

tgt::EdgeStream load_stream(const RunConfig& c) {
  tgt::IngestOptions opts;
  opts.bipartite = c.bipartite;
  opts.delimiter = c.delimiter.empty() ? ',' : c.delimiter[0];
  opts.has_header = c.has_header;
  opts.sort_by_ts = c.sort_by_ts;
  auto stream = tgt::ingest_csv(c.dataset, opts);
  tgt::chronological_split(stream, c.train_frac, c.val_frac);
  return stream;
}

std::unique_ptr<tgt::ChatClient> make_client(
    const RunConfig& c, const tgt::EdgeStream& stream) {
  if (!c.mock.empty()) {
    if (c.mock == "scripted") {
      return tgt::MockChatClient::scripted_from_file(c.script_path);
    }
    auto kind = tgt::mock_kind_from_name(c.mock);
    if (!kind) throw std::invalid_argument("unknown mock: " + c.mock);
    std::map<std::uint64_t, tgt::node_id> answers;
    const auto& edges = stream.edges();
    for (std::size_t i = stream.val_end(); i < edges.size(); ++i) {
      answers[i - stream.val_end()] = edges[i].dst;
    }
    return std::make_unique<tgt::MockChatClient>(*kind, std::move(answers));
  }
  if (c.endpoint.base_url.empty()) {
    throw std::invalid_argument("either --mock or --endpoint-url is required");
  }
  return std::make_unique<tgt::HttpChatClient>(c.endpoint);
}

tgt::EvalConfig make_eval_config(const RunConfig& c) {
  tgt::EvalConfig e;
  e.prompt = c.prompt;
  e.endpoint = c.endpoint;
  e.negatives = c.negatives;
  e.seed = c.seed;
  e.strict_hits1 = c.strict_hits1;
  e.bidirectional_neighbors = !c.directed_neighbors;
  e.method_label = c.mock.empty() ? "tgtalker" : "mock-" + c.mock;
  return e;
}

void write_manifest(const RunConfig& c, const tgt::EdgeStream& stream,
                    const fs::path& dir) {
  ordered_json j;
  j["config"] = config_to_json(c);
  j["dataset_manifest"] = {
      {"num_edges", stream.edges().size()},
      {"num_nodes", stream.num_nodes()},
      {"train_end", stream.train_end()},
      {"val_end", stream.val_end()},
      {"bipartite", stream.bipartite()},
  };
  j["endpoint_identity"] =
      c.mock.empty() ? c.endpoint.base_url + "#" + c.endpoint.model_name
                     : "mock-" + c.mock;
  const char* rev = std::getenv("TGT_REVISION");
  j["revision"] = rev ? rev : "unversioned";
  j["config_hash"] = std::hash<std::string>{}(config_to_json(c).dump());
  std::ofstream out(dir / "manifest.json");
  out << j.dump(2) << "\n";
}

struct RunOutputs {
  tgt::EvalResult result;
  fs::path dir;
};

RunOutputs run_one_eval(const RunConfig& c) {
  auto stream = load_stream(c);
  tgt::NegativeSampler sampler(stream, c.negatives, c.seed,
                               c.global_negative_pool);
  std::optional<tgt::FixedNegatives> fixed;
  if (!c.negatives_file.empty()) {
    fixed = tgt::load_fixed_negatives(c.negatives_file);
  }

  tgt::EvalResult result;
  if (!c.baseline.empty()) {
    tgt::EdgeBank::Variant variant;
    tgt::timestamp window = tgt::kInfiniteWindow;
    if (c.baseline == "edgebank-inf") {
      variant = tgt::EdgeBank::Variant::kInfinite;
    } else if (c.baseline == "edgebank-tw") {
      variant = tgt::EdgeBank::Variant::kTimeWindow;
      window = c.edgebank_window > 0 ? c.edgebank_window
                                     : tgt::default_tw_window(stream);
    } else {
      throw std::invalid_argument("unknown baseline: " + c.baseline);
    }
    result = tgt::run_edgebank(stream, variant, window, c.prompt.batch_size,
                               sampler, fixed ? &*fixed : nullptr);
  } else {
    auto client = make_client(c, stream);
    result = tgt::run_eval(stream, make_eval_config(c), *client, sampler,
                           fixed ? &*fixed : nullptr);
  }

  const fs::path dir(c.out_dir);
  fs::create_directories(dir);
  tgt::save_records(result.records, (dir / "results.jsonl").string());

  std::vector<tgt::NegativeSet> negs;
  negs.reserve(result.records.size());
  for (const auto& r : result.records) negs.push_back(r.candidates);
  tgt::save_negatives(negs, (dir / "negatives.jsonl").string());

  write_manifest(c, stream, dir);

  ordered_json summary;
  summary["method"] = result.records.empty() ? "" : result.records[0].method;
  summary["mrr"] = result.mrr;
  summary["queries"] = result.records.size();
  summary["errors"] = result.error_count;
  std::ofstream out(dir / "summary.json");
  out << summary.dump(2) << "\n";

  return {std::move(result), dir};
}

int cmd_stats(const RunConfig& c) {
  auto stream = load_stream(c);
  const auto stats = tgt::compute_stats(stream);
  std::cout << "dataset        " << c.dataset << "\n"
            << "num_nodes      " << stats.num_nodes << "\n"
            << "num_edges      " << stats.num_edges << "\n"
            << "unique_edges   " << stats.num_unique_edges << "\n"
            << "unique_steps   " << stats.num_unique_steps << "\n"
            << "surprise       " << stats.surprise << "\n"
            << "duration       [" << stats.min_ts << ", " << stats.max_ts
            << "]\n";
  return kExitOk;
}

int cmd_eval(const RunConfig& c) {
  const auto out = run_one_eval(c);
  std::cout << "MRR " << out.result.mrr << " over "
            << out.result.records.size() << " queries ("
            << out.result.error_count << " errors)\n"
            << "outputs: " << out.dir.string() << "\n";
  return kExitOk;
}

int cmd_ablate(const RunConfig& base, const std::vector<std::size_t>& neighbor_sweep,
               bool flag_sweep) {
  struct Row {
    std::string name;
    double mrr;
  };
  std::vector<Row> rows;

  auto run_variant = [&](const std::string& name, const RunConfig& c) {
    RunConfig v = c;
    v.out_dir = base.out_dir + "/" + name;
    const auto out = run_one_eval(v);
    rows.push_back({name, out.result.mrr});
  };

  if (!neighbor_sweep.empty()) {
    for (std::size_t m : neighbor_sweep) {
      RunConfig v = base;
      v.prompt.neighbors = m;
      v.prompt.include_neighbors = m > 0;
      run_variant("neighbors-" + std::to_string(m), v);
    }
  }
  if (flag_sweep) {
    run_variant("all-components", base);
    {
      RunConfig v = base;
      v.prompt.include_examples = false;
      run_variant("no-icl", v);
    }
    {
      RunConfig v = base;
      v.prompt.include_neighbors = false;
      run_variant("no-neighbors", v);
    }
    {
      RunConfig v = base;
      v.prompt.include_background = false;
      run_variant("no-background", v);
    }
    {
      RunConfig v = base;
      v.prompt.include_examples = false;
      v.prompt.include_neighbors = false;
      v.prompt.include_background = false;
      run_variant("no-components", v);
    }
  }

  std::cout << "configuration              MRR\n";
  ordered_json table = ordered_json::array();
  for (const auto& r : rows) {
    std::cout << r.name;
    for (std::size_t i = r.name.size(); i < 27; ++i) std::cout << ' ';
    std::cout << r.mrr << "\n";
    table.push_back({{"configuration", r.name}, {"mrr", r.mrr}});
  }
  fs::create_directories(base.out_dir);
  std::ofstream out(fs::path(base.out_dir) / "ablation.json");
  out << table.dump(2) << "\n";
  return kExitOk;
}

int cmd_explain(const RunConfig& c, const std::string& run_dir) {
  auto stream = load_stream(c);
  const fs::path dir = run_dir.empty() ? fs::path(c.out_dir) : fs::path(run_dir);
  const auto records_path = dir / "results.jsonl";
  if (!fs::exists(records_path)) {
    throw std::runtime_error("missing records: " + records_path.string());
  }
  auto predictions = tgt::load_records(records_path.string());

  std::unique_ptr<tgt::ChatClient> client;
  if (!c.mock.empty()) {
    client = std::make_unique<tgt::MockExplainClient>();
  } else {
    client = std::make_unique<tgt::HttpChatClient>(c.endpoint);
  }

  const auto result = tgt::run_explain(stream, make_eval_config(c), *client,
                                       predictions, c.first_n);
  tgt::save_explanations(result.records, (dir / "explanations.jsonl").string());
  tgt::save_report_json(result.report, (dir / "category_report.json").string());
  tgt::save_report_csv(result.report, (dir / "category_report.csv").string());

  std::cout << "classified " << result.report.total
            << " explanations; overall MRR " << result.report.overall_mrr
            << "\n";
  for (const auto& e : result.report.entries) {
    if (e.count == 0) continue;
    std::cout << "  " << e.label << ": " << e.count << " (" << e.fraction
              << ")\n";
  }
  return kExitOk;
}

void add_common_options(CLI::App* app, RunConfig& c, std::string& config_file) {
  app->add_option("--config", config_file, "JSON config file (flags override)");
  app->add_option("--dataset", c.dataset, "edge-list CSV path");
  app->add_flag("--bipartite", c.bipartite, "treat the graph as bipartite");
  app->add_option("--delimiter", c.delimiter, "field delimiter");
  app->add_flag("--header", c.has_header, "skip a header row");
  app->add_flag("--sort", c.sort_by_ts, "stable-sort rows by timestamp");
  app->add_option("--train-frac", c.train_frac);
  app->add_option("--val-frac", c.val_frac);
  app->add_option("--seed", c.seed, "master seed; all randomness derives from it");
  app->add_option("--out", c.out_dir, "output directory");
}

void add_eval_options(CLI::App* app, RunConfig& c) {
  app->add_option("--background-size", c.prompt.background_size);
  app->add_option("--shots", c.prompt.shots);
  app->add_option("--neighbors", c.prompt.neighbors);
  app->add_option("--batch-size", c.prompt.batch_size);
  app->add_option("--max-prompt-chars", c.prompt.max_prompt_chars);
  app->add_flag("--no-background",
                [&c](std::int64_t) { c.prompt.include_background = false; },
                "ablate the background set");
  app->add_flag("--no-icl",
                [&c](std::int64_t) { c.prompt.include_examples = false; },
                "ablate in-context examples");
  app->add_flag("--no-neighbors",
                [&c](std::int64_t) { c.prompt.include_neighbors = false; },
                "ablate temporal neighbors");
  app->add_option("--mock", c.mock,
                  "mock client: perfect|always-wrong|recency|frequency|scripted");
  app->add_option("--script", c.script_path, "JSONL script for --mock scripted");
  app->add_option("--endpoint-url", c.endpoint.base_url);
  app->add_option("--model", c.endpoint.model_name);
  app->add_option("--api-key-env", c.endpoint.api_key_env_var);
  app->add_option("--max-parallel", c.endpoint.max_parallel);
  app->add_option("--timeout", c.endpoint.timeout_seconds);
  app->add_option("--max-retries", c.endpoint.max_retries);
  app->add_option("--temperature", c.endpoint.temperature);
  app->add_option("--max-tokens", c.endpoint.max_tokens);
  app->add_option("--transcript", c.endpoint.transcript_path,
                  "JSONL request/response audit log");
  app->add_option("--negatives", c.negatives, "candidates per query");
  app->add_option("--negatives-file", c.negatives_file,
                  "fixed negative sets (JSONL)");
  app->add_flag("--global-negative-pool", c.global_negative_pool,
                "draw historical negatives from all train destinations");
  app->add_flag("--strict-hits1", c.strict_hits1,
                "score only the top prediction");
  app->add_flag("--directed", c.directed_neighbors,
                "record neighbor histories in edge direction only");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal link prediction with LLM prompting, EdgeBank "
               "baselines and link explanations"};
  app.require_subcommand(1);

  RunConfig c;
  std::string config_file;

  auto* stats = app.add_subcommand("stats", "dataset statistics");
  add_common_options(stats, c, config_file);

  auto* eval = app.add_subcommand("eval", "run the streaming evaluation");
  add_common_options(eval, c, config_file);
  add_eval_options(eval, c);
  eval->add_option("--baseline", c.baseline,
                   "edgebank-inf | edgebank-tw instead of an LLM");
  eval->add_option("--edgebank-window", c.edgebank_window,
                   "tw window (0 = train duration)");

  auto* ablate = app.add_subcommand("ablate", "sweep prompt configurations");
  add_common_options(ablate, c, config_file);
  add_eval_options(ablate, c);
  std::vector<std::size_t> neighbor_sweep;
  bool flag_sweep = false;
  ablate->add_option("--sweep-neighbors", neighbor_sweep,
                     "neighbor counts, e.g. 0 1 2 5 10");
  ablate->add_flag("--sweep-flags", flag_sweep,
                   "run the component on/off grid");

  auto* explain = app.add_subcommand("explain", "explanation generation + "
                                                "classification report");
  add_common_options(explain, c, config_file);
  add_eval_options(explain, c);
  std::string run_dir;
  explain->add_option("--run-dir", run_dir, "directory of a completed eval run");
  explain->add_option("--first-n", c.first_n, "how many test predictions");

  // config file values load first so that explicit flags override them
  try {
    for (int i = 1; i + 1 < argc; ++i) {
      if (std::string(argv[i]) == "--config") {
        apply_config_file(c, argv[i + 1]);
        break;
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*stats) return cmd_stats(c);
    if (*eval) return cmd_eval(c);
    if (*ablate) {
      if (neighbor_sweep.empty() && !flag_sweep) {
        std::cerr << "config error: ablate needs --sweep-neighbors or "
                     "--sweep-flags\n";
        return kExitConfig;
      }
      return cmd_ablate(c, neighbor_sweep, flag_sweep);
    }
    if (*explain) return cmd_explain(c, run_dir);
  } catch (const tgt::AuthError& e) {
    std::cerr << "endpoint error: " << e.what() << "\n";
    return kExitEndpoint;
  } catch (const tgt::TransportError& e) {
    std::cerr << "endpoint error: " << e.what() << "\n";
    return kExitEndpoint;
  } catch (const tgt::IngestError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitOk;
}
