// Copyright 2026 The relcomp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "relcomp/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "relcomp/bundled.hpp"
#include "relcomp/corpus.hpp"
#include "relcomp/dense.hpp"
#include "relcomp/error.hpp"
#include "relcomp/evaluation.hpp"
#include "relcomp/hashing.hpp"
#include "relcomp/http_gateway.hpp"
#include "relcomp/lexical.hpp"
#include "relcomp/llm.hpp"
#include "relcomp/pipeline.hpp"
#include "relcomp/relations.hpp"
#include "relcomp/text.hpp"

namespace relcomp {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr int kIndexFormatVersion = 1;
constexpr int kManifestVersion = 1;

std::string now_utc() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? v : "";
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const fs::path& path) {
  const auto text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw Error("write failed: " + path.string());
}

// Write-then-rename so an interrupted run never leaves a torn manifest.
void write_text_atomic(const fs::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  write_text(tmp, text);
  fs::rename(tmp, path);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path q(p);
  return q.is_absolute() ? q : base / q;
}

std::string trace_ref(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "traces/%06zu.json", i);
  return buf;
}

// ---------------------------------------------------------------------------
// Index directories: corpus.bin, lexical.bin, dense.vec, index.json

struct IndexBundle {
  Corpus corpus;
  std::optional<LexicalIndex> lexical;
  std::optional<DenseIndex> dense;
  json meta;
};

IndexBundle load_index_dir(const fs::path& dir, bool with_lexical, bool with_dense) {
  if (!fs::exists(dir / "index.json")) {
    throw ConfigError("not an index directory (no index.json): " + dir.string());
  }
  IndexBundle b;
  b.meta = read_json_file(dir / "index.json");
  if (b.meta.value("format_version", 0) != kIndexFormatVersion) {
    throw FormatError((dir / "index.json").string() + ": unsupported format_version");
  }
  b.corpus = load_corpus(dir / "corpus.bin");
  if (with_lexical) b.lexical = load_lexical_index(dir / "lexical.bin");
  if (with_dense) {
    b.dense = DenseIndex::import(b.corpus, read_vector_file(dir / "dense.vec"),
                                 b.meta.at("provider").at("name").get<std::string>());
  }
  return b;
}

HttpEndpoint endpoint_from_json(const json& j, const std::string& default_path) {
  HttpEndpoint ep;
  ep.base_url = j.value("base_url", std::string());
  ep.path = j.value("path", default_path);
  if (j.contains("max_retries")) ep.max_retries = j["max_retries"].get<int>();
  if (j.contains("timeout_ms")) {
    ep.read_timeout = std::chrono::milliseconds(j["timeout_ms"].get<long>());
  }
  return ep;
}

// Query-side encoder matching the one that produced the index.
std::unique_ptr<EmbeddingProvider> query_provider(const json& meta, const json& override_spec) {
  const auto& p = meta.at("provider");
  const auto kind = p.at("kind").get<std::string>();
  const auto name = p.at("name").get<std::string>();
  const auto dim = p.at("dimension").get<std::size_t>();
  if (override_spec.is_object()) {
    auto ep = endpoint_from_json(override_spec, "/embed");
    if (ep.base_url.empty()) throw ConfigError("embedding: 'base_url' is required");
    return std::make_unique<RemoteEmbeddingProvider>(
        ep, override_spec.value("name", name), override_spec.value("dimension", dim),
        override_spec.value("batch_size", std::size_t{32}),
        override_spec.value("max_in_flight", std::size_t{4}));
  }
  if (kind == "hash") {
    return std::make_unique<HashEmbeddingProvider>(dim, p.at("seed").get<std::uint64_t>());
  }
  if (kind == "remote") {
    auto ep = endpoint_from_json(p, "/embed");
    return std::make_unique<RemoteEmbeddingProvider>(ep, name, dim);
  }
  throw ConfigError("index was built from imported vectors; the run config needs an "
                    "'embedding' endpoint for query encoding");
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  json raw;
  fs::path index_dir;
  std::optional<fs::path> registry;
  PipelineConfig pipeline;
  json gateway;
  json embedding;
  std::size_t token_budget = kDefaultTokenBudget;
  std::ptrdiff_t max_in_flight = 8;
};

RunConfig load_run_config(const fs::path& path) {
  RunConfig c;
  c.raw = read_json_file(path);
  const auto base = path.parent_path();
  if (!c.raw.is_object()) throw ConfigError(path.string() + ": config must be a JSON object");
  try {
    for (const auto& [key, value] : c.raw.items()) {
      if (key == "index_dir") {
        c.index_dir = resolve(base, value.get<std::string>());
      } else if (key == "registry") {
        c.registry = resolve(base, value.get<std::string>());
      } else if (key == "pipeline") {
        c.pipeline = PipelineConfig::from_json(value.dump());
      } else if (key == "gateway") {
        c.gateway = value;
        if (value.contains("script")) {
          c.gateway["script"] = resolve(base, value["script"].get<std::string>()).string();
        }
      } else if (key == "embedding") {
        c.embedding = value;
      } else if (key == "token_budget") {
        c.token_budget = value.get<std::size_t>();
      } else if (key == "max_in_flight") {
        c.max_in_flight = value.get<std::ptrdiff_t>();
      } else {
        throw ConfigError(path.string() + ": unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  if (c.index_dir.empty()) throw ConfigError(path.string() + ": 'index_dir' is required");
  if (c.token_budget < 1) throw ConfigError(path.string() + ": token_budget must be >= 1");
  if (c.max_in_flight < 1 || c.max_in_flight > 1024) {
    throw ConfigError(path.string() + ": max_in_flight must be in [1, 1024]");
  }
  return c;
}

RelationRegistry load_registry(const RunConfig& c) {
  return c.registry ? RelationRegistry::load(*c.registry) : RelationRegistry::bundled();
}

std::string registry_hash(const RunConfig& c) {
  return c.registry ? sha256_file_hex(*c.registry) : sha256_hex(bundled::default_registry_json());
}

std::unique_ptr<LlmGateway> make_gateway(const RunConfig& c) {
  if (!c.gateway.is_object()) throw ConfigError("config: 'gateway' section is required");
  const auto kind = c.gateway.value("kind", std::string());
  if (kind == "mock") {
    if (!c.gateway.contains("script")) throw ConfigError("gateway: mock needs a 'script'");
    return MockGateway::from_script_file(c.gateway["script"].get<std::string>(),
                                         c.token_budget);
  }
  if (kind == "http") {
    auto ep = endpoint_from_json(c.gateway, "/v1/chat/completions");
    if (ep.base_url.empty()) ep.base_url = env_or_empty(kLlmUrlEnv);
    if (ep.base_url.empty()) {
      throw ConfigError(std::string("gateway: no base_url in config and ") + kLlmUrlEnv +
                        " is not set");
    }
    ep.api_key = env_or_empty(kLlmKeyEnv);
    return std::make_unique<HttpChatGateway>(ep, c.token_budget, c.max_in_flight);
  }
  throw ConfigError("gateway: kind must be 'mock' or 'http'");
}

bool uses_lexical(RetrievalMode m) {
  return m == RetrievalMode::hybrid || m == RetrievalMode::lexical_only;
}
bool uses_dense(RetrievalMode m) {
  return m == RetrievalMode::hybrid || m == RetrievalMode::dense_only;
}

// ---------------------------------------------------------------------------
// index build

struct IndexBuildOptions {
  std::string corpus;
  std::string out;
  std::string provider = "hash";
  std::size_t dimension = 256;
  std::uint64_t seed = 13;
  std::string vectors;
  std::string provider_name;
  std::string embed_url;
  std::string embed_path = "/embed";
  std::size_t batch_size = 32;
  std::size_t max_in_flight = 4;
};

int cmd_index_build(const IndexBuildOptions& o, std::ostream& out, std::ostream& err) {
  IngestLog log;
  const auto corpus = ingest_tsv(o.corpus, &log);
  for (const auto line : log.unescaped_lines) {
    err << "warning: " << o.corpus << ":" << line << ": quoted field unescaped\n";
  }
  const auto lexical = LexicalIndex::build(corpus);

  json provider;
  DenseIndex dense;
  if (o.provider == "hash") {
    HashEmbeddingProvider p(o.dimension, o.seed);
    dense = DenseIndex::build(corpus, p);
    provider = {{"kind", "hash"}, {"name", p.name()}, {"dimension", p.dimension()},
                {"seed", o.seed}};
  } else if (o.provider == "remote") {
    HttpEndpoint ep;
    ep.base_url = o.embed_url;
    ep.path = o.embed_path;
    if (ep.base_url.empty()) throw ConfigError("--dense-provider remote needs --embed-url");
    const auto name = o.provider_name.empty() ? std::string("remote") : o.provider_name;
    RemoteEmbeddingProvider p(ep, name, o.dimension, o.batch_size, o.max_in_flight);
    dense = DenseIndex::build(corpus, p);
    provider = {{"kind", "remote"}, {"name", name}, {"dimension", o.dimension},
                {"base_url", ep.base_url}, {"path", ep.path}};
  } else {
    if (o.vectors.empty()) throw ConfigError("--dense-provider import needs --vectors");
    if (o.provider_name.empty()) {
      throw ConfigError("--dense-provider import needs --provider-name");
    }
    dense = DenseIndex::import(corpus, read_vector_file(o.vectors), o.provider_name);
    provider = {{"kind", "import"}, {"name", o.provider_name}, {"dimension", dense.dimension()}};
  }

  const fs::path dir(o.out);
  fs::create_directories(dir);
  save_corpus(corpus, dir / "corpus.bin");
  save_lexical_index(lexical, dir / "lexical.bin");
  write_vector_file(dense.to_vector_file(), dir / "dense.vec");

  ordered_json meta{
      {"format_version", kIndexFormatVersion},
      {"created_at", now_utc()},
      {"corpus_source", fs::absolute(o.corpus).string()},
      {"corpus_tsv_sha256", sha256_file_hex(o.corpus)},
      {"passages", corpus.stats().passage_count},
      {"total_tokens", corpus.stats().total_tokens},
      {"avg_passage_tokens", corpus.stats().avg_passage_tokens},
      {"bm25", {{"k1", lexical.params().k1}, {"b", lexical.params().b}}},
      {"provider", provider},
      {"files",
       {{"corpus.bin", sha256_file_hex(dir / "corpus.bin")},
        {"lexical.bin", sha256_file_hex(dir / "lexical.bin")},
        {"dense.vec", sha256_file_hex(dir / "dense.vec")}}}};
  write_text(dir / "index.json", meta.dump(2) + "\n");

  out << "indexed " << corpus.size() << " passages (" << corpus.stats().total_tokens
      << " tokens, " << lexical.term_count() << " terms, dense " << dense.dimension()
      << "d via " << provider["name"].get<std::string>() << ") into " << dir.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// paraphrase gen

struct ParaphraseOptions {
  std::string relation;
  bool live = false;
  std::string script;
  std::string model = "gpt-4o-mini";
  std::string registry;
  std::string base_url;
};

int cmd_paraphrase_gen(const ParaphraseOptions& o, std::ostream& out, std::ostream& err) {
  std::unique_ptr<LlmGateway> gateway;
  if (o.live) {
    HttpEndpoint ep;
    ep.base_url = o.base_url.empty() ? env_or_empty(kLlmUrlEnv) : o.base_url;
    ep.path = "/v1/chat/completions";
    ep.api_key = env_or_empty(kLlmKeyEnv);
    if (ep.base_url.empty()) {
      throw ConfigError(std::string("--live needs --base-url or ") + kLlmUrlEnv);
    }
    gateway = std::make_unique<HttpChatGateway>(ep);
  } else if (!o.script.empty()) {
    gateway = MockGateway::from_script_file(o.script);
  } else {
    // Offline default: answer from the registry's curated paraphrase sets.
    auto registry = o.registry.empty() ? RelationRegistry::bundled()
                                       : RelationRegistry::load(o.registry);
    const auto* profile = registry.find(o.relation);
    if (profile == nullptr) {
      throw ConfigError("no offline paraphrases for relation '" + o.relation +
                        "'; use --live or --script");
    }
    gateway = std::make_unique<MockGateway>(
        std::vector<ScriptEntry>{},
        [list = render_list(profile->paraphrases)](const ChatRequest&) {
          return std::optional<std::string>(list);
        });
  }
  const auto result = generate_paraphrases(o.relation, *gateway, o.model);
  for (const auto& w : result.warnings) err << "warning: " << w << '\n';
  for (const auto& p : result.paraphrases) out << p << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// run

struct RunOptions {
  std::string config;
  std::string dataset;
  std::string out;
  std::size_t workers = 1;
  bool resume = false;
  std::string ablation;
  std::string record;
};

ordered_json run_inputs(const RunOptions& o, const RunConfig& c) {
  ordered_json inputs{
      {"config", fs::absolute(o.config).string()},
      {"config_sha256", sha256_file_hex(o.config)},
      {"dataset", fs::absolute(o.dataset).string()},
      {"dataset_sha256", sha256_file_hex(o.dataset)},
      {"index_dir", fs::absolute(c.index_dir).string()},
      {"corpus_sha256", sha256_file_hex(c.index_dir / "corpus.bin")},
      {"lexical_sha256", sha256_file_hex(c.index_dir / "lexical.bin")},
      {"dense_sha256", sha256_file_hex(c.index_dir / "dense.vec")},
      {"registry", c.registry ? fs::absolute(*c.registry).string() : std::string("bundled")},
      {"registry_sha256", registry_hash(c)}};
  if (c.gateway.contains("script")) {
    inputs["gateway_script_sha256"] = sha256_file_hex(c.gateway["script"].get<std::string>());
  }
  return inputs;
}

// Lines of a previous predictions file that are complete and have a trace.
std::size_t completed_prefix(const fs::path& out_dir, std::size_t total,
                             std::vector<std::string>& lines) {
  std::ifstream in(out_dir / "predictions.jsonl", std::ios::binary);
  std::string line;
  while (lines.size() < total && std::getline(in, line)) {
    if (in.eof()) break;  // no trailing newline: torn write
    try {
      const auto j = json::parse(line);
      if (!fs::exists(out_dir / j.at("trace_ref").get<std::string>())) break;
    } catch (const json::exception&) {
      break;
    }
    lines.push_back(line);
  }
  return lines.size();
}

int cmd_run(const RunOptions& o, std::ostream& out, std::ostream& err) {
  auto cfg = load_run_config(o.config);
  if (!o.ablation.empty()) cfg.pipeline = apply_ablation(cfg.pipeline, o.ablation);
  const auto dataset = read_dataset(o.dataset);
  std::vector<Query> queries;
  queries.reserve(dataset.size());
  for (const auto& t : dataset) queries.push_back({t.head, t.relation});

  const auto registry = load_registry(cfg);
  const fs::path out_dir(o.out);
  const auto manifest_path = out_dir / "manifest.json";
  const auto inputs = run_inputs(o, cfg);
  const auto pipeline_json = ordered_json::parse(cfg.pipeline.to_json());

  std::size_t start = 0;
  std::vector<std::string> kept;
  if (o.resume) {
    if (!fs::exists(manifest_path)) {
      throw ConfigError("--resume: no manifest in " + out_dir.string());
    }
    const auto old = ordered_json::parse(read_text(manifest_path));
    for (const auto& [key, value] : inputs.items()) {
      if (!old.at("inputs").contains(key) || old["inputs"][key] != value) {
        throw ConfigError("--resume: input '" + key + "' changed since the interrupted run");
      }
    }
    if (old.at("pipeline") != pipeline_json) {
      throw ConfigError("--resume: pipeline configuration changed since the interrupted run");
    }
    start = completed_prefix(out_dir, queries.size(), kept);
  }

  fs::create_directories(out_dir / "traces");
  {
    std::string prefix;
    for (const auto& l : kept) prefix += l + "\n";
    write_text(out_dir / "predictions.jsonl", prefix);
  }

  ordered_json manifest{{"version", kManifestVersion},
                        {"status", "running"},
                        {"started_at", now_utc()},
                        {"finished_at", nullptr},
                        {"ablation", o.ablation.empty() ? json(nullptr) : json(o.ablation)},
                        {"workers", o.workers},
                        {"config_snapshot", cfg.raw},
                        {"pipeline", pipeline_json},
                        {"inputs", inputs},
                        {"total", queries.size()},
                        {"resumed_from", start},
                        {"completed", start},
                        {"traces", json::array()}};
  write_text_atomic(manifest_path, manifest.dump(2) + "\n");

  const auto mode = cfg.pipeline.retrieval_mode;
  auto bundle = load_index_dir(cfg.index_dir, uses_lexical(mode), uses_dense(mode));
  std::unique_ptr<EmbeddingProvider> embedder;
  if (uses_dense(mode)) embedder = query_provider(bundle.meta, cfg.embedding);
  auto gateway = make_gateway(cfg);
  std::unique_ptr<RecordingGateway> recorder;
  if (!o.record.empty()) recorder = std::make_unique<RecordingGateway>(*gateway);

  PipelineResources res;
  res.corpus = &bundle.corpus;
  res.lexical = bundle.lexical ? &*bundle.lexical : nullptr;
  res.dense = bundle.dense ? &*bundle.dense : nullptr;
  res.embedder = embedder.get();
  res.registry = &registry;
  res.gateway = recorder ? static_cast<LlmGateway*>(recorder.get()) : gateway.get();
  Pipeline pipeline(res, cfg.pipeline);
  pipeline.check_queries(queries);

  std::ofstream predictions(out_dir / "predictions.jsonl", std::ios::binary | std::ios::app);
  if (!predictions) throw Error("cannot append to predictions.jsonl");
  std::size_t completed = start;
  std::string failure;

  const auto remaining = std::span<const Query>(queries).subspan(start);
  run_batch(pipeline, remaining, o.workers, [&](std::size_t i, QueryOutcome&& outcome) {
    const auto idx = start + i;
    const auto& q = queries[idx];
    if (!outcome.prediction) {
      failure = "query " + std::to_string(idx) + " (" + q.head + ", " + q.relation +
                "): " + outcome.error;
      return false;
    }
    const auto ref = trace_ref(idx);
    write_text(out_dir / ref, trace_to_json(q, *outcome.prediction) + "\n");
    ordered_json line{{"head", q.head},
                      {"relation", q.relation},
                      {"answer", outcome.prediction->answer},
                      {"raw_output", outcome.prediction->raw_output},
                      {"trace_ref", ref}};
    predictions << line.dump() << '\n';
    predictions.flush();
    ++completed;
    return true;
  });
  predictions.close();

  for (std::size_t i = 0; i < completed; ++i) manifest["traces"].push_back(trace_ref(i));
  manifest["completed"] = completed;
  manifest["finished_at"] = now_utc();
  manifest["status"] = failure.empty() ? "complete" : "failed";
  if (!failure.empty()) manifest["error"] = failure;
  write_text_atomic(manifest_path, manifest.dump(2) + "\n");
  if (recorder) save_script(recorder->entries(), o.record);

  if (!failure.empty()) {
    err << "error: " << failure << '\n'
        << "completed " << completed << "/" << queries.size()
        << " queries; rerun with --resume to continue\n";
    return 1;
  }
  out << "completed " << completed << "/" << queries.size() << " queries; predictions in "
      << (out_dir / "predictions.jsonl").string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// eval

struct EvalCliOptions {
  std::string dataset;
  std::string predictions;
  std::optional<std::size_t> bins;
  std::string out;
  bool raw_em = false;
  double am_threshold = kDefaultAmThreshold;
  std::uint64_t long_tail = kDefaultLongTailThreshold;
};

int cmd_eval(const EvalCliOptions& o, std::ostream& out, std::ostream&) {
  const auto dataset = read_dataset(o.dataset);
  std::vector<std::string> answers;
  {
    std::ifstream in(o.predictions);
    if (!in) throw ConfigError("cannot open predictions " + o.predictions);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (trim(line).empty()) continue;
      const auto where = o.predictions + ":" + std::to_string(line_no);
      json j;
      try {
        j = json::parse(line);
        answers.push_back(j.at("answer").get<std::string>());
      } catch (const json::exception& e) {
        throw FormatError(where + ": " + e.what());
      }
      const auto i = answers.size() - 1;
      if (i < dataset.size() && j.contains("head") &&
          (j["head"] != dataset[i].head || j.value("relation", "") != dataset[i].relation)) {
        throw FormatError(where + ": prediction does not align with dataset line " +
                          std::to_string(i + 1));
      }
    }
  }
  EvalOptions options;
  options.bins = o.bins;
  options.am_threshold = o.am_threshold;
  options.em_mode = o.raw_em ? MatchMode::raw : MatchMode::normalized;
  options.long_tail_threshold = o.long_tail;
  const auto report = evaluate(dataset, answers, options);

  const fs::path dir = o.out.empty() ? fs::path(o.predictions).parent_path() : fs::path(o.out);
  if (!dir.empty()) fs::create_directories(dir);
  const auto table = report_to_table(report);
  write_text(dir / "report.json", report_to_json(report) + "\n");
  write_text(dir / "report.txt", table);
  out << table;
  return 0;
}

// ---------------------------------------------------------------------------
// freq

Corpus load_any_corpus(const fs::path& p) {
  if (fs::is_directory(p)) return load_corpus(p / "corpus.bin");
  if (p.extension() == ".tsv") return ingest_tsv(p);
  return load_corpus(p);
}

int cmd_freq_count(const std::string& corpus_path, const std::string& dataset_path,
                   const std::string& out_path, std::ostream& out) {
  const auto corpus = load_any_corpus(corpus_path);
  auto dataset = read_dataset(dataset_path);
  const SentenceTable table(corpus);
  for (auto& t : dataset) t.count = table.count_any(t.head, t.golds);
  if (out_path.empty()) {
    for (const auto& t : dataset) out << triple_to_json_line(t) << '\n';
  } else {
    write_dataset(dataset, out_path);
  }
  return 0;
}

int cmd_freq_hist(const std::string& dataset_path, const std::string& out_path,
                  std::ostream& out, std::ostream& err) {
  const auto dataset = read_dataset(dataset_path);
  const auto missing = std::count_if(dataset.begin(), dataset.end(),
                                     [](const Triple& t) { return !t.count; });
  if (missing > 0) err << "warning: " << missing << " triple(s) without a count skipped\n";
  const auto csv = frequency_histogram_csv(dataset);
  if (out_path.empty()) {
    out << csv;
  } else {
    write_text(out_path, csv);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// diag paraphrase-hits

int cmd_diag_paraphrase_hits(const std::string& config_path, const std::string& dataset_path,
                             std::optional<std::size_t> k_opt, const std::string& out_path,
                             std::ostream& out) {
  const auto cfg = load_run_config(config_path);
  const auto registry = load_registry(cfg);
  const auto dataset = read_dataset(dataset_path);
  const auto bundle = load_index_dir(cfg.index_dir, true, false);
  const auto& index = *bundle.lexical;
  const auto k = k_opt.value_or(cfg.pipeline.k);
  if (k < 1) throw ConfigError("--k must be >= 1");

  std::unordered_map<std::string, std::uint32_t> ordinal;
  for (std::uint32_t d = 0; d < index.doc_count(); ++d) ordinal.emplace(index.doc_id(d), d);

  std::size_t total_on = 0;
  std::size_t total_off = 0;
  ordered_json rows = json::array();
  out << "#    on  off  head | relation\n";
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto& t = dataset[i];
    const auto& prof = registry.at(t.relation);
    const auto entity = tokenize(t.head);
    std::vector<Phrase> phrases;
    for (const auto& p : prof.paraphrases) phrases.push_back(tokenize(p));
    phrases.push_back(tokenize(prof.relation));

    const auto hits = [&](const RankedList& list) {
      std::size_t n = 0;
      for (const auto& e : list.entries) {
        const auto d = ordinal.at(e.passage_id);
        if (!index.contains_phrase(d, entity)) continue;
        if (std::any_of(phrases.begin(), phrases.end(),
                        [&](const Phrase& p) { return index.contains_phrase(d, p); })) {
          ++n;
        }
      }
      return n;
    };
    const std::vector<std::string> relation_only{prof.relation};
    const auto on = hits(search(index, build_query(t.head, prof.paraphrases), k));
    const auto off = hits(search(index, build_query(t.head, relation_only), k));
    total_on += on;
    total_off += off;
    rows.push_back({{"head", t.head}, {"relation", t.relation}, {"paraphrase_hits", on},
                    {"relation_name_hits", off}});
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-4zu %3zu %4zu  ", i, on, off);
    out << buf << t.head << " | " << t.relation << '\n';
  }

  const double denom = static_cast<double>(dataset.size() * k);
  const double rate_on = denom > 0 ? 100.0 * static_cast<double>(total_on) / denom : 0.0;
  const double rate_off = denom > 0 ? 100.0 * static_cast<double>(total_off) / denom : 0.0;
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "\nqueries %zu, top-%zu\nparaphrase-infused   %zu hits (%.1f%%)\n"
                "relation-name-only   %zu hits (%.1f%%)\ndelta                %+.1f pp\n",
                dataset.size(), k, total_on, rate_on, total_off, rate_off, rate_on - rate_off);
  out << buf;

  if (!out_path.empty()) {
    ordered_json doc{{"queries", dataset.size()},
                     {"k", k},
                     {"paraphrase_hits", total_on},
                     {"relation_name_hits", total_off},
                     {"paraphrase_rate_pct", rate_on},
                     {"relation_name_rate_pct", rate_off},
                     {"delta_pp", rate_on - rate_off},
                     {"per_query", std::move(rows)}};
    write_text(out_path, doc.dump(2) + "\n");
  }
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Relation completion with paraphrase-guided hybrid retrieval.", "relcomp"};
  app.require_subcommand(1);

  auto* index = app.add_subcommand("index", "Corpus indices")->require_subcommand(1);
  IndexBuildOptions ib;
  auto* index_build = index->add_subcommand("build", "Ingest a TSV corpus and build indices");
  index_build->add_option("--corpus", ib.corpus, "Passage TSV (id, text, title)")
      ->required()
      ->check(CLI::ExistingFile);
  index_build->add_option("--out", ib.out, "Output index directory")->required();
  index_build->add_option("--dense-provider", ib.provider, "hash, remote or import")
      ->check(CLI::IsMember({"hash", "remote", "import"}));
  index_build->add_option("--dim", ib.dimension, "Embedding dimension (hash, remote)");
  index_build->add_option("--seed", ib.seed, "Hash provider seed");
  index_build->add_option("--vectors", ib.vectors, "Vector file for import")
      ->check(CLI::ExistingFile);
  index_build->add_option("--provider-name", ib.provider_name, "Encoder name for import/remote");
  index_build->add_option("--embed-url", ib.embed_url, "Embedding service base URL");
  index_build->add_option("--embed-path", ib.embed_path, "Embedding service path");
  index_build->add_option("--batch-size", ib.batch_size, "Texts per embedding request");
  index_build->add_option("--max-in-flight", ib.max_in_flight, "Concurrent embedding requests");

  auto* paraphrase = app.add_subcommand("paraphrase", "Relation paraphrases")
                         ->require_subcommand(1);
  ParaphraseOptions po;
  auto* para_gen = paraphrase->add_subcommand("gen", "Generate a paraphrase set");
  para_gen->add_option("--relation", po.relation, "Relation name")->required();
  para_gen->add_flag("--live", po.live, "Call the HTTP chat endpoint");
  para_gen->add_option("--script", po.script, "Replay a mock script")->check(CLI::ExistingFile);
  para_gen->add_option("--model", po.model, "Model id");
  para_gen->add_option("--registry", po.registry, "Registry JSON for offline answers")
      ->check(CLI::ExistingFile);
  para_gen->add_option("--base-url", po.base_url, "Chat endpoint base URL for --live");

  RunOptions ro;
  auto* run = app.add_subcommand("run", "Run the pipeline over a dataset");
  run->add_option("--config", ro.config, "Run config JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--dataset", ro.dataset, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  run->add_option("--out", ro.out, "Output directory")->required();
  run->add_option("--workers", ro.workers, "Concurrent queries")->check(CLI::PositiveNumber);
  run->add_flag("--resume", ro.resume, "Continue an interrupted run in --out");
  run->add_option("--ablation", ro.ablation, "Apply a named component ablation")
      ->check(CLI::IsMember(ablation_names()));
  run->add_option("--record", ro.record, "Save every LLM exchange as a mock script");

  EvalCliOptions eo;
  auto* eval = app.add_subcommand("eval", "Score predictions against a dataset");
  eval->add_option("--dataset", eo.dataset, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--predictions", eo.predictions, "Predictions JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  eval->add_option("--bins", eo.bins, "Equal-sized frequency bins")->check(CLI::PositiveNumber);
  eval->add_option("--out", eo.out, "Report directory (default: next to predictions)");
  eval->add_flag("--raw-em", eo.raw_em, "Exact match on raw strings");
  eval->add_option("--am-threshold", eo.am_threshold, "Jaccard threshold for AM");
  eval->add_option("--long-tail", eo.long_tail, "Long-tail threshold x")
      ->check(CLI::PositiveNumber);

  auto* freq = app.add_subcommand("freq", "Co-occurrence frequencies")->require_subcommand(1);
  std::string fc_corpus, fc_dataset, fc_out, fh_dataset, fh_out;
  auto* freq_count = freq->add_subcommand("count", "Annotate triples with co-occurrence counts");
  freq_count->add_option("--corpus", fc_corpus, "Index directory, snapshot or TSV")
      ->required()
      ->check(CLI::ExistingPath);
  freq_count->add_option("--dataset", fc_dataset, "Dataset JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  freq_count->add_option("--out", fc_out, "Annotated dataset (default: stdout)");
  auto* freq_hist = freq->add_subcommand("hist", "Histogram of co-occurrence counts as CSV");
  freq_hist->add_option("--dataset", fh_dataset, "Annotated dataset JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  freq_hist->add_option("--out", fh_out, "CSV file (default: stdout)");

  auto* diag = app.add_subcommand("diag", "Diagnostics")->require_subcommand(1);
  std::string dg_config, dg_dataset, dg_out;
  std::optional<std::size_t> dg_k;
  auto* diag_hits = diag->add_subcommand(
      "paraphrase-hits", "Relation-aligned passages retrieved with and without paraphrases");
  diag_hits->add_option("--config", dg_config, "Run config JSON")
      ->required()
      ->check(CLI::ExistingFile);
  diag_hits->add_option("--dataset", dg_dataset, "Dataset JSONL")
      ->required()
      ->check(CLI::ExistingFile);
  diag_hits->add_option("--k", dg_k, "Top-k (default: pipeline k)");
  diag_hits->add_option("--out", dg_out, "Write the comparison as JSON");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*index_build) return cmd_index_build(ib, out, err);
    if (*para_gen) return cmd_paraphrase_gen(po, out, err);
    if (*run) return cmd_run(ro, out, err);
    if (*eval) return cmd_eval(eo, out, err);
    if (*freq_count) return cmd_freq_count(fc_corpus, fc_dataset, fc_out, out);
    if (*freq_hist) return cmd_freq_hist(fh_dataset, fh_out, out, err);
    if (*diag_hits) return cmd_diag_paraphrase_hits(dg_config, dg_dataset, dg_k, dg_out, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace relcomp
