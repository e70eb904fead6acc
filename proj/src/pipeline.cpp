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

#include "relcomp/pipeline.hpp"

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "relcomp/hashing.hpp"
#include "relcomp/text.hpp"

namespace relcomp {

using nlohmann::json;

namespace {

// Stands in for the evidence region when computing stage signatures.
constexpr std::string_view kRegionMarker = "\x1f<evidence>\x1f";

constexpr std::string_view kModeNames[] = {"hybrid", "lexical_only", "dense_only", "none"};
constexpr std::string_view kStageNames[] = {"retrieval", "summarization", "generation"};

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (true) {
    const auto nl = text.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

ChatRequest user_request(std::string model, std::string prompt, CallKind kind, int max_tokens,
                         std::string label) {
  ChatRequest req;
  req.model = std::move(model);
  req.messages.push_back({"user", std::move(prompt)});
  req.temperature = 0.0;
  req.max_tokens = max_tokens;
  req.kind = kind;
  req.label = std::move(label);
  return req;
}

json ranked_json(const RankedList& list) {
  json entries = json::array();
  for (const auto& e : list.entries) {
    entries.push_back({{"id", e.passage_id}, {"score", e.score}, {"rank", e.rank}});
  }
  return entries;
}

json prompt_json(const std::optional<PromptRecord>& p) {
  if (!p) return nullptr;
  return {{"text", p->text}, {"hash", p->hash}, {"signature", p->signature}};
}

}  // namespace

std::string_view to_string(RetrievalMode mode) { return kModeNames[static_cast<int>(mode)]; }
std::string_view to_string(Stage stage) { return kStageNames[static_cast<int>(stage)]; }

std::optional<RetrievalMode> parse_retrieval_mode(std::string_view text) {
  for (int i = 0; i < 4; ++i) {
    if (kModeNames[i] == text) return static_cast<RetrievalMode>(i);
  }
  return std::nullopt;
}

std::optional<Stage> parse_stage(std::string_view text) {
  for (int i = 0; i < 3; ++i) {
    if (kStageNames[i] == text) return static_cast<Stage>(i);
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Config

bool PipelineConfig::paraphrases_enabled(Stage stage) const {
  return paraphrases_in.count(stage) != 0;
}

void PipelineConfig::validate() const {
  if (k < 1) throw ConfigError("pipeline: k must be >= 1");
  if (depth() < 1) throw ConfigError("pipeline: candidate_depth must be >= 1");
  if (summarizer_max_tokens < 1) {
    throw ConfigError("pipeline: summarizer_max_tokens must be >= 1");
  }
  if (summarizer_model.empty() || generator_model.empty()) {
    throw ConfigError("pipeline: model names must be non-empty");
  }
}

PipelineConfig PipelineConfig::from_json(std::string_view text) {
  PipelineConfig c;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "k") {
        c.k = value.get<std::size_t>();
      } else if (key == "candidate_depth") {
        if (!value.is_null()) c.candidate_depth = value.get<std::size_t>();
      } else if (key == "retrieval_mode") {
        const auto mode = parse_retrieval_mode(value.get<std::string>());
        if (!mode) throw ConfigError("pipeline config: unknown retrieval_mode '" +
                                     value.get<std::string>() + "'");
        c.retrieval_mode = *mode;
      } else if (key == "paraphrases_in") {
        c.paraphrases_in.clear();
        for (const auto& s : value) {
          const auto stage = parse_stage(s.get<std::string>());
          if (!stage) {
            throw ConfigError("pipeline config: unknown stage '" + s.get<std::string>() + "'");
          }
          c.paraphrases_in.insert(*stage);
        }
      } else if (key == "c_rrf") {
        c.c_rrf = value.get<std::uint64_t>();
      } else if (key == "summarizer_model") {
        c.summarizer_model = value.get<std::string>();
      } else if (key == "generator_model") {
        c.generator_model = value.get<std::string>();
      } else if (key == "summarizer_max_tokens") {
        c.summarizer_max_tokens = value.get<int>();
      } else {
        throw ConfigError("pipeline config: unknown key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("pipeline config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string PipelineConfig::to_json() const {
  json stages = json::array();
  for (auto s : paraphrases_in) stages.push_back(std::string(to_string(s)));
  json j{{"k", k},
         {"candidate_depth", depth()},
         {"retrieval_mode", std::string(to_string(retrieval_mode))},
         {"paraphrases_in", std::move(stages)},
         {"c_rrf", c_rrf},
         {"summarizer_model", summarizer_model},
         {"generator_model", generator_model},
         {"summarizer_max_tokens", summarizer_max_tokens}};
  return j.dump();
}

std::vector<std::string> ablation_names() {
  return {"full",          "no_paraphrases_retrieval", "no_paraphrases_summarization",
          "no_paraphrases_generation", "no_paraphrases", "lexical_only",
          "dense_only",    "no_context"};
}

PipelineConfig apply_ablation(PipelineConfig base, std::string_view name) {
  if (name == "full") {
    base.retrieval_mode = RetrievalMode::hybrid;
    base.paraphrases_in = {Stage::retrieval, Stage::summarization, Stage::generation};
  } else if (name == "no_paraphrases_retrieval") {
    base.paraphrases_in.erase(Stage::retrieval);
  } else if (name == "no_paraphrases_summarization") {
    base.paraphrases_in.erase(Stage::summarization);
  } else if (name == "no_paraphrases_generation") {
    base.paraphrases_in.erase(Stage::generation);
  } else if (name == "no_paraphrases") {
    base.paraphrases_in.clear();
  } else if (name == "lexical_only") {
    base.retrieval_mode = RetrievalMode::lexical_only;
  } else if (name == "dense_only") {
    base.retrieval_mode = RetrievalMode::dense_only;
  } else if (name == "no_context") {
    base.retrieval_mode = RetrievalMode::none;
  } else {
    throw ConfigError("unknown ablation '" + std::string(name) + "'");
  }
  return base;
}

// ---------------------------------------------------------------------------
// Outputs

std::string extract_answer(std::string_view raw) {
  std::size_t start = 0;
  while (start <= raw.size()) {
    auto nl = raw.find('\n', start);
    if (nl == std::string_view::npos) nl = raw.size();
    auto line = trim(raw.substr(start, nl - start));
    if (!line.empty()) return line;
    start = nl + 1;
  }
  throw Error("empty generation");
}

StageError::StageError(Stage stage, const Query& query, const std::string& what)
    : Error(std::string(to_string(stage)) + " failed for (" + query.head + ", " +
            query.relation + "): " + what),
      stage_(stage) {}

std::string trace_to_json(const Query& query, const Prediction& prediction) {
  const auto& t = prediction.trace;
  json fused = json::array();
  for (const auto& e : t.fused.entries) {
    fused.push_back({{"id", e.passage_id}, {"score", e.score}, {"ranks", e.ranks}});
  }
  json j{{"head", query.head},
         {"relation", query.relation},
         {"retrieval_mode", std::string(to_string(t.retrieval_mode))},
         {"lexical_query", t.lexical_query ? json(*t.lexical_query) : json(nullptr)},
         {"dense_question", t.dense_question ? json(*t.dense_question) : json(nullptr)},
         {"lexical", t.lexical ? ranked_json(*t.lexical) : json(nullptr)},
         {"dense", t.dense ? ranked_json(*t.dense) : json(nullptr)},
         {"fused", std::move(fused)},
         {"retrieval_signature", t.retrieval_signature},
         {"summarize_prompt", prompt_json(t.summarize_prompt)},
         {"summary", {{"text", t.summary.text}, {"source_ids", t.summary.source_ids}}},
         {"generate_prompt", prompt_json(t.generate_prompt)},
         {"raw_output", prediction.raw_output},
         {"answer", prediction.answer}};
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Pipeline

Pipeline::Pipeline(PipelineResources resources, PipelineConfig config)
    : res_(resources),
      config_(std::move(config)),
      summarize_template_(PromptTemplate::bundled("summarize")),
      generate_template_(PromptTemplate::bundled("generate")) {
  config_.validate();
  if (res_.registry == nullptr) throw ConfigError("pipeline: no relation registry");
  if (res_.gateway == nullptr) throw ConfigError("pipeline: no LLM gateway");
  const auto mode = config_.retrieval_mode;
  if (mode != RetrievalMode::none && res_.corpus == nullptr) {
    throw ConfigError("pipeline: retrieval needs a corpus");
  }
  if ((mode == RetrievalMode::hybrid || mode == RetrievalMode::lexical_only) &&
      res_.lexical == nullptr) {
    throw ConfigError("pipeline: retrieval mode needs a lexical index");
  }
  if ((mode == RetrievalMode::hybrid || mode == RetrievalMode::dense_only) &&
      (res_.dense == nullptr || res_.embedder == nullptr)) {
    throw ConfigError("pipeline: retrieval mode needs a dense index and embedding provider");
  }
}

const RelationProfile& Pipeline::profile(const Query& query) const {
  return res_.registry->at(query.relation);
}

void Pipeline::check_queries(std::span<const Query> queries) const {
  for (std::size_t i = 0; i < queries.size(); ++i) {
    if (res_.registry->find(queries[i].relation) == nullptr) {
      throw ConfigError("query " + std::to_string(i) + ": unknown relation '" +
                        queries[i].relation + "'");
    }
  }
}

FusedRanking Pipeline::retrieve(const Query& query, Trace* trace) const {
  const auto& prof = profile(query);
  const auto mode = config_.retrieval_mode;
  std::vector<RankedList> lists;
  std::string lexical_query = "-";
  std::string dense_question = "-";

  if (mode == RetrievalMode::hybrid || mode == RetrievalMode::lexical_only) {
    const std::vector<std::string> relation_only{prof.relation};
    const auto& paraphrases =
        config_.paraphrases_enabled(Stage::retrieval) ? prof.paraphrases : relation_only;
    const auto q = build_query(query.head, paraphrases);
    lexical_query = q.to_string();
    lists.push_back(search(*res_.lexical, q, config_.depth()));
    ++index_reads_;
    if (trace) {
      trace->lexical_query = lexical_query;
      trace->lexical = lists.back();
    }
  }
  if (mode == RetrievalMode::hybrid || mode == RetrievalMode::dense_only) {
    dense_question = instantiate_question(prof, query.head);
    lists.push_back(dense_search(*res_.dense, dense_question, *res_.embedder, config_.depth()));
    ++index_reads_;
    if (trace) {
      trace->dense_question = dense_question;
      trace->dense = lists.back();
    }
  }

  auto fused = rrf_fuse(lists, config_.k, config_.c_rrf);
  if (trace) {
    trace->retrieval_mode = mode;
    trace->fused = fused;
    trace->retrieval_signature = sha256_hex(std::string(to_string(mode)) + "\n" +
                                            lexical_query + "\n" + dense_question);
  }
  return fused;
}

EvidenceSummary Pipeline::summarize(const Query& query, const FusedRanking& ranking,
                                    Trace* trace) const {
  EvidenceSummary summary;
  if (ranking.entries.empty()) {
    if (trace) trace->summary = summary;
    return summary;
  }
  const auto& prof = profile(query);

  std::vector<std::string> items;
  std::vector<std::string> ids;
  for (const auto& e : ranking.entries) {
    const Passage* p = res_.corpus->find(e.passage_id);
    if (p == nullptr) throw Error("fused passage " + e.passage_id + " is not in the corpus");
    items.push_back("[" + p->id + "] " + p->title + "\n" + p->body);
    ids.push_back(p->id);
  }

  Bindings bindings{{"entity", query.head},
                    {"relation", prof.relation},
                    {"expected_types", render_list(prof.expected_type_tags())}};
  if (config_.paraphrases_enabled(Stage::summarization)) {
    bindings["paraphrases"] = render_list(prof.paraphrases);
  }
  auto fitted = fit_to_budget(summarize_template_, bindings, "context", items, "\n\n",
                              res_.gateway->token_budget());
  ids.resize(fitted.kept_items);

  auto marked = bindings;
  marked["context"] = std::string(kRegionMarker);
  auto request = user_request(config_.summarizer_model, fitted.text, CallKind::summarize,
                              config_.summarizer_max_tokens,
                              "summarize:" + query.head + "|" + query.relation);
  PromptRecord record{fitted.text, prompt_hash(request),
                      sha256_hex(summarize_template_.render(marked))};

  summary.text = res_.gateway->complete(std::move(request));
  summary.source_ids = std::move(ids);
  if (trace) {
    trace->summarize_prompt = std::move(record);
    trace->summary = summary;
  }
  return summary;
}

Prediction Pipeline::generate(const Query& query, const EvidenceSummary& summary,
                              Trace* trace) const {
  const auto& prof = profile(query);
  const bool with_context = config_.retrieval_mode != RetrievalMode::none;

  Bindings bindings{{"question", instantiate_question(prof, query.head)}};
  if (with_context && config_.paraphrases_enabled(Stage::generation)) {
    bindings["paraphrases"] = render_list(prof.paraphrases);
  }

  std::string text;
  auto marked = bindings;
  if (with_context) {
    const auto lines = split_lines(summary.text);
    text = fit_to_budget(generate_template_, bindings, "summary", lines, "\n",
                         res_.gateway->token_budget())
               .text;
    marked["summary"] = std::string(kRegionMarker);
  } else {
    text = generate_template_.render(bindings);
  }

  auto request = user_request(config_.generator_model, text, CallKind::generate,
                              kGenerateMaxTokens, "generate:" + query.head + "|" + query.relation);
  PromptRecord record{text, prompt_hash(request), sha256_hex(generate_template_.render(marked))};

  Prediction prediction;
  prediction.raw_output = res_.gateway->complete(std::move(request));
  if (trace) trace->generate_prompt = std::move(record);
  prediction.answer = extract_answer(prediction.raw_output);
  return prediction;
}

Prediction Pipeline::run(const Query& query) const {
  Trace trace;
  FusedRanking fused;
  try {
    fused = retrieve(query, &trace);
  } catch (const std::exception& e) {
    throw StageError(Stage::retrieval, query, e.what());
  }
  EvidenceSummary summary;
  try {
    summary = summarize(query, fused, &trace);
  } catch (const std::exception& e) {
    throw StageError(Stage::summarization, query, e.what());
  }
  Prediction prediction;
  try {
    prediction = generate(query, summary, &trace);
  } catch (const std::exception& e) {
    throw StageError(Stage::generation, query, e.what());
  }
  trace.raw_output = prediction.raw_output;
  prediction.trace = std::move(trace);
  return prediction;
}

void run_batch(const Pipeline& pipeline, std::span<const Query> queries, std::size_t workers,
               const std::function<bool(std::size_t, QueryOutcome&&)>& sink) {
  if (queries.empty()) return;
  workers = std::clamp<std::size_t>(workers, 1, queries.size());

  std::mutex mu;
  std::vector<std::optional<QueryOutcome>> done(queries.size());
  std::size_t next_to_schedule = 0;
  std::size_t next_to_emit = 0;
  bool stopped = false;
  std::exception_ptr sink_error;

  // Emits the ready prefix. Called with `mu` held; the sink runs under the
  // lock so calls are serialized and in order.
  const auto drain = [&] {
    while (!stopped && next_to_emit < done.size() && done[next_to_emit]) {
      const auto i = next_to_emit++;
      auto outcome = std::move(*done[i]);
      done[i].reset();
      try {
        if (!sink(i, std::move(outcome))) stopped = true;
      } catch (...) {
        sink_error = std::current_exception();
        stopped = true;
      }
    }
  };

  const auto work = [&] {
    while (true) {
      std::size_t i = 0;
      {
        std::lock_guard lock(mu);
        if (stopped || next_to_schedule >= queries.size()) return;
        i = next_to_schedule++;
      }
      QueryOutcome outcome;
      try {
        outcome.prediction = pipeline.run(queries[i]);
      } catch (const std::exception& e) {
        outcome.error = e.what();
      }
      std::lock_guard lock(mu);
      done[i] = std::move(outcome);
      drain();
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(workers - 1);
  for (std::size_t w = 1; w < workers; ++w) threads.emplace_back(work);
  work();
  for (auto& t : threads) t.join();
  if (sink_error) std::rethrow_exception(sink_error);
}

}  // namespace relcomp
