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

#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relcomp/corpus.hpp"
#include "relcomp/dense.hpp"
#include "relcomp/error.hpp"
#include "relcomp/fusion.hpp"
#include "relcomp/lexical.hpp"
#include "relcomp/llm.hpp"
#include "relcomp/relations.hpp"

namespace relcomp {

/// `none` is the no-context baseline: no retrieval, no summary, and no
/// paraphrases in the generation prompt.
enum class RetrievalMode { hybrid, lexical_only, dense_only, none };
enum class Stage { retrieval, summarization, generation };

std::string_view to_string(RetrievalMode mode);
std::string_view to_string(Stage stage);
std::optional<RetrievalMode> parse_retrieval_mode(std::string_view text);
std::optional<Stage> parse_stage(std::string_view text);

struct PipelineConfig {
  std::size_t k = 10;
  /// Per-retriever depth fed into fusion; defaults to k.
  std::optional<std::size_t> candidate_depth;
  RetrievalMode retrieval_mode = RetrievalMode::hybrid;
  std::set<Stage> paraphrases_in{Stage::retrieval, Stage::summarization, Stage::generation};
  std::uint64_t c_rrf = 0;
  std::string summarizer_model = "gpt-4o-mini";
  std::string generator_model = "mistral-7b-instruct";
  int summarizer_max_tokens = 512;

  bool paraphrases_enabled(Stage stage) const;
  std::size_t depth() const { return candidate_depth.value_or(k); }
  /// Throws ConfigError when k, depth or summarizer_max_tokens is < 1.
  void validate() const;

  /// Parses the "pipeline" object of a run config; absent keys keep their
  /// defaults, unknown keys are rejected.
  static PipelineConfig from_json(std::string_view text);
  std::string to_json() const;
};

/// Named component ablations: full, no_paraphrases_retrieval,
/// no_paraphrases_summarization, no_paraphrases_generation, no_paraphrases,
/// lexical_only, dense_only, no_context.
std::vector<std::string> ablation_names();
PipelineConfig apply_ablation(PipelineConfig base, std::string_view name);

struct Query {
  std::string head;
  std::string relation;
};

struct EvidenceSummary {
  std::string text;
  /// Passages that made it into the summarization prompt, in fused order.
  std::vector<std::string> source_ids;
};

struct PromptRecord {
  std::string text;
  std::string hash;
  /// Hash of the prompt with its evidence region replaced by a fixed
  /// marker: identifies what the stage itself contributed.
  std::string signature;
};

struct Trace {
  RetrievalMode retrieval_mode = RetrievalMode::hybrid;
  std::optional<std::string> lexical_query;
  std::optional<std::string> dense_question;
  std::optional<RankedList> lexical;
  std::optional<RankedList> dense;
  FusedRanking fused;
  std::string retrieval_signature;
  std::optional<PromptRecord> summarize_prompt;
  EvidenceSummary summary;
  std::optional<PromptRecord> generate_prompt;
  std::string raw_output;
};

struct Prediction {
  std::string answer;
  std::string raw_output;
  Trace trace;
};

/// One JSON document describing a query's trace.
std::string trace_to_json(const Query& query, const Prediction& prediction);

/// First non-empty line of `raw`, trimmed. Throws Error("empty generation")
/// when there is none.
std::string extract_answer(std::string_view raw);

/// Failure inside one stage of one query.
class StageError : public Error {
 public:
  StageError(Stage stage, const Query& query, const std::string& what);
  Stage stage() const noexcept { return stage_; }

 private:
  Stage stage_;
};

/// Shared, read-only inputs. Indices may be null when the configured mode
/// does not use them.
struct PipelineResources {
  const Corpus* corpus = nullptr;
  const LexicalIndex* lexical = nullptr;
  const DenseIndex* dense = nullptr;
  const EmbeddingProvider* embedder = nullptr;
  const RelationRegistry* registry = nullptr;
  LlmGateway* gateway = nullptr;
};

/// Retrieve, summarize, generate. Thread-safe: queries may run concurrently.
class Pipeline {
 public:
  /// Throws ConfigError when the mode needs a resource that is missing.
  Pipeline(PipelineResources resources, PipelineConfig config);

  const PipelineConfig& config() const noexcept { return config_; }

  /// Validates every query up front; throws ConfigError naming the first
  /// relation that does not resolve in the registry.
  void check_queries(std::span<const Query> queries) const;

  FusedRanking retrieve(const Query& query, Trace* trace = nullptr) const;
  EvidenceSummary summarize(const Query& query, const FusedRanking& ranking,
                            Trace* trace = nullptr) const;
  Prediction generate(const Query& query, const EvidenceSummary& summary,
                      Trace* trace = nullptr) const;
  /// Full run with a populated trace. Errors surface as StageError.
  Prediction run(const Query& query) const;

  /// Number of index searches issued so far.
  std::size_t index_reads() const noexcept { return index_reads_.load(); }

 private:
  const RelationProfile& profile(const Query& query) const;

  PipelineResources res_;
  PipelineConfig config_;
  PromptTemplate summarize_template_;
  PromptTemplate generate_template_;
  mutable std::atomic<std::size_t> index_reads_{0};
};

struct QueryOutcome {
  std::optional<Prediction> prediction;
  std::string error;
};

/// Runs every query on `workers` threads. `sink` is called in query order,
/// one call at a time; returning false stops scheduling further queries.
void run_batch(const Pipeline& pipeline, std::span<const Query> queries, std::size_t workers,
               const std::function<bool(std::size_t, QueryOutcome&&)>& sink);

}  // namespace relcomp
