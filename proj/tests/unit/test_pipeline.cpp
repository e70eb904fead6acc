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

#include <gtest/gtest.h>

#include <algorithm>
#include <atomic>

#include <json.hpp>

#include "relcomp/pipeline.hpp"
#include "relcomp/text.hpp"
#include "synthetic.hpp"

namespace relcomp {
namespace {

using V = std::vector<std::string>;

struct Fixture {
  Corpus corpus;
  LexicalIndex lexical;
  HashEmbeddingProvider embedder{256, 13};
  DenseIndex dense;
  RelationRegistry registry = RelationRegistry::bundled();
  MockGateway gateway;

  Fixture(Corpus c, MockGateway::Responder responder)
      : corpus(std::move(c)),
        lexical(LexicalIndex::build(corpus)),
        dense(DenseIndex::build(corpus, embedder)),
        gateway({}, std::move(responder)) {}

  PipelineResources resources() {
    return {&corpus, &lexical, &dense, &embedder, &registry, &gateway};
  }
  Pipeline pipeline(PipelineConfig cfg = {}) { return Pipeline(resources(), std::move(cfg)); }
};

Corpus acme() {
  return Corpus({
      {"a", "Acme", "Acme Widgets was founded by Jane Roe in Ohio."},
      {"b", "", "Who founded Acme Widgets?"},
      {"c", "Acme", "Jane Roe is the founder of Acme Widgets."},
      {"d", "Other", "Rockets are loud."},
  });
}

std::optional<std::string> echo(const ChatRequest& r) {
  if (r.kind == CallKind::generate) return std::string("Jane Roe\nbecause the evidence says so");
  return r.messages.back().content;
}

const Query kAcme{"Acme Widgets", "founded by"};

TEST(Config, JsonDefaultsAndValidation) {
  const auto cfg = PipelineConfig::from_json("{}");
  EXPECT_EQ(cfg.k, 10u);
  EXPECT_EQ(cfg.depth(), 10u);
  EXPECT_EQ(cfg.retrieval_mode, RetrievalMode::hybrid);
  EXPECT_TRUE(cfg.paraphrases_enabled(Stage::summarization));

  const auto custom = PipelineConfig::from_json(
      R"({"k": 5, "candidate_depth": 20, "retrieval_mode": "dense_only",
          "paraphrases_in": ["generation"], "c_rrf": 60})");
  EXPECT_EQ(custom.k, 5u);
  EXPECT_EQ(custom.depth(), 20u);
  EXPECT_EQ(custom.retrieval_mode, RetrievalMode::dense_only);
  EXPECT_FALSE(custom.paraphrases_enabled(Stage::retrieval));
  EXPECT_TRUE(custom.paraphrases_enabled(Stage::generation));
  EXPECT_EQ(PipelineConfig::from_json(custom.to_json()).to_json(), custom.to_json());

  EXPECT_THROW(PipelineConfig::from_json(R"({"kk": 3})"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(R"({"retrieval_mode": "magic"})"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json(R"({"k": 0})"), ConfigError);
  EXPECT_THROW(PipelineConfig::from_json("[1]"), ConfigError);
}

TEST(Config, Ablations) {
  const auto names = ablation_names();
  EXPECT_EQ(names.size(), 8u);
  const PipelineConfig base;
  EXPECT_FALSE(apply_ablation(base, "no_paraphrases_retrieval").paraphrases_enabled(Stage::retrieval));
  EXPECT_TRUE(apply_ablation(base, "no_paraphrases_retrieval").paraphrases_enabled(Stage::generation));
  EXPECT_TRUE(apply_ablation(base, "no_paraphrases").paraphrases_in.empty());
  EXPECT_EQ(apply_ablation(base, "lexical_only").retrieval_mode, RetrievalMode::lexical_only);
  EXPECT_EQ(apply_ablation(base, "no_context").retrieval_mode, RetrievalMode::none);
  EXPECT_THROW(apply_ablation(base, "bogus"), ConfigError);
}

TEST(Answer, FirstNonEmptyLine) {
  EXPECT_EQ(extract_answer("  Jane Roe \nreason"), "Jane Roe");
  EXPECT_EQ(extract_answer("\n\n Ohio"), "Ohio");
  EXPECT_THROW(extract_answer(" \n\t\n"), Error);
  EXPECT_THROW(extract_answer(""), Error);
}

TEST(Construction, RequiresResourcesForMode) {
  Fixture f(acme(), echo);
  auto res = f.resources();
  res.dense = nullptr;
  EXPECT_THROW(Pipeline(res, {}), ConfigError);
  PipelineConfig lex;
  lex.retrieval_mode = RetrievalMode::lexical_only;
  EXPECT_NO_THROW(Pipeline(res, lex));
  res.lexical = nullptr;
  res.corpus = nullptr;
  PipelineConfig none;
  none.retrieval_mode = RetrievalMode::none;
  EXPECT_NO_THROW(Pipeline(res, none));
  res.gateway = nullptr;
  EXPECT_THROW(Pipeline(res, none), ConfigError);
}

TEST(Retrieve, HybridFusesBothLists) {
  Fixture f(acme(), echo);
  const auto p = f.pipeline();
  Trace t;
  const auto fused = p.retrieve(kAcme, &t);
  ASSERT_TRUE(t.lexical && t.dense);
  const std::vector<RankedList> lists{*t.lexical, *t.dense};
  EXPECT_EQ(fused, rrf_fuse(lists, 10));
  EXPECT_EQ(p.index_reads(), 2u);
  EXPECT_EQ(t.dense_question, "Who founded Acme Widgets?");
  EXPECT_FALSE(t.retrieval_signature.empty());
}

// Lexical depth 1 never returns "b" (no paraphrase phrase); dense depth 1
// returns "b", the verbatim question. Each fused score is 1/1.
TEST(Retrieve, DisjointSingletonsTieById) {
  Fixture f(acme(), echo);
  PipelineConfig cfg;
  cfg.candidate_depth = 1;
  Trace t;
  const auto fused = f.pipeline(cfg).retrieve(kAcme, &t);
  EXPECT_EQ(t.dense->ids(), V{"b"});
  ASSERT_EQ(fused.entries.size(), 2u);
  V want{t.lexical->ids()[0], "b"};
  std::sort(want.begin(), want.end());
  EXPECT_EQ(fused.ids(), want);
  EXPECT_EQ(fused.entries[0].score, 1.0);
  EXPECT_EQ(fused.entries[1].score, 1.0);
}

TEST(Retrieve, LexicalOnlyWithoutParaphrasesUsesRelationName) {
  Fixture f(acme(), echo);
  auto cfg = apply_ablation(apply_ablation({}, "lexical_only"), "no_paraphrases_retrieval");
  Trace t;
  const auto fused = f.pipeline(cfg).retrieve(kAcme, &t);
  EXPECT_EQ(t.lexical_query, "(\"acme widgets\" AND \"founded by\")");
  EXPECT_FALSE(t.dense);
  EXPECT_EQ(fused.ids(), V{"a"});

  Trace full;
  f.pipeline(apply_ablation({}, "lexical_only")).retrieve(kAcme, &full);
  auto ids = full.lexical->ids();
  std::sort(ids.begin(), ids.end());
  EXPECT_EQ(ids, (V{"a", "c"}));
}

TEST(Retrieve, DenseOnlyKeepsDenseOrder) {
  Fixture f(acme(), echo);
  Trace t;
  const auto fused = f.pipeline(apply_ablation({}, "dense_only")).retrieve(kAcme, &t);
  EXPECT_FALSE(t.lexical);
  EXPECT_EQ(fused.ids(), t.dense->ids());
}

TEST(Retrieve, DeeperTopKExtendsShallower) {
  const auto world = testing::make_world(RelationRegistry::bundled(), {});
  Fixture f(world.corpus, nullptr);
  PipelineConfig k10;
  PipelineConfig k20;
  k20.k = 20;
  const auto p10 = f.pipeline(k10);
  const auto p20 = f.pipeline(k20);
  for (const auto& t : world.triples) {
    const Query q{t.head, t.relation};
    const auto a = p10.retrieve(q).ids();
    const auto b = p20.retrieve(q).ids();
    for (const auto& id : a) {
      EXPECT_NE(std::find(b.begin(), b.end(), id), b.end()) << t.head;
    }
  }
}

TEST(Summarize, EmptyRankingMakesNoCall) {
  Fixture f(acme(), echo);
  const auto s = f.pipeline().summarize(kAcme, FusedRanking{});
  EXPECT_TRUE(s.text.empty());
  EXPECT_TRUE(s.source_ids.empty());
  EXPECT_EQ(f.gateway.calls(), 0u);
}

TEST(Summarize, PromptCarriesPassagesAndParaphrases) {
  Fixture f(acme(), echo);
  const auto p = f.pipeline();
  Trace t;
  const auto s = p.summarize(kAcme, p.retrieve(kAcme), &t);
  EXPECT_NE(s.text.find("[a] Acme\nAcme Widgets was founded by Jane Roe"), std::string::npos);
  EXPECT_NE(s.text.find("most important: founder, founded by, established by"), std::string::npos);
  EXPECT_NE(s.text.find("types: PERSON"), std::string::npos);
  EXPECT_FALSE(s.source_ids.empty());
  const auto req = f.gateway.history().back();
  EXPECT_EQ(req.kind, CallKind::summarize);
  EXPECT_EQ(req.model, "gpt-4o-mini");
  EXPECT_EQ(req.label, "summarize:Acme Widgets|founded by");
  EXPECT_EQ(t.summarize_prompt->hash, prompt_hash(req));

  const auto ablated = f.pipeline(apply_ablation({}, "no_paraphrases_summarization"));
  const auto s2 = ablated.summarize(kAcme, ablated.retrieve(kAcme));
  EXPECT_EQ(s2.text.find("most important"), std::string::npos);
  EXPECT_EQ(s2.text.find("established by"), std::string::npos);
}

TEST(Summarize, DropsPassagesToFitBudget) {
  std::vector<Passage> passages;
  for (int i = 0; i < 10; ++i) {
    std::string body = "Acme Widgets was founded by Jane Roe.";
    for (int j = 0; j < 40; ++j) body += " filler";
    passages.push_back({"p" + std::to_string(i), "", body});
  }
  const Corpus c(std::move(passages));
  const auto lexical = LexicalIndex::build(c);
  const auto registry = RelationRegistry::bundled();
  MockGateway gw({}, echo, 300);
  PipelineConfig cfg;
  cfg.retrieval_mode = RetrievalMode::lexical_only;
  const Pipeline p({&c, &lexical, nullptr, nullptr, &registry, &gw}, cfg);
  const auto s = p.summarize(kAcme, p.retrieve(kAcme));
  EXPECT_GT(s.source_ids.size(), 0u);
  EXPECT_LT(s.source_ids.size(), 10u);
  EXPECT_LE(count_whitespace_tokens(prompt_text(gw.history().back())), 300u);
}

TEST(Generate, ForcesGreedyShortDecoding) {
  Fixture f(acme(), echo);
  const auto pred = f.pipeline().generate(kAcme, {"Jane Roe founded Acme Widgets.", {"a"}});
  EXPECT_EQ(pred.answer, "Jane Roe");
  EXPECT_EQ(pred.raw_output, "Jane Roe\nbecause the evidence says so");
  const auto req = f.gateway.history().back();
  EXPECT_EQ(req.kind, CallKind::generate);
  EXPECT_EQ(req.temperature, 0.0);
  EXPECT_EQ(req.max_tokens, 50);
  EXPECT_EQ(req.model, "mistral-7b-instruct");
  const auto& text = req.messages.back().content;
  EXPECT_NE(text.find("Evidence:\nJane Roe founded Acme Widgets."), std::string::npos);
  EXPECT_NE(text.find("also be expressed as: founder"), std::string::npos);
  EXPECT_NE(text.find("Question: Who founded Acme Widgets?"), std::string::npos);
}

TEST(Generate, EmptyOutputFailsTheStage) {
  Fixture f(acme(), [](const ChatRequest& r) -> std::optional<std::string> {
    return r.kind == CallKind::generate ? "  \n " : "Jane Roe founded it.";
  });
  const auto p = f.pipeline();
  EXPECT_THROW(p.generate(kAcme, {"x", {}}), Error);
  try {
    p.run(kAcme);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), Stage::generation);
    EXPECT_NE(std::string(e.what()).find("(Acme Widgets, founded by)"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("empty generation"), std::string::npos);
  }
}

TEST(Run, UnknownRelationFailsRetrieval) {
  Fixture f(acme(), echo);
  const auto p = f.pipeline();
  const std::vector<Query> qs{kAcme, {"Acme Widgets", "sponsor of"}};
  EXPECT_THROW(p.check_queries(qs), ConfigError);
  try {
    p.run(qs[1]);
    FAIL() << "expected StageError";
  } catch (const StageError& e) {
    EXPECT_EQ(e.stage(), Stage::retrieval);
  }
}

TEST(Run, NoContextTouchesNoIndex) {
  Fixture f(acme(), echo);
  const auto p = f.pipeline(apply_ablation({}, "no_context"));
  const auto pred = p.run(kAcme);
  EXPECT_EQ(p.index_reads(), 0u);
  EXPECT_EQ(f.gateway.calls(), 1u);
  EXPECT_FALSE(pred.trace.summarize_prompt);
  const auto& text = pred.trace.generate_prompt->text;
  EXPECT_EQ(text.find("Evidence:"), std::string::npos);
  EXPECT_EQ(text.find("also be expressed"), std::string::npos);
  EXPECT_EQ(text.find("Jane Roe is the founder"), std::string::npos);
  EXPECT_NE(text.find("Question: Who founded Acme Widgets?"), std::string::npos);
}

TEST(Run, TraceIsComplete) {
  Fixture f(acme(), echo);
  const auto pred = f.pipeline().run(kAcme);
  const auto j = nlohmann::json::parse(trace_to_json(kAcme, pred));
  EXPECT_EQ(j["head"], "Acme Widgets");
  EXPECT_EQ(j["retrieval_mode"], "hybrid");
  EXPECT_FALSE(j["lexical"].is_null());
  EXPECT_FALSE(j["fused"].empty());
  EXPECT_EQ(j["summarize_prompt"]["hash"].get<std::string>().size(), 64u);
  EXPECT_EQ(j["answer"], "Jane Roe");
}

TEST(Run, PlantedTailsAreRecovered) {
  const auto world = testing::make_world(RelationRegistry::bundled(), {});
  Fixture f(world.corpus, testing::oracle_responder(world.tail_of));
  const auto p = f.pipeline();
  for (const auto& t : world.triples) {
    const auto pred = p.run({t.head, t.relation});
    EXPECT_TRUE(exact_match(pred.answer, t.golds)) << t.head << " -> " << pred.answer;
  }
}

TEST(Batch, EmitsInOrderAndStops) {
  const auto world = testing::make_world(RelationRegistry::bundled(), {});
  Fixture f(world.corpus, testing::oracle_responder(world.tail_of));
  const auto p = f.pipeline();
  std::vector<Query> qs;
  for (const auto& t : world.triples) qs.push_back({t.head, t.relation});
  qs.push_back({"Nobody", "sponsor of"});

  std::vector<std::size_t> order;
  std::vector<std::string> answers;
  run_batch(p, qs, 4, [&](std::size_t i, QueryOutcome&& o) {
    order.push_back(i);
    answers.push_back(o.prediction ? o.prediction->answer : "ERR:" + o.error);
    return true;
  });
  ASSERT_EQ(order.size(), qs.size());
  for (std::size_t i = 0; i < order.size(); ++i) EXPECT_EQ(order[i], i);
  for (std::size_t i = 0; i < world.triples.size(); ++i) {
    EXPECT_EQ(answers[i], world.triples[i].golds[0]);
  }
  EXPECT_EQ(answers.back().rfind("ERR:retrieval failed for (Nobody, sponsor of)", 0), 0u);

  std::size_t seen = 0;
  run_batch(p, qs, 3, [&](std::size_t, QueryOutcome&&) { return ++seen < 5; });
  EXPECT_EQ(seen, 5u);

  EXPECT_THROW(run_batch(p, qs, 2,
                         [](std::size_t i, QueryOutcome&&) -> bool {
                           if (i == 2) throw std::runtime_error("disk full");
                           return true;
                         }),
               std::runtime_error);
}

}  // namespace
}  // namespace relcomp
