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

// Acceptance checks: one PASS/FAIL line per criterion, each bounded by a
// wall-clock limit. Exit status is nonzero when any check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "oracles.hpp"
#include "relcomp/dense.hpp"
#include "relcomp/evaluation.hpp"
#include "relcomp/fusion.hpp"
#include "relcomp/lexical.hpp"
#include "relcomp/pipeline.hpp"
#include "synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace relcomp;

namespace {

struct Outcome {
  bool ok = true;
  std::string detail;

  void fail(const std::string& why) {
    if (ok) detail = why;
    ok = false;
  }
};

struct Check {
  const char* id;
  const char* name;
  double limit_s;
  std::function<Outcome()> body;
};

// --------------------------------------------------------------------------

Outcome metric_fidelity() {
  Outcome o;
  const std::vector<std::string> chevy{"Chevy Chase"};
  const std::vector<std::string> jax{"Jacksonville, FL"};
  const double j1 = jaccard("Chevy Chase, Maryland", "Chevy Chase");
  const double j2 = jaccard("Orlando, FL", "Jacksonville, FL");
  if (std::abs(j1 - 2.0 / 3.0) > 1e-15) o.fail("Chevy Chase Jaccard " + std::to_string(j1));
  if (!approx_match("Chevy Chase, Maryland", chevy)) o.fail("Chevy Chase not an AM hit");
  if (std::abs(j2 - 1.0 / 3.0) > 1e-15) o.fail("Orlando Jaccard " + std::to_string(j2));
  if (approx_match("Orlando, FL", jax)) o.fail("Orlando counted as an AM hit");
  if (o.ok) o.detail = "J=2/3 -> AM true, J=1/3 -> AM false";
  return o;
}

Outcome rrf_oracle_check() {
  Outcome o;
  std::mt19937_64 rng(2001);
  for (int i = 0; i < 1000 && o.ok; ++i) {
    const auto lists = testing::random_ranked_lists(rng, 3, 20, 20);
    const std::size_t k = 1 + rng() % 20;
    const auto got = rrf_fuse(lists, k, 0);
    const auto want = testing::rrf_oracle(lists, k, 0);
    if (got.entries.size() != want.size()) {
      o.fail("input " + std::to_string(i) + ": size differs");
      break;
    }
    for (std::size_t j = 0; j < want.size(); ++j) {
      if (got.entries[j].passage_id != want[j].id) {
        o.fail("input " + std::to_string(i) + ": order differs at " + std::to_string(j));
        break;
      }
      if (std::abs(got.entries[j].score - want[j].score()) > 1e-12) {
        o.fail("input " + std::to_string(i) + ": score differs at " + std::to_string(j));
        break;
      }
    }
  }
  if (o.ok) o.detail = "1000 inputs, orders identical, |dscore| <= 1e-12";
  return o;
}

Outcome bm25_oracle_check() {
  Outcome o;
  std::mt19937_64 rng(2002);
  double worst = 0;
  for (int round = 0; round < 200 && o.ok; ++round) {
    const auto corpus = testing::random_corpus(rng, 1 + rng() % 50, 6 + rng() % 10, 30);
    const auto idx = LexicalIndex::build(corpus);
    const std::size_t vocab = 6;
    const std::string entity = "t" + std::to_string(rng() % vocab);
    std::vector<std::string> paras;
    for (std::size_t i = 0, n = 1 + rng() % 4; i < n; ++i) {
      std::string p = "t" + std::to_string(rng() % vocab);
      if (rng() % 2) p += " t" + std::to_string(rng() % vocab);
      if (std::find(paras.begin(), paras.end(), p) == paras.end()) paras.push_back(p);
    }
    const std::size_t k = 1 + rng() % 20;
    const auto got = search(idx, build_query(entity, paras), k);
    const auto want = testing::bm25_oracle(corpus, entity, paras, k);
    if (got.size() != want.size()) {
      o.fail("corpus " + std::to_string(round) + ": result size differs");
      break;
    }
    for (std::size_t i = 0; i < want.size(); ++i) {
      worst = std::max(worst, std::abs(got.entries[i].score - want[i].second));
      if (got.entries[i].passage_id != want[i].first) {
        o.fail("corpus " + std::to_string(round) + ": ranking differs at " + std::to_string(i));
        break;
      }
    }
  }
  if (o.ok && worst > 1e-12) o.fail("score drift " + std::to_string(worst));
  if (o.ok) o.detail = "200 corpora, rankings identical";
  return o;
}

Outcome dense_oracle_check() {
  Outcome o;
  std::mt19937_64 rng(2003);
  const auto corpus = testing::random_corpus(rng, 50, 60, 25);
  const HashEmbeddingProvider embedder(256, 13);
  const auto idx = DenseIndex::build(corpus, embedder);
  for (int q = 0; q < 50 && o.ok; ++q) {
    std::string question;
    for (int i = 0; i < 4; ++i) question += " t" + std::to_string(rng() % 60);
    const auto got = dense_search(idx, question, embedder, 50);
    const auto want = testing::dense_oracle(idx, embedder.embed(question), 50);
    for (std::size_t i = 0; i < want.size(); ++i) {
      if (got.entries[i].passage_id != want[i].first) {
        o.fail("query " + std::to_string(q) + ": ordering differs at " + std::to_string(i));
        break;
      }
    }
  }
  double worst = 0;
  for (const auto& p : corpus.passages()) {
    const auto hits = dense_search(idx, passage_embedding_text(p), embedder, 1);
    const auto v = embedder.embed(passage_embedding_text(p));
    worst = std::max(worst, std::abs(inner_product(v, v) - 1.0));
    if (hits.entries.empty() || std::abs(hits.entries[0].score - 1.0) > 1e-6) {
      o.fail("self-query for " + p.id + " did not score 1");
      break;
    }
  }
  if (worst > 1e-6) o.fail("self-similarity off by " + std::to_string(worst));
  if (o.ok) o.detail = "50 queries match exhaustive scan; self-similarity within 1e-6";
  return o;
}

Outcome partition_check() {
  Outcome o;
  const std::vector<std::uint64_t> counts{0, 4, 5, 19, 20, 1000};
  const std::vector<Partition> want{Partition::long_tail,      Partition::long_tail,
                                    Partition::mid_frequency,  Partition::mid_frequency,
                                    Partition::high_frequency, Partition::high_frequency};
  std::string got;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto p = partition(counts[i], 5);
    got += (i ? "," : "") + std::string(to_string(p));
    if (p != want[i]) o.fail("count " + std::to_string(counts[i]) + " -> " + std::string(to_string(p)));
  }
  if (o.ok) o.detail = got;
  return o;
}

Outcome cooccurrence_check() {
  Outcome o;
  std::mt19937_64 rng(2006);
  const auto names = testing::unique_names(rng, 16, 2);
  std::vector<Passage> passages;
  for (int i = 0; i < 100; ++i) {
    std::string body;
    for (int s = 0, n = 1 + static_cast<int>(rng() % 5); s < n; ++s) {
      auto sentence = testing::filler_sentence(rng, 2, 6);
      sentence.pop_back();
      // Plant zero, one or two entities per sentence.
      for (int e = 0, m = static_cast<int>(rng() % 3); e < m; ++e) {
        sentence += " " + names[rng() % names.size()] + " " + testing::filler_word(rng);
      }
      body += sentence + (rng() % 4 == 0 ? "! " : ". ");
    }
    passages.push_back({"c" + std::to_string(i), "", body});
  }
  const Corpus corpus(std::move(passages));
  std::size_t pairs = 0;
  std::uint64_t nonzero = 0;
  for (const auto& a : names) {
    for (const auto& b : names) {
      if (a == b) continue;
      const auto got = cooccurrence_count(corpus, a, b);
      const auto want = testing::cooccurrence_oracle(corpus, a, b);
      ++pairs;
      nonzero += want > 0;
      if (got != want) {
        o.fail(a + " / " + b + ": " + std::to_string(got) + " vs " + std::to_string(want));
        return o;
      }
    }
  }
  o.detail = std::to_string(pairs) + " pairs agree (" + std::to_string(nonzero) + " nonzero)";
  return o;
}

Outcome determinism_check() {
  Outcome o;
  testing::WorldOptions opts;
  opts.entities = 50;
  opts.bearing_per_entity = 4;
  opts.distractors_per_entity = 1;
  const auto world = testing::make_world(RelationRegistry::bundled(), opts);
  const auto f = testing::prepare_run(world, testing::fresh_dir("accept_determinism"));
  std::string err;
  for (const char* w : {"1", "8"}) {
    const auto out = f.dir / (std::string("out_w") + w);
    if (testing::cli({"run", "--config", f.config.string(), "--dataset", f.dataset.string(),
                      "--out", out.string(), "--workers", w},
                     nullptr, &err) != 0) {
      o.fail(std::string("run with workers=") + w + " failed: " + err);
      return o;
    }
  }
  const auto a = testing::read_file(f.dir / "out_w1" / "predictions.jsonl");
  const auto b = testing::read_file(f.dir / "out_w8" / "predictions.jsonl");
  const auto lines = std::count(a.begin(), a.end(), '\n');
  if (lines != 50) o.fail("expected 50 predictions, got " + std::to_string(lines));
  if (a != b) o.fail("prediction files differ between workers=1 and workers=8");
  if (o.ok) o.detail = "50 predictions, " + std::to_string(a.size()) + " bytes, identical";
  return o;
}

Outcome paraphrase_hits_check() {
  Outcome o;
  const auto world = testing::make_world(RelationRegistry::bundled(), {});
  if (world.corpus.size() != 300) {
    o.fail("corpus has " + std::to_string(world.corpus.size()) + " passages");
    return o;
  }
  const double share =
      static_cast<double>(world.paraphrase_sentences) / static_cast<double>(world.bearing_sentences);
  if (std::abs(share - 0.6) > 1e-9) o.fail("paraphrase share " + std::to_string(share));
  const auto f = testing::prepare_run(world, testing::fresh_dir("accept_hits"));
  const auto report = f.dir / "hits.json";
  std::string err;
  if (testing::cli({"diag", "paraphrase-hits", "--config", f.config.string(), "--dataset",
                    f.dataset.string(), "--k", "10", "--out", report.string()},
                   nullptr, &err) != 0) {
    o.fail("diag failed: " + err);
    return o;
  }
  const auto j = json::parse(testing::read_file(report));
  const double delta = j["delta_pp"].get<double>();
  char buf[160];
  std::snprintf(buf, sizeof(buf), "paraphrase %.1f%% vs relation-name %.1f%%, delta %+.1f pp",
                j["paraphrase_rate_pct"].get<double>(), j["relation_name_rate_pct"].get<double>(),
                delta);
  if (delta < 10.0) o.fail(buf);
  if (o.ok) o.detail = buf;
  return o;
}

// Which stage signatures an ablation may change relative to the full run.
const std::vector<std::pair<std::string, std::set<std::string>>> kAblationStages{
    {"no_paraphrases_retrieval", {"retrieval"}},
    {"no_paraphrases_summarization", {"summarization"}},
    {"no_paraphrases_generation", {"generation"}},
    {"no_paraphrases", {"retrieval", "summarization", "generation"}},
    {"lexical_only", {"retrieval"}},
    {"dense_only", {"retrieval"}},
};

std::map<std::string, std::string> stage_signatures(const json& trace) {
  std::map<std::string, std::string> s;
  s["retrieval"] = trace["retrieval_signature"].get<std::string>();
  s["summarization"] =
      trace["summarize_prompt"].is_null() ? "" : trace["summarize_prompt"]["signature"].get<std::string>();
  s["generation"] =
      trace["generate_prompt"].is_null() ? "" : trace["generate_prompt"]["signature"].get<std::string>();
  return s;
}

Outcome ablation_check() {
  Outcome o;
  testing::WorldOptions opts;
  opts.entities = 10;
  opts.bearing_per_entity = 4;
  const auto world = testing::make_world(RelationRegistry::bundled(), opts);
  std::vector<std::string> names{"full"};
  for (const auto& [n, _] : kAblationStages) names.push_back(n);
  const auto f = testing::prepare_run(world, testing::fresh_dir("accept_ablation"), names);

  std::map<std::string, std::vector<std::map<std::string, std::string>>> sigs;
  for (const auto& name : names) {
    const auto out = f.dir / ("out_" + name);
    std::string err;
    if (testing::cli({"run", "--config", f.config.string(), "--dataset", f.dataset.string(),
                      "--out", out.string(), "--ablation", name},
                     nullptr, &err) != 0) {
      o.fail(name + " run failed: " + err);
      return o;
    }
    for (std::size_t i = 0; i < world.triples.size(); ++i) {
      char ref[32];
      std::snprintf(ref, sizeof(ref), "traces/%06zu.json", i);
      sigs[name].push_back(stage_signatures(json::parse(testing::read_file(out / ref))));
    }
  }
  for (const auto& [name, expected] : kAblationStages) {
    for (std::size_t i = 0; i < world.triples.size(); ++i) {
      std::set<std::string> changed;
      for (const auto& [stage, sig] : sigs["full"][i]) {
        if (sigs[name][i].at(stage) != sig) changed.insert(stage);
      }
      if (changed != expected) {
        std::string got;
        for (const auto& s : changed) got += s + " ";
        o.fail(name + ", query " + std::to_string(i) + ": changed stages {" + got + "}");
        return o;
      }
    }
  }
  o.detail = "6 ablations x 10 triples, only the intended stage signatures change";
  return o;
}

Outcome invariant_check() {
  Outcome o;
  std::mt19937_64 rng(2010);
  std::size_t em = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto gold = testing::random_answer(rng);
    const auto pred = rng() % 2 ? testing::perturb(rng, gold) : testing::random_answer(rng);
    const std::vector<std::string> golds{gold};
    if (exact_match(pred, golds)) {
      ++em;
      if (!approx_match(pred, golds)) {
        o.fail("EM without AM: \"" + pred + "\" vs \"" + gold + "\"");
        return o;
      }
    }
  }
  for (int i = 0; i < 500; ++i) {
    auto lists = testing::random_ranked_lists(rng, 4, 25, 20);
    const std::size_t k = 1 + rng() % 25;
    const auto base = rrf_fuse(lists, k);
    std::shuffle(lists.begin(), lists.end(), rng);
    if (!(rrf_fuse(lists, k) == base)) {
      o.fail("fusion input " + std::to_string(i) + " depends on list order");
      return o;
    }
  }
  for (int q = 0; q < 200; ++q) {
    const auto corpus = testing::random_corpus(rng, 30 + rng() % 20, 8, 20);
    const auto idx = LexicalIndex::build(corpus);
    const std::string entity = "t" + std::to_string(rng() % 8);
    std::vector<std::string> small;
    std::vector<std::string> large;
    for (int i = 0; i < 5; ++i) {
      auto p = "t" + std::to_string(rng() % 8) + " t" + std::to_string(rng() % 8);
      if (std::find(large.begin(), large.end(), p) != large.end()) continue;
      large.push_back(p);
      if (small.empty() || rng() % 2) small.push_back(p);
    }
    auto a = search(idx, build_query(entity, small), corpus.size()).ids();
    auto b = search(idx, build_query(entity, large), corpus.size()).ids();
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (!std::includes(b.begin(), b.end(), a.begin(), a.end())) {
      o.fail("query " + std::to_string(q) + ": more paraphrases lost a candidate");
      return o;
    }
  }
  o.detail = "10000 pairs (" + std::to_string(em) + " EM), 500 permutations, 200 queries";
  return o;
}

}  // namespace

int main() {
  const std::vector<Check> checks{
      {"AC1", "metric fidelity", 1, metric_fidelity},
      {"AC2", "rrf oracle", 5, rrf_oracle_check},
      {"AC3", "bm25 oracle", 30, bm25_oracle_check},
      {"AC4", "dense oracle", 5, dense_oracle_check},
      {"AC5", "partition boundaries", 1, partition_check},
      {"AC6", "co-occurrence oracle", 10, cooccurrence_check},
      {"AC7", "end-to-end determinism", 30, determinism_check},
      {"AC8", "paraphrase-infused retrieval gain", 60, paraphrase_hits_check},
      {"AC9", "ablation contract", 30, ablation_check},
      {"AC10", "invariant suite", 60, invariant_check},
  };
  int failures = 0;
  for (const auto& c : checks) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.body();
    } catch (const std::exception& e) {
      out.fail(std::string("exception: ") + e.what());
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out.ok && secs > c.limit_s) {
      out.fail("took " + std::to_string(secs) + " s, limit " + std::to_string(c.limit_s) + " s");
    }
    failures += out.ok ? 0 : 1;
    std::printf("%s %-5s %-36s %7.3fs  %s\n", out.ok ? "PASS" : "FAIL", c.id, c.name, secs,
                out.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu acceptance checks passed\n", static_cast<int>(checks.size()) - failures,
              checks.size());
  return failures == 0 ? 0 : 1;
}
