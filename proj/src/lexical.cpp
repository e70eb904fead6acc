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

#include "relcomp/lexical.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <set>

#include "relcomp/binary_io.hpp"
#include "relcomp/error.hpp"

namespace relcomp {

namespace {

constexpr std::string_view kSnapshotMagic = "RCLX";

std::string quote_phrase(const Phrase& phrase) { return "\"" + join(phrase, " ") + "\""; }

const Posting* find_posting(std::span<const Posting> list, std::uint32_t doc) {
  auto it = std::lower_bound(list.begin(), list.end(), doc,
                             [](const Posting& p, std::uint32_t d) { return p.doc < d; });
  return it != list.end() && it->doc == doc ? &*it : nullptr;
}

}  // namespace

LexicalIndex LexicalIndex::build(const Corpus& corpus, Bm25Params params) {
  if (corpus.empty()) throw ConfigError("cannot build a lexical index over an empty corpus");
  if (corpus.size() > UINT32_MAX) throw ConfigError("corpus too large for a lexical index");
  LexicalIndex index;
  index.params_ = params;
  index.doc_ids_.reserve(corpus.size());
  index.doc_lengths_.reserve(corpus.size());
  std::uint64_t total = 0;
  for (std::uint32_t doc = 0; doc < corpus.size(); ++doc) {
    const auto& passage = corpus[doc];
    const auto tokens = tokenize(passage.body);
    index.doc_ids_.push_back(passage.id);
    index.doc_lengths_.push_back(static_cast<std::uint32_t>(tokens.size()));
    total += tokens.size();
    for (std::uint32_t pos = 0; pos < tokens.size(); ++pos) {
      auto& list = index.postings_[tokens[pos]];
      if (list.empty() || list.back().doc != doc) list.push_back({doc, {}});
      list.back().positions.push_back(pos);
    }
  }
  index.avg_doc_length_ = static_cast<double>(total) / static_cast<double>(corpus.size());
  return index;
}

std::span<const Posting> LexicalIndex::postings(std::string_view term) const {
  auto it = postings_.find(std::string(term));
  if (it == postings_.end()) return {};
  return it->second;
}

std::uint32_t LexicalIndex::term_frequency(std::string_view term, std::uint32_t doc) const {
  const auto* p = find_posting(postings(term), doc);
  return p == nullptr ? 0 : p->tf();
}

bool LexicalIndex::contains_phrase(std::uint32_t doc, std::span<const std::string> phrase) const {
  if (phrase.empty()) return false;
  std::vector<const Posting*> lists;
  lists.reserve(phrase.size());
  for (const auto& term : phrase) {
    const auto* p = find_posting(postings(term), doc);
    if (p == nullptr) return false;
    lists.push_back(p);
  }
  for (const auto start : lists.front()->positions) {
    bool all = true;
    for (std::size_t i = 1; i < lists.size() && all; ++i) {
      all = std::binary_search(lists[i]->positions.begin(), lists[i]->positions.end(),
                               start + static_cast<std::uint32_t>(i));
    }
    if (all) return true;
  }
  return false;
}

std::vector<std::uint32_t> LexicalIndex::phrase_documents(
    std::span<const std::string> phrase) const {
  std::vector<std::uint32_t> docs;
  if (phrase.empty()) return docs;
  // Drive from the rarest term.
  auto rarest = std::min_element(phrase.begin(), phrase.end(),
                                 [&](const std::string& a, const std::string& b) {
                                   return document_frequency(a) < document_frequency(b);
                                 });
  for (const auto& posting : postings(*rarest)) {
    if (contains_phrase(posting.doc, phrase)) docs.push_back(posting.doc);
  }
  return docs;
}

std::vector<std::string> LexicalIndex::vocabulary() const {
  std::vector<std::string> terms;
  terms.reserve(postings_.size());
  for (const auto& [term, list] : postings_) terms.push_back(term);
  std::sort(terms.begin(), terms.end());
  return terms;
}

std::string serialize_lexical_index(const LexicalIndex& index) {
  BinaryWriter w;
  w.u8(kLexicalSnapshotVersion);
  w.raw(kSnapshotMagic);
  w.f64(index.params().k1);
  w.f64(index.params().b);
  w.u64(index.doc_count());
  for (std::uint32_t doc = 0; doc < index.doc_count(); ++doc) {
    w.str(index.doc_id(doc));
    w.u32(index.doc_length(doc));
  }
  w.f64(index.avg_doc_length());
  const auto terms = index.vocabulary();
  w.u64(terms.size());
  for (const auto& term : terms) {
    const auto list = index.postings(term);
    w.str(term);
    w.u32(static_cast<std::uint32_t>(list.size()));
    for (const auto& posting : list) {
      w.u32(posting.doc);
      w.u32(posting.tf());
      for (auto pos : posting.positions) w.u32(pos);
    }
  }
  return w.bytes();
}

LexicalIndex deserialize_lexical_index(std::string bytes, const std::string& source) {
  BinaryReader r(std::move(bytes), source);
  const auto version = r.u8();
  if (version != kLexicalSnapshotVersion) {
    throw FormatError(source + ": lexical index snapshot version " + std::to_string(version) +
                      " is not supported (expected version " +
                      std::to_string(kLexicalSnapshotVersion) + ")");
  }
  if (r.raw(kSnapshotMagic.size()) != kSnapshotMagic) {
    throw FormatError(source + ": not a lexical index snapshot");
  }
  LexicalIndex index;
  index.params_.k1 = r.f64();
  index.params_.b = r.f64();
  const auto docs = r.u64();
  if (docs > r.remaining()) throw FormatError(source + ": corrupt document count");
  for (std::uint64_t i = 0; i < docs; ++i) {
    index.doc_ids_.push_back(r.str());
    index.doc_lengths_.push_back(r.u32());
  }
  index.avg_doc_length_ = r.f64();
  const auto terms = r.u64();
  for (std::uint64_t t = 0; t < terms; ++t) {
    auto term = r.str();
    const auto count = r.u32();
    if (count > r.remaining()) throw FormatError(source + ": corrupt posting count");
    std::vector<Posting> list(count);
    for (auto& posting : list) {
      posting.doc = r.u32();
      if (posting.doc >= docs) throw FormatError(source + ": posting for unknown document");
      const auto tf = r.u32();
      if (tf > r.remaining()) throw FormatError(source + ": corrupt term frequency");
      posting.positions.resize(tf);
      for (auto& pos : posting.positions) pos = r.u32();
    }
    index.postings_.emplace(std::move(term), std::move(list));
  }
  if (!r.at_end()) throw FormatError(source + ": trailing bytes after lexical index");
  return index;
}

void save_lexical_index(const LexicalIndex& index, const std::filesystem::path& path) {
  BinaryWriter w;
  w.raw(serialize_lexical_index(index));
  w.write_file(path);
}

LexicalIndex load_lexical_index(const std::filesystem::path& path) {
  return deserialize_lexical_index(read_file_bytes(path), path.string());
}

std::vector<std::string> BooleanQuery::terms() const {
  std::set<std::string> unique;
  for (const auto& c : clauses) {
    unique.insert(c.entity.begin(), c.entity.end());
    unique.insert(c.paraphrase.begin(), c.paraphrase.end());
  }
  return {unique.begin(), unique.end()};
}

std::string BooleanQuery::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < clauses.size(); ++i) {
    if (i > 0) out += " OR ";
    out += "(" + quote_phrase(clauses[i].entity) + " AND " +
           quote_phrase(clauses[i].paraphrase) + ")";
  }
  return out;
}

BooleanQuery build_query(std::string_view head_entity,
                         std::span<const std::string> paraphrases) {
  if (paraphrases.empty()) throw ConfigError("lexical query needs at least one paraphrase");
  auto entity = tokenize(head_entity);
  if (entity.empty()) {
    throw ConfigError("head entity '" + std::string(head_entity) + "' has no indexable tokens");
  }
  BooleanQuery query;
  query.clauses.reserve(paraphrases.size());
  for (const auto& p : paraphrases) {
    auto phrase = tokenize(p);
    if (phrase.empty()) {
      throw ConfigError("paraphrase '" + p + "' has no indexable tokens");
    }
    query.clauses.push_back({entity, std::move(phrase)});
  }
  return query;
}

std::vector<std::uint32_t> match_candidates(const LexicalIndex& index,
                                            const BooleanQuery& query) {
  std::set<std::uint32_t> candidates;
  // Clauses usually share the entity phrase; resolve each phrase once.
  std::vector<std::pair<const Phrase*, std::vector<std::uint32_t>>> cache;
  const auto docs_for = [&](const Phrase& phrase) -> const std::vector<std::uint32_t>& {
    for (const auto& [key, docs] : cache) {
      if (*key == phrase) return docs;
    }
    cache.emplace_back(&phrase, index.phrase_documents(phrase));
    return cache.back().second;
  };
  for (const auto& clause : query.clauses) {
    const auto entity_docs = docs_for(clause.entity);
    const auto& para_docs = docs_for(clause.paraphrase);
    std::set_intersection(entity_docs.begin(), entity_docs.end(), para_docs.begin(),
                          para_docs.end(), std::inserter(candidates, candidates.end()));
  }
  return {candidates.begin(), candidates.end()};
}

double bm25_score(const LexicalIndex& index, std::uint32_t doc,
                  std::span<const std::string> terms) {
  const auto& params = index.params();
  const double n = static_cast<double>(index.doc_count());
  const double norm = params.k1 * (1.0 - params.b +
                                   params.b * static_cast<double>(index.doc_length(doc)) /
                                       index.avg_doc_length());
  double score = 0.0;
  for (const auto& term : terms) {
    const double tf = index.term_frequency(term, doc);
    if (tf == 0.0) continue;
    const double df = static_cast<double>(index.document_frequency(term));
    const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    score += idf * tf * (params.k1 + 1.0) / (tf + norm);
  }
  return score;
}

RankedList search(const LexicalIndex& index, const BooleanQuery& query, std::size_t k) {
  if (k < 1) throw ConfigError("search depth k must be >= 1");
  const auto terms = query.terms();
  std::vector<ScoredId> scored;
  for (const auto doc : match_candidates(index, query)) {
    scored.push_back({index.doc_id(doc), bm25_score(index, doc, terms)});
  }
  return rank_top_k(std::string(kLexicalTag), std::move(scored), k);
}

}  // namespace relcomp
