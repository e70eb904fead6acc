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

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "relcomp/corpus.hpp"
#include "relcomp/ranking.hpp"
#include "relcomp/text.hpp"

namespace relcomp {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;

  bool operator==(const Bm25Params&) const = default;
};

struct Posting {
  /// Ordinal of the passage in the indexed corpus.
  std::uint32_t doc = 0;
  /// Token positions in the passage body, ascending. tf = positions.size().
  std::vector<std::uint32_t> positions;

  std::uint32_t tf() const noexcept { return static_cast<std::uint32_t>(positions.size()); }
  bool operator==(const Posting&) const = default;
};

/// Positional inverted index over passage bodies.
class LexicalIndex {
 public:
  /// Throws ConfigError on an empty corpus.
  static LexicalIndex build(const Corpus& corpus, Bm25Params params = {});

  std::size_t doc_count() const noexcept { return doc_ids_.size(); }
  double avg_doc_length() const noexcept { return avg_doc_length_; }
  std::uint32_t doc_length(std::uint32_t doc) const { return doc_lengths_[doc]; }
  const std::string& doc_id(std::uint32_t doc) const { return doc_ids_[doc]; }
  const Bm25Params& params() const noexcept { return params_; }
  std::size_t term_count() const noexcept { return postings_.size(); }
  /// All indexed terms, sorted.
  std::vector<std::string> vocabulary() const;

  /// Postings sorted by doc ordinal; empty when the term is unknown.
  std::span<const Posting> postings(std::string_view term) const;
  std::size_t document_frequency(std::string_view term) const {
    return postings(term).size();
  }
  /// Term frequency of `term` in `doc`; 0 when absent.
  std::uint32_t term_frequency(std::string_view term, std::uint32_t doc) const;
  /// True iff the phrase occurs contiguously in `doc`.
  bool contains_phrase(std::uint32_t doc, std::span<const std::string> phrase) const;
  /// Ascending ordinals of every document containing the phrase.
  std::vector<std::uint32_t> phrase_documents(std::span<const std::string> phrase) const;

  bool operator==(const LexicalIndex&) const = default;

 private:
  friend LexicalIndex deserialize_lexical_index(std::string, const std::string&);

  Bm25Params params_;
  std::vector<std::string> doc_ids_;
  std::vector<std::uint32_t> doc_lengths_;
  double avg_doc_length_ = 0.0;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
};

inline constexpr std::uint8_t kLexicalSnapshotVersion = 1;

std::string serialize_lexical_index(const LexicalIndex& index);
LexicalIndex deserialize_lexical_index(std::string bytes, const std::string& source);
void save_lexical_index(const LexicalIndex& index, const std::filesystem::path& path);
LexicalIndex load_lexical_index(const std::filesystem::path& path);

/// One (entity AND paraphrase) conjunct; both sides match as contiguous
/// token phrases.
struct Conjunct {
  Phrase entity;
  Phrase paraphrase;

  bool operator==(const Conjunct&) const = default;
};

/// Disjunction of conjuncts: (e AND p1) OR ... OR (e AND pk).
struct BooleanQuery {
  std::vector<Conjunct> clauses;

  /// Distinct tokens across all clauses, sorted.
  std::vector<std::string> terms() const;
  /// Human-readable form, e.g. ("acme widgets" AND "founded by") OR (...).
  std::string to_string() const;

  bool operator==(const BooleanQuery&) const = default;
};

/// One clause per paraphrase, in the given order. Throws ConfigError when
/// the paraphrase list is empty or the entity or any paraphrase tokenizes
/// to nothing.
BooleanQuery build_query(std::string_view head_entity,
                         std::span<const std::string> paraphrases);

/// Ordinals of passages satisfying at least one clause, ascending.
std::vector<std::uint32_t> match_candidates(const LexicalIndex& index,
                                            const BooleanQuery& query);

/// Okapi BM25 of `doc` against `terms` (each term counted once), with
/// idf = ln(1 + (N - df + 0.5) / (df + 0.5)).
double bm25_score(const LexicalIndex& index, std::uint32_t doc,
                  std::span<const std::string> terms);

inline constexpr std::string_view kLexicalTag = "lexical";

/// Boolean candidate filter followed by BM25 over the union of query tokens;
/// top-k by score, ties by ascending passage id.
RankedList search(const LexicalIndex& index, const BooleanQuery& query, std::size_t k);

}  // namespace relcomp
