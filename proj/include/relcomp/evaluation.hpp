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
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relcomp/corpus.hpp"

namespace relcomp {

/// Relation-completion instance (head, relation, ?) with acceptable tails.
struct Triple {
  std::string head;
  std::string relation;
  std::vector<std::string> golds;
  /// Same-sentence co-occurrence frequency of (head, tail) in the corpus.
  std::optional<std::uint64_t> count;

  bool operator==(const Triple&) const = default;
};

/// JSON-lines: {"head", "relation", "golds": [...], "count"?} per line.
std::vector<Triple> read_dataset(const std::filesystem::path& path);
void write_dataset(std::span<const Triple> triples, const std::filesystem::path& path);
std::string triple_to_json_line(const Triple& triple);

/// Punctuation removed, lowercased, whitespace-split, order preserved.
std::vector<std::string> normalize_sequence(std::string_view text);
/// Set form of normalize_sequence; the unit of Jaccard similarity.
std::set<std::string> normalize(std::string_view text);

enum class MatchMode {
  /// Compare normalized token sequences.
  normalized,
  /// Compare raw strings byte for byte.
  raw,
};

bool exact_match(std::string_view prediction, std::span<const std::string> golds,
                 MatchMode mode = MatchMode::normalized);

/// Word-level Jaccard over normalize(); two empty sets give 1.
double jaccard(std::string_view a, std::string_view b);

inline constexpr double kDefaultAmThreshold = 0.6;

/// True iff the best Jaccard against any gold is >= threshold.
bool approx_match(std::string_view prediction, std::span<const std::string> golds,
                  double threshold = kDefaultAmThreshold);

/// Number of sentences, over all passage bodies, containing both entities as
/// contiguous token phrases (case-insensitive). Entities without tokens
/// never match.
std::uint64_t cooccurrence_count(const Corpus& corpus, std::string_view e1,
                                 std::string_view e2);

/// Tokenized sentences of a corpus, split once and reused across many
/// entity pairs.
class SentenceTable {
 public:
  explicit SentenceTable(const Corpus& corpus);

  std::uint64_t count(std::string_view e1, std::string_view e2) const;
  /// Sentences containing e1 and at least one of `tails`.
  std::uint64_t count_any(std::string_view e1, std::span<const std::string> tails) const;
  std::size_t size() const noexcept { return sentences_.size(); }

 private:
  std::vector<std::vector<std::string>> sentences_;
};

enum class Partition { long_tail, mid_frequency, high_frequency };

std::string_view to_string(Partition partition);

inline constexpr std::uint64_t kDefaultLongTailThreshold = 5;

/// long_tail if count < x, mid_frequency if x <= count < 4x, otherwise
/// high_frequency. Throws ConfigError for x < 1.
Partition partition(std::uint64_t count, std::uint64_t x = kDefaultLongTailThreshold);

struct Cell {
  std::size_t n = 0;
  std::size_t em_hits = 0;
  std::size_t am_hits = 0;

  double em() const noexcept { return n == 0 ? 0.0 : 100.0 * em_hits / n; }
  double am() const noexcept { return n == 0 ? 0.0 : 100.0 * am_hits / n; }
};

struct FrequencyBin {
  std::uint64_t min_count = 0;
  std::uint64_t max_count = 0;
  Cell cell;
};

struct EvalOptions {
  std::optional<std::size_t> bins;
  double am_threshold = kDefaultAmThreshold;
  MatchMode em_mode = MatchMode::normalized;
  std::uint64_t long_tail_threshold = kDefaultLongTailThreshold;
};

struct EvalReport {
  Cell global;
  std::map<std::string, Cell> per_relation;
  /// Only triples carrying a count are partitioned.
  std::map<Partition, Cell> per_partition;
  /// Equal-sized bins over counted triples, ascending by count.
  std::vector<FrequencyBin> bins;
  EvalOptions options;
};

/// `predictions[i]` answers `dataset[i]`. Throws ConfigError on a length
/// mismatch.
EvalReport evaluate(std::span<const Triple> dataset, std::span<const std::string> predictions,
                    const EvalOptions& options = {});

std::string report_to_json(const EvalReport& report);
/// Plain-text tables: overall, per relation, per partition, bins.
std::string report_to_table(const EvalReport& report);

/// CSV "count,pairs": how many triples have each co-occurrence count.
std::string frequency_histogram_csv(std::span<const Triple> dataset);

}  // namespace relcomp
