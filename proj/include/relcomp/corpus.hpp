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
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace relcomp {

struct Passage {
  std::string id;
  std::string title;
  std::string body;

  bool operator==(const Passage&) const = default;
};

/// Token statistics over passage bodies, using `tokenize`.
struct CorpusStats {
  std::uint64_t passage_count = 0;
  std::uint64_t total_tokens = 0;
  double avg_passage_tokens = 0.0;

  bool operator==(const CorpusStats&) const = default;
};

/// Immutable, ordered passage collection. Ids are case-sensitive opaque
/// strings, unique within the corpus.
class Corpus {
 public:
  Corpus() = default;
  /// Validates ids and bodies and computes stats. Throws FormatError on an
  /// empty id, empty body, or duplicate id.
  explicit Corpus(std::vector<Passage> passages);

  const std::vector<Passage>& passages() const noexcept { return passages_; }
  const CorpusStats& stats() const noexcept { return stats_; }
  std::size_t size() const noexcept { return passages_.size(); }
  bool empty() const noexcept { return passages_.empty(); }
  const Passage& operator[](std::size_t i) const { return passages_[i]; }

  /// Exact, case-sensitive lookup; nullptr when absent.
  const Passage* find(std::string_view id) const;

  bool operator==(const Corpus& other) const {
    return passages_ == other.passages_ && stats_ == other.stats_;
  }

 private:
  std::vector<Passage> passages_;
  CorpusStats stats_;
  std::unordered_map<std::string, std::size_t> by_id_;
};

CorpusStats compute_stats(const std::vector<Passage>& passages);

/// Diagnostics collected while ingesting a TSV file.
struct IngestLog {
  /// 1-based line numbers whose fields were unquoted/unescaped.
  std::vector<std::size_t> unescaped_lines;
};

/// Reads the `id<TAB>text<TAB>title` layout with a mandatory header row.
/// A field wrapped in double quotes is unquoted and `""` becomes `"`.
/// Blank lines are skipped. Malformed rows raise FormatError citing the line.
Corpus ingest_tsv(const std::filesystem::path& path, IngestLog* log = nullptr);
Corpus ingest_tsv(std::istream& in, const std::string& source,
                  IngestLog* log = nullptr);

inline constexpr std::uint8_t kCorpusSnapshotVersion = 1;

std::string serialize_corpus(const Corpus& corpus);
Corpus deserialize_corpus(std::string bytes, const std::string& source);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path);

}  // namespace relcomp
