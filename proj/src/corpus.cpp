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

#include "relcomp/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include "relcomp/binary_io.hpp"
#include "relcomp/error.hpp"
#include "relcomp/text.hpp"

namespace relcomp {

namespace {

constexpr std::string_view kSnapshotMagic = "RCCS";

// Returns true when the field was altered.
bool unquote_field(std::string& field) {
  if (field.size() < 2 || field.front() != '"' || field.back() != '"') {
    return false;
  }
  std::string out;
  out.reserve(field.size() - 2);
  for (std::size_t i = 1; i + 1 < field.size(); ++i) {
    out.push_back(field[i]);
    if (field[i] == '"' && i + 2 < field.size() && field[i + 1] == '"') ++i;
  }
  field = std::move(out);
  return true;
}

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.emplace_back(line.substr(start));
      return fields;
    }
    fields.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

}  // namespace

CorpusStats compute_stats(const std::vector<Passage>& passages) {
  CorpusStats stats;
  stats.passage_count = passages.size();
  for (const auto& p : passages) stats.total_tokens += tokenize(p.body).size();
  if (stats.passage_count > 0) {
    stats.avg_passage_tokens = static_cast<double>(stats.total_tokens) /
                               static_cast<double>(stats.passage_count);
  }
  return stats;
}

Corpus::Corpus(std::vector<Passage> passages) : passages_(std::move(passages)) {
  by_id_.reserve(passages_.size());
  for (std::size_t i = 0; i < passages_.size(); ++i) {
    const auto& p = passages_[i];
    if (p.id.empty()) {
      throw FormatError("passage at position " + std::to_string(i) + " has an empty id");
    }
    if (p.body.empty()) throw FormatError("passage " + p.id + " has an empty body");
    if (!by_id_.emplace(p.id, i).second) {
      throw FormatError("duplicate passage id: " + p.id);
    }
  }
  stats_ = compute_stats(passages_);
}

const Passage* Corpus::find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &passages_[it->second];
}

Corpus ingest_tsv(std::istream& in, const std::string& source, IngestLog* log) {
  std::string line;
  if (!std::getline(in, line)) {
    throw FormatError(source + ": missing header row id<TAB>text<TAB>title");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (split_tabs(line) != std::vector<std::string>{"id", "text", "title"}) {
    throw FormatError(source + ":1: expected header id<TAB>text<TAB>title");
  }

  std::vector<Passage> passages;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    const auto where = source + ":" + std::to_string(line_no);
    if (fields.size() != 3) {
      throw FormatError(where + ": expected 3 tab-separated fields, found " +
                        std::to_string(fields.size()));
    }
    bool altered = false;
    for (auto& f : fields) altered |= unquote_field(f);
    if (altered && log != nullptr) log->unescaped_lines.push_back(line_no);

    Passage p{std::move(fields[0]), std::move(fields[2]), std::move(fields[1])};
    if (p.id.empty()) throw FormatError(where + ": empty passage id");
    if (p.body.empty()) throw FormatError(where + ": empty passage text");
    if (auto [it, inserted] = seen.emplace(p.id, line_no); !inserted) {
      throw FormatError(where + ": duplicate passage id " + p.id +
                        " (first seen on line " + std::to_string(it->second) + ")");
    }
    passages.push_back(std::move(p));
  }
  return Corpus(std::move(passages));
}

Corpus ingest_tsv(const std::filesystem::path& path, IngestLog* log) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open corpus file " + path.string());
  return ingest_tsv(in, path.string(), log);
}

std::string serialize_corpus(const Corpus& corpus) {
  BinaryWriter w;
  w.u8(kCorpusSnapshotVersion);
  w.raw(kSnapshotMagic);
  w.u64(corpus.size());
  for (const auto& p : corpus.passages()) {
    w.str(p.id);
    w.str(p.title);
    w.str(p.body);
  }
  const auto& s = corpus.stats();
  w.u64(s.passage_count);
  w.u64(s.total_tokens);
  w.f64(s.avg_passage_tokens);
  return w.bytes();
}

Corpus deserialize_corpus(std::string bytes, const std::string& source) {
  BinaryReader r(std::move(bytes), source);
  const auto version = r.u8();
  if (version != kCorpusSnapshotVersion) {
    throw FormatError(source + ": corpus snapshot version " + std::to_string(version) +
                      " is not supported (expected version " +
                      std::to_string(kCorpusSnapshotVersion) + ")");
  }
  if (r.raw(kSnapshotMagic.size()) != kSnapshotMagic) {
    throw FormatError(source + ": not a corpus snapshot");
  }
  const auto count = r.u64();
  std::vector<Passage> passages;
  passages.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t i = 0; i < count; ++i) {
    Passage p;
    p.id = r.str();
    p.title = r.str();
    p.body = r.str();
    passages.push_back(std::move(p));
  }
  CorpusStats stored;
  stored.passage_count = r.u64();
  stored.total_tokens = r.u64();
  stored.avg_passage_tokens = r.f64();
  if (!r.at_end()) throw FormatError(source + ": trailing bytes after snapshot");

  Corpus corpus(std::move(passages));
  if (!(corpus.stats() == stored)) {
    throw FormatError(source + ": stored stats disagree with passages");
  }
  return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  BinaryWriter w;
  w.raw(serialize_corpus(corpus));
  w.write_file(path);
}

Corpus load_corpus(const std::filesystem::path& path) {
  return deserialize_corpus(read_file_bytes(path), path.string());
}

}  // namespace relcomp
