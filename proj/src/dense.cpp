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

#include "relcomp/dense.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

#include "relcomp/binary_io.hpp"
#include "relcomp/error.hpp"
#include "relcomp/hashing.hpp"
#include "relcomp/text.hpp"

namespace relcomp {

namespace {

constexpr std::string_view kVectorMagic = "RCVF";

void check_dimension(const std::vector<float>& v, std::size_t expected,
                     const std::string& what) {
  if (v.size() != expected) {
    throw ConfigError(what + ": provider returned " + std::to_string(v.size()) +
                      " dimensions, expected " + std::to_string(expected));
  }
}

}  // namespace

std::vector<std::vector<float>> EmbeddingProvider::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(embed(t));
  return out;
}

HashEmbeddingProvider::HashEmbeddingProvider(std::size_t dimension, std::uint64_t seed)
    : dimension_(dimension), seed_(seed) {
  if (dimension < 8) throw ConfigError("hash embedding dimension must be >= 8");
}

std::string HashEmbeddingProvider::name() const {
  return "hash-d" + std::to_string(dimension_) + "-s" + std::to_string(seed_);
}

std::vector<float> HashEmbeddingProvider::embed(std::string_view text) const {
  std::vector<double> acc(dimension_, 0.0);
  for (const auto& token : tokenize(text)) {
    const auto h = fnv1a64(token, seed_);
    const auto bucket = static_cast<std::size_t>(h % dimension_);
    acc[bucket] += ((h >> 32) & 1U) != 0 ? -1.0 : 1.0;
  }
  const double norm = std::sqrt(std::inner_product(acc.begin(), acc.end(), acc.begin(), 0.0));
  std::vector<float> out(dimension_, 0.0F);
  if (norm > 0.0) {
    for (std::size_t i = 0; i < dimension_; ++i) out[i] = static_cast<float>(acc[i] / norm);
  }
  return out;
}

void write_vector_file(const VectorFile& file, const std::filesystem::path& path) {
  if (file.data.size() != file.ids.size() * file.dimension) {
    throw ConfigError("vector file: data size does not match ids x dimension");
  }
  BinaryWriter w;
  w.raw(kVectorMagic);
  w.u32(kVectorFileVersion);
  w.u32(static_cast<std::uint32_t>(file.dimension));
  w.u64(file.ids.size());
  for (std::size_t row = 0; row < file.ids.size(); ++row) {
    const auto& id = file.ids[row];
    if (id.size() > UINT16_MAX) throw ConfigError("vector file: id longer than 65535 bytes");
    w.u16(static_cast<std::uint16_t>(id.size()));
    w.raw(id);
    for (std::size_t d = 0; d < file.dimension; ++d) w.f32(file.data[row * file.dimension + d]);
  }
  w.write_file(path);
}

VectorFile read_vector_file(const std::filesystem::path& path) {
  auto r = BinaryReader::from_file(path);
  if (r.raw(kVectorMagic.size()) != kVectorMagic) {
    throw FormatError(path.string() + ": not a vector file");
  }
  const auto version = r.u32();
  if (version != kVectorFileVersion) {
    throw FormatError(path.string() + ": vector file version " + std::to_string(version) +
                      " is not supported (expected version " +
                      std::to_string(kVectorFileVersion) + ")");
  }
  VectorFile file;
  file.dimension = r.u32();
  const auto count = r.u64();
  if (file.dimension == 0) throw FormatError(path.string() + ": zero dimension");
  if (count > r.remaining()) throw FormatError(path.string() + ": corrupt record count");
  file.ids.reserve(count);
  file.data.reserve(count * file.dimension);
  for (std::uint64_t i = 0; i < count; ++i) {
    file.ids.push_back(r.raw(r.u16()));
    for (std::size_t d = 0; d < file.dimension; ++d) file.data.push_back(r.f32());
  }
  if (!r.at_end()) throw FormatError(path.string() + ": trailing bytes after vectors");
  return file;
}

std::string passage_embedding_text(const Passage& passage) {
  return passage.title + " " + passage.body;
}

DenseIndex DenseIndex::build(const Corpus& corpus, const EmbeddingProvider& provider) {
  const auto dim = provider.dimension();
  if (dim == 0) throw ConfigError("embedding provider " + provider.name() + " has dimension 0");
  DenseIndex index;
  index.dimension_ = dim;
  index.provider_name_ = provider.name();
  index.ids_.reserve(corpus.size());
  index.data_.reserve(corpus.size() * dim);

  const auto batch = std::max<std::size_t>(1, provider.preferred_batch_size());
  std::vector<std::string> texts;
  for (std::size_t start = 0; start < corpus.size(); start += batch) {
    const auto end = std::min(corpus.size(), start + batch);
    texts.clear();
    for (auto i = start; i < end; ++i) texts.push_back(passage_embedding_text(corpus[i]));
    const auto where = end - start == 1
                           ? "passage " + corpus[start].id
                           : "passages " + corpus[start].id + ".." + corpus[end - 1].id;
    std::vector<std::vector<float>> vectors;
    try {
      vectors = provider.embed_batch(texts);
    } catch (const std::exception& e) {
      throw Error("embedding failed for " + where + ": " + e.what());
    }
    if (vectors.size() != texts.size()) {
      throw ConfigError(where + ": provider returned " + std::to_string(vectors.size()) +
                        " vectors for " + std::to_string(texts.size()) + " texts");
    }
    for (auto i = start; i < end; ++i) {
      const auto& v = vectors[i - start];
      check_dimension(v, dim, "passage " + corpus[i].id);
      index.ids_.push_back(corpus[i].id);
      index.data_.insert(index.data_.end(), v.begin(), v.end());
    }
  }
  return index;
}

DenseIndex DenseIndex::import(const Corpus& corpus, const VectorFile& vectors,
                              std::string provider_name) {
  std::unordered_map<std::string_view, std::size_t> row_of;
  for (std::size_t row = 0; row < vectors.ids.size(); ++row) {
    if (!row_of.emplace(vectors.ids[row], row).second) {
      throw FormatError("vector file: duplicate id " + vectors.ids[row]);
    }
    if (corpus.find(vectors.ids[row]) == nullptr) {
      throw FormatError("vector file: id " + vectors.ids[row] + " is not in the corpus");
    }
  }
  std::vector<std::string> ids;
  std::vector<float> data;
  data.reserve(corpus.size() * vectors.dimension);
  for (const auto& p : corpus.passages()) {
    auto it = row_of.find(p.id);
    if (it == row_of.end()) throw FormatError("vector file: no vector for passage " + p.id);
    const auto* row = vectors.data.data() + it->second * vectors.dimension;
    ids.push_back(p.id);
    data.insert(data.end(), row, row + vectors.dimension);
  }
  return from_rows(std::move(ids), vectors.dimension, std::move(data), std::move(provider_name));
}

DenseIndex DenseIndex::from_rows(std::vector<std::string> ids, std::size_t dimension,
                                 std::vector<float> data, std::string provider_name) {
  if (dimension == 0) throw ConfigError("dense index dimension must be > 0");
  if (data.size() != ids.size() * dimension) {
    throw ConfigError("dense index: data size does not match ids x dimension");
  }
  DenseIndex index;
  index.ids_ = std::move(ids);
  index.dimension_ = dimension;
  index.data_ = std::move(data);
  index.provider_name_ = std::move(provider_name);
  return index;
}

double inner_product(std::span<const float> a, std::span<const float> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return sum;
}

RankedList dense_search(const DenseIndex& index, std::string_view question,
                        const EmbeddingProvider& provider, std::size_t k) {
  if (k < 1) throw ConfigError("search depth k must be >= 1");
  if (provider.name() != index.provider_name() || provider.dimension() != index.dimension()) {
    throw ConfigError("embedding provider mismatch: index built with " + index.provider_name() +
                      " (dim " + std::to_string(index.dimension()) + "), queried with " +
                      provider.name() + " (dim " + std::to_string(provider.dimension()) + ")");
  }
  const auto query = provider.embed(question);
  check_dimension(query, index.dimension(), "query");
  std::vector<ScoredId> scored;
  scored.reserve(index.size());
  for (std::size_t row = 0; row < index.size(); ++row) {
    scored.push_back({index.ids()[row], inner_product(query, index.vector(row))});
  }
  return rank_top_k(std::string(kDenseTag), std::move(scored), k);
}

}  // namespace relcomp
