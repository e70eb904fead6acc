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
#include <vector>

#include "relcomp/corpus.hpp"
#include "relcomp/http_gateway.hpp"
#include "relcomp/ranking.hpp"

namespace relcomp {

/// Text encoder. Implementations must be deterministic and thread-safe.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<float> embed(std::string_view text) const = 0;
  /// Default implementation calls embed() per text.
  virtual std::vector<std::vector<float>> embed_batch(std::span<const std::string> texts) const;
  /// Number of texts the index builder hands to embed_batch at once.
  virtual std::size_t preferred_batch_size() const { return 1; }
};

/// Signed feature hashing of `tokenize(text)` into `dimension` buckets,
/// L2-normalized. Text without tokens maps to the zero vector.
class HashEmbeddingProvider final : public EmbeddingProvider {
 public:
  /// Throws ConfigError when dimension < 8.
  HashEmbeddingProvider(std::size_t dimension, std::uint64_t seed);

  std::string name() const override;
  std::size_t dimension() const override { return dimension_; }
  std::vector<float> embed(std::string_view text) const override;

 private:
  std::size_t dimension_;
  std::uint64_t seed_;
};

/// HTTP embedding service: POST {"texts": [...]} -> {"vectors": [[...], ...]}.
/// Batches are sent with at most `max_in_flight` concurrent requests and
/// results keep input order.
class RemoteEmbeddingProvider final : public EmbeddingProvider {
 public:
  RemoteEmbeddingProvider(HttpEndpoint endpoint, std::string name, std::size_t dimension,
                          std::size_t batch_size = 32, std::size_t max_in_flight = 4);

  std::string name() const override { return name_; }
  std::size_t dimension() const override { return dimension_; }
  std::vector<float> embed(std::string_view text) const override;
  std::vector<std::vector<float>> embed_batch(std::span<const std::string> texts) const override;
  std::size_t preferred_batch_size() const override { return batch_size_ * max_in_flight_; }

 private:
  std::vector<std::vector<float>> post_batch(std::span<const std::string> texts) const;

  HttpEndpoint endpoint_;
  std::string name_;
  std::size_t dimension_;
  std::size_t batch_size_;
  std::size_t max_in_flight_;
};

/// Flat little-endian vector file: magic "RCVF", u32 version, u32 dimension,
/// u64 count, then per record u16 id length, id bytes, dimension x f32.
struct VectorFile {
  std::size_t dimension = 0;
  std::vector<std::string> ids;
  /// Row-major, ids.size() x dimension.
  std::vector<float> data;
};

inline constexpr std::uint32_t kVectorFileVersion = 1;

void write_vector_file(const VectorFile& file, const std::filesystem::path& path);
VectorFile read_vector_file(const std::filesystem::path& path);

/// One vector per passage, in corpus order.
class DenseIndex {
 public:
  /// Embeds title + " " + body of every passage.
  static DenseIndex build(const Corpus& corpus, const EmbeddingProvider& provider);
  /// Takes precomputed vectors; every corpus passage needs exactly one.
  static DenseIndex import(const Corpus& corpus, const VectorFile& vectors,
                           std::string provider_name);
  static DenseIndex from_rows(std::vector<std::string> ids, std::size_t dimension,
                              std::vector<float> data, std::string provider_name);

  std::size_t size() const noexcept { return ids_.size(); }
  std::size_t dimension() const noexcept { return dimension_; }
  const std::string& provider_name() const noexcept { return provider_name_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  std::span<const float> vector(std::size_t row) const {
    return {data_.data() + row * dimension_, dimension_};
  }

  VectorFile to_vector_file() const { return {dimension_, ids_, data_}; }

  bool operator==(const DenseIndex&) const = default;

 private:
  std::vector<std::string> ids_;
  std::size_t dimension_ = 0;
  std::vector<float> data_;
  std::string provider_name_;
};

/// Passage text fed to the encoder.
std::string passage_embedding_text(const Passage& passage);

inline constexpr std::string_view kDenseTag = "dense";

/// Exhaustive inner-product scan; top-k descending, ties by ascending id.
/// Throws ConfigError when the provider's name or dimension differs from
/// the one that built the index.
RankedList dense_search(const DenseIndex& index, std::string_view question,
                        const EmbeddingProvider& provider, std::size_t k);

double inner_product(std::span<const float> a, std::span<const float> b);

}  // namespace relcomp
