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

#include <algorithm>
#include <future>

#include "http_post.hpp"
#include "relcomp/dense.hpp"
#include "relcomp/error.hpp"

namespace relcomp {

using nlohmann::json;

RemoteEmbeddingProvider::RemoteEmbeddingProvider(HttpEndpoint endpoint, std::string name,
                                                 std::size_t dimension, std::size_t batch_size,
                                                 std::size_t max_in_flight)
    : endpoint_(std::move(endpoint)),
      name_(std::move(name)),
      dimension_(dimension),
      batch_size_(std::max<std::size_t>(1, batch_size)),
      max_in_flight_(std::max<std::size_t>(1, max_in_flight)) {
  if (endpoint_.base_url.empty()) throw ConfigError("embedding endpoint: empty base URL");
  if (endpoint_.path.empty()) endpoint_.path = "/embed";
  if (dimension_ == 0) throw ConfigError("embedding endpoint: dimension must be > 0");
}

std::vector<float> RemoteEmbeddingProvider::embed(std::string_view text) const {
  const std::string owned(text);
  return post_batch(std::span<const std::string>(&owned, 1)).front();
}

std::vector<std::vector<float>> RemoteEmbeddingProvider::post_batch(
    std::span<const std::string> texts) const {
  const auto reply = detail::post_json(endpoint_, json{{"texts", texts}});
  std::vector<std::vector<float>> vectors;
  try {
    vectors = reply.at("vectors").get<std::vector<std::vector<float>>>();
  } catch (const json::exception& e) {
    throw GatewayError("embedding response missing vectors: " + std::string(e.what()), 200,
                       reply.dump());
  }
  if (vectors.size() != texts.size()) {
    throw GatewayError("embedding endpoint returned " + std::to_string(vectors.size()) +
                       " vectors for " + std::to_string(texts.size()) + " texts");
  }
  for (const auto& v : vectors) {
    if (v.size() != dimension_) {
      throw GatewayError("embedding endpoint returned dimension " + std::to_string(v.size()) +
                         ", expected " + std::to_string(dimension_));
    }
  }
  return vectors;
}

std::vector<std::vector<float>> RemoteEmbeddingProvider::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  // Waves of at most max_in_flight concurrent batches, collected in order.
  const auto wave = batch_size_ * max_in_flight_;
  for (std::size_t wave_start = 0; wave_start < texts.size(); wave_start += wave) {
    std::vector<std::future<std::vector<std::vector<float>>>> pending;
    const auto wave_end = std::min(texts.size(), wave_start + wave);
    for (auto start = wave_start; start < wave_end; start += batch_size_) {
      const auto len = std::min(batch_size_, wave_end - start);
      pending.push_back(std::async(std::launch::async, [this, texts, start, len] {
        return post_batch(texts.subspan(start, len));
      }));
    }
    for (auto& f : pending) {
      for (auto& v : f.get()) out.push_back(std::move(v));
    }
  }
  return out;
}

}  // namespace relcomp
