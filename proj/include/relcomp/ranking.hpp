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

#include <cstddef>
#include <string>
#include <vector>

namespace relcomp {

struct RankedEntry {
  std::string passage_id;
  double score = 0.0;
  /// 1-based.
  std::size_t rank = 0;

  bool operator==(const RankedEntry&) const = default;
};

/// Output of a single retriever: score-descending, ranks 1..n without gaps,
/// unique ids.
struct RankedList {
  std::string retriever_tag;
  std::vector<RankedEntry> entries;

  std::vector<std::string> ids() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.passage_id);
    return out;
  }
  bool empty() const noexcept { return entries.empty(); }
  std::size_t size() const noexcept { return entries.size(); }

  bool operator==(const RankedList&) const = default;
};

/// Candidate scored by some retriever, before ranking.
struct ScoredId {
  std::string passage_id;
  double score = 0.0;
};

/// Sorts by score descending (ties by ascending id), keeps the first k, and
/// assigns ranks 1..n.
RankedList rank_top_k(std::string tag, std::vector<ScoredId> scored, std::size_t k);

}  // namespace relcomp
