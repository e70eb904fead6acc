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

#include "relcomp/ranking.hpp"

#include <algorithm>

namespace relcomp {

RankedList rank_top_k(std::string tag, std::vector<ScoredId> scored, std::size_t k) {
  const auto better = [](const ScoredId& a, const ScoredId& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.passage_id < b.passage_id;
  };
  const auto keep = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep),
                    scored.end(), better);
  RankedList list;
  list.retriever_tag = std::move(tag);
  list.entries.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    list.entries.push_back({std::move(scored[i].passage_id), scored[i].score, i + 1});
  }
  return list;
}

}  // namespace relcomp
