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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "relcomp/ranking.hpp"

namespace relcomp {

struct FusedEntry {
  std::string passage_id;
  double score = 0.0;
  /// retriever tag -> 1-based rank in that retriever's list.
  std::map<std::string, std::size_t> ranks;

  bool operator==(const FusedEntry&) const = default;
};

struct FusedRanking {
  std::vector<FusedEntry> entries;
  std::size_t k = 0;
  std::uint64_t c_rrf = 0;

  std::vector<std::string> ids() const;
  bool operator==(const FusedRanking&) const = default;
};

/// Reciprocal Rank Fusion: score(p) = sum over lists containing p of
/// 1 / (c_rrf + rank). Keeps the top k, ties broken by ascending passage id.
/// Scores are compared exactly as rationals whenever they fit in 128 bits,
/// so equal sums tie regardless of floating-point summation order.
///
/// Throws ConfigError for a rank of 0 with c_rrf = 0, a passage repeated
/// within one list, or two lists sharing a retriever tag.
FusedRanking rrf_fuse(std::span<const RankedList> lists, std::size_t k,
                      std::uint64_t c_rrf = 0);

}  // namespace relcomp
