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

#include "relcomp/fusion.hpp"

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <unordered_map>

#include "relcomp/error.hpp"

namespace relcomp {

namespace {

using u128 = unsigned __int128;

u128 gcd128(u128 a, u128 b) {
  while (b != 0) {
    const u128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

struct Fraction {
  u128 num = 0;
  u128 den = 1;
};

// Sum of 1/d over `denominators`, or nullopt on overflow.
std::optional<Fraction> reciprocal_sum(const std::vector<std::uint64_t>& denominators) {
  Fraction f;
  for (const auto d : denominators) {
    u128 scaled = 0;
    u128 den = 0;
    if (__builtin_mul_overflow(f.num, static_cast<u128>(d), &scaled) ||
        __builtin_mul_overflow(f.den, static_cast<u128>(d), &den) ||
        __builtin_add_overflow(scaled, f.den, &scaled)) {
      return std::nullopt;
    }
    const auto g = gcd128(scaled, den);
    f.num = scaled / g;
    f.den = den / g;
  }
  return f;
}

struct Accumulator {
  std::string passage_id;
  std::vector<std::uint64_t> denominators;
  std::map<std::string, std::size_t> ranks;
  std::optional<Fraction> exact;
  long double approx = 0.0L;
};

// <0, 0, >0 as a's fused score is below, equal to, above b's.
int compare_scores(const Accumulator& a, const Accumulator& b) {
  if (a.exact && b.exact) {
    u128 lhs = 0;
    u128 rhs = 0;
    if (!__builtin_mul_overflow(a.exact->num, b.exact->den, &lhs) &&
        !__builtin_mul_overflow(b.exact->num, a.exact->den, &rhs)) {
      return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
    }
  }
  return a.approx < b.approx ? -1 : (a.approx > b.approx ? 1 : 0);
}

}  // namespace

std::vector<std::string> FusedRanking::ids() const {
  std::vector<std::string> out;
  out.reserve(entries.size());
  for (const auto& e : entries) out.push_back(e.passage_id);
  return out;
}

FusedRanking rrf_fuse(std::span<const RankedList> lists, std::size_t k, std::uint64_t c_rrf) {
  std::vector<Accumulator> acc;
  std::unordered_map<std::string, std::size_t> slot;
  std::set<std::string> tags;
  for (const auto& list : lists) {
    if (!tags.insert(list.retriever_tag).second) {
      throw ConfigError("rrf: retriever tag '" + list.retriever_tag + "' appears twice");
    }
    std::set<std::string_view> seen;
    for (const auto& entry : list.entries) {
      if (entry.rank == 0 && c_rrf == 0) {
        throw ConfigError("rrf: rank 0 for passage " + entry.passage_id + " in list '" +
                          list.retriever_tag + "' with c_rrf = 0");
      }
      if (!seen.insert(entry.passage_id).second) {
        throw ConfigError("rrf: passage " + entry.passage_id + " appears twice in list '" +
                          list.retriever_tag + "'");
      }
      auto [it, inserted] = slot.emplace(entry.passage_id, acc.size());
      if (inserted) acc.push_back({entry.passage_id, {}, {}, std::nullopt, 0.0L});
      auto& a = acc[it->second];
      a.denominators.push_back(c_rrf + entry.rank);
      a.ranks.emplace(list.retriever_tag, entry.rank);
    }
  }

  for (auto& a : acc) {
    // Summing in a canonical order makes the result independent of list order.
    std::sort(a.denominators.begin(), a.denominators.end(), std::greater<>());
    for (const auto d : a.denominators) a.approx += 1.0L / static_cast<long double>(d);
    a.exact = reciprocal_sum(a.denominators);
  }

  const auto before = [](const Accumulator& a, const Accumulator& b) {
    const int cmp = compare_scores(a, b);
    if (cmp != 0) return cmp > 0;
    return a.passage_id < b.passage_id;
  };
  const auto keep = std::min(k, acc.size());
  std::partial_sort(acc.begin(), acc.begin() + static_cast<std::ptrdiff_t>(keep), acc.end(),
                    before);

  FusedRanking fused;
  fused.k = k;
  fused.c_rrf = c_rrf;
  fused.entries.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    auto& a = acc[i];
    double score = 0.0;
    if (a.exact) {
      score = static_cast<double>(static_cast<long double>(a.exact->num) /
                                  static_cast<long double>(a.exact->den));
    } else {
      score = static_cast<double>(a.approx);
    }
    fused.entries.push_back({std::move(a.passage_id), score, std::move(a.ranks)});
  }
  return fused;
}

}  // namespace relcomp
