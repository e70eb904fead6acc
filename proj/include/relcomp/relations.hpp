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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "relcomp/llm.hpp"

namespace relcomp {

/// Coarse tail-entity classes used to steer summarization.
enum class EntityType { person, org, gpe, loc };

std::string_view to_string(EntityType type);
/// Accepts exactly "PERSON", "ORG", "GPE" or "LOC".
std::optional<EntityType> parse_entity_type(std::string_view tag);

inline constexpr std::string_view kEntityPlaceholder = "{entity}";

/// Per-relation knowledge: paraphrase set, QA template for dense queries,
/// and expected tail-entity types.
struct RelationProfile {
  std::string relation;
  std::vector<std::string> paraphrases;
  std::string qa_template;
  std::vector<EntityType> expected_types;
  /// Datasets the relation belongs to; informational.
  std::vector<std::string> datasets;

  /// Throws ConfigError naming the relation when an invariant is broken:
  /// empty or case-insensitively duplicated paraphrases, a template without
  /// exactly one `{entity}`, or an empty/duplicated type list.
  void validate() const;

  std::vector<std::string> expected_type_tags() const;
};

/// Immutable set of profiles keyed by relation name.
class RelationRegistry {
 public:
  RelationRegistry() = default;
  explicit RelationRegistry(std::vector<RelationProfile> profiles);

  /// Parses the JSON registry format:
  /// {"relations": [{"relation", "paraphrases", "qa_template",
  ///                 "expected_types", "datasets"?}, ...]}
  static RelationRegistry from_json(std::string_view text, const std::string& source);
  static RelationRegistry load(const std::filesystem::path& path);
  /// The registry shipped with the library (data/relations.json).
  static RelationRegistry bundled();

  /// Exact match after trimming surrounding whitespace.
  const RelationProfile* find(std::string_view relation) const;
  /// Like find, but throws ConfigError for unknown relations.
  const RelationProfile& at(std::string_view relation) const;

  const std::vector<RelationProfile>& profiles() const noexcept { return profiles_; }
  std::size_t size() const noexcept { return profiles_.size(); }

  std::string to_json() const;

 private:
  std::vector<RelationProfile> profiles_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
};

/// Replaces the `{entity}` placeholder with `head_entity` verbatim.
std::string instantiate_question(const RelationProfile& profile,
                                 std::string_view head_entity);

/// Splits on commas and newlines, trims, and deduplicates
/// case-insensitively keeping the first spelling.
std::vector<std::string> parse_paraphrase_list(std::string_view response);

struct ParaphraseResult {
  std::vector<std::string> paraphrases;
  std::vector<std::string> warnings;
};

/// Typical paraphrase-set sizes; counts outside produce a warning only.
inline constexpr std::size_t kMinExpectedParaphrases = 4;
inline constexpr std::size_t kMaxExpectedParaphrases = 11;

/// Asks the gateway for paraphrases of `relation`. Throws GatewayError
/// carrying the raw response when nothing parseable comes back.
ParaphraseResult generate_paraphrases(std::string_view relation, LlmGateway& gateway,
                                      const std::string& model);

}  // namespace relcomp
