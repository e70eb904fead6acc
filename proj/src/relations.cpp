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

#include "relcomp/relations.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "relcomp/bundled.hpp"
#include "relcomp/error.hpp"
#include "relcomp/text.hpp"

namespace relcomp {

using nlohmann::json;

std::string_view to_string(EntityType type) {
  switch (type) {
    case EntityType::person: return "PERSON";
    case EntityType::org: return "ORG";
    case EntityType::gpe: return "GPE";
    case EntityType::loc: return "LOC";
  }
  return "UNKNOWN";
}

std::optional<EntityType> parse_entity_type(std::string_view tag) {
  if (tag == "PERSON") return EntityType::person;
  if (tag == "ORG") return EntityType::org;
  if (tag == "GPE") return EntityType::gpe;
  if (tag == "LOC") return EntityType::loc;
  return std::nullopt;
}

namespace {

std::size_t count_occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

}  // namespace

void RelationProfile::validate() const {
  const auto fail = [&](const std::string& why) {
    throw ConfigError("relation '" + relation + "': " + why);
  };
  if (trim(relation).empty()) throw ConfigError("relation with an empty name");
  if (paraphrases.empty()) fail("empty paraphrase list");
  std::set<std::string> seen;
  for (const auto& p : paraphrases) {
    if (trim(p).empty()) fail("blank paraphrase");
    if (!seen.insert(to_lower(p)).second) fail("duplicate paraphrase '" + p + "'");
  }
  if (count_occurrences(qa_template, kEntityPlaceholder) != 1) {
    fail("qa_template must contain {entity} exactly once: \"" + qa_template + "\"");
  }
  if (expected_types.empty()) fail("no expected entity types");
  std::set<EntityType> types(expected_types.begin(), expected_types.end());
  if (types.size() != expected_types.size()) fail("duplicate expected entity type");
}

std::vector<std::string> RelationProfile::expected_type_tags() const {
  std::vector<std::string> tags;
  for (auto t : expected_types) tags.emplace_back(to_string(t));
  return tags;
}

RelationRegistry::RelationRegistry(std::vector<RelationProfile> profiles)
    : profiles_(std::move(profiles)) {
  for (std::size_t i = 0; i < profiles_.size(); ++i) {
    auto& p = profiles_[i];
    p.relation = trim(p.relation);
    p.validate();
    if (!by_name_.emplace(p.relation, i).second) {
      throw ConfigError("relation '" + p.relation + "': defined more than once");
    }
  }
}

RelationRegistry RelationRegistry::from_json(std::string_view text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw FormatError(source + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("relations") || !doc["relations"].is_array()) {
    throw FormatError(source + ": expected an object with a \"relations\" array");
  }
  std::vector<RelationProfile> profiles;
  for (const auto& block : doc["relations"]) {
    RelationProfile p;
    try {
      p.relation = block.at("relation").get<std::string>();
      p.paraphrases = block.at("paraphrases").get<std::vector<std::string>>();
      p.qa_template = block.at("qa_template").get<std::string>();
      for (const auto& tag : block.at("expected_types").get<std::vector<std::string>>()) {
        auto type = parse_entity_type(tag);
        if (!type) {
          throw ConfigError(source + ": relation '" + p.relation + "': unknown entity type '" +
                            tag + "' (allowed: PERSON, ORG, GPE, LOC)");
        }
        p.expected_types.push_back(*type);
      }
      if (block.contains("datasets")) {
        p.datasets = block["datasets"].get<std::vector<std::string>>();
      }
    } catch (const json::exception& e) {
      throw FormatError(source + ": relation '" + p.relation + "': " + e.what());
    }
    profiles.push_back(std::move(p));
  }
  try {
    return RelationRegistry(std::move(profiles));
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

RelationRegistry RelationRegistry::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open registry " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str(), path.string());
}

RelationRegistry RelationRegistry::bundled() {
  return from_json(bundled::default_registry_json(), "<bundled registry>");
}

const RelationProfile* RelationRegistry::find(std::string_view relation) const {
  auto it = by_name_.find(trim(relation));
  return it == by_name_.end() ? nullptr : &profiles_[it->second];
}

const RelationProfile& RelationRegistry::at(std::string_view relation) const {
  if (const auto* p = find(relation)) return *p;
  throw ConfigError("unknown relation '" + std::string(relation) + "'");
}

std::string RelationRegistry::to_json() const {
  json relations = json::array();
  for (const auto& p : profiles_) {
    json block{{"relation", p.relation},
               {"paraphrases", p.paraphrases},
               {"qa_template", p.qa_template},
               {"expected_types", p.expected_type_tags()}};
    if (!p.datasets.empty()) block["datasets"] = p.datasets;
    relations.push_back(std::move(block));
  }
  return json{{"version", 1}, {"relations", std::move(relations)}}.dump(2);
}

std::string instantiate_question(const RelationProfile& profile,
                                 std::string_view head_entity) {
  const auto pos = profile.qa_template.find(kEntityPlaceholder);
  if (pos == std::string::npos) {
    throw ConfigError("relation '" + profile.relation + "': template has no {entity}");
  }
  std::string out = profile.qa_template;
  out.replace(pos, kEntityPlaceholder.size(), head_entity);
  return out;
}

std::vector<std::string> parse_paraphrase_list(std::string_view response) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= response.size(); ++i) {
    if (i < response.size() && response[i] != ',' && response[i] != '\n') continue;
    auto item = trim(response.substr(start, i - start));
    start = i + 1;
    if (item.empty()) continue;
    if (seen.insert(to_lower(item)).second) out.push_back(std::move(item));
  }
  return out;
}

ParaphraseResult generate_paraphrases(std::string_view relation, LlmGateway& gateway,
                                      const std::string& model) {
  const auto tmpl = PromptTemplate::bundled("paraphrase_gen");
  ChatRequest request;
  request.model = model;
  request.kind = CallKind::paraphrase_gen;
  request.temperature = 0.0;
  request.max_tokens = 256;
  request.label = "paraphrase_gen:" + std::string(relation);
  request.messages.push_back({"user", tmpl.render({{"relation", std::string(relation)}})});

  const auto raw = gateway.complete(request);
  ParaphraseResult result;
  result.paraphrases = parse_paraphrase_list(raw);
  if (result.paraphrases.empty()) {
    throw GatewayError("no paraphrases could be parsed for relation '" +
                           std::string(relation) + "'",
                       0, raw);
  }
  const auto n = result.paraphrases.size();
  if (n < kMinExpectedParaphrases || n > kMaxExpectedParaphrases) {
    result.warnings.push_back("relation '" + std::string(relation) + "': " +
                              std::to_string(n) + " paraphrases, outside the usual range " +
                              std::to_string(kMinExpectedParaphrases) + "-" +
                              std::to_string(kMaxExpectedParaphrases));
  }
  return result;
}

}  // namespace relcomp
