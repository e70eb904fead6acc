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

#include "relcomp/llm.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <tuple>

#include <json.hpp>

#include "relcomp/bundled.hpp"
#include "relcomp/error.hpp"
#include "relcomp/hashing.hpp"
#include "relcomp/text.hpp"

namespace relcomp {

using nlohmann::json;

std::string_view to_string(CallKind kind) {
  switch (kind) {
    case CallKind::paraphrase_gen: return "paraphrase_gen";
    case CallKind::summarize: return "summarize";
    case CallKind::generate: return "generate";
  }
  return "unknown";
}

void ChatRequest::validate() const {
  if (!(temperature >= 0.0)) throw ConfigError("chat request: temperature must be >= 0");
  if (max_tokens < 1) throw ConfigError("chat request: max_tokens must be >= 1");
  if (messages.empty()) throw ConfigError("chat request: no messages");
}

std::string prompt_text(const ChatRequest& request) {
  std::string out;
  for (std::size_t i = 0; i < request.messages.size(); ++i) {
    if (i > 0) out.push_back('\n');
    out += request.messages[i].content;
  }
  return out;
}

std::string prompt_hash(const ChatRequest& request) {
  std::string material;
  for (const auto& m : request.messages) {
    material += m.role;
    material.push_back('\n');
    material += m.content;
    material.push_back('\0');
  }
  return sha256_hex(material);
}

// ---------------------------------------------------------------------------
// Templates

namespace {

bool is_ident_char(char c) {
  return std::islower(static_cast<unsigned char>(c)) != 0 || c == '_';
}

// Parses "{name}", "{#name}" or "{/name}" starting at pos. Returns the
// name and the sigil ('\0', '#', '/') when well formed.
std::optional<std::pair<std::string, char>> parse_tag(std::string_view text,
                                                      std::size_t pos) {
  if (text[pos] != '{') return std::nullopt;
  std::size_t i = pos + 1;
  char sigil = '\0';
  if (i < text.size() && (text[i] == '#' || text[i] == '/')) sigil = text[i++];
  const std::size_t begin = i;
  while (i < text.size() && is_ident_char(text[i])) ++i;
  if (i == begin || i >= text.size() || text[i] != '}') return std::nullopt;
  return std::make_pair(std::string(text.substr(begin, i - begin)), sigil);
}

struct TemplateLine {
  std::string_view text;
  std::optional<std::pair<std::string, char>> block_tag;
};

std::vector<TemplateLine> split_template_lines(std::string_view text) {
  std::vector<TemplateLine> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    const bool last = nl == std::string_view::npos;
    auto line = text.substr(start, last ? std::string_view::npos : nl - start + 1);
    if (line.empty() && last) break;
    TemplateLine tl{line, std::nullopt};
    auto stripped = trim(line);
    if (!stripped.empty() && stripped.front() == '{') {
      auto tag = parse_tag(stripped, 0);
      if (tag && tag->second != '\0' &&
          stripped.size() == tag->first.size() + 3) {
        tl.block_tag = tag;
      }
    }
    lines.push_back(tl);
    if (last) break;
    start = nl + 1;
  }
  return lines;
}

}  // namespace

PromptTemplate::PromptTemplate(std::string name, std::string text)
    : name_(std::move(name)), text_(std::move(text)) {
  std::vector<std::string> open;
  for (const auto& line : split_template_lines(text_)) {
    if (!line.block_tag) continue;
    const auto& [tag, sigil] = *line.block_tag;
    if (sigil == '#') {
      open.push_back(tag);
    } else if (open.empty() || open.back() != tag) {
      throw ConfigError("template " + name_ + ": unbalanced block close {/" + tag + "}");
    } else {
      open.pop_back();
    }
  }
  if (!open.empty()) {
    throw ConfigError("template " + name_ + ": unclosed block {#" + open.back() + "}");
  }
}

PromptTemplate PromptTemplate::bundled(std::string_view name) {
  if (name == "paraphrase_gen") {
    return {"paraphrase_gen", std::string(bundled::paraphrase_gen_template())};
  }
  if (name == "summarize") return {"summarize", std::string(bundled::summarize_template())};
  if (name == "generate") return {"generate", std::string(bundled::generate_template())};
  throw ConfigError("no bundled template named " + std::string(name));
}

std::vector<std::string> PromptTemplate::placeholders() const {
  std::set<std::string> names;
  for (std::size_t i = 0; i < text_.size(); ++i) {
    if (auto tag = parse_tag(text_, i)) names.insert(tag->first);
  }
  return {names.begin(), names.end()};
}

std::vector<std::string> PromptTemplate::optional_placeholders() const {
  std::set<std::string> names;
  for (const auto& line : split_template_lines(text_)) {
    if (line.block_tag && line.block_tag->second == '#') {
      names.insert(line.block_tag->first);
    }
  }
  return {names.begin(), names.end()};
}

std::string PromptTemplate::render(const Bindings& bindings) const {
  // Pass 1: resolve optional blocks.
  std::string body;
  int suppressed_depth = 0;
  for (const auto& line : split_template_lines(text_)) {
    if (line.block_tag) {
      const auto& [tag, sigil] = *line.block_tag;
      if (sigil == '#') {
        if (suppressed_depth > 0 || !bindings.contains(tag)) ++suppressed_depth;
      } else if (suppressed_depth > 0) {
        --suppressed_depth;
      }
      continue;
    }
    if (suppressed_depth == 0) body.append(line.text);
  }

  // Pass 2: single left-to-right substitution so bound values are never
  // re-expanded.
  std::string out;
  out.reserve(body.size());
  for (std::size_t i = 0; i < body.size();) {
    if (body[i] == '{') {
      if (auto tag = parse_tag(body, i); tag && tag->second == '\0') {
        auto it = bindings.find(tag->first);
        if (it == bindings.end()) {
          throw ConfigError("template " + name_ + ": missing binding for placeholder '" +
                            tag->first + "'");
        }
        out += it->second;
        i += tag->first.size() + 2;
        continue;
      }
    }
    out.push_back(body[i++]);
  }
  return out;
}

std::string render_list(std::span<const std::string> items) { return join(items, ", "); }

FittedPrompt fit_to_budget(const PromptTemplate& tmpl, Bindings bindings,
                           const std::string& region,
                           std::span<const std::string> items,
                           std::string_view separator, std::size_t budget) {
  if (budget < 1) throw ConfigError("token budget must be >= 1");
  for (std::size_t keep = items.size() + 1; keep-- > 0;) {
    std::string joined;
    for (std::size_t i = 0; i < keep; ++i) {
      if (i > 0) joined.append(separator);
      joined.append(items[i]);
    }
    bindings[region] = std::move(joined);
    auto text = tmpl.render(bindings);
    const auto tokens = count_whitespace_tokens(text);
    if (tokens <= budget) return {std::move(text), keep, tokens};
  }
  throw ConfigError("prompt " + tmpl.name() + " exceeds the " + std::to_string(budget) +
                    "-token budget even with an empty " + region);
}

// ---------------------------------------------------------------------------
// Gateways

LlmGateway::LlmGateway(std::size_t token_budget, std::ptrdiff_t max_in_flight)
    : token_budget_(token_budget),
      in_flight_(std::clamp<std::ptrdiff_t>(max_in_flight, 1, 1024)) {}

std::size_t LlmGateway::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::string LlmGateway::complete(ChatRequest request) {
  if (request.kind == CallKind::generate) {
    request.temperature = kGenerateTemperature;
    request.max_tokens = kGenerateMaxTokens;
  }
  request.validate();
  const auto tokens = count_whitespace_tokens(prompt_text(request));
  if (tokens > token_budget_) {
    throw GatewayError("prompt of " + std::to_string(tokens) + " tokens exceeds the " +
                       std::to_string(token_budget_) + "-token budget");
  }
  in_flight_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{in_flight_};
  {
    std::lock_guard lock(mu_);
    ++calls_;
  }
  return dispatch(request);
}

std::vector<ScriptEntry> load_script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mock script " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
  if (!doc.is_array()) throw FormatError(path.string() + ": mock script must be a JSON array");
  std::vector<ScriptEntry> entries;
  for (const auto& item : doc) {
    try {
      entries.push_back({item.value("label", ""), item.at("prompt_hash").get<std::string>(),
                         item.at("response").get<std::string>()});
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ": bad script entry: " + e.what());
    }
  }
  return entries;
}

void save_script(std::span<const ScriptEntry> entries, const std::filesystem::path& path) {
  json doc = json::array();
  for (const auto& e : entries) {
    doc.push_back({{"label", e.label}, {"prompt_hash", e.prompt_hash}, {"response", e.response}});
  }
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write mock script " + path.string());
  out << doc.dump(2) << '\n';
}

MockGateway::MockGateway(std::vector<ScriptEntry> script, Responder responder,
                         std::size_t token_budget)
    : LlmGateway(token_budget), responder_(std::move(responder)) {
  for (auto& e : script) {
    auto hash = e.prompt_hash;
    by_hash_.insert_or_assign(std::move(hash), std::move(e));
  }
}

std::unique_ptr<MockGateway> MockGateway::from_script_file(
    const std::filesystem::path& path, std::size_t token_budget) {
  return std::make_unique<MockGateway>(load_script(path), nullptr, token_budget);
}

std::vector<ChatRequest> MockGateway::history() const {
  std::lock_guard lock(history_mu_);
  return history_;
}

std::string MockGateway::dispatch(const ChatRequest& request) {
  {
    std::lock_guard lock(history_mu_);
    history_.push_back(request);
  }
  const auto hash = prompt_hash(request);
  if (auto it = by_hash_.find(hash); it != by_hash_.end()) return it->second.response;
  if (responder_) {
    if (auto reply = responder_(request)) return *reply;
  }
  throw GatewayError("mock script has no entry for prompt hash " + hash + " (label '" +
                     request.label + "')");
}

RecordingGateway::RecordingGateway(LlmGateway& inner)
    : LlmGateway(inner.token_budget(), 1024), inner_(inner) {}

std::string RecordingGateway::dispatch(const ChatRequest& request) {
  auto response = inner_.complete(request);
  const auto hash = prompt_hash(request);
  std::lock_guard lock(mu_);
  recorded_.insert_or_assign(hash, ScriptEntry{request.label, hash, response});
  return response;
}

std::vector<ScriptEntry> RecordingGateway::entries() const {
  std::vector<ScriptEntry> out;
  {
    std::lock_guard lock(mu_);
    for (const auto& [hash, e] : recorded_) out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const ScriptEntry& a, const ScriptEntry& b) {
    return std::tie(a.label, a.prompt_hash) < std::tie(b.label, b.prompt_hash);
  });
  return out;
}

}  // namespace relcomp
