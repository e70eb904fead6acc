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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace relcomp {

enum class CallKind { paraphrase_gen, summarize, generate };

std::string_view to_string(CallKind kind);

struct ChatMessage {
  std::string role;
  std::string content;

  bool operator==(const ChatMessage&) const = default;
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  double temperature = 0.0;
  int max_tokens = 256;
  CallKind kind = CallKind::generate;
  /// Human-readable tag carried into mock scripts; never sent on the wire.
  std::string label;

  /// Throws ConfigError unless temperature >= 0, max_tokens >= 1 and at
  /// least one message is present.
  void validate() const;
};

/// Greedy decoding used for relation completion.
inline constexpr double kGenerateTemperature = 0.0;
inline constexpr int kGenerateMaxTokens = 50;
inline constexpr std::size_t kDefaultTokenBudget = 2048;

/// Concatenation of all message contents, the text the budget applies to.
std::string prompt_text(const ChatRequest& request);
/// Stable SHA-256 over roles and contents; keys mock scripts and traces.
std::string prompt_hash(const ChatRequest& request);

using Bindings = std::map<std::string, std::string, std::less<>>;

/// Prompt template with `{name}` placeholders. A block opened by a line
/// `{#name}` and closed by `{/name}` is emitted only when `name` is bound;
/// a placeholder outside such a block must always be bound.
class PromptTemplate {
 public:
  PromptTemplate(std::string name, std::string text);

  /// Bundled templates: "paraphrase_gen", "summarize", "generate".
  static PromptTemplate bundled(std::string_view name);

  const std::string& name() const noexcept { return name_; }
  const std::string& text() const noexcept { return text_; }
  /// Every placeholder referenced by the template, sorted.
  std::vector<std::string> placeholders() const;
  /// Placeholders that gate an optional block.
  std::vector<std::string> optional_placeholders() const;

  /// Verbatim substitution. Throws ConfigError naming the first unbound
  /// required placeholder.
  std::string render(const Bindings& bindings) const;

 private:
  std::string name_;
  std::string text_;
};

/// Renders comma-separated lists in the given order.
std::string render_list(std::span<const std::string> items);

struct FittedPrompt {
  std::string text;
  std::size_t kept_items = 0;
  std::size_t tokens = 0;
};

/// Renders `tmpl` with `region` bound to `items` joined by `separator`,
/// dropping whole items from the end until the prompt fits `budget`
/// whitespace tokens. Everything outside the region is never cut. Throws
/// ConfigError when the prompt is over budget even with an empty region.
FittedPrompt fit_to_budget(const PromptTemplate& tmpl, Bindings bindings,
                           const std::string& region,
                           std::span<const std::string> items,
                           std::string_view separator, std::size_t budget);

/// Single boundary for every LLM call. Subclasses implement `dispatch`;
/// `complete` validates, enforces the decoding and budget contracts, and
/// caps concurrent in-flight calls.
class LlmGateway {
 public:
  explicit LlmGateway(std::size_t token_budget = kDefaultTokenBudget,
                      std::ptrdiff_t max_in_flight = 8);
  virtual ~LlmGateway() = default;
  LlmGateway(const LlmGateway&) = delete;
  LlmGateway& operator=(const LlmGateway&) = delete;

  std::string complete(ChatRequest request);

  std::size_t token_budget() const noexcept { return token_budget_; }
  std::size_t calls() const;

 protected:
  virtual std::string dispatch(const ChatRequest& request) = 0;

 private:
  std::size_t token_budget_;
  std::counting_semaphore<1024> in_flight_;
  mutable std::mutex mu_;
  std::size_t calls_ = 0;
};

struct ScriptEntry {
  std::string label;
  std::string prompt_hash;
  std::string response;
};

std::vector<ScriptEntry> load_script(const std::filesystem::path& path);
void save_script(std::span<const ScriptEntry> entries,
                 const std::filesystem::path& path);

/// Deterministic gateway that replays scripted responses keyed by prompt
/// hash. An optional responder answers requests the script does not cover.
class MockGateway : public LlmGateway {
 public:
  using Responder = std::function<std::optional<std::string>(const ChatRequest&)>;

  explicit MockGateway(std::vector<ScriptEntry> script = {},
                       Responder responder = nullptr,
                       std::size_t token_budget = kDefaultTokenBudget);

  static std::unique_ptr<MockGateway> from_script_file(
      const std::filesystem::path& path,
      std::size_t token_budget = kDefaultTokenBudget);

  /// Requests seen by dispatch, in arrival order.
  std::vector<ChatRequest> history() const;

 protected:
  std::string dispatch(const ChatRequest& request) override;

 private:
  std::map<std::string, ScriptEntry> by_hash_;
  Responder responder_;
  mutable std::mutex history_mu_;
  std::vector<ChatRequest> history_;
};

/// Forwards to another gateway and records every exchange as script
/// entries, so a live or programmatic run can be replayed offline.
class RecordingGateway : public LlmGateway {
 public:
  explicit RecordingGateway(LlmGateway& inner);

  /// Recorded entries sorted by (label, hash).
  std::vector<ScriptEntry> entries() const;

 protected:
  std::string dispatch(const ChatRequest& request) override;

 private:
  LlmGateway& inner_;
  mutable std::mutex mu_;
  std::map<std::string, ScriptEntry> recorded_;
};

}  // namespace relcomp
