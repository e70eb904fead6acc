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

#include <chrono>
#include <string>

#include "relcomp/llm.hpp"

namespace relcomp {

/// Connection and retry policy shared by the HTTP adapters.
struct HttpEndpoint {
  /// scheme://host[:port], e.g. "http://localhost:8000".
  std::string base_url;
  std::string path;
  /// Bearer token; empty means no Authorization header.
  std::string api_key;
  std::chrono::milliseconds connect_timeout{5000};
  std::chrono::milliseconds read_timeout{120000};
  /// Additional attempts after the first on transport failures, 429 and 5xx.
  int max_retries = 3;
  /// Delay before retry n is backoff * 2^(n-1).
  std::chrono::milliseconds backoff{250};
};

/// Environment variables read by `HttpChatGateway::from_env`.
inline constexpr const char* kLlmUrlEnv = "RELCOMP_LLM_BASE_URL";
inline constexpr const char* kLlmKeyEnv = "RELCOMP_LLM_API_KEY";

/// Chat-completions client speaking the OpenAI-compatible wire format:
/// POST {model, messages, temperature, max_tokens}, reply
/// {choices: [{message: {content}}]}.
class HttpChatGateway : public LlmGateway {
 public:
  explicit HttpChatGateway(HttpEndpoint endpoint,
                           std::size_t token_budget = kDefaultTokenBudget,
                           std::ptrdiff_t max_in_flight = 8);

  /// Base URL from RELCOMP_LLM_BASE_URL (or `fallback_url`), token from
  /// RELCOMP_LLM_API_KEY. Throws ConfigError when no URL is available.
  static std::unique_ptr<HttpChatGateway> from_env(const std::string& fallback_url = {},
                                                   std::size_t token_budget = kDefaultTokenBudget,
                                                   std::ptrdiff_t max_in_flight = 8);

  const HttpEndpoint& endpoint() const noexcept { return endpoint_; }

 protected:
  std::string dispatch(const ChatRequest& request) override;

 private:
  HttpEndpoint endpoint_;
};

}  // namespace relcomp
