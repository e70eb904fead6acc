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

#include "relcomp/http_gateway.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

#include "http_post.hpp"
#include "relcomp/error.hpp"

namespace relcomp {

using nlohmann::json;

namespace detail {

namespace {

bool retryable(int status) { return status == 429 || status >= 500; }

}  // namespace

json post_json(const HttpEndpoint& endpoint, const json& body) {
  httplib::Client client(endpoint.base_url);
  client.set_connection_timeout(endpoint.connect_timeout);
  client.set_read_timeout(endpoint.read_timeout);
  if (!endpoint.api_key.empty()) client.set_bearer_token_auth(endpoint.api_key);

  const auto payload = body.dump();
  const auto target = endpoint.base_url + endpoint.path;
  std::string last_failure;
  for (int attempt = 0; attempt <= endpoint.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(endpoint.backoff * (1 << (attempt - 1)));
    auto res = client.Post(endpoint.path, payload, "application/json");
    if (!res) {
      last_failure = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      try {
        return json::parse(res->body);
      } catch (const json::exception& e) {
        throw GatewayError(target + ": unparseable response: " + e.what(), res->status,
                           res->body);
      }
    }
    if (!retryable(res->status)) {
      throw GatewayError(target + ": HTTP " + std::to_string(res->status), res->status,
                         res->body);
    }
    last_failure = "HTTP " + std::to_string(res->status);
  }
  throw GatewayError(target + ": giving up after " + std::to_string(endpoint.max_retries + 1) +
                     " attempts (" + last_failure + ")");
}

}  // namespace detail

HttpChatGateway::HttpChatGateway(HttpEndpoint endpoint, std::size_t token_budget,
                                 std::ptrdiff_t max_in_flight)
    : LlmGateway(token_budget, max_in_flight), endpoint_(std::move(endpoint)) {
  if (endpoint_.base_url.empty()) throw ConfigError("chat gateway: empty base URL");
  if (endpoint_.path.empty()) endpoint_.path = "/v1/chat/completions";
}

std::unique_ptr<HttpChatGateway> HttpChatGateway::from_env(const std::string& fallback_url,
                                                           std::size_t token_budget,
                                                           std::ptrdiff_t max_in_flight) {
  HttpEndpoint endpoint;
  if (const char* url = std::getenv(kLlmUrlEnv); url != nullptr && *url != '\0') {
    endpoint.base_url = url;
  } else {
    endpoint.base_url = fallback_url;
  }
  if (endpoint.base_url.empty()) {
    throw ConfigError(std::string("no LLM endpoint configured; set ") + kLlmUrlEnv);
  }
  if (const char* key = std::getenv(kLlmKeyEnv)) endpoint.api_key = key;
  return std::make_unique<HttpChatGateway>(std::move(endpoint), token_budget, max_in_flight);
}

std::string HttpChatGateway::dispatch(const ChatRequest& request) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  const json body{{"model", request.model},
                  {"messages", std::move(messages)},
                  {"temperature", request.temperature},
                  {"max_tokens", request.max_tokens}};
  const auto reply = detail::post_json(endpoint_, body);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw GatewayError("chat response missing choices[0].message.content: " +
                           std::string(e.what()),
                       200, reply.dump());
  }
}

}  // namespace relcomp
