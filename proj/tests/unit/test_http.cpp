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

#include <gtest/gtest.h>

#include <atomic>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "relcomp/dense.hpp"
#include "relcomp/error.hpp"
#include "relcomp/http_gateway.hpp"

namespace relcomp {
namespace {

using nlohmann::json;

class LocalServer : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = json::parse(req.body);
      {
        std::lock_guard lock(mu_);
        last_auth_ = req.get_header_value("Authorization");
        last_body_ = body;
      }
      const auto content = "reply to " + body["messages"].back()["content"].get<std::string>();
      res.set_content(json{{"choices", {{{"message", {{"content", content}}}}}}}.dump(),
                      "application/json");
    });
    server_.Post("/flaky", [this](const httplib::Request&, httplib::Response& res) {
      if (++flaky_calls_ <= 2) {
        res.status = 503;
        return;
      }
      res.set_content(R"({"choices":[{"message":{"content":"recovered"}}]})", "application/json");
    });
    server_.Post("/bad", [this](const httplib::Request&, httplib::Response& res) {
      ++bad_calls_;
      res.status = 400;
      res.set_content("nope", "text/plain");
    });
    server_.Post("/down", [this](const httplib::Request&, httplib::Response& res) {
      ++down_calls_;
      res.status = 500;
    });
    server_.Post("/garbled", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"unexpected":true})", "application/json");
    });
    server_.Post("/embed", [this](const httplib::Request& req, httplib::Response& res) {
      const auto texts = json::parse(req.body)["texts"].get<std::vector<std::string>>();
      {
        std::lock_guard lock(mu_);
        batch_sizes_.push_back(texts.size());
      }
      json vectors = json::array();
      for (const auto& t : texts) {
        vectors.push_back({static_cast<float>(t.size()), 1.0f, 0.0f, 0.0f});
      }
      res.set_content(json{{"vectors", vectors}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  void TearDown() override {
    server_.stop();
    thread_.join();
  }

  HttpEndpoint endpoint(const std::string& path) const {
    HttpEndpoint ep;
    ep.base_url = "http://127.0.0.1:" + std::to_string(port_);
    ep.path = path;
    ep.backoff = std::chrono::milliseconds(1);
    ep.max_retries = 3;
    return ep;
  }

  static ChatRequest request(const std::string& content) {
    ChatRequest r;
    r.model = "test-model";
    r.messages.push_back({"user", content});
    r.kind = CallKind::generate;
    return r;
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::mutex mu_;
  std::string last_auth_;
  json last_body_;
  std::vector<std::size_t> batch_sizes_;
  std::atomic<int> flaky_calls_{0};
  std::atomic<int> bad_calls_{0};
  std::atomic<int> down_calls_{0};
};

TEST_F(LocalServer, ChatRoundTripSendsWireFormat) {
  auto ep = endpoint("/v1/chat/completions");
  ep.api_key = "secret";
  HttpChatGateway gw(ep);
  EXPECT_EQ(gw.complete(request("hello")), "reply to hello");
  std::lock_guard lock(mu_);
  EXPECT_EQ(last_auth_, "Bearer secret");
  EXPECT_EQ(last_body_["model"], "test-model");
  EXPECT_EQ(last_body_["temperature"], 0.0);
  EXPECT_EQ(last_body_["max_tokens"], 50);
  EXPECT_EQ(last_body_["messages"][0]["role"], "user");
}

TEST_F(LocalServer, RetriesServerErrors) {
  HttpChatGateway gw(endpoint("/flaky"));
  EXPECT_EQ(gw.complete(request("x")), "recovered");
  EXPECT_EQ(flaky_calls_.load(), 3);
}

TEST_F(LocalServer, ClientErrorsAreNotRetried) {
  HttpChatGateway gw(endpoint("/bad"));
  try {
    gw.complete(request("x"));
    FAIL();
  } catch (const GatewayError& e) {
    EXPECT_EQ(e.status(), 400);
    EXPECT_EQ(e.body(), "nope");
  }
  EXPECT_EQ(bad_calls_.load(), 1);
}

TEST_F(LocalServer, GivesUpAfterRetries) {
  HttpChatGateway gw(endpoint("/down"));
  try {
    gw.complete(request("x"));
    FAIL();
  } catch (const GatewayError& e) {
    EXPECT_NE(std::string(e.what()).find("giving up after 4 attempts"), std::string::npos);
  }
  EXPECT_EQ(down_calls_.load(), 4);
}

TEST_F(LocalServer, MalformedReplyIsAGatewayError) {
  HttpChatGateway gw(endpoint("/garbled"));
  EXPECT_THROW(gw.complete(request("x")), GatewayError);
}

TEST_F(LocalServer, UnreachableHostFails) {
  auto ep = endpoint("/v1/chat/completions");
  ep.base_url = "http://127.0.0.1:1";
  ep.max_retries = 1;
  HttpChatGateway gw(ep);
  EXPECT_THROW(gw.complete(request("x")), GatewayError);
}

TEST_F(LocalServer, RemoteEmbeddingsKeepInputOrder) {
  RemoteEmbeddingProvider provider(endpoint("/embed"), "remote-test", 4, 3, 2);
  std::vector<std::string> texts;
  for (int i = 0; i < 10; ++i) texts.push_back(std::string(static_cast<std::size_t>(i + 1), 'a'));
  const auto vectors = provider.embed_batch(texts);
  ASSERT_EQ(vectors.size(), 10u);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(vectors[i][0], static_cast<float>(i + 1));
  std::lock_guard lock(mu_);
  for (auto n : batch_sizes_) EXPECT_LE(n, 3u);
  EXPECT_EQ(batch_sizes_.size(), 4u);
}

TEST_F(LocalServer, RemoteEmbeddingDimensionMismatch) {
  RemoteEmbeddingProvider provider(endpoint("/embed"), "remote-test", 8);
  EXPECT_THROW(provider.embed("abc"), GatewayError);
}

TEST_F(LocalServer, DenseIndexOverRemoteProvider) {
  RemoteEmbeddingProvider provider(endpoint("/embed"), "remote-test", 4, 2, 2);
  const Corpus corpus({{"a", "", "x"}, {"b", "", "xxxxx"}, {"c", "", "xxx"}});
  const auto index = DenseIndex::build(corpus, provider);
  EXPECT_EQ(index.size(), 3u);
  EXPECT_EQ(index.provider_name(), "remote-test");
  const auto hits = dense_search(index, "q", provider, 3);
  EXPECT_EQ(hits.ids(), (std::vector<std::string>{"b", "c", "a"}));
}

// Talks to a real endpoint; runs only when RELCOMP_LIVE_TEST=1 and the
// endpoint variables are set.
TEST(LiveEndpoint, ChatCompletion) {
  const char* flag = std::getenv("RELCOMP_LIVE_TEST");
  if (flag == nullptr || std::string(flag) != "1") GTEST_SKIP() << "set RELCOMP_LIVE_TEST=1";
  auto gw = HttpChatGateway::from_env();
  ChatRequest r;
  r.model = std::getenv("RELCOMP_LIVE_MODEL") ? std::getenv("RELCOMP_LIVE_MODEL") : "gpt-4o-mini";
  r.messages.push_back({"user", "Reply with the single word: ready"});
  r.kind = CallKind::generate;
  EXPECT_FALSE(gw->complete(r).empty());
}

}  // namespace
}  // namespace relcomp
