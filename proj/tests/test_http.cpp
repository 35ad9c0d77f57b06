#include <doctest.h>

#include <cstdlib>
#include <mutex>
#include <thread>

#include "sdrkit/http_provider.hpp"

#include <httplib.h>

using namespace sdrkit;
using nlohmann::json;

namespace {

struct Captured {
  std::mutex m;
  std::string auth;
  bool has_auth = false;
  json body;
};

class Fake {
 public:
  Fake(int status, std::string reply) {
    server_.Post("/v1/chat/completions", [this, status, reply](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard<std::mutex> lock(seen.m);
      seen.has_auth = req.has_header("Authorization");
      seen.auth = req.get_header_value("Authorization");
      seen.body = json::parse(req.body);
      res.status = status;
      res.set_content(reply, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~Fake() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  Captured seen;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

std::string ok_reply(const std::string& content) {
  return json{{"choices", json::array({{{"message", {{"role", "assistant"}, {"content", content}}}}})}}.dump();
}

HttpProviderConfig config(const std::string& url) {
  HttpProviderConfig c;
  c.base_url = url;
  c.model = "test-model";
  c.token_env = "SDRKIT_TEST_HTTP_TOKEN";
  c.timeout_seconds = 5;
  return c;
}

ProviderRequest request() {
  ProviderRequest r;
  r.text = "Rate this.";
  r.model = "respondent-label";
  r.decode_options = {{"temperature", 0.7}, {"max_tokens", 4}};
  r.tags = {{"unit", "x"}};
  return r;
}

}  // namespace

TEST_CASE("request carries bearer token from the environment, model and decode options") {
  Fake fake(200, ok_reply(" 5 "));
  setenv("SDRKIT_TEST_HTTP_TOKEN", "secret-abc", 1);
  HttpProvider provider(config(fake.url()));
  const auto reply = provider.complete(request());
  unsetenv("SDRKIT_TEST_HTTP_TOKEN");
  CHECK(reply.text == " 5 ");
  CHECK(reply.status == 200);
  CHECK(fake.seen.auth == "Bearer secret-abc");
  CHECK(fake.seen.body["model"] == "test-model");
  CHECK(fake.seen.body["temperature"] == 0.7);
  CHECK(fake.seen.body["max_tokens"] == 4);
  REQUIRE(fake.seen.body["messages"].size() == 1);
  CHECK(fake.seen.body["messages"][0]["role"] == "user");
  CHECK(fake.seen.body["messages"][0]["content"] == "Rate this.");
  CHECK_FALSE(fake.seen.body.contains("tags"));
}

TEST_CASE("no authorization header without the environment variable") {
  Fake fake(200, ok_reply("3"));
  unsetenv("SDRKIT_TEST_HTTP_TOKEN");
  HttpProvider provider(config(fake.url()));
  provider.complete(request());
  CHECK_FALSE(fake.seen.has_auth);
}

TEST_CASE("rate limits and server errors are transport errors") {
  for (int status : {429, 500, 503}) {
    Fake fake(status, "{}");
    HttpProvider provider(config(fake.url()));
    CHECK_THROWS_AS(provider.complete(request()), TransportError);
  }
}

TEST_CASE("client errors and malformed replies are not retried as transport") {
  {
    Fake fake(400, "{}");
    HttpProvider provider(config(fake.url()));
    try {
      provider.complete(request());
      FAIL("expected error");
    } catch (const TransportError&) {
      FAIL("400 must not be a transport error");
    } catch (const Error& e) {
      CHECK(e.kind() == "provider_http");
    }
  }
  {
    Fake fake(200, "{\"choices\": []}");
    HttpProvider provider(config(fake.url()));
    try {
      provider.complete(request());
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == "provider_reply");
    }
  }
}

TEST_CASE("unreachable server is a transport error") {
  int port = 0;
  {
    httplib::Server s;
    port = s.bind_to_any_port("127.0.0.1");
  }
  auto c = config("http://127.0.0.1:" + std::to_string(port));
  c.timeout_seconds = 1;
  HttpProvider provider(c);
  CHECK_THROWS_AS(provider.complete(request()), TransportError);
}

TEST_CASE("missing base url or model is a config error") {
  HttpProviderConfig c;
  c.model = "m";
  CHECK_THROWS_AS(HttpProvider{c}, Error);
  c.base_url = "http://127.0.0.1:1";
  c.model.clear();
  CHECK_THROWS_AS(HttpProvider{c}, Error);
}
