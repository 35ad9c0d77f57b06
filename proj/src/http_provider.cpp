#include "sdrkit/http_provider.hpp"

#include <cstdlib>
#include <thread>

#include <httplib.h>

namespace sdrkit {

using nlohmann::json;

HttpProvider::HttpProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.base_url.empty()) throw Error("config", "http provider needs a base_url");
  if (cfg_.model.empty()) throw Error("config", "http provider needs a model id");
}

ProviderReply HttpProvider::complete(const ProviderRequest& request) {
  if (cfg_.min_interval_seconds > 0.0) {
    std::lock_guard<std::mutex> lock(rate_mutex_);
    const auto gap = std::chrono::duration<double>(cfg_.min_interval_seconds);
    const auto ready = last_request_ + std::chrono::duration_cast<std::chrono::steady_clock::duration>(gap);
    const auto now = std::chrono::steady_clock::now();
    if (now < ready) std::this_thread::sleep_for(ready - now);
    last_request_ = std::chrono::steady_clock::now();
  }

  json body = request.decode_options.is_object() ? request.decode_options : json::object();
  body["model"] = cfg_.model;
  body["messages"] = json::array({{{"role", "user"}, {"content", request.text}}});

  httplib::Client client(cfg_.base_url);
  const auto secs = static_cast<time_t>(cfg_.timeout_seconds);
  client.set_read_timeout(secs, 0);
  client.set_write_timeout(secs, 0);
  client.set_connection_timeout(secs, 0);
  httplib::Headers headers;
  if (const char* token = std::getenv(cfg_.token_env.c_str()); token && *token)
    headers.emplace("Authorization", std::string("Bearer ") + token);

  const auto t0 = std::chrono::steady_clock::now();
  auto res = client.Post(cfg_.path, headers, body.dump(), "application/json");
  const double latency = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status == 429 || res->status >= 500)
    throw TransportError("provider returned HTTP " + std::to_string(res->status));
  if (res->status < 200 || res->status >= 300)
    throw Error("provider_http", "provider returned HTTP " + std::to_string(res->status));

  ProviderReply reply;
  reply.status = res->status;
  reply.latency_seconds = latency;
  try {
    const auto doc = json::parse(res->body);
    reply.text = doc.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception& e) {
    throw Error("provider_reply", std::string("unexpected provider reply: ") + e.what());
  }
  return reply;
}

}  // namespace sdrkit
