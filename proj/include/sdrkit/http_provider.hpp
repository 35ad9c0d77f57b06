#pragma once

#include <chrono>
#include <mutex>
#include <string>

#include "sdrkit/administration.hpp"

namespace sdrkit {

struct HttpProviderConfig {
  std::string base_url;  ///< scheme://host[:port]
  std::string path = "/v1/chat/completions";
  std::string model;
  std::string token_env = "SDRKIT_API_TOKEN";  ///< token is read only from this variable
  double timeout_seconds = 60.0;
  double min_interval_seconds = 0.0;  ///< per-provider rate limit
};

/// OpenAI-compatible chat-completions client. Each request carries one user
/// message; decode options are merged into the body unchanged. 429, 5xx and
/// connection failures raise TransportError; other non-2xx replies raise
/// Error("provider_http").
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig cfg);
  std::string id() const override { return cfg_.model; }
  ProviderReply complete(const ProviderRequest& request) override;

 private:
  HttpProviderConfig cfg_;
  std::mutex rate_mutex_;
  std::chrono::steady_clock::time_point last_request_{};
};

}  // namespace sdrkit
