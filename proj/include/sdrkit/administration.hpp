#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdrkit/error.hpp"
#include "sdrkit/inventory.hpp"
#include "sdrkit/persona.hpp"

namespace sdrkit {

/// Accepts iff the trimmed text is exactly one integer in 1..7.
/// Error kinds: "empty", "out_of_range", "extra_text".
int parse_single_int(const std::string& text);

/// Single-turn request. `tags` identify the unit for in-process providers and
/// are never sent over the wire.
struct ProviderRequest {
  std::string text;
  std::string model;  ///< respondent label; the HTTP provider sends its configured model
  nlohmann::json decode_options = nlohmann::json::object();
  std::map<std::string, std::string> tags;
};

struct ProviderReply {
  std::string text;
  int status = 200;
  double latency_seconds = 0.0;
};

/// Network or service failure; retried with backoff, never counted as a refit.
class TransportError : public Error {
 public:
  explicit TransportError(const std::string& message) : Error("transport", message) {}
};

/// Respondent back end. Implementations must be callable concurrently.
class Provider {
 public:
  virtual ~Provider() = default;
  virtual std::string id() const = 0;
  virtual ProviderReply complete(const ProviderRequest& request) = 0;
};

struct RetryPolicy {
  int max_format_retries = 3;     ///< additional attempts after the first
  int max_transport_retries = 5;  ///< per attempt
  double backoff_initial_seconds = 0.5;
  double backoff_factor = 2.0;
  std::function<void(double)> sleep;  ///< defaults to a real sleep
};

struct SessionPlan {
  std::string respondent_id;  ///< model id
  Persona persona;
  std::shared_ptr<const Inventory> inventory;
  std::shared_ptr<const ItemPool> pool;
  Format format = Format::Likert;
  Condition condition = Condition::Honest;
  std::vector<std::string> presentation_order;
  std::map<std::string, bool> side_flipped;
  nlohmann::json decode_options = nlohmann::json::object();
};

/// Order and side assignment depend on (seed, respondent, persona, format)
/// only, so both conditions of a persona share them.
SessionPlan make_session_plan(const std::string& respondent_id, const Persona& persona,
                              std::shared_ptr<const Inventory> inventory,
                              std::shared_ptr<const ItemPool> pool, Format format,
                              Condition condition, std::uint64_t seed);

/// Prompt for one unit as displayed under the plan.
ProviderRequest build_request(const SessionPlan& plan, const std::string& unit_id);

struct SessionResult {
  ResponseSet responses;
  int refits = 0;
  int transport_retries = 0;
  std::string failure;  ///< empty when complete
};

/// One accepted answer per unit. A unit still unparseable after
/// 1 + max_format_retries attempts, or unreachable after the transport
/// retries, aborts the session and marks it incomplete.
SessionResult run_session(const SessionPlan& plan, Provider& provider, const RetryPolicy& policy = {});

/// Runs plans with at most `max_parallel` concurrent sessions; results are in
/// plan order regardless of completion order.
std::vector<SessionResult> run_sessions(const std::vector<SessionPlan>& plans, Provider& provider,
                                        const RetryPolicy& policy = {}, int max_parallel = 1);

struct RatingPrompt {
  std::string rater;
  int replication = 1;
  int block = 1;
  std::vector<std::string> item_ids;
  std::string text;
};

/// Per (rater, replication) a fresh permutation of the pool split into
/// consecutive blocks of `block_size` (the last block may be shorter).
std::vector<RatingPrompt> build_rating_plan(const ItemPool& pool,
                                            const std::vector<std::string>& raters,
                                            int replications, int block_size, std::uint64_t seed);

/// Rating prompt with the reminder prefix used for a single re-issue.
std::string refit_rating_prompt(const RatingPrompt& prompt);

struct ManifestSession {
  std::string respondent;
  std::string persona;
  Format format = Format::Likert;
  Condition condition = Condition::Honest;
  std::string status;  ///< "ok" or "failed"
  int refits = 0;
  int transport_retries = 0;
  std::vector<std::string> presentation_order;
};

struct RunManifest {
  std::string run_id;
  std::string model;
  std::map<std::string, std::uint64_t> seeds;
  std::string started;
  std::string finished;
  std::vector<ManifestSession> sessions;

  void add(const SessionResult& result);
  /// Throws Error("manifest") unless every (persona, format, condition) in
  /// the crossed design appears exactly once.
  void check_complete(const std::vector<std::string>& personas, const std::vector<Format>& formats,
                      const std::vector<Condition>& conditions) const;
  /// Throws Error("manifest") when a persona's order differs between conditions.
  void check_order_fixed_across_conditions() const;
};

nlohmann::json to_json(const RunManifest& m);
RunManifest manifest_from_json(const nlohmann::json& j);

std::string utc_timestamp();

}  // namespace sdrkit
