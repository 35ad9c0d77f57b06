#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdrkit/constraints.hpp"
#include "sdrkit/http_provider.hpp"
#include "sdrkit/irt_fit.hpp"
#include "sdrkit/simulator.hpp"

namespace sdrkit {

/// One respondent: either the built-in simulator or an HTTP model endpoint.
struct RespondentConfig {
  std::string id;
  std::string type = "sim";  ///< "sim" or "http"
  // sim
  double fake_good_delta = 1.0;
  bool matched_block_discrimination = false;
  std::optional<std::filesystem::path> sim_params;
  // http
  HttpProviderConfig http;
  nlohmann::json decode_options = nlohmann::json::object();
};

struct PipelineConfig {
  std::filesystem::path pool;
  std::optional<std::filesystem::path> exclusions;
  std::optional<std::filesystem::path> ratings;    ///< absent: use the pool's desirability column
  std::optional<std::filesystem::path> inventory;  ///< present: skip assembly and validate this one
  std::optional<std::filesystem::path> covariance;
  std::optional<std::filesystem::path> lexicon;
  std::filesystem::path work_dir;  ///< holds desirability, inventory, personas, runs, fits, reports

  std::uint64_t seed = 1;  ///< base; per-stage seeds are derived from it unless given
  std::map<std::string, std::uint64_t> seeds;

  int pairs = 30;
  std::uint64_t node_budget = 500'000'000;
  double time_budget_seconds = 900.0;

  int personas = 50;
  std::vector<RespondentConfig> respondents;
  std::vector<Format> formats = {Format::Likert, Format::Gfc};
  std::vector<Condition> conditions = {Condition::Honest, Condition::FakeGood};
  int max_parallel = 1;
  RetryPolicy retry;

  std::string backend = "map";  ///< "map" or "hmc"
  ItemEstimation likert_items = ItemEstimation::Joint;
  ItemEstimation gfc_items = ItemEstimation::Marginal;
  MapOptions map;
  HmcOptions hmc;

  nlohmann::json source = nlohmann::json::object();  ///< config as read, for hashing

  std::uint64_t stage_seed(const std::string& stage) const;
};

/// Parses and validates a config; relative paths resolve against `base_dir`.
/// Throws Error("config") on any problem, including unreadable input files.
PipelineConfig parse_pipeline_config(const nlohmann::json& j, const std::filesystem::path& base_dir);
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// 16 hex digits of FNV-1a over the canonical (key-sorted) JSON dump.
std::string config_hash(const nlohmann::json& j);
std::string file_hash(const std::filesystem::path& path);

inline const std::vector<std::string> kPipelineStages = {"aggregate", "assemble", "personas",
                                                         "administer", "fit", "report"};

struct PipelineOptions {
  bool force = false;                    ///< rerun stages whose outputs exist
  std::optional<std::string> stop_after;  ///< last stage to run
  std::function<void(const std::string&)> log;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitStage = 3;
inline constexpr int kExitDiagnostics = 4;

struct PipelineResult {
  int exit_code = kExitOk;
  std::string failed_stage;
  std::string message;
  std::vector<std::string> skipped;  ///< stages reused from earlier runs
};

/// Runs the stages in order. A stage whose outputs already exist from a run
/// with the same config hash is skipped. Stage errors stop the run with the
/// stage name; outputs of completed stages stay on disk. A failed R-hat gate
/// still writes fits and reports and then returns kExitDiagnostics.
PipelineResult run_pipeline(const PipelineConfig& cfg, const PipelineOptions& opts = {});

/// Checks that every report entry names a fit recorded in the pipeline
/// manifest with a matching file hash and that recomputing the entry from
/// that fit reproduces every reported number. Returns the problems found.
std::vector<std::string> lint_run(const std::filesystem::path& work_dir);

}  // namespace sdrkit
