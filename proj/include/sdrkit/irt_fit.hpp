#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sdrkit/diagnostics.hpp"
#include "sdrkit/irt_model.hpp"

namespace sdrkit {

/// Joint: one mode over theta and item parameters together. Marginal: item
/// parameters at the mode of their marginal posterior (theta integrated out
/// by Monte Carlo EM), then theta at its conditional mode given those.
enum class ItemEstimation { Joint, Marginal };
std::string to_string(ItemEstimation e);
ItemEstimation item_estimation_from_string(const std::string& s);

struct MapOptions {
  ItemEstimation items = ItemEstimation::Joint;
  int starts = 4;
  int max_iterations = 5000;
  double gradient_tolerance = 1e-8;  ///< Euclidean norm of the gradient at termination
  std::uint64_t seed = 1;
  int marginal_draws = 32;       ///< importance draws per row in the E step
  int em_iterations = 60;
  int m_step_iterations = 25;    ///< partial M steps (generalized EM)
  double em_tolerance = 1e-3;    ///< max change of any item parameter
  double proposal_scale = 1.2;   ///< widening of the Laplace proposal
};

struct MapResult {
  Eigen::VectorXd x;  ///< unconstrained mode
  ModelParams params;
  double log_posterior = 0.0;
  double gradient_norm = 0.0;  ///< Euclidean norm at the returned point (theta block only for marginal)
  bool converged = false;
  int iterations = 0;  ///< optimizer iterations (joint) or EM iterations (marginal)
  int best_start = 0;
  std::string message;
};

/// Deterministic starting point used by start 0: theta = 0, a_plus = 1,
/// thresholds evenly spaced on [-2, 2].
Eigen::VectorXd default_start(const ModelData& d);

/// Quasi-Newton (L-BFGS) ascent from `starts` points, keeping the highest
/// log posterior, followed by a gradient-only refinement to the tolerance.
/// Non-convergence is reported in the result, not thrown.
MapResult fit_map(const ModelData& d, const MapOptions& opts = {});

struct HmcOptions {
  int chains = 4;
  int warmup = 200;
  int draws = 500;
  int max_treedepth = 12;
  double target_accept = 0.95;
  double init_radius = 1.0;  ///< uniform(-r, r) initial values on the unconstrained scale
  std::uint64_t seed = 1;
  int threads = 0;  ///< 0 = one per chain, capped by hardware concurrency
};

struct Posterior {
  /// Per chain, kept draws of the constrained quantities (iterations x
  /// params) in the order theta, a_plus, kappa.
  std::vector<Eigen::MatrixXd> draws;
  Eigen::MatrixXd theta_mean;  ///< rows x 5 posterior means
  ModelParams mean_params;
  std::vector<int> divergences;  ///< per chain, kept draws only
  std::vector<double> step_size;
  std::vector<double> mean_accept;
  std::vector<double> mean_treedepth;
  std::vector<std::string> param_names;

  int total_draws() const;
  int total_divergences() const;
};

/// Multinomial NUTS with a diagonal metric, windowed warmup adaptation and
/// dual-averaging step size. Chains use independent seeded streams, so draws
/// do not depend on thread count.
Posterior fit_hmc(const ModelData& d, const HmcOptions& opts = {});

struct DiagnosticsSummary {
  std::vector<ParamDiagnostics> params;
  double max_rhat = 0.0;
  double share_rhat_below = 0.0;  ///< share of parameters with R-hat < 1.01
  double min_ess_bulk = 0.0;
  double divergence_rate = 0.0;
  bool passes_gate = false;  ///< >= 99% below 1.01 and <= 10% divergent draws
};

DiagnosticsSummary summarize_diagnostics(const Posterior& post);

/// Theta estimates keyed by response unit, plus item parameters.
struct FitArtifact {
  ModelKind model = ModelKind::Grm;
  std::string backend;  ///< "map" (posterior mode) or "hmc" (posterior mean)
  std::vector<UnitKey> rows;
  Eigen::MatrixXd theta;
  std::vector<std::string> item_ids;
  Eigen::VectorXd a_plus;
  std::vector<std::string> column_ids;
  std::vector<Thresholds> kappa;
  nlohmann::json diagnostics = nlohmann::json::object();
};

FitArtifact make_artifact(const ModelData& d, const MapResult& r);
FitArtifact make_artifact(const ModelData& d, const Posterior& p, const DiagnosticsSummary& s);

nlohmann::json to_json(const FitArtifact& a);
FitArtifact artifact_from_json(const nlohmann::json& j);
void save_artifact(const FitArtifact& a, const std::filesystem::path& path);
FitArtifact load_artifact(const std::filesystem::path& path);

}  // namespace sdrkit
