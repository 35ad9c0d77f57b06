#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdrkit/irt_fit.hpp"
#include "sdrkit/persona.hpp"
#include "sdrkit/stats.hpp"
#include "sdrkit/trait.hpp"

namespace sdrkit {

/// Within-unit shift fake - honest, one row per (respondent, persona) pair.
struct ShiftTable {
  std::vector<std::string> respondents;
  std::vector<std::string> personas;
  Eigen::MatrixXd delta;  ///< n x 5, trait order A, C, E, N, O

  int n() const { return static_cast<int>(personas.size()); }
};

/// Pairs FAKE_GOOD rows of `fake` with HONEST rows of `honest` on
/// (respondent, persona). Both may be the same artifact. Throws
/// Error("unpaired_persona") if either side has a unit without a partner.
ShiftTable shift_table(const FitArtifact& fake, const FitArtifact& honest);

/// mean / sample sd (n-1). Throws UndefinedStatistic for n < 2 or sd = 0.
double cohens_dz(std::span<const double> deltas);

/// g_t * d_z with g_N = -1 and +1 otherwise.
double direction_correct(double d_z, Trait t);

/// A value that is either defined or carries the reason it is not.
struct MaybeValue {
  std::optional<double> value;
  std::string reason;  ///< empty when defined
};

struct TraitEffect {
  Trait trait = Trait::A;
  double mean_delta = 0.0;
  int g = 1;
  MaybeValue d_z;
  MaybeValue d_tilde;
};

struct EffectSummary {
  std::string model;
  std::string format;
  int n = 0;
  std::array<TraitEffect, kTraitCount> traits{};
  MaybeValue aggregate;  ///< unweighted mean of the five d_tilde values
};

EffectSummary effect_summary(const ShiftTable& shifts, const std::string& model, const std::string& format);

struct RecoveryReport {
  int n = 0;
  std::array<MaybeValue, kTraitCount> r{};
  MaybeValue mean_r;  ///< unweighted mean over traits
};

/// Per-trait Pearson r between theta_hat rows and z rows (n x 5 each).
/// Throws Error("too_few_personas") when n < 3; zero-variance traits are
/// reported as undefined.
RecoveryReport recovery(const Eigen::MatrixXd& theta_hat, const Eigen::MatrixXd& z);

/// Recovery over the rows of `fit` in `condition`, matched to personas by id.
/// Throws Error("unknown_persona") for rows without a persona.
RecoveryReport recovery(const FitArtifact& fit, const PersonaSet& personas,
                        Condition condition = Condition::Honest);

enum class SdrZone { Recommended, Caution, Avoid };
enum class RecoveryZone { Strong, Acceptable, Insufficient };
std::string to_string(SdrZone z);
std::string to_string(RecoveryZone z);

/// |d| <= 0.2 recommended, <= 0.5 caution, else avoid.
SdrZone classify_sdr(double d_tilde);
/// r >= 0.70 strong, >= 0.50 acceptable, else insufficient.
RecoveryZone classify_recovery(double r);

struct ZoneLabels {
  std::array<std::optional<SdrZone>, kTraitCount> sdr_traits{};
  std::array<std::optional<RecoveryZone>, kTraitCount> recovery_traits{};
  std::optional<SdrZone> sdr;
  std::optional<RecoveryZone> recovery;
};

ZoneLabels classify_zones(const EffectSummary& effect, const RecoveryReport& rec);

struct Correlations {
  int n = 0;
  double pearson = 0.0;
  double spearman = 0.0;
  std::optional<stats::Interval> pearson_ci;  ///< absent for n < 4
};

/// Requires equal lengths >= 3; throws UndefinedStatistic on zero variance.
Correlations correlations(std::span<const double> x, std::span<const double> y);

}  // namespace sdrkit
