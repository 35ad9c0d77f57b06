#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sdrkit/sdr_metrics.hpp"

namespace sdrkit {

/// Effects, honest-condition recovery and zones for one (model, format).
struct FormatReport {
  std::string model;
  std::string format;
  std::string fit_ref;  ///< fit artifact this entry was computed from
  EffectSummary effect;
  RecoveryReport recovery;
  ZoneLabels zones;
};

struct SdrReport {
  std::vector<FormatReport> entries;
  nlohmann::json metadata = nlohmann::json::object();
};

FormatReport build_format_report(const std::string& model, const FitArtifact& fit, const PersonaSet& personas,
                                 const std::string& fit_ref);

/// Metadata recording the aggregation choices.
nlohmann::json report_metadata();

/// model,format,trait,n,mean_delta,g,d_z,d_tilde,sdr_zone,r,recovery_zone,fit,note
void write_effects_csv(const SdrReport& r, std::ostream& out);
/// model,format,aggregate_d_tilde,mean_r,sdr_zone,recovery_zone,fit,note
void write_tradeoff_csv(const SdrReport& r, std::ostream& out);

nlohmann::json to_json(const SdrReport& r);
SdrReport report_from_json(const nlohmann::json& j);

/// Writes effects.csv, tradeoff.csv, report.json, heatmap.svg and
/// tradeoff.svg into `dir`. Throws Error("empty_report") before writing
/// anything when there are no entries.
void write_report_files(const SdrReport& r, const std::filesystem::path& dir);

/// Fixed-precision number formatting shared by all report outputs.
std::string format_number(double v);

}  // namespace sdrkit
