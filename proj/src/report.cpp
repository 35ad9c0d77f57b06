#include "sdrkit/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "sdrkit/error.hpp"
#include "sdrkit/plots.hpp"

namespace sdrkit {

using nlohmann::json;

namespace {

std::string cell(const MaybeValue& v) { return v.value ? format_number(*v.value) : "NA"; }

template <class Zone>
std::string zone_cell(const std::optional<Zone>& z) {
  return z ? to_string(*z) : "NA";
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

json maybe_json(const MaybeValue& v) {
  json j;
  j["value"] = v.value ? json(*v.value) : json(nullptr);
  if (!v.value) j["reason"] = v.reason;
  return j;
}

MaybeValue maybe_from_json(const json& j) {
  MaybeValue v;
  if (!j.at("value").is_null()) v.value = j.at("value").get<double>();
  else v.reason = j.value("reason", "undefined");
  return v;
}

SdrZone sdr_zone_from(const std::string& s) {
  if (s == "recommended") return SdrZone::Recommended;
  if (s == "caution") return SdrZone::Caution;
  if (s == "avoid") return SdrZone::Avoid;
  throw Error("parse", "unknown SDR zone '" + s + "'");
}

RecoveryZone recovery_zone_from(const std::string& s) {
  if (s == "strong") return RecoveryZone::Strong;
  if (s == "acceptable") return RecoveryZone::Acceptable;
  if (s == "insufficient") return RecoveryZone::Insufficient;
  throw Error("parse", "unknown recovery zone '" + s + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path.string());
  out << text;
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  if (s == "-0.000000") s = "0.000000";
  return s;
}

FormatReport build_format_report(const std::string& model, const FitArtifact& fit, const PersonaSet& personas,
                                 const std::string& fit_ref) {
  FormatReport out;
  out.model = model;
  out.format = fit.model == ModelKind::Grm ? "likert" : "gfc";
  out.fit_ref = fit_ref;
  out.effect = effect_summary(shift_table(fit, fit), model, out.format);
  out.recovery = recovery(fit, personas, Condition::Honest);
  out.zones = classify_zones(out.effect, out.recovery);
  return out;
}

json report_metadata() {
  return {{"aggregate_sdr", "unweighted mean of per-trait direction-corrected d_z"},
          {"aggregate_recovery", "unweighted mean of per-trait Pearson r"},
          {"recovery_condition", "honest"},
          {"d_z_sd", "sample sd, n-1 denominator"},
          {"direction", {{"A", 1}, {"C", 1}, {"E", 1}, {"N", -1}, {"O", 1}}}};
}

void write_effects_csv(const SdrReport& r, std::ostream& out) {
  out << "model,format,trait,n,mean_delta,g,d_z,d_tilde,sdr_zone,r,recovery_zone,fit,note\n";
  for (const auto& e : r.entries) {
    for (auto t : kAllTraits) {
      const auto i = index_of(t);
      const auto& te = e.effect.traits[i];
      std::string note = te.d_tilde.reason;
      if (!e.recovery.r[i].value) note += std::string(note.empty() ? "" : "; ") + e.recovery.r[i].reason;
      out << csv_escape(e.model) << ',' << e.format << ',' << trait_letter(t) << ',' << e.effect.n << ','
          << format_number(te.mean_delta) << ',' << te.g << ',' << cell(te.d_z) << ',' << cell(te.d_tilde) << ','
          << zone_cell(e.zones.sdr_traits[i]) << ',' << cell(e.recovery.r[i]) << ','
          << zone_cell(e.zones.recovery_traits[i]) << ',' << csv_escape(e.fit_ref) << ',' << csv_escape(note) << '\n';
    }
  }
}

void write_tradeoff_csv(const SdrReport& r, std::ostream& out) {
  out << "model,format,aggregate_d_tilde,mean_r,sdr_zone,recovery_zone,fit,note\n";
  for (const auto& e : r.entries) {
    std::string note = e.effect.aggregate.reason;
    if (!e.recovery.mean_r.value) note += std::string(note.empty() ? "" : "; ") + e.recovery.mean_r.reason;
    out << csv_escape(e.model) << ',' << e.format << ',' << cell(e.effect.aggregate) << ','
        << cell(e.recovery.mean_r) << ',' << zone_cell(e.zones.sdr) << ',' << zone_cell(e.zones.recovery) << ','
        << csv_escape(e.fit_ref) << ',' << csv_escape(note) << '\n';
  }
}

json to_json(const SdrReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    json traits = json::array();
    for (auto t : kAllTraits) {
      const auto i = index_of(t);
      const auto& te = e.effect.traits[i];
      json jt = {{"trait", std::string(1, trait_letter(t))},
                 {"mean_delta", te.mean_delta},
                 {"g", te.g},
                 {"d_z", maybe_json(te.d_z)},
                 {"d_tilde", maybe_json(te.d_tilde)},
                 {"r", maybe_json(e.recovery.r[i])}};
      jt["sdr_zone"] = e.zones.sdr_traits[i] ? json(to_string(*e.zones.sdr_traits[i])) : json(nullptr);
      jt["recovery_zone"] =
          e.zones.recovery_traits[i] ? json(to_string(*e.zones.recovery_traits[i])) : json(nullptr);
      traits.push_back(jt);
    }
    json je = {{"model", e.model},
               {"format", e.format},
               {"fit", e.fit_ref},
               {"n_pairs", e.effect.n},
               {"n_recovery", e.recovery.n},
               {"traits", traits},
               {"aggregate_d_tilde", maybe_json(e.effect.aggregate)},
               {"mean_r", maybe_json(e.recovery.mean_r)}};
    je["sdr_zone"] = e.zones.sdr ? json(to_string(*e.zones.sdr)) : json(nullptr);
    je["recovery_zone"] = e.zones.recovery ? json(to_string(*e.zones.recovery)) : json(nullptr);
    entries.push_back(je);
  }
  return {{"metadata", r.metadata}, {"entries", entries}};
}

SdrReport report_from_json(const json& j) {
  SdrReport r;
  try {
    r.metadata = j.value("metadata", json::object());
    for (const auto& je : j.at("entries")) {
      FormatReport e;
      e.model = je.at("model").get<std::string>();
      e.format = je.at("format").get<std::string>();
      e.fit_ref = je.value("fit", "");
      e.effect.model = e.model;
      e.effect.format = e.format;
      e.effect.n = je.at("n_pairs").get<int>();
      e.recovery.n = je.at("n_recovery").get<int>();
      const auto& traits = je.at("traits");
      if (traits.size() != kTraitCount) throw Error("parse", "report entry must list five traits");
      for (std::size_t i = 0; i < kTraitCount; ++i) {
        const auto& jt = traits[i];
        auto& te = e.effect.traits[i];
        te.trait = parse_trait(jt.at("trait").get<std::string>());
        te.mean_delta = jt.at("mean_delta").get<double>();
        te.g = jt.at("g").get<int>();
        te.d_z = maybe_from_json(jt.at("d_z"));
        te.d_tilde = maybe_from_json(jt.at("d_tilde"));
        e.recovery.r[i] = maybe_from_json(jt.at("r"));
        if (!jt.at("sdr_zone").is_null()) e.zones.sdr_traits[i] = sdr_zone_from(jt.at("sdr_zone").get<std::string>());
        if (!jt.at("recovery_zone").is_null())
          e.zones.recovery_traits[i] = recovery_zone_from(jt.at("recovery_zone").get<std::string>());
      }
      e.effect.aggregate = maybe_from_json(je.at("aggregate_d_tilde"));
      e.recovery.mean_r = maybe_from_json(je.at("mean_r"));
      if (!je.at("sdr_zone").is_null()) e.zones.sdr = sdr_zone_from(je.at("sdr_zone").get<std::string>());
      if (!je.at("recovery_zone").is_null())
        e.zones.recovery = recovery_zone_from(je.at("recovery_zone").get<std::string>());
      r.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw Error("parse", std::string("malformed report: ") + e.what());
  }
  return r;
}

void write_report_files(const SdrReport& r, const std::filesystem::path& dir) {
  if (r.entries.empty()) throw Error("empty_report", "report has no entries");
  // Render everything first so a failure leaves no partial output.
  std::ostringstream effects, tradeoff;
  write_effects_csv(r, effects);
  write_tradeoff_csv(r, tradeoff);
  const std::string bundle = to_json(r).dump(2) + "\n";
  const std::string heat = heatmap_svg(r);
  const std::string scatter = tradeoff_svg(r);
  std::filesystem::create_directories(dir);
  write_text(dir / "effects.csv", effects.str());
  write_text(dir / "tradeoff.csv", tradeoff.str());
  write_text(dir / "report.json", bundle);
  write_text(dir / "heatmap.svg", heat);
  write_text(dir / "tradeoff.svg", scatter);
}

}  // namespace sdrkit
