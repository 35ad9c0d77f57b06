#include "sdrkit/sdr_metrics.hpp"

#include <cmath>
#include <map>

#include "sdrkit/error.hpp"

namespace sdrkit {

namespace {

using Key = std::pair<std::string, std::string>;

std::map<Key, int> rows_in(const FitArtifact& fit, Condition c) {
  std::map<Key, int> out;
  for (std::size_t i = 0; i < fit.rows.size(); ++i) {
    const auto& u = fit.rows[i];
    if (u.condition != c) continue;
    if (!out.emplace(Key{u.respondent, u.persona}, static_cast<int>(i)).second)
      throw Error("duplicate_unit", "unit " + u.respondent + "/" + u.persona + " appears twice");
  }
  return out;
}

MaybeValue undefined(const std::string& why) { return {std::nullopt, why}; }

}  // namespace

ShiftTable shift_table(const FitArtifact& fake, const FitArtifact& honest) {
  const auto f = rows_in(fake, Condition::FakeGood);
  const auto h = rows_in(honest, Condition::Honest);
  for (const auto& [k, i] : h)
    if (!f.count(k)) throw Error("unpaired_persona", "no fake-good unit for " + k.first + "/" + k.second);
  ShiftTable out;
  out.delta.resize(static_cast<Eigen::Index>(f.size()), 5);
  for (const auto& [k, i] : f) {
    auto it = h.find(k);
    if (it == h.end()) throw Error("unpaired_persona", "no honest unit for " + k.first + "/" + k.second);
    const auto r = static_cast<Eigen::Index>(out.personas.size());
    out.delta.row(r) = fake.theta.row(i) - honest.theta.row(it->second);
    out.respondents.push_back(k.first);
    out.personas.push_back(k.second);
  }
  return out;
}

double cohens_dz(std::span<const double> deltas) {
  if (deltas.size() < 2) throw UndefinedStatistic("d_z needs at least two shifts");
  const double sd = stats::sample_sd(deltas);
  if (!(sd > 0.0)) throw UndefinedStatistic("d_z undefined: shifts have zero variance");
  return stats::mean(deltas) / sd;
}

double direction_correct(double d_z, Trait t) { return desirability_direction(t) * d_z; }

EffectSummary effect_summary(const ShiftTable& shifts, const std::string& model, const std::string& format) {
  EffectSummary out;
  out.model = model;
  out.format = format;
  out.n = shifts.n();
  double sum = 0.0;
  std::string missing;
  for (auto t : kAllTraits) {
    auto& e = out.traits[index_of(t)];
    e.trait = t;
    e.g = desirability_direction(t);
    const Eigen::VectorXd col = shifts.delta.col(static_cast<Eigen::Index>(index_of(t)));
    const std::span<const double> v(col.data(), static_cast<std::size_t>(col.size()));
    if (!v.empty()) e.mean_delta = stats::mean(v);
    try {
      const double dz = cohens_dz(v);
      e.d_z = {dz, ""};
      e.d_tilde = {direction_correct(dz, t), ""};
      sum += *e.d_tilde.value;
    } catch (const UndefinedStatistic& ex) {
      e.d_z = undefined(ex.what());
      e.d_tilde = undefined(ex.what());
      missing += std::string(missing.empty() ? "" : ",") + trait_letter(t);
    }
  }
  out.aggregate = missing.empty() ? MaybeValue{sum / kTraitCount, ""}
                                  : undefined("undefined d_z for trait(s) " + missing);
  return out;
}

RecoveryReport recovery(const Eigen::MatrixXd& theta_hat, const Eigen::MatrixXd& z) {
  if (theta_hat.rows() != z.rows() || theta_hat.cols() != 5 || z.cols() != 5)
    throw Error("dimension", "theta and z must both be n x 5");
  if (z.rows() < 3) throw Error("too_few_personas", "recovery needs at least 3 personas");
  RecoveryReport out;
  out.n = static_cast<int>(z.rows());
  double sum = 0.0;
  std::string missing;
  for (auto t : kAllTraits) {
    const auto c = static_cast<Eigen::Index>(index_of(t));
    const Eigen::VectorXd a = theta_hat.col(c), b = z.col(c);
    try {
      const double r = stats::pearson({a.data(), static_cast<std::size_t>(a.size())},
                                      {b.data(), static_cast<std::size_t>(b.size())});
      out.r[index_of(t)] = {r, ""};
      sum += r;
    } catch (const UndefinedStatistic& ex) {
      out.r[index_of(t)] = undefined(ex.what());
      missing += std::string(missing.empty() ? "" : ",") + trait_letter(t);
    }
  }
  out.mean_r = missing.empty() ? MaybeValue{sum / kTraitCount, ""}
                               : undefined("undefined r for trait(s) " + missing);
  return out;
}

RecoveryReport recovery(const FitArtifact& fit, const PersonaSet& personas, Condition condition) {
  std::map<std::string, const Persona*> by_id;
  for (const auto& p : personas) by_id[p.id] = &p;
  std::vector<int> rows;
  std::vector<const Persona*> ps;
  for (std::size_t i = 0; i < fit.rows.size(); ++i) {
    if (fit.rows[i].condition != condition) continue;
    auto it = by_id.find(fit.rows[i].persona);
    if (it == by_id.end()) throw Error("unknown_persona", "no persona '" + fit.rows[i].persona + "'");
    rows.push_back(static_cast<int>(i));
    ps.push_back(it->second);
  }
  Eigen::MatrixXd th(static_cast<Eigen::Index>(rows.size()), 5), z(static_cast<Eigen::Index>(rows.size()), 5);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    th.row(static_cast<Eigen::Index>(k)) = fit.theta.row(rows[k]);
    for (int t = 0; t < 5; ++t) z(static_cast<Eigen::Index>(k), t) = ps[k]->z[static_cast<std::size_t>(t)];
  }
  return recovery(th, z);
}

std::string to_string(SdrZone z) {
  switch (z) {
    case SdrZone::Recommended: return "recommended";
    case SdrZone::Caution: return "caution";
    case SdrZone::Avoid: return "avoid";
  }
  return "";
}

std::string to_string(RecoveryZone z) {
  switch (z) {
    case RecoveryZone::Strong: return "strong";
    case RecoveryZone::Acceptable: return "acceptable";
    case RecoveryZone::Insufficient: return "insufficient";
  }
  return "";
}

SdrZone classify_sdr(double d_tilde) {
  const double a = std::abs(d_tilde);
  if (a <= 0.2) return SdrZone::Recommended;
  if (a <= 0.5) return SdrZone::Caution;
  return SdrZone::Avoid;
}

RecoveryZone classify_recovery(double r) {
  if (r >= 0.70) return RecoveryZone::Strong;
  if (r >= 0.50) return RecoveryZone::Acceptable;
  return RecoveryZone::Insufficient;
}

ZoneLabels classify_zones(const EffectSummary& effect, const RecoveryReport& rec) {
  ZoneLabels out;
  for (std::size_t t = 0; t < kTraitCount; ++t) {
    if (effect.traits[t].d_tilde.value) out.sdr_traits[t] = classify_sdr(*effect.traits[t].d_tilde.value);
    if (rec.r[t].value) out.recovery_traits[t] = classify_recovery(*rec.r[t].value);
  }
  if (effect.aggregate.value) out.sdr = classify_sdr(*effect.aggregate.value);
  if (rec.mean_r.value) out.recovery = classify_recovery(*rec.mean_r.value);
  return out;
}

Correlations correlations(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("dimension", "correlation inputs differ in length");
  if (x.size() < 3) throw UndefinedStatistic("correlation needs at least 3 pairs");
  Correlations out;
  out.n = static_cast<int>(x.size());
  out.pearson = stats::pearson(x, y);
  out.spearman = stats::spearman(x, y);
  if (x.size() >= 4) out.pearson_ci = stats::fisher_interval(out.pearson, x.size());
  return out;
}

}  // namespace sdrkit
