#include "sdrkit/persona.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "sdrkit/error.hpp"
#include "sdrkit/rng.hpp"

namespace sdrkit {

using nlohmann::json;

TraitCovariance::TraitCovariance(const TraitMatrix& sigma) : sigma_(sigma) {
  for (int i = 0; i < 5; ++i) {
    if (std::abs(sigma_(i, i) - 1.0) > 1e-12) throw Error("covariance", "diagonal must be 1");
    for (int j = 0; j < i; ++j)
      if (std::abs(sigma_(i, j) - sigma_(j, i)) > 1e-12)
        throw Error("covariance", "covariance is not symmetric");
  }
  Eigen::LLT<TraitMatrix> llt(sigma_);
  if (llt.info() != Eigen::Success) throw Error("covariance", "covariance is not positive definite");
  chol_ = llt.matrixL();
}

TraitCovariance default_covariance() {
  TraitMatrix s;
  // clang-format off
  s <<  1.00,  0.43,  0.26, -0.36,  0.21,
        0.43,  1.00,  0.29, -0.43,  0.20,
        0.26,  0.29,  1.00, -0.36,  0.43,
       -0.36, -0.43, -0.36,  1.00, -0.17,
        0.21,  0.20,  0.43, -0.17,  1.00;
  // clang-format on
  return TraitCovariance(s);
}

TraitCovariance load_covariance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open covariance " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("parse", path.string() + ": " + e.what());
  }
  const auto labels = doc.at("traits").get<std::vector<std::string>>();
  const auto rows = doc.at("matrix").get<std::vector<std::vector<double>>>();
  if (labels.size() != 5 || rows.size() != 5)
    throw Error("covariance", "covariance must be 5x5 with five trait labels");
  std::array<std::size_t, 5> pos{};
  for (std::size_t i = 0; i < 5; ++i) pos[i] = index_of(parse_trait(labels[i]));
  TraitMatrix s;
  for (std::size_t i = 0; i < 5; ++i) {
    if (rows[i].size() != 5) throw Error("covariance", "covariance row length must be 5");
    for (std::size_t j = 0; j < 5; ++j)
      s(static_cast<int>(pos[i]), static_cast<int>(pos[j])) = rows[i][j];
  }
  return TraitCovariance(s);
}

int z_to_stanine(double z) {
  if (!std::isfinite(z)) throw Error("non_finite", "stanine of a non-finite score");
  static constexpr double cuts[] = {-1.75, -1.25, -0.75, -0.25, 0.25, 0.75, 1.25, 1.75};
  int s = 1;
  for (double c : cuts)
    if (z > c) ++s;
  return s;
}

void Lexicon::check() const {
  for (auto t : kAllTraits)
    for (int pole = 0; pole < 2; ++pole)
      if (traits[index_of(t)][static_cast<std::size_t>(pole)].empty())
        throw Error("lexicon", std::string("lexicon has no ") + (pole ? "high" : "low") +
                                   " descriptors for trait " + trait_letter(t));
}

Lexicon parse_lexicon(const std::string& json_text) {
  Lexicon lex;
  try {
    const auto doc = json::parse(json_text);
    for (int s = 1; s <= 9; ++s) {
      const auto key = std::to_string(s);
      if (!doc.at("intensity").contains(key))
        throw Error("lexicon", "lexicon has no intensity term for stanine " + key);
      lex.intensity[static_cast<std::size_t>(s - 1)] = doc["intensity"][key].get<std::string>();
    }
    for (const auto& [label, poles] : doc.at("traits").items()) {
      const auto t = index_of(parse_trait(label));
      if (poles.contains("low")) lex.traits[t][0] = poles["low"].get<std::vector<std::string>>();
      if (poles.contains("high")) lex.traits[t][1] = poles["high"].get<std::vector<std::string>>();
    }
  } catch (const json::exception& e) {
    throw Error("lexicon", std::string("malformed lexicon: ") + e.what());
  }
  lex.check();
  return lex;
}

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open lexicon " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_lexicon(ss.str());
}

Lexicon default_lexicon() { return load_lexicon(std::filesystem::path(SDRKIT_DATA_DIR) / "lexicon.json"); }

std::string trait_sentence(Trait t, int stanine, const Lexicon& lexicon) {
  if (stanine < 1 || stanine > 9) throw Error("stanine", "stanine outside 1..9");
  const auto& words = lexicon.traits[index_of(t)][stanine >= 5 ? 1 : 0];
  if (words.empty())
    throw Error("lexicon", std::string("missing lexicon entry for trait ") + trait_letter(t));
  const auto& mod = lexicon.intensity[static_cast<std::size_t>(stanine - 1)];
  std::string out = "You are ";
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i > 0) out += (i + 1 == words.size()) ? (words.size() > 2 ? ", and " : " and ") : ", ";
    if (!mod.empty()) out += mod + " ";
    out += words[i];
  }
  return out + ".";
}

std::string render_persona(const TraitVector& z, const Lexicon& lexicon) {
  static constexpr Trait order[] = {Trait::O, Trait::C, Trait::E, Trait::A, Trait::N};
  std::string out = "YOU ARE THE RESPONDENT.\n\n";
  for (Trait t : order) out += trait_sentence(t, z_to_stanine(z[index_of(t)]), lexicon) + "\n";
  out += "\nAnswer all questions AS THIS PERSON would.";
  return out;
}

std::string persona_id(std::size_t index) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "P%03zu", index + 1);
  return buf;
}

std::vector<TraitVector> sample_trait_vectors(std::size_t n, const TraitCovariance& cov,
                                              std::uint64_t seed) {
  if (n < 1) throw Error("config", "persona count must be at least 1");
  std::vector<TraitVector> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(derive_seed(seed, "persona", i));
    std::normal_distribution<double> nd;
    Eigen::Matrix<double, 5, 1> e;
    for (int k = 0; k < 5; ++k) e(k) = nd(rng);
    const Eigen::Matrix<double, 5, 1> z = cov.cholesky() * e;
    for (int k = 0; k < 5; ++k) out[i][static_cast<std::size_t>(k)] = z(k);
  }
  return out;
}

PersonaSet sample_personas(std::size_t n, const TraitCovariance& cov, std::uint64_t seed,
                           const Lexicon& lexicon) {
  lexicon.check();
  const auto zs = sample_trait_vectors(n, cov, seed);
  PersonaSet out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].id = persona_id(i);
    out[i].z = zs[i];
    for (std::size_t t = 0; t < kTraitCount; ++t) out[i].stanines[t] = z_to_stanine(zs[i][t]);
    out[i].description = render_persona(zs[i], lexicon);
  }
  return out;
}

void save_personas(const PersonaSet& set, const std::filesystem::path& path) {
  json arr = json::array();
  for (const auto& p : set) {
    json z = json::object(), st = json::object();
    for (auto t : kAllTraits) {
      const std::string key(1, trait_letter(t));
      z[key] = p.z[index_of(t)];
      st[key] = p.stanines[index_of(t)];
    }
    arr.push_back({{"id", p.id}, {"z", z}, {"stanines", st}, {"description", p.description}});
  }
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write personas " + path.string());
  out << json{{"personas", arr}}.dump(2) << '\n';
}

PersonaSet load_personas(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open personas " + path.string());
  PersonaSet out;
  try {
    const auto doc = json::parse(in);
    for (const auto& p : doc.at("personas")) {
      Persona persona;
      persona.id = p.at("id").get<std::string>();
      for (auto t : kAllTraits) {
        const std::string key(1, trait_letter(t));
        persona.z[index_of(t)] = p.at("z").at(key).get<double>();
        persona.stanines[index_of(t)] = p.at("stanines").at(key).get<int>();
        if (persona.stanines[index_of(t)] != z_to_stanine(persona.z[index_of(t)]))
          throw Error("persona", "persona " + persona.id + ": stanine does not match z");
      }
      persona.description = p.at("description").get<std::string>();
      out.push_back(std::move(persona));
    }
  } catch (const json::exception& e) {
    throw Error("parse", path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace sdrkit
