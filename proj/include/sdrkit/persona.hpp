#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdrkit/trait.hpp"

namespace sdrkit {

using TraitMatrix = Eigen::Matrix<double, 5, 5>;

/// Big Five covariance in (A, C, E, N, O) order with zero mean.
class TraitCovariance {
 public:
  /// Throws Error("covariance") unless symmetric (1e-12), unit diagonal and
  /// positive definite.
  explicit TraitCovariance(const TraitMatrix& sigma);

  const TraitMatrix& sigma() const { return sigma_; }
  /// Lower-triangular L with L L^T = sigma.
  const TraitMatrix& cholesky() const { return chol_; }
  double operator()(Trait a, Trait b) const { return sigma_(index_of(a), index_of(b)); }

 private:
  TraitMatrix sigma_;
  TraitMatrix chol_;
};

TraitCovariance default_covariance();
/// JSON document {"traits": ["A","C","E","N","O"], "matrix": [[...], ...]};
/// rows are reordered into the canonical trait order.
TraitCovariance load_covariance(const std::filesystem::path& path);

/// Stanine with cuts at +-0.25, +-0.75, +-1.25, +-1.75; a value on a cut
/// belongs to the lower bin. Throws Error("non_finite") for NaN/inf.
int z_to_stanine(double z);

struct Lexicon {
  /// Per stanine 1..9 (index 0..8) the intensity modifier; may be empty.
  std::array<std::string, 9> intensity;
  /// traits[t][0] = low-pole descriptors, traits[t][1] = high-pole descriptors.
  std::array<std::array<std::vector<std::string>, 2>, kTraitCount> traits;

  /// Throws Error("lexicon") when any (trait, polarity) list is empty.
  void check() const;
};

Lexicon load_lexicon(const std::filesystem::path& path);
Lexicon parse_lexicon(const std::string& json_text);
/// The shipped placeholder lexicon from the data directory.
Lexicon default_lexicon();

/// One "You are ..." sentence for trait `t` at stanine `s`.
std::string trait_sentence(Trait t, int stanine, const Lexicon& lexicon);

/// Full persona prefix: role line, five trait sentences (O, C, E, A, N) and
/// the closing directive.
std::string render_persona(const TraitVector& z, const Lexicon& lexicon);

struct Persona {
  std::string id;
  TraitVector z{};
  std::array<int, kTraitCount> stanines{};
  std::string description;
};

using PersonaSet = std::vector<Persona>;

std::string persona_id(std::size_t index);

/// z_i = L e_i with e_i standard normal drawn from a stream derived from
/// (seed, i), so any subset can be regenerated independently.
std::vector<TraitVector> sample_trait_vectors(std::size_t n, const TraitCovariance& cov,
                                              std::uint64_t seed);
PersonaSet sample_personas(std::size_t n, const TraitCovariance& cov, std::uint64_t seed,
                           const Lexicon& lexicon);

void save_personas(const PersonaSet& set, const std::filesystem::path& path);
PersonaSet load_personas(const std::filesystem::path& path);

}  // namespace sdrkit
