#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <string_view>

namespace sdrkit {

/// Big Five domains. Vector index order is fixed as (A, C, E, N, O).
enum class Trait : int { A = 0, C = 1, E = 2, N = 3, O = 4 };

inline constexpr std::size_t kTraitCount = 5;
inline constexpr std::array<Trait, kTraitCount> kAllTraits = {Trait::A, Trait::C, Trait::E,
                                                              Trait::N, Trait::O};

using TraitVector = std::array<double, kTraitCount>;

constexpr std::size_t index_of(Trait t) { return static_cast<std::size_t>(t); }

char trait_letter(Trait t);
std::string_view trait_name(Trait t);
/// Accepts a single letter (case-insensitive) or the full domain name.
Trait parse_trait(std::string_view label);

/// +1 when a higher trait level is socially desirable, -1 for neuroticism.
constexpr int desirability_direction(Trait t) { return t == Trait::N ? -1 : +1; }

/// Index 0..9 of the unordered trait pair {a, b}, a != b, in order
/// AC, AE, AN, AO, CE, CN, CO, EN, EO, NO.
std::size_t trait_pair_index(Trait a, Trait b);
inline constexpr std::size_t kTraitPairCount = 10;
std::pair<Trait, Trait> trait_pair_at(std::size_t index);
std::string trait_pair_label(std::size_t index);

}  // namespace sdrkit
