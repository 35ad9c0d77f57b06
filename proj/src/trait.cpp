#include "sdrkit/trait.hpp"

#include <algorithm>
#include <cctype>

#include "sdrkit/error.hpp"

namespace sdrkit {

char trait_letter(Trait t) { return "ACENO"[index_of(t)]; }

std::string_view trait_name(Trait t) {
  static constexpr std::array<std::string_view, kTraitCount> names = {
      "agreeableness", "conscientiousness", "extraversion", "neuroticism", "openness"};
  return names[index_of(t)];
}

Trait parse_trait(std::string_view label) {
  std::string lower(label);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (Trait t : kAllTraits) {
    if (lower.size() == 1 && lower[0] == std::tolower(trait_letter(t))) return t;
    if (lower == trait_name(t)) return t;
  }
  throw Error("unknown_domain", "unknown trait domain label '" + std::string(label) + "'");
}

std::size_t trait_pair_index(Trait a, Trait b) {
  auto i = index_of(a), j = index_of(b);
  if (i == j) throw Error("same_domain", "trait pair requires two distinct domains");
  if (i > j) std::swap(i, j);
  // Row offsets of the strict upper triangle of a 5x5 matrix.
  static constexpr std::array<std::size_t, kTraitCount> offset = {0, 4, 7, 9, 10};
  return offset[i] + (j - i - 1);
}

std::pair<Trait, Trait> trait_pair_at(std::size_t index) {
  for (Trait a : kAllTraits)
    for (Trait b : kAllTraits)
      if (index_of(a) < index_of(b) && trait_pair_index(a, b) == index) return {a, b};
  throw Error("range", "trait pair index out of range");
}

std::string trait_pair_label(std::size_t index) {
  auto [a, b] = trait_pair_at(index);
  return std::string{trait_letter(a), trait_letter(b)};
}

}  // namespace sdrkit
