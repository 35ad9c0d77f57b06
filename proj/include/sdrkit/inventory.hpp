#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sdrkit/trait.hpp"

namespace sdrkit {

inline constexpr int kCategoryCount = 7;

enum class Format { Likert, Gfc };
enum class Condition { Honest, FakeGood };

std::string to_string(Format f);
std::string to_string(Condition c);
Format parse_format(std::string_view s);
Condition parse_condition(std::string_view s);

struct Item {
  std::string id;
  std::string text;
  Trait domain = Trait::A;
  int keying = +1;  ///< +1 or -1
  std::optional<double> desirability;  ///< social desirability on the 1..9 scale
};

/// Ordered pool of statements. Item order is the file order; ids are unique.
class ItemPool {
 public:
  ItemPool() = default;
  /// Validates invariants (unique ids, keying, non-empty text, desirability range).
  ItemPool(std::vector<Item> items, std::vector<std::string> excluded_ids = {});

  const std::vector<Item>& items() const { return items_; }
  const std::vector<std::string>& excluded_ids() const { return excluded_; }
  std::size_t size() const { return items_.size(); }

  /// Index of the item with `id`, or nullopt.
  std::optional<std::size_t> find(const std::string& id) const;
  /// Throws Error("unresolved_id") when missing.
  const Item& at(const std::string& id) const;

  /// Copy of the pool with desirability overwritten from `scores` (item id -> s_j).
  ItemPool with_desirability(const std::map<std::string, double>& scores) const;

 private:
  std::vector<Item> items_;
  std::vector<std::string> excluded_;
  std::unordered_map<std::string, std::size_t> index_;
};

struct GfcBlock {
  std::string left;
  std::string right;
  double desirability_gap = 0.0;
};

/// Assembled GFC form. The Likert form is the flattened list of the same
/// statements (left then right, block by block).
class Inventory {
 public:
  Inventory() = default;
  explicit Inventory(std::vector<GfcBlock> blocks);

  const std::vector<GfcBlock>& blocks() const { return blocks_; }
  std::size_t block_count() const { return blocks_.size(); }
  std::vector<std::string> statements() const;

  /// Stable block identifier: "B01", "B02", ...
  static std::string block_id(std::size_t index);

  /// Recomputes every gap from the pool; throws on unresolved ids or
  /// missing desirability.
  static Inventory from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                              const ItemPool& pool);

 private:
  std::vector<GfcBlock> blocks_;
};

/// One administered questionnaire: answers keyed by unit id (item id for
/// Likert, block id for GFC) in the displayed orientation.
struct ResponseSet {
  std::string respondent_id;
  std::string persona_id;
  Format format = Format::Likert;
  Condition condition = Condition::Honest;
  std::map<std::string, int> answers;
  std::vector<std::string> presentation_order;  ///< unit ids in administered order
  std::map<std::string, bool> side_flipped;     ///< GFC only: block displayed right/left swapped
  bool complete = true;

  /// GFC answer re-expressed for the block's canonical (left, right) order.
  int canonical_answer(const std::string& unit_id) const;
};

/// Units that must be answered for a given inventory and format.
std::vector<std::string> administered_units(const Inventory& inv, Format format);

/// Throws Error("incomplete_response"|"answer_range"|"unknown_unit") when `rs`
/// violates completeness or the 1..7 answer range for `inv`.
void check_response_set(const ResponseSet& rs, const Inventory& inv);

}  // namespace sdrkit
