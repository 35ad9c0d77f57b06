#include "sdrkit/inventory.hpp"

#include <cmath>
#include <cstdio>
#include <set>

#include "sdrkit/error.hpp"

namespace sdrkit {

std::string to_string(Format f) { return f == Format::Likert ? "likert" : "gfc"; }
std::string to_string(Condition c) { return c == Condition::Honest ? "honest" : "fake_good"; }

Format parse_format(std::string_view s) {
  if (s == "likert" || s == "LIKERT") return Format::Likert;
  if (s == "gfc" || s == "GFC") return Format::Gfc;
  throw Error("config", "unknown format '" + std::string(s) + "'");
}

Condition parse_condition(std::string_view s) {
  if (s == "honest" || s == "HONEST") return Condition::Honest;
  if (s == "fake" || s == "fake_good" || s == "FAKE_GOOD" || s == "fake-good")
    return Condition::FakeGood;
  throw Error("config", "unknown condition '" + std::string(s) + "'");
}

ItemPool::ItemPool(std::vector<Item> items, std::vector<std::string> excluded_ids)
    : excluded_(std::move(excluded_ids)) {
  std::set<std::string> excluded(excluded_.begin(), excluded_.end());
  for (auto& item : items) {
    if (excluded.count(item.id)) continue;
    if (item.id.empty()) throw Error("invalid_item", "item with empty id");
    if (item.text.empty()) throw Error("invalid_item", "item '" + item.id + "' has empty text");
    if (item.keying != 1 && item.keying != -1)
      throw Error("invalid_keying", "item '" + item.id + "' keying must be +1 or -1");
    if (item.desirability && !(*item.desirability >= 1.0 && *item.desirability <= 9.0))
      throw Error("desirability_range", "item '" + item.id + "' desirability outside [1, 9]");
    if (!index_.emplace(item.id, items_.size()).second)
      throw Error("duplicate_id", "duplicate item id '" + item.id + "'");
    items_.push_back(std::move(item));
  }
}

std::optional<std::size_t> ItemPool::find(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

const Item& ItemPool::at(const std::string& id) const {
  auto idx = find(id);
  if (!idx) throw Error("unresolved_id", "item id '" + id + "' not in pool");
  return items_[*idx];
}

ItemPool ItemPool::with_desirability(const std::map<std::string, double>& scores) const {
  auto items = items_;
  for (auto& item : items) {
    auto it = scores.find(item.id);
    if (it != scores.end()) item.desirability = it->second;
  }
  return ItemPool(std::move(items), excluded_);
}

Inventory::Inventory(std::vector<GfcBlock> blocks) : blocks_(std::move(blocks)) {
  for (const auto& b : blocks_) {
    if (b.left == b.right)
      throw Error("invalid_block", "block pairs item '" + b.left + "' with itself");
    if (!(b.desirability_gap >= 0.0))
      throw Error("invalid_block", "negative desirability gap");
  }
}

std::vector<std::string> Inventory::statements() const {
  std::vector<std::string> out;
  out.reserve(2 * blocks_.size());
  for (const auto& b : blocks_) {
    out.push_back(b.left);
    out.push_back(b.right);
  }
  return out;
}

std::string Inventory::block_id(std::size_t index) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "B%02zu", index + 1);
  return buf;
}

Inventory Inventory::from_pairs(const std::vector<std::pair<std::string, std::string>>& pairs,
                                const ItemPool& pool) {
  std::vector<GfcBlock> blocks;
  for (const auto& [l, r] : pairs) {
    const Item& a = pool.at(l);
    const Item& b = pool.at(r);
    if (!a.desirability || !b.desirability)
      throw Error("unrated_item", "block (" + l + ", " + r + ") has an unrated item");
    blocks.push_back({l, r, std::fabs(*a.desirability - *b.desirability)});
  }
  return Inventory(std::move(blocks));
}

int ResponseSet::canonical_answer(const std::string& unit_id) const {
  int y = answers.at(unit_id);
  auto it = side_flipped.find(unit_id);
  if (it != side_flipped.end() && it->second) return kCategoryCount + 1 - y;
  return y;
}

std::vector<std::string> administered_units(const Inventory& inv, Format format) {
  if (format == Format::Likert) return inv.statements();
  std::vector<std::string> ids;
  for (std::size_t p = 0; p < inv.block_count(); ++p) ids.push_back(Inventory::block_id(p));
  return ids;
}

void check_response_set(const ResponseSet& rs, const Inventory& inv) {
  auto units = administered_units(inv, rs.format);
  for (const auto& u : units) {
    auto it = rs.answers.find(u);
    if (it == rs.answers.end())
      throw Error("incomplete_response", "response set " + rs.persona_id + " lacks unit " + u);
    if (it->second < 1 || it->second > kCategoryCount)
      throw Error("answer_range", "answer for " + u + " outside 1..7");
  }
  if (rs.answers.size() != units.size())
    throw Error("unknown_unit", "response set " + rs.persona_id + " has answers for unknown units");
}

}  // namespace sdrkit
