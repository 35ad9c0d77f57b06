#include "sdrkit/constraints.hpp"

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "sdrkit/error.hpp"

namespace sdrkit {

AssemblyConfig AssemblyConfig::balanced(int pairs) {
  if (pairs <= 0 || pairs % 10 != 0)
    throw Error("config", "balanced assembly needs a block count divisible by 10");
  AssemblyConfig cfg;
  cfg.pairs = pairs;
  std::array<int, kTraitCount> per_trait;
  per_trait.fill(2 * pairs / 5);
  cfg.per_trait = per_trait;
  std::array<int, kTraitPairCount> per_pair;
  per_pair.fill(pairs / 10);
  cfg.per_trait_pair = per_pair;
  cfg.mixed_key_min = (4 * pairs + 9) / 10;
  cfg.mixed_key_max = (6 * pairs) / 10;
  cfg.sign_floor = SignFloor{3, 10};
  return cfg;
}

void AssemblyConfig::check() const {
  if (pairs <= 0) throw Error("config", "block count must be positive");
  if (mixed_key_min > mixed_key_max)
    throw Error("config", "mixed-key range is empty");
  if (per_trait) {
    int total = std::accumulate(per_trait->begin(), per_trait->end(), 0);
    if (total != 2 * pairs)
      throw Error("config", "per-trait targets must sum to twice the block count");
  }
  if (per_trait_pair) {
    int total = std::accumulate(per_trait_pair->begin(), per_trait_pair->end(), 0);
    if (total != pairs) throw Error("config", "per-trait-pair targets must sum to the block count");
  }
  if (sign_floor && (sign_floor->num < 0 || sign_floor->den <= 0 || sign_floor->num * 2 > sign_floor->den))
    throw Error("config", "sign floor must be a fraction in [0, 1/2]");
}

bool ConstraintReport::all_pass() const {
  for (const auto& c : checks)
    if (!c.pass) return false;
  return true;
}

bool ConstraintReport::passed(const std::string& family) const {
  for (const auto& c : checks)
    if (c.family == family && !c.pass) return false;
  return true;
}

ConstraintReport validate_inventory(const Inventory& inv, const ItemPool& pool,
                                    const AssemblyConfig& cfg) {
  ConstraintReport rep;
  const int P = static_cast<int>(inv.block_count());

  auto add = [&](std::string family, bool pass, std::string detail) {
    rep.checks.push_back({std::move(family), pass, std::move(detail)});
  };

  add("count", P == cfg.pairs,
      "blocks=" + std::to_string(P) + " target=" + std::to_string(cfg.pairs));

  std::set<std::string> seen;
  bool unique = true, cross = true, consistent = true;
  std::vector<double> gaps;
  for (const auto& b : inv.blocks()) {
    const Item& l = pool.at(b.left);
    const Item& r = pool.at(b.right);
    if (!l.desirability || !r.desirability)
      throw Error("unrated_item", "block (" + b.left + ", " + b.right + ") has an unrated item");
    unique &= seen.insert(b.left).second;
    unique &= seen.insert(b.right).second;
    const double gap = std::fabs(*l.desirability - *r.desirability);
    consistent &= std::fabs(gap - b.desirability_gap) <= 1e-12;
    gaps.push_back(gap);
    if (l.domain == r.domain) {
      cross = false;
    } else {
      rep.trait_pair_counts[trait_pair_index(l.domain, r.domain)]++;
    }
    for (const Item* it : {&l, &r}) {
      rep.trait_counts[index_of(it->domain)]++;
      (it->keying > 0 ? rep.positive_counts : rep.negative_counts)[index_of(it->domain)]++;
    }
    if (l.keying != r.keying) rep.mixed_key_count++;
  }
  add("uniqueness", unique, unique ? "no item reused" : "an item appears in more than one block");
  add("cross_domain", cross, cross ? "all blocks cross-domain" : "a block pairs two items of one domain");

  if (cfg.per_trait) {
    bool ok = true;
    std::ostringstream detail;
    for (Trait t : kAllTraits) {
      ok &= rep.trait_counts[index_of(t)] == (*cfg.per_trait)[index_of(t)];
      detail << trait_letter(t) << '=' << rep.trait_counts[index_of(t)] << ' ';
    }
    add("domain", ok, detail.str());
  }
  if (cfg.per_trait_pair) {
    bool ok = true;
    std::ostringstream detail;
    for (std::size_t k = 0; k < kTraitPairCount; ++k) {
      ok &= rep.trait_pair_counts[k] == (*cfg.per_trait_pair)[k];
      detail << trait_pair_label(k) << '=' << rep.trait_pair_counts[k] << ' ';
    }
    add("domain_pair", ok, detail.str());
  }
  add("mixed_key",
      rep.mixed_key_count >= cfg.mixed_key_min && rep.mixed_key_count <= cfg.mixed_key_max,
      "mixed=" + std::to_string(rep.mixed_key_count) + " range=[" +
          std::to_string(cfg.mixed_key_min) + ", " + std::to_string(cfg.mixed_key_max) + "]");
  if (cfg.sign_floor) {
    bool ok = true;
    std::ostringstream detail;
    for (Trait t : kAllTraits) {
      const int pos = rep.positive_counts[index_of(t)], neg = rep.negative_counts[index_of(t)];
      ok &= cfg.sign_floor->satisfied(pos, neg);
      detail << trait_letter(t) << "+=" << pos << ' ' << trait_letter(t) << "-=" << neg << ' ';
    }
    add("sign_balance", ok, detail.str());
  }
  add("gap_consistency", consistent,
      consistent ? "stored gaps match pool" : "a stored gap differs from |s_left - s_right|");

  if (!gaps.empty()) {
    double sum = 0.0;
    for (double g : gaps) {
      rep.max_gap = std::max(rep.max_gap, g);
      sum += g;
    }
    rep.mean_gap = sum / static_cast<double>(gaps.size());
    if (gaps.size() > 1) {
      double ss = 0.0;
      for (double g : gaps) ss += (g - rep.mean_gap) * (g - rep.mean_gap);
      rep.sd_gap = std::sqrt(ss / static_cast<double>(gaps.size() - 1));
    }
  }
  return rep;
}

}  // namespace sdrkit
