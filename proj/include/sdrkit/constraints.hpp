#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdrkit/inventory.hpp"

namespace sdrkit {

/// Each keying sign must make up at least num/den of a domain's selected items.
struct SignFloor {
  int num = 3;
  int den = 10;
  bool satisfied(int positive, int negative) const {
    return (den - num) * positive >= num * negative && (den - num) * negative >= num * positive;
  }
};

/// Constraint set for block assembly. Every balance constraint is optional so
/// small synthetic instances can switch them independently; `balanced(P)`
/// produces the full published configuration.
struct AssemblyConfig {
  int pairs = 30;
  std::optional<std::array<int, kTraitCount>> per_trait;
  std::optional<std::array<int, kTraitPairCount>> per_trait_pair;
  int mixed_key_min = 0;
  int mixed_key_max = 30;
  std::optional<SignFloor> sign_floor;
  double stage2_epsilon = 1e-9;
  std::uint64_t node_budget = 500'000'000;
  double time_budget_seconds = 900.0;

  /// P blocks, each trait 2P/5 times, each trait pair P/10 times, mixed-key
  /// count in [0.4P, 0.6P], each sign >= 30% per domain. Requires P % 10 == 0.
  static AssemblyConfig balanced(int pairs);

  /// Throws Error("config") on internally inconsistent targets.
  void check() const;
};

struct ConstraintCheck {
  std::string family;  ///< count, uniqueness, cross_domain, domain, domain_pair, mixed_key, sign_balance, gap_consistency
  bool pass = true;
  std::string detail;
};

struct ConstraintReport {
  std::vector<ConstraintCheck> checks;
  std::array<int, kTraitCount> trait_counts{};
  std::array<int, kTraitPairCount> trait_pair_counts{};
  std::array<int, kTraitCount> positive_counts{};
  std::array<int, kTraitCount> negative_counts{};
  int mixed_key_count = 0;
  double max_gap = 0.0;
  double mean_gap = 0.0;
  double sd_gap = 0.0;  ///< sample SD of the block gaps

  bool all_pass() const;
  bool passed(const std::string& family) const;
};

/// Checks every assembly constraint on `inv`. Pure. Throws
/// Error("unresolved_id") / Error("unrated_item") when ids do not resolve.
ConstraintReport validate_inventory(const Inventory& inv, const ItemPool& pool,
                                    const AssemblyConfig& cfg);

}  // namespace sdrkit
