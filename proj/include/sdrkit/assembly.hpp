#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdrkit/constraints.hpp"
#include "sdrkit/error.hpp"
#include "sdrkit/inventory.hpp"

namespace sdrkit {

/// Cross-domain unordered item pair (left precedes right in pool order).
struct CandidatePair {
  std::size_t left = 0;   ///< pool index
  std::size_t right = 0;  ///< pool index
  std::string left_id;
  std::string right_id;
  double gap = 0.0;
  double gap_sq = 0.0;
  bool mixed_key = false;
  std::size_t trait_pair = 0;
};

/// All cross-domain unordered pairs in candidate-id order (left index, then
/// right index). Throws Error("unrated_item") if any item lacks desirability.
std::vector<CandidatePair> enumerate_candidates(const ItemPool& pool);

/// Raised when no selection satisfies the constraints. `family()` names the
/// constraint family that fails at the root relaxation: count, uniqueness,
/// domain, domain_pair, mixed_key, sign_balance, or combined when only the
/// joint search rules the instance out.
class InfeasibleError : public Error {
 public:
  InfeasibleError(std::string family, const std::string& message)
      : Error("infeasible", message), family_(std::move(family)) {}
  const std::string& family() const noexcept { return family_; }

 private:
  std::string family_;
};

enum class Proof { Optimal, BudgetExhausted };
std::string to_string(Proof p);

struct Stage1Result {
  double m_star = 0.0;
  std::vector<std::size_t> witness;  ///< sorted candidate indices
  Proof proof = Proof::Optimal;
  std::uint64_t nodes = 0;
};

struct AssemblySolution {
  Inventory inventory;
  std::vector<std::size_t> selected;  ///< sorted candidate indices
  double m_star = 0.0;
  double max_gap = 0.0;
  double sse = 0.0;  ///< sum of squared gaps, summed in ascending order
  Proof proof = Proof::Optimal;  ///< Optimal only when both stages are proven
  std::uint64_t nodes = 0;
};

/// Minimal achievable maximum gap (bisection over distinct candidate gaps,
/// each feasibility probe an exact depth-first search).
Stage1Result solve_stage1(const ItemPool& pool, const std::vector<CandidatePair>& cands,
                          const AssemblyConfig& cfg);

/// Minimal sum of squared gaps among selections with max gap <= m_star + eps.
/// Ties are broken by the lexicographically smallest sorted candidate-id list.
AssemblySolution solve_stage2(const ItemPool& pool, const std::vector<CandidatePair>& cands,
                              const AssemblyConfig& cfg, const Stage1Result& stage1);

/// Both stages.
AssemblySolution assemble(const ItemPool& pool, const AssemblyConfig& cfg);

/// Exhaustive lexicographic optimum (max gap, sse, candidate ids). Refuses
/// (Error "too_large") when the number of P-subsets exceeds `max_subsets`.
AssemblySolution brute_force_assemble(const ItemPool& pool, const std::vector<CandidatePair>& cands,
                                      const AssemblyConfig& cfg,
                                      std::uint64_t max_subsets = 50'000'000);

/// Sum of squared gaps of a selection, accumulated in ascending order so that
/// equal multisets of gaps always give bit-identical totals.
double selection_sse(const std::vector<CandidatePair>& cands, const std::vector<std::size_t>& sel);

}  // namespace sdrkit
