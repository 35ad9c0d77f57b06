#include "sdrkit/assembly.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>

namespace sdrkit {

std::string to_string(Proof p) { return p == Proof::Optimal ? "optimal" : "budget-exhausted-best-known"; }

std::vector<CandidatePair> enumerate_candidates(const ItemPool& pool) {
  const auto& items = pool.items();
  for (const auto& it : items)
    if (!it.desirability) throw Error("unrated_item", "item '" + it.id + "' has no desirability score");
  std::vector<CandidatePair> out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t j = i + 1; j < items.size(); ++j) {
      if (items[i].domain == items[j].domain) continue;
      CandidatePair c;
      c.left = i;
      c.right = j;
      c.left_id = items[i].id;
      c.right_id = items[j].id;
      c.gap = std::fabs(*items[i].desirability - *items[j].desirability);
      c.gap_sq = c.gap * c.gap;
      c.mixed_key = items[i].keying != items[j].keying;
      c.trait_pair = trait_pair_index(items[i].domain, items[j].domain);
      out.push_back(std::move(c));
    }
  }
  return out;
}

double selection_sse(const std::vector<CandidatePair>& cands, const std::vector<std::size_t>& sel) {
  std::vector<double> sq;
  sq.reserve(sel.size());
  for (auto c : sel) sq.push_back(cands[c].gap_sq);
  std::sort(sq.begin(), sq.end());
  double s = 0.0;
  for (double v : sq) s += v;
  return s;
}

namespace {

constexpr int kPlus = 0;
constexpr int kMinus = 1;

struct ItemInfo {
  int trait = 0;
  int sign = kPlus;
};

/// Instance data shared by the search, the brute-force oracle and the root
/// diagnosis: per-item attributes plus the derived per-trait targets.
struct Problem {
  const std::vector<CandidatePair>* cands = nullptr;
  std::vector<ItemInfo> items;
  AssemblyConfig cfg;
  int n = 0;
  std::array<int, kTraitCount> n_trait{};
  std::array<std::array<int, 2>, kTraitCount> n_sign{};
  bool trait_known = false;
  std::array<int, kTraitCount> trait_target{};
  bool pair_known = false;
  std::array<int, kTraitPairCount> pair_target{};
  bool sign_known = false;  ///< sign floor with known per-trait totals
  std::array<int, kTraitCount> sign_lo{};
  std::array<int, kTraitCount> sign_hi{};

  Problem(const ItemPool& pool, const std::vector<CandidatePair>& c, const AssemblyConfig& config)
      : cands(&c), cfg(config) {
    cfg.check();
    for (const auto& it : pool.items()) {
      ItemInfo info{static_cast<int>(index_of(it.domain)), it.keying > 0 ? kPlus : kMinus};
      items.push_back(info);
      n_trait[info.trait]++;
      n_sign[info.trait][info.sign]++;
    }
    n = static_cast<int>(items.size());
    if (cfg.per_trait_pair) {
      pair_known = true;
      pair_target = *cfg.per_trait_pair;
      trait_known = true;
      trait_target.fill(0);
      for (std::size_t g = 0; g < kTraitPairCount; ++g) {
        auto [a, b] = trait_pair_at(g);
        trait_target[index_of(a)] += pair_target[g];
        trait_target[index_of(b)] += pair_target[g];
      }
      if (cfg.per_trait && *cfg.per_trait != trait_target)
        throw InfeasibleError("domain", "per-trait targets contradict the per-trait-pair targets");
    } else if (cfg.per_trait) {
      trait_known = true;
      trait_target = *cfg.per_trait;
    }
    if (cfg.sign_floor && trait_known) {
      sign_known = true;
      for (std::size_t t = 0; t < kTraitCount; ++t) {
        const int T = trait_target[t];
        const int lo = (cfg.sign_floor->num * T + cfg.sign_floor->den - 1) / cfg.sign_floor->den;
        sign_lo[t] = lo;
        sign_hi[t] = T - lo;
      }
    }
  }

  const CandidatePair& cand(std::size_t c) const { return (*cands)[c]; }
  int trait_of(std::size_t item) const { return items[item].trait; }
  int sign_of(std::size_t item) const { return items[item].sign; }

  /// Full constraint check for a complete selection.
  bool feasible(const std::vector<std::size_t>& sel) const {
    if (static_cast<int>(sel.size()) != cfg.pairs) return false;
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    std::array<int, kTraitCount> tc{};
    std::array<std::array<int, 2>, kTraitCount> sc{};
    std::array<int, kTraitPairCount> gc{};
    int mixed = 0;
    for (auto ci : sel) {
      const auto& c = cand(ci);
      if (used[c.left] || used[c.right]) return false;
      used[c.left] = used[c.right] = 1;
      for (auto it : {c.left, c.right}) {
        tc[trait_of(it)]++;
        sc[trait_of(it)][sign_of(it)]++;
      }
      gc[c.trait_pair]++;
      mixed += c.mixed_key ? 1 : 0;
    }
    if (mixed < cfg.mixed_key_min || mixed > cfg.mixed_key_max) return false;
    if (cfg.per_trait && tc != *cfg.per_trait) return false;
    if (cfg.per_trait_pair && gc != *cfg.per_trait_pair) return false;
    if (cfg.sign_floor)
      for (std::size_t t = 0; t < kTraitCount; ++t)
        if (!cfg.sign_floor->satisfied(sc[t][kPlus], sc[t][kMinus])) return false;
    return true;
  }
};

/// Kuhn augmenting-path matching between two item lists, stopping once
/// `target` edges are matched. `edge(a, b)` tells whether a-b is usable.
int bipartite_matching(const std::vector<std::vector<int>>& adj, int right_count, int target) {
  std::vector<int> match_right(static_cast<std::size_t>(right_count), -1);
  int matched = 0;
  std::vector<char> seen;
  std::function<bool(int)> augment = [&](int u) -> bool {
    for (int v : adj[static_cast<std::size_t>(u)]) {
      if (seen[static_cast<std::size_t>(v)]) continue;
      seen[static_cast<std::size_t>(v)] = 1;
      if (match_right[static_cast<std::size_t>(v)] < 0 ||
          augment(match_right[static_cast<std::size_t>(v)])) {
        match_right[static_cast<std::size_t>(v)] = u;
        return true;
      }
    }
    return false;
  };
  for (std::size_t u = 0; u < adj.size() && matched < target; ++u) {
    seen.assign(static_cast<std::size_t>(right_count), 0);
    if (augment(static_cast<int>(u))) ++matched;
  }
  return matched;
}

/// Identifies the first constraint family that cannot be met even when every
/// candidate is allowed and the families are checked one at a time.
std::string diagnose_root(const Problem& pb) {
  const auto& cfg = pb.cfg;
  if (2 * cfg.pairs > pb.n) return "uniqueness";
  std::vector<char> has_cand(static_cast<std::size_t>(pb.n), 0);
  for (const auto& c : *pb.cands) has_cand[c.left] = has_cand[c.right] = 1;
  const int usable = static_cast<int>(std::count(has_cand.begin(), has_cand.end(), 1));
  if (2 * cfg.pairs > usable) return "count";
  if (pb.trait_known) {
    for (std::size_t t = 0; t < kTraitCount; ++t) {
      int avail = 0;
      for (int i = 0; i < pb.n; ++i)
        if (pb.trait_of(static_cast<std::size_t>(i)) == static_cast<int>(t) && has_cand[static_cast<std::size_t>(i)]) ++avail;
      if (avail < pb.trait_target[t]) return "domain";
    }
  }
  if (pb.pair_known) {
    for (std::size_t g = 0; g < kTraitPairCount; ++g) {
      if (pb.pair_target[g] == 0) continue;
      auto [ta, tb] = trait_pair_at(g);
      std::vector<int> left_items, right_items;
      for (int i = 0; i < pb.n; ++i) {
        if (pb.trait_of(static_cast<std::size_t>(i)) == static_cast<int>(index_of(ta))) left_items.push_back(i);
        if (pb.trait_of(static_cast<std::size_t>(i)) == static_cast<int>(index_of(tb))) right_items.push_back(i);
      }
      std::vector<int> pos(static_cast<std::size_t>(pb.n), -1);
      for (std::size_t k = 0; k < left_items.size(); ++k) pos[static_cast<std::size_t>(left_items[k])] = static_cast<int>(k);
      for (std::size_t k = 0; k < right_items.size(); ++k) pos[static_cast<std::size_t>(right_items[k])] = static_cast<int>(k);
      std::vector<std::vector<int>> adj(left_items.size());
      for (const auto& c : *pb.cands) {
        if (c.trait_pair != g) continue;
        const bool left_first = pb.trait_of(c.left) == static_cast<int>(index_of(ta));
        const auto a = left_first ? c.left : c.right;
        const auto b = left_first ? c.right : c.left;
        adj[static_cast<std::size_t>(pos[a])].push_back(pos[b]);
      }
      if (bipartite_matching(adj, static_cast<int>(right_items.size()), pb.pair_target[g]) <
          pb.pair_target[g])
        return "domain_pair";
    }
  }
  int mixed_cands = 0, same_cands = 0;
  for (const auto& c : *pb.cands) (c.mixed_key ? mixed_cands : same_cands)++;
  if (cfg.mixed_key_min > cfg.pairs || (cfg.mixed_key_min > 0 && mixed_cands == 0) ||
      (cfg.pairs - cfg.mixed_key_max > 0 && same_cands == 0))
    return "mixed_key";
  if (pb.sign_known) {
    for (std::size_t t = 0; t < kTraitCount; ++t)
      if (pb.n_sign[t][kPlus] < pb.sign_lo[t] || pb.n_sign[t][kMinus] < pb.sign_lo[t])
        return "sign_balance";
  }
  return "combined";
}

using Clock = std::chrono::steady_clock;

struct Budget {
  std::uint64_t node_limit = 0;
  Clock::time_point deadline;
  std::uint64_t nodes = 0;
  bool exhausted = false;

  bool tick() {
    ++nodes;
    if (nodes >= node_limit) exhausted = true;
    if ((nodes & 0xfff) == 0 && Clock::now() > deadline) exhausted = true;
    return !exhausted;
  }
};

bool lex_less(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// Depth-first search over item decisions. Each node picks the free item
/// with the fewest remaining branches (pair it with a viable partner, or
/// leave it out) and branches on it. In optimize mode the search keeps the
/// lexicographic best (sse, sorted candidate ids) and prunes with a lower
/// bound on the squared gaps still to be added.
class Search {
 public:
  Search(const Problem& pb, double cap, bool optimize, Budget& budget)
      : pb_(pb), optimize_(optimize), budget_(budget) {
    const auto n = static_cast<std::size_t>(pb.n);
    adj_.resize(n);
    for (std::size_t ci = 0; ci < pb.cands->size(); ++ci) {
      const auto& c = pb.cand(ci);
      if (c.gap > cap) continue;
      adj_[c.left].push_back(static_cast<std::uint32_t>(ci));
      adj_[c.right].push_back(static_cast<std::uint32_t>(ci));
      group_cands_[c.trait_pair].push_back(static_cast<std::uint32_t>(ci));
    }
    auto by_cost = [&](std::uint32_t a, std::uint32_t b) {
      const double ga = pb.cand(a).gap_sq, gb = pb.cand(b).gap_sq;
      return ga < gb || (ga == gb && a < b);
    };
    for (auto& a : adj_) std::sort(a.begin(), a.end(), by_cost);
    for (auto& g : group_cands_) std::sort(g.begin(), g.end(), by_cost);
    state_.assign(n, kFree);
    for (std::size_t t = 0; t < kTraitCount; ++t) {
      free_t_[t] = pb.n_trait[t];
      for (int s = 0; s < 2; ++s) free_s_[t][s] = pb.n_sign[t][s];
    }
    free_total_ = pb.n;
  }

  void set_incumbent(std::vector<std::size_t> sel) {
    best_sse_ = selection_sse(*pb_.cands, sel);
    best_ = std::move(sel);
    found_ = true;
  }

  /// True when the search space was exhausted (result is proven).
  bool run() {
    dfs();
    return !budget_.exhausted;
  }

  bool found() const { return found_; }
  const std::vector<std::size_t>& best() const { return best_; }

 private:
  enum : char { kFree = 0, kUsed = 1, kDiscarded = 2 };

  int pairs_left() const { return pb_.cfg.pairs - static_cast<int>(sel_.size()); }

  bool viable(std::uint32_t ci) const {
    const auto& c = pb_.cand(ci);
    if (state_[c.left] != kFree || state_[c.right] != kFree) return false;
    if (pb_.pair_known && group_cnt_[c.trait_pair] >= pb_.pair_target[c.trait_pair]) return false;
    const int ta = pb_.trait_of(c.left), tb = pb_.trait_of(c.right);
    if (pb_.trait_known &&
        (used_t_[ta] >= pb_.trait_target[ta] || used_t_[tb] >= pb_.trait_target[tb]))
      return false;
    if (pb_.sign_known) {
      const int sa = pb_.sign_of(c.left), sb = pb_.sign_of(c.right);
      if (used_s_[ta][sa] >= pb_.sign_hi[ta] || used_s_[tb][sb] >= pb_.sign_hi[tb]) return false;
    }
    if (c.mixed_key) {
      if (mixed_ >= pb_.cfg.mixed_key_max) return false;
    } else {
      const int same = static_cast<int>(sel_.size()) - mixed_;
      if (same >= pb_.cfg.pairs - pb_.cfg.mixed_key_min) return false;
    }
    return true;
  }

  bool can_discard(std::size_t item) const {
    if (disc_total_ >= pb_.n - 2 * pb_.cfg.pairs) return false;
    const int t = pb_.trait_of(item), s = pb_.sign_of(item);
    if (pb_.trait_known && disc_t_[t] >= pb_.n_trait[t] - pb_.trait_target[t]) return false;
    if (pb_.sign_known && disc_s_[t][s] >= pb_.n_sign[t][s] - pb_.sign_lo[t]) return false;
    return true;
  }

  void take(std::uint32_t ci) {
    const auto& c = pb_.cand(ci);
    for (auto it : {c.left, c.right}) {
      state_[it] = kUsed;
      const int t = pb_.trait_of(it), s = pb_.sign_of(it);
      used_t_[t]++;
      used_s_[t][s]++;
      free_t_[t]--;
      free_s_[t][s]--;
    }
    free_total_ -= 2;
    group_cnt_[c.trait_pair]++;
    mixed_ += c.mixed_key ? 1 : 0;
    sse_ += c.gap_sq;
    sel_.push_back(ci);
  }

  void untake(std::uint32_t ci) {
    const auto& c = pb_.cand(ci);
    for (auto it : {c.left, c.right}) {
      state_[it] = kFree;
      const int t = pb_.trait_of(it), s = pb_.sign_of(it);
      used_t_[t]--;
      used_s_[t][s]--;
      free_t_[t]++;
      free_s_[t][s]++;
    }
    free_total_ += 2;
    group_cnt_[c.trait_pair]--;
    mixed_ -= c.mixed_key ? 1 : 0;
    sse_ -= c.gap_sq;
    sel_.pop_back();
  }

  void discard(std::size_t item) {
    state_[item] = kDiscarded;
    const int t = pb_.trait_of(item), s = pb_.sign_of(item);
    disc_total_++;
    disc_t_[t]++;
    disc_s_[t][s]++;
    free_t_[t]--;
    free_s_[t][s]--;
    free_total_--;
  }

  void undiscard(std::size_t item) {
    state_[item] = kFree;
    const int t = pb_.trait_of(item), s = pb_.sign_of(item);
    disc_total_--;
    disc_t_[t]--;
    disc_s_[t][s]--;
    free_t_[t]++;
    free_s_[t][s]++;
    free_total_++;
  }

  /// Every trait-pair group still short of its target must admit a matching
  /// of the missing size among viable candidates.
  bool groups_matchable() const {
    if (!pb_.pair_known) return true;
    for (std::size_t g = 0; g < kTraitPairCount; ++g) {
      const int need = pb_.pair_target[g] - group_cnt_[g];
      if (need <= 0) continue;
      auto [ta, tb] = trait_pair_at(g);
      if (free_t_[index_of(ta)] < need || free_t_[index_of(tb)] < need) return false;
      // Compact ids for the bipartite sides.
      std::vector<int> left_id(static_cast<std::size_t>(pb_.n), -1), right_id(static_cast<std::size_t>(pb_.n), -1);
      std::vector<std::vector<int>> adj;
      int right_count = 0;
      for (auto ci : group_cands_[g]) {
        if (!viable(ci)) continue;
        const auto& c = pb_.cand(ci);
        const bool left_first = pb_.trait_of(c.left) == static_cast<int>(index_of(ta));
        const auto a = left_first ? c.left : c.right;
        const auto b = left_first ? c.right : c.left;
        if (left_id[a] < 0) {
          left_id[a] = static_cast<int>(adj.size());
          adj.emplace_back();
        }
        if (right_id[b] < 0) right_id[b] = right_count++;
        adj[static_cast<std::size_t>(left_id[a])].push_back(right_id[b]);
      }
      if (static_cast<int>(adj.size()) < need || right_count < need) return false;
      if (bipartite_matching(adj, right_count, need) < need) return false;
    }
    return true;
  }

  /// Lower bound on the squared gaps still to be added.
  double remaining_bound(const std::vector<double>& min_cost) const {
    double by_items = 0.0;
    if (pb_.trait_known) {
      for (std::size_t t = 0; t < kTraitCount; ++t) {
        const int need = pb_.trait_target[t] - used_t_[t];
        if (need <= 0) continue;
        std::vector<double> costs;
        for (std::size_t i = 0; i < state_.size(); ++i)
          if (state_[i] == kFree && pb_.trait_of(i) == static_cast<int>(t)) costs.push_back(min_cost[i]);
        if (static_cast<int>(costs.size()) < need) return kInf;
        std::nth_element(costs.begin(), costs.begin() + (need - 1), costs.end());
        std::sort(costs.begin(), costs.begin() + need);
        for (int k = 0; k < need; ++k) by_items += costs[static_cast<std::size_t>(k)];
      }
    } else {
      const int need = 2 * pairs_left();
      std::vector<double> costs;
      for (std::size_t i = 0; i < state_.size(); ++i)
        if (state_[i] == kFree) costs.push_back(min_cost[i]);
      if (static_cast<int>(costs.size()) < need) return kInf;
      std::sort(costs.begin(), costs.end());
      for (int k = 0; k < need; ++k) by_items += costs[static_cast<std::size_t>(k)];
    }
    by_items *= 0.5;

    double by_groups = 0.0;
    if (pb_.pair_known) {
      for (std::size_t g = 0; g < kTraitPairCount; ++g) {
        int need = pb_.pair_target[g] - group_cnt_[g];
        for (auto ci : group_cands_[g]) {
          if (need <= 0) break;
          if (!viable(ci)) continue;
          by_groups += pb_.cand(ci).gap_sq;
          --need;
        }
        if (need > 0) return kInf;
      }
    }
    return std::max(by_items, by_groups);
  }

  bool prune_by_cost(double bound) const {
    if (!optimize_ || !found_) return false;
    const double tol = 1e-12 * std::max(1.0, best_sse_);
    return sse_ + bound > best_sse_ + tol;
  }

  void leaf() {
    if (pb_.cfg.sign_floor && !pb_.sign_known) {
      for (std::size_t t = 0; t < kTraitCount; ++t)
        if (!pb_.cfg.sign_floor->satisfied(used_s_[t][kPlus], used_s_[t][kMinus])) return;
    }
    if (mixed_ < pb_.cfg.mixed_key_min) return;
    auto sel = sel_;
    std::sort(sel.begin(), sel.end());
    if (!found_) {
      set_incumbent(std::move(sel));
      return;
    }
    const double sse = selection_sse(*pb_.cands, sel);
    const double tol = 1e-12 * std::max(1.0, best_sse_);
    if (sse < best_sse_ - tol || (std::fabs(sse - best_sse_) <= tol && lex_less(sel, best_))) {
      best_sse_ = sse;
      best_ = std::move(sel);
    }
  }

  void dfs() {
    if (budget_.exhausted || (!optimize_ && found_)) return;
    if (!budget_.tick()) return;
    if (pairs_left() == 0) {
      leaf();
      return;
    }
    if (!groups_matchable()) return;

    // Branching item: fewest (viable partners + optional discard).
    std::vector<double> min_cost(state_.size(), kInf);
    std::size_t branch_item = state_.size();
    int branch_count = std::numeric_limits<int>::max();
    for (std::size_t i = 0; i < state_.size(); ++i) {
      if (state_[i] != kFree) continue;
      const bool disc = can_discard(i);
      int count = disc ? 1 : 0;
      for (auto ci : adj_[i]) {
        if (!viable(ci)) continue;
        if (count == (disc ? 1 : 0)) min_cost[i] = pb_.cand(ci).gap_sq;
        ++count;
        if (count >= branch_count) break;
      }
      if (disc) min_cost[i] = 0.0;
      if (count == 0) return;
      if (count < branch_count) {
        branch_count = count;
        branch_item = i;
      }
    }
    if (branch_item == state_.size()) return;
    if (optimize_ && found_ && prune_by_cost(remaining_bound(min_cost))) return;

    const auto x = branch_item;
    // Copy: the adjacency list is not modified, but viability changes on descent.
    for (auto ci : adj_[x]) {
      if (!viable(ci)) continue;
      if (optimize_ && found_ && prune_by_cost(pb_.cand(ci).gap_sq)) break;
      take(ci);
      dfs();
      untake(ci);
      if (budget_.exhausted || (!optimize_ && found_)) return;
    }
    if (can_discard(x)) {
      discard(x);
      dfs();
      undiscard(x);
    }
  }

  static constexpr double kInf = std::numeric_limits<double>::infinity();

  const Problem& pb_;
  bool optimize_;
  Budget& budget_;
  std::vector<std::vector<std::uint32_t>> adj_;
  std::array<std::vector<std::uint32_t>, kTraitPairCount> group_cands_;
  std::vector<char> state_;
  std::array<int, kTraitCount> used_t_{}, free_t_{}, disc_t_{};
  std::array<std::array<int, 2>, kTraitCount> used_s_{}, free_s_{}, disc_s_{};
  std::array<int, kTraitPairCount> group_cnt_{};
  int mixed_ = 0;
  int disc_total_ = 0;
  int free_total_ = 0;
  double sse_ = 0.0;
  std::vector<std::size_t> sel_;
  bool found_ = false;
  double best_sse_ = 0.0;
  std::vector<std::size_t> best_;
};

Budget make_budget(const AssemblyConfig& cfg) {
  Budget b;
  b.node_limit = cfg.node_budget;
  b.deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                  std::chrono::duration<double>(cfg.time_budget_seconds));
  return b;
}

double max_gap_of(const std::vector<CandidatePair>& cands, const std::vector<std::size_t>& sel) {
  double m = 0.0;
  for (auto c : sel) m = std::max(m, cands[c].gap);
  return m;
}

Inventory inventory_of(const std::vector<CandidatePair>& cands, const std::vector<std::size_t>& sel) {
  std::vector<GfcBlock> blocks;
  for (auto c : sel) blocks.push_back({cands[c].left_id, cands[c].right_id, cands[c].gap});
  return Inventory(std::move(blocks));
}

}  // namespace

Stage1Result solve_stage1(const ItemPool& pool, const std::vector<CandidatePair>& cands,
                          const AssemblyConfig& cfg) {
  Problem pb(pool, cands, cfg);
  Budget budget = make_budget(cfg);

  std::vector<double> levels;
  for (const auto& c : cands) levels.push_back(c.gap);
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.empty()) throw InfeasibleError(diagnose_root(pb), "no candidate pairs");

  Stage1Result out;
  auto probe = [&](std::size_t level, std::vector<std::size_t>* witness) -> int {
    Search s(pb, levels[level], false, budget);
    const bool complete = s.run();
    if (s.found()) {
      if (witness) *witness = s.best();
      return 1;
    }
    return complete ? 0 : -1;  // -1: unknown, budget ran out
  };

  std::vector<std::size_t> witness;
  std::size_t hi = levels.size() - 1;
  const int top = probe(hi, &witness);
  if (top == 0) {
    const auto family = diagnose_root(pb);
    throw InfeasibleError(family, "no selection satisfies the assembly constraints (" + family + ")");
  }
  if (top < 0) throw Error("budget", "search budget exhausted before any feasible selection was found");

  // Invariant: level `hi` is feasible with `witness`; every level < lo is infeasible.
  std::size_t lo = 0;
  bool proven = true;
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    std::vector<std::size_t> w;
    const int r = probe(mid, &w);
    if (r == 1) {
      hi = mid;
      witness = std::move(w);
    } else {
      if (r < 0) proven = false;
      lo = mid + 1;
      if (budget.exhausted) break;
    }
  }
  // The witness may sit below `levels[hi]`; its own max gap is what was achieved.
  out.m_star = max_gap_of(cands, witness);
  out.witness = std::move(witness);
  out.proof = proven && !budget.exhausted ? Proof::Optimal : Proof::BudgetExhausted;
  out.nodes = budget.nodes;
  return out;
}

AssemblySolution solve_stage2(const ItemPool& pool, const std::vector<CandidatePair>& cands,
                              const AssemblyConfig& cfg, const Stage1Result& stage1) {
  Problem pb(pool, cands, cfg);
  Budget budget = make_budget(cfg);
  const double cap = stage1.m_star + cfg.stage2_epsilon;
  Search s(pb, cap, true, budget);
  if (!stage1.witness.empty()) s.set_incumbent(stage1.witness);
  const bool complete = s.run();
  if (!s.found()) {
    if (!complete) throw Error("budget", "stage 2 budget exhausted without a feasible selection");
    const auto family = diagnose_root(pb);
    throw InfeasibleError(family, "no selection within the stage-1 cap (" + family + ")");
  }
  AssemblySolution out;
  out.selected = s.best();
  out.inventory = inventory_of(cands, out.selected);
  out.m_star = stage1.m_star;
  out.max_gap = max_gap_of(cands, out.selected);
  out.sse = selection_sse(cands, out.selected);
  out.proof = complete && stage1.proof == Proof::Optimal ? Proof::Optimal : Proof::BudgetExhausted;
  out.nodes = stage1.nodes + budget.nodes;
  return out;
}

AssemblySolution assemble(const ItemPool& pool, const AssemblyConfig& cfg) {
  const auto cands = enumerate_candidates(pool);
  const auto s1 = solve_stage1(pool, cands, cfg);
  return solve_stage2(pool, cands, cfg, s1);
}

AssemblySolution brute_force_assemble(const ItemPool& pool, const std::vector<CandidatePair>& cands,
                                      const AssemblyConfig& cfg, std::uint64_t max_subsets) {
  Problem pb(pool, cands, cfg);
  const auto n = cands.size();
  const auto P = static_cast<std::size_t>(cfg.pairs);
  if (P > n) throw InfeasibleError(diagnose_root(pb), "fewer candidates than blocks");

  // C(n, P) with an early exit once the cap is passed.
  std::uint64_t subsets = 1;
  for (std::size_t k = 1; k <= P; ++k) {
    subsets = subsets * (n - P + k) / k;
    if (subsets > max_subsets)
      throw Error("too_large", "brute force would enumerate more than " + std::to_string(max_subsets) + " subsets");
  }

  std::vector<std::size_t> idx(P);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  bool found = false;
  std::vector<std::size_t> best;
  double best_max = 0.0, best_sse = 0.0;
  while (true) {
    if (pb.feasible(idx)) {
      const double mg = max_gap_of(cands, idx);
      const double sse = selection_sse(cands, idx);
      const double tol = 1e-12 * std::max(1.0, best_sse);
      bool better = !found || mg < best_max ||
                    (mg == best_max && (sse < best_sse - tol ||
                                        (std::fabs(sse - best_sse) <= tol && lex_less(idx, best))));
      if (better) {
        found = true;
        best = idx;
        best_max = mg;
        best_sse = sse;
      }
    }
    // Next combination in lexicographic order.
    std::size_t k = P;
    while (k > 0 && idx[k - 1] == n - P + (k - 1)) --k;
    if (k == 0) break;
    ++idx[k - 1];
    for (std::size_t j = k; j < P; ++j) idx[j] = idx[j - 1] + 1;
  }
  if (!found) {
    const auto family = diagnose_root(pb);
    throw InfeasibleError(family, "no selection satisfies the assembly constraints (" + family + ")");
  }
  AssemblySolution out;
  out.selected = best;
  out.inventory = inventory_of(cands, best);
  out.m_star = best_max;
  out.max_gap = best_max;
  out.sse = best_sse;
  out.proof = Proof::Optimal;
  return out;
}

}  // namespace sdrkit
