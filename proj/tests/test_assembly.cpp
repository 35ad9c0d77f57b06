#include <chrono>
#include <cmath>

#include "assembly_oracle.hpp"
#include "doctest.h"
#include "fixtures.hpp"
#include "sdrkit/assembly.hpp"
#include "sdrkit/constraints.hpp"

using namespace sdrkit;

namespace {

Item make_item(std::string id, Trait t, int key, double s) {
  Item it;
  it.id = std::move(id);
  it.text = "Statement " + it.id + ".";
  it.domain = t;
  it.keying = key;
  it.desirability = s;
  return it;
}

AssemblyConfig relaxed(int pairs) {
  AssemblyConfig cfg;
  cfg.pairs = pairs;
  cfg.mixed_key_min = 0;
  cfg.mixed_key_max = pairs;
  return cfg;
}

}  // namespace

TEST_CASE("enumerate_candidates counts cross-domain pairs only") {
  SUBCASE("2 domains x 2 items") {
    ItemPool pool({make_item("a1", Trait::A, 1, 5), make_item("a2", Trait::A, 1, 6),
                   make_item("c1", Trait::C, 1, 5), make_item("c2", Trait::C, -1, 3)});
    const auto c = enumerate_candidates(pool);
    CHECK(c.size() == 4);
    for (const auto& p : c) CHECK(pool.items()[p.left].domain != pool.items()[p.right].domain);
  }
  SUBCASE("5 domains x 1 item") {
    std::vector<Item> items;
    for (Trait t : kAllTraits) items.push_back(make_item(std::string(1, trait_letter(t)), t, 1, 5));
    CHECK(enumerate_candidates(ItemPool(items)).size() == 10);
  }
  SUBCASE("gap, mixed-key and trait pair fields") {
    ItemPool pool({make_item("a1", Trait::A, 1, 7.5), make_item("n1", Trait::N, -1, 7.25)});
    const auto c = enumerate_candidates(pool);
    REQUIRE(c.size() == 1);
    CHECK(c[0].gap == 0.25);
    CHECK(c[0].mixed_key);
    CHECK(c[0].trait_pair == trait_pair_index(Trait::A, Trait::N));
  }
  SUBCASE("unrated item") {
    auto it = make_item("a1", Trait::A, 1, 5);
    it.desirability.reset();
    ItemPool pool({it, make_item("c1", Trait::C, 1, 5)});
    CHECK_THROWS_AS(enumerate_candidates(pool), Error);
  }
}

TEST_CASE("stage 1 finds a zero minimax gap when two disjoint zero-gap pairs exist") {
  ItemPool pool({make_item("a1", Trait::A, 1, 5.0), make_item("c1", Trait::C, 1, 5.0),
                 make_item("e1", Trait::E, 1, 7.0), make_item("n1", Trait::N, 1, 7.0),
                 make_item("o1", Trait::O, 1, 7.5)});
  const auto cands = enumerate_candidates(pool);
  const auto s1 = solve_stage1(pool, cands, relaxed(2));
  CHECK(s1.m_star == 0.0);
  CHECK(s1.proof == Proof::Optimal);
}

TEST_CASE("P = 1 reduces to the smallest-gap candidate with id tie-break") {
  ItemPool pool({make_item("a1", Trait::A, 1, 5.0), make_item("a2", Trait::A, 1, 6.0),
                 make_item("c1", Trait::C, 1, 5.5), make_item("c2", Trait::C, 1, 6.5)});
  const auto cands = enumerate_candidates(pool);
  // gaps: a1-c1 0.5, a1-c2 1.5, a2-c1 0.5, a2-c2 0.5 -> first in id order wins.
  const auto brute = brute_force_assemble(pool, cands, relaxed(1));
  REQUIRE(brute.selected.size() == 1);
  CHECK(cands[brute.selected[0]].left_id == "a1");
  CHECK(cands[brute.selected[0]].right_id == "c1");
  const auto solved = assemble(pool, relaxed(1));
  CHECK(solved.selected == brute.selected);
}

TEST_CASE("stage 2 prefers the selection with the smaller squared mismatch") {
  // Trait-pair targets force the a1-c1 block (gap 0.2), so m* = 0.2 and both
  // {a1c1, e1n1} (sse 0.04) and {a1c1, e1n2} (sse 0.05) are minimax-optimal.
  ItemPool pool({make_item("a1", Trait::A, 1, 5.0), make_item("c1", Trait::C, 1, 5.2),
                 make_item("e1", Trait::E, 1, 3.0), make_item("n2", Trait::N, 1, 3.1),
                 make_item("n1", Trait::N, 1, 3.0)});
  AssemblyConfig cfg = relaxed(2);
  std::array<int, kTraitPairCount> targets{};
  targets[trait_pair_index(Trait::A, Trait::C)] = 1;
  targets[trait_pair_index(Trait::E, Trait::N)] = 1;
  cfg.per_trait_pair = targets;
  const auto cands = enumerate_candidates(pool);
  const auto s1 = solve_stage1(pool, cands, cfg);
  CHECK(s1.m_star == doctest::Approx(0.2));
  const auto s2 = solve_stage2(pool, cands, cfg, s1);
  CHECK(s2.sse == doctest::Approx(0.04));
  CHECK(s2.inventory.blocks()[1].right == "n1");
  CHECK(s2.max_gap <= s1.m_star + cfg.stage2_epsilon);
}

TEST_CASE("unreachable trait-pair target is infeasible in solver and oracle") {
  ItemPool pool({make_item("a1", Trait::A, 1, 5.0), make_item("c1", Trait::C, 1, 5.0),
                 make_item("a2", Trait::A, 1, 4.0), make_item("e1", Trait::E, 1, 4.0)});
  AssemblyConfig cfg = relaxed(2);
  std::array<int, kTraitPairCount> targets{};
  targets[trait_pair_index(Trait::A, Trait::C)] = 2;
  cfg.per_trait_pair = targets;
  const auto cands = enumerate_candidates(pool);
  try {
    solve_stage1(pool, cands, cfg);
    FAIL("expected infeasible");
  } catch (const InfeasibleError& e) {
    CHECK(e.family() == "domain");
  }
  CHECK_THROWS_AS(brute_force_assemble(pool, cands, cfg), InfeasibleError);
}

TEST_CASE("brute force refuses oversized instances") {
  const auto pool = fixtures::table3_pool();
  const auto cands = enumerate_candidates(pool);
  try {
    brute_force_assemble(pool, cands, AssemblyConfig::balanced(30));
    FAIL("expected too_large");
  } catch (const Error& e) {
    CHECK(e.kind() == "too_large");
  }
}

TEST_CASE("solver matches exhaustive enumeration on random small instances") {
  int feasible = 0, checked = 0;
  for (std::uint64_t seed = 1; feasible < 120 && seed < 5000; ++seed) {
    const auto inst = oracle::random_instance(seed);
    const auto cmp = oracle::compare(inst);
    ++checked;
    INFO("seed " << seed);
    CHECK(cmp.agree());
    if (cmp.solver == oracle::Outcome::Solved) {
      ++feasible;
      const auto cands = enumerate_candidates(inst.pool);
      std::vector<GfcBlock> blocks;
      for (auto c : cmp.solver_sel) blocks.push_back({cands[c].left_id, cands[c].right_id, cands[c].gap});
      CHECK(validate_inventory(Inventory(blocks), inst.pool, inst.cfg).all_pass());
      CHECK(cmp.solver_sel == cmp.brute_sel);
    }
  }
  CHECK(feasible >= 120);
  MESSAGE("instances checked: " << checked);
}

TEST_CASE("relaxing the mixed-key range never increases m*") {
  int compared = 0;
  for (std::uint64_t seed = 900; compared < 60 && seed < 4000; ++seed) {
    auto inst = oracle::random_instance(seed);
    const auto cands = enumerate_candidates(inst.pool);
    double tight = 0;
    try {
      tight = solve_stage1(inst.pool, cands, inst.cfg).m_star;
    } catch (const InfeasibleError&) {
      continue;
    }
    auto loose = inst.cfg;
    loose.mixed_key_min = 0;
    loose.mixed_key_max = loose.pairs;
    CHECK(solve_stage1(inst.pool, cands, loose).m_star <= tight);
    ++compared;
  }
  CHECK(compared >= 60);
}

TEST_CASE("assembling the published statement set meets every constraint") {
  const auto pool = fixtures::table3_pool();
  const auto cfg = AssemblyConfig::balanced(30);
  const auto t0 = std::chrono::steady_clock::now();
  const auto sol = assemble(pool, cfg);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  MESSAGE("m* = " << sol.m_star << " sse = " << sol.sse << " nodes = " << sol.nodes << " in " << secs << " s");
  const auto rep = validate_inventory(sol.inventory, pool, cfg);
  CHECK(rep.all_pass());
  // The published pairing is one feasible selection of these 60 items.
  CHECK(sol.m_star <= 11.0 / 60.0 + 1e-12);
  CHECK(sol.max_gap <= sol.m_star + cfg.stage2_epsilon);
  CHECK(sol.proof == Proof::Optimal);

  SUBCASE("deterministic") {
    const auto again = assemble(pool, cfg);
    CHECK(again.selected == sol.selected);
    CHECK(again.sse == sol.sse);
  }
}
