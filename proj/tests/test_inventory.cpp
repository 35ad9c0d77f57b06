#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "sdrkit/constraints.hpp"
#include "sdrkit/error.hpp"

using namespace sdrkit;

namespace {

double round2(double x) { return std::floor(x * 100.0 + 0.5) / 100.0; }

std::string hundred_row_pool() {
  std::ostringstream out;
  out << "id\ttext\tdomain\tkeying\tdesirability\n";
  for (int i = 0; i < 100; ++i) {
    const char domain = "ACENO"[i % 5];
    out << "I" << i << "\tStatement number " << i << ".\t" << domain << '\t'
        << (i % 2 ? "-1" : "+1") << '\t' << 1.0 + (i % 9) << '\n';
  }
  return out.str();
}

}  // namespace

TEST_CASE("pool loading applies sidecar exclusions in file order") {
  std::istringstream in(hundred_row_pool());
  auto pool = load_item_pool(in, {"I17", "I42"});
  CHECK(pool.size() == 98);
  CHECK(pool.excluded_ids().size() == 2);
  CHECK_FALSE(pool.find("I17").has_value());
  CHECK(pool.items().front().id == "I0");
  CHECK(pool.items()[17].id == "I18");
}

TEST_CASE("pool loading errors") {
  SUBCASE("empty file") {
    std::istringstream in("id\ttext\tdomain\tkeying\n");
    CHECK_THROWS_WITH_AS(load_item_pool(in), doctest::Contains("empty pool"), Error);
  }
  SUBCASE("keying 0 names the row") {
    std::istringstream in("id\ttext\tdomain\tkeying\nX1\tTalk a lot.\tE\t+1\nX2\tWorry.\tN\t0\n");
    try {
      load_item_pool(in);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == "invalid_keying");
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
      CHECK(std::string(e.what()).find("X2") != std::string::npos);
    }
  }
  SUBCASE("duplicate id") {
    std::istringstream in("id\ttext\tdomain\tkeying\nX1\tA.\tE\t+1\nX1\tB.\tN\t-1\n");
    CHECK_THROWS_AS(load_item_pool(in), Error);
  }
  SUBCASE("unknown domain") {
    std::istringstream in("id\ttext\tdomain\tkeying\nX1\tA.\tQ\t+1\n");
    try {
      load_item_pool(in);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == "unknown_domain");
    }
  }
  SUBCASE("desirability outside [1, 9]") {
    std::istringstream in("id\ttext\tdomain\tkeying\tdesirability\nX1\tA.\tE\t+1\t9.5\n");
    try {
      load_item_pool(in);
      FAIL("expected error");
    } catch (const Error& e) {
      CHECK(e.kind() == "desirability_range");
    }
  }
}

TEST_CASE("published inventory fixture reproduces every printed value") {
  auto table = read_tsv_file(fixtures::data_dir() / "table3_pool.tsv");
  const auto c_sd = table.column("desirability"), c_printed = table.column("printed_sd");
  for (const auto& row : table.rows) {
    const double s = std::stod(row[c_sd]);
    CHECK(round2(s) == doctest::Approx(std::stod(row[c_printed])).epsilon(1e-12));
    // Means of 60 integer ratings.
    CHECK(std::fabs(s * 60.0 - std::round(s * 60.0)) < 1e-9);
  }
  auto inv_table = read_tsv_file(fixtures::data_dir() / "table3_inventory.tsv");
  const auto c_gap = inv_table.column("gap"), c_pgap = inv_table.column("printed_gap");
  for (const auto& row : inv_table.rows)
    CHECK(round2(std::stod(row[c_gap])) == doctest::Approx(std::stod(row[c_pgap])).epsilon(1e-12));
}

TEST_CASE("validate_inventory on the published inventory") {
  const auto pool = fixtures::table3_pool();
  const auto inv = fixtures::table3_inventory();
  const auto cfg = AssemblyConfig::balanced(30);
  const auto rep = validate_inventory(inv, pool, cfg);
  CHECK(rep.all_pass());
  CHECK(std::fabs(rep.max_gap - 0.18) <= 0.005);
  CHECK(std::fabs(rep.mean_gap - 0.03) <= 0.005);
  CHECK(std::fabs(rep.sd_gap - 0.04) <= 0.005);
  for (int c : rep.trait_counts) CHECK(c == 12);
  for (int c : rep.trait_pair_counts) CHECK(c == 3);
  CHECK(rep.mixed_key_count == 12);

  // Structural invariants of any passing inventory.
  CHECK(std::accumulate(rep.trait_counts.begin(), rep.trait_counts.end(), 0) == 60);
  CHECK(std::accumulate(rep.trait_pair_counts.begin(), rep.trait_pair_counts.end(), 0) == 30);
  CHECK(rep.mixed_key_count >= 12);
  CHECK(rep.mixed_key_count <= 18);
  CHECK(inv.statements().size() == 60);

  // Pure: identical report on a second call.
  const auto again = validate_inventory(inv, pool, cfg);
  CHECK(again.max_gap == rep.max_gap);
  CHECK(again.mean_gap == rep.mean_gap);
  CHECK(again.trait_counts == rep.trait_counts);
  CHECK(again.checks.size() == rep.checks.size());
}

TEST_CASE("validate_inventory flags structural violations") {
  const auto pool = fixtures::table3_pool();
  const auto cfg = AssemblyConfig::balanced(30);
  auto blocks = fixtures::table3_inventory().blocks();

  SUBCASE("item reused") {
    blocks[1].left = blocks[0].left;
    blocks[1].desirability_gap =
        std::fabs(*pool.at(blocks[1].left).desirability - *pool.at(blocks[1].right).desirability);
    const auto rep = validate_inventory(Inventory(blocks), pool, cfg);
    CHECK_FALSE(rep.passed("uniqueness"));
    CHECK_FALSE(rep.all_pass());
  }
  SUBCASE("stale stored gap") {
    blocks[3].desirability_gap += 1e-6;
    const auto rep = validate_inventory(Inventory(blocks), pool, cfg);
    CHECK_FALSE(rep.passed("gap_consistency"));
  }
  SUBCASE("unresolved id") {
    blocks[0].left = "nope";
    CHECK_THROWS_AS(validate_inventory(Inventory(blocks), pool, cfg), Error);
  }
  SUBCASE("wrong block count") {
    blocks.pop_back();
    const auto rep = validate_inventory(Inventory(blocks), pool, cfg);
    CHECK_FALSE(rep.passed("count"));
    CHECK_FALSE(rep.passed("domain"));
  }
}

TEST_CASE("stored gaps equal gaps recomputed from the pool") {
  const auto pool = fixtures::table3_pool();
  const auto inv = fixtures::table3_inventory();
  for (const auto& b : inv.blocks()) {
    const double g = std::fabs(*pool.at(b.left).desirability - *pool.at(b.right).desirability);
    CHECK(std::fabs(g - b.desirability_gap) <= 1e-12);
  }
}

TEST_CASE("response sets survive a file round trip and completeness is enforced") {
  const auto inv = fixtures::table3_inventory();
  ResponseSet rs;
  rs.respondent_id = "model-x";
  rs.persona_id = "P001";
  rs.format = Format::Gfc;
  rs.condition = Condition::FakeGood;
  for (std::size_t p = 0; p < inv.block_count(); ++p) {
    const auto id = Inventory::block_id(p);
    rs.presentation_order.push_back(id);
    rs.answers[id] = static_cast<int>(p % 7) + 1;
    rs.side_flipped[id] = p % 3 == 0;
  }
  check_response_set(rs, inv);
  std::stringstream buf;
  save_response_sets({rs}, buf);
  auto back = load_response_sets(buf);
  REQUIRE(back.size() == 1);
  CHECK(back[0].answers == rs.answers);
  CHECK(back[0].side_flipped == rs.side_flipped);
  CHECK(back[0].presentation_order == rs.presentation_order);
  CHECK(back[0].condition == Condition::FakeGood);
  CHECK(back[0].canonical_answer("B01") == 8 - rs.answers["B01"]);
  CHECK(back[0].canonical_answer("B02") == rs.answers["B02"]);

  rs.answers.erase("B05");
  CHECK_THROWS_AS(check_response_set(rs, inv), Error);
  rs.answers["B05"] = 8;
  CHECK_THROWS_AS(check_response_set(rs, inv), Error);
}

TEST_CASE("trait pair indexing is a bijection onto 0..9") {
  std::set<std::size_t> seen;
  for (Trait a : kAllTraits)
    for (Trait b : kAllTraits)
      if (a != b) {
        const auto k = trait_pair_index(a, b);
        CHECK(k == trait_pair_index(b, a));
        seen.insert(k);
        auto [x, y] = trait_pair_at(k);
        CHECK(((x == a && y == b) || (x == b && y == a)));
      }
  CHECK(seen.size() == 10);
  CHECK(*seen.rbegin() == 9);
}
