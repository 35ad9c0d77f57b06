#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "sdrkit/error.hpp"
#include "sdrkit/ordinal.hpp"
#include "sdrkit/persona.hpp"
#include "sdrkit/simulator.hpp"

using namespace sdrkit;

namespace {

const Thresholds kKappa{-2.1, -1.2, -0.4, 0.3, 1.1, 2.4};

double lp(double eta, Thresholds kappa, int y) { return ordinal_log_prob(eta, kappa, y).log_prob; }

}  // namespace

TEST_CASE("category probabilities are positive and sum to one") {
  for (double eta : {-30.0, -3.0, -0.5, 0.0, 0.7, 4.0, 30.0}) {
    const auto p = category_probs(eta, kKappa);
    double sum = 0.0;
    for (double v : p) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("probabilities are differences of adjacent survivors") {
  for (double eta : {-2.0, 0.1, 1.5}) {
    const auto p = category_probs(eta, kKappa);
    for (int k = 1; k <= 7; ++k) {
      const double next = k == 7 ? 0.0 : survivor(eta, kKappa, k + 1);
      CHECK(p[static_cast<std::size_t>(k - 1)] == doctest::Approx(survivor(eta, kKappa, k) - next).epsilon(1e-12));
    }
  }
}

TEST_CASE("survivor and cumulative-cutpoint forms agree") {
  for (double eta : {-5.0, -1.0, 0.0, 0.4, 3.0})
    for (int k = 1; k <= 7; ++k)
      CHECK(survivor(eta, kKappa, k) == doctest::Approx(survivor_cutpoint_form(eta, kKappa, k)).epsilon(1e-12));
}

TEST_CASE("log-probability derivatives match finite differences") {
  const double h = 1e-6;
  for (double eta : {-2.5, -0.3, 0.8, 2.9}) {
    for (int y = 1; y <= 7; ++y) {
      const auto t = ordinal_log_prob(eta, kKappa, y);
      const double fd = (lp(eta + h, kKappa, y) - lp(eta - h, kKappa, y)) / (2 * h);
      CHECK(t.d_eta == doctest::Approx(fd).epsilon(1e-6));
      const double fd2 = (ordinal_log_prob(eta + h, kKappa, y).d_eta - ordinal_log_prob(eta - h, kKappa, y).d_eta) / (2 * h);
      CHECK(t.d2_eta == doctest::Approx(fd2).epsilon(1e-6));
      if (y >= 2) {
        auto up = kKappa, dn = kKappa;
        up[static_cast<std::size_t>(y - 2)] += h;
        dn[static_cast<std::size_t>(y - 2)] -= h;
        CHECK(t.d_lower == doctest::Approx((lp(eta, up, y) - lp(eta, dn, y)) / (2 * h)).epsilon(1e-6));
      }
      if (y <= 6) {
        auto up = kKappa, dn = kKappa;
        up[static_cast<std::size_t>(y - 1)] += h;
        dn[static_cast<std::size_t>(y - 1)] -= h;
        CHECK(t.d_upper == doctest::Approx((lp(eta, up, y) - lp(eta, dn, y)) / (2 * h)).epsilon(1e-6));
      }
    }
  }
}

TEST_CASE("log-probabilities stay finite in the tails") {
  for (int y = 1; y <= 7; ++y) {
    CHECK(std::isfinite(lp(-60.0, kKappa, y)));
    CHECK(std::isfinite(lp(60.0, kKappa, y)));
  }
  const Thresholds tight{-1.0, -1.0 + 1e-9, 0.0, 0.5, 1.0, 1.5};
  CHECK(std::isfinite(lp(0.0, tight, 2)));
}

TEST_CASE("thresholds must be strictly increasing") {
  CHECK_THROWS_AS(category_probs(0.0, Thresholds{0, 0, 1, 2, 3, 4}), Error);
  CHECK_THROWS_AS(category_probs(0.0, Thresholds{0, 1, 2, 3, 5, 4}), Error);
  CHECK_THROWS_AS(ordinal_log_prob(0.0, kKappa, 8), Error);
}

TEST_CASE("inverse-CDF draws follow the category probabilities") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double eta = 0.6;
  const int n = 200000;
  std::array<int, 7> counts{};
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(draw_category(eta, kKappa, u(rng)) - 1)];
  const auto p = category_probs(eta, kKappa);
  for (std::size_t k = 0; k < 7; ++k) {
    const double se = std::sqrt(p[k] * (1 - p[k]) / n);
    CHECK(std::abs(counts[k] / double(n) - p[k]) < 5 * se);
  }
}

TEST_CASE("Likert predictor follows keying and GFC predictor is antisymmetric") {
  const TraitVector theta{0.4, -1.1, 0.9, 1.3, -0.2};
  ItemParams l{1.3, +1, Trait::E, kKappa};
  ItemParams r{0.7, -1, Trait::N, kKappa};
  CHECK(likert_eta(theta, l) == doctest::Approx(1.3 * 0.9));
  CHECK(likert_eta(theta, r) == doctest::Approx(-0.7 * 1.3));
  CHECK(gfc_eta(theta, l, r) == doctest::Approx((likert_eta(theta, r) - likert_eta(theta, l)) / std::sqrt(2.0)));
  CHECK(gfc_eta(theta, l, r) == doctest::Approx(-gfc_eta(theta, r, l)));
  ItemParams same = l;
  CHECK_THROWS_AS(gfc_eta(theta, l, same), Error);
}

TEST_CASE("fake-good shifts theta toward the desirable pole") {
  const TraitVector z{0.1, 0.2, 0.3, 0.4, 0.5};
  const auto honest = effective_theta(z, Condition::Honest, 1.0);
  const auto fake = effective_theta(z, Condition::FakeGood, 1.0);
  for (Trait t : kAllTraits) {
    CHECK(honest[index_of(t)] == z[index_of(t)]);
    CHECK(fake[index_of(t)] == doctest::Approx(z[index_of(t)] + desirability_direction(t)));
  }
}

TEST_CASE("simulated answers are reproducible per unit") {
  const auto pool = fixtures::table3_pool();
  const auto inv = fixtures::table3_inventory();
  const auto params = default_sim_params(inv, pool, 9);
  const TraitVector z{0.5, -0.5, 1.0, 0.0, -1.0};
  const auto a = simulate_answer(z, inv, params, Format::Gfc, "B03", 11, "sim", "P0001");
  for (int i = 0; i < 3; ++i) CHECK(simulate_answer(z, inv, params, Format::Gfc, "B03", 11, "sim", "P0001") == a);

  Persona p;
  p.id = "P0001";
  p.z = z;
  const auto rs1 = simulate_response_set("sim", p, inv, params, Format::Likert, Condition::Honest, {0.0, 11});
  const auto rs2 = simulate_response_set("sim", p, inv, params, Format::Likert, Condition::Honest, {0.0, 11});
  CHECK(rs1.answers == rs2.answers);
  CHECK(rs1.answers.size() == 2 * inv.block_count());
  for (const auto& [unit, y] : rs1.answers) {
    CHECK(y >= 1);
    CHECK(y <= 7);
  }
}

TEST_CASE("naive GFC totals are constant across respondents") {
  const auto pool = fixtures::table3_pool();
  const auto inv = fixtures::table3_inventory();
  const auto params = default_sim_params(inv, pool, 2);
  const auto zs = sample_trait_vectors(20, default_covariance(), 3);
  for (std::size_t i = 0; i < zs.size(); ++i) {
    Persona p;
    p.id = persona_id(i);
    p.z = zs[i];
    const auto rs = simulate_response_set("sim", p, inv, params, Format::Gfc, Condition::FakeGood, {1.0, 4});
    const auto s = naive_gfc_scores(rs, inv, pool);
    double total = 0.0;
    for (double v : s) total += v;
    CHECK(total == doctest::Approx(6.0 * inv.block_count()));
  }
}

TEST_CASE("matched block discrimination gives both statements one a_plus") {
  const auto pool = fixtures::table3_pool();
  const auto inv = fixtures::table3_inventory();
  SimDefaults opts;
  opts.matched_block_discrimination = true;
  const auto params = default_sim_params(inv, pool, 8, opts);
  for (const auto& b : inv.blocks()) CHECK(params.item(b.left).a_plus == params.item(b.right).a_plus);
}
