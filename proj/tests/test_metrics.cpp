#include <doctest.h>

#include <cmath>
#include <random>

#include "sdrkit/error.hpp"
#include "sdrkit/sdr_metrics.hpp"

using namespace sdrkit;

namespace {

FitArtifact artifact(const std::vector<std::tuple<std::string, Condition, TraitVector>>& rows) {
  FitArtifact a;
  a.theta.resize(static_cast<Eigen::Index>(rows.size()), 5);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& [persona, c, theta] = rows[i];
    a.rows.push_back({"sim", persona, c});
    for (int t = 0; t < 5; ++t) a.theta(static_cast<Eigen::Index>(i), t) = theta[static_cast<std::size_t>(t)];
  }
  return a;
}

}  // namespace

TEST_CASE("d_z of shifts 1, 2, 3 is 2") {
  const std::vector<double> d{1.0, 2.0, 3.0};
  CHECK(cohens_dz(d) == doctest::Approx(2.0));
}

TEST_CASE("d_z is undefined for fewer than two shifts or zero spread") {
  const std::vector<double> one{1.0};
  CHECK_THROWS_AS(cohens_dz(one), UndefinedStatistic);
  for (double v : {0.5, 0.4, 0.1, -7.3, 1e6 + 0.1}) {
    const std::vector<double> flat(7, v);
    CHECK_THROWS_AS(cohens_dz(flat), UndefinedStatistic);
  }
}

TEST_CASE("direction correction flips neuroticism only") {
  CHECK(direction_correct(0.8, Trait::N) == -0.8);
  for (Trait t : {Trait::A, Trait::C, Trait::E, Trait::O}) CHECK(direction_correct(0.8, t) == 0.8);
}

TEST_CASE("zone boundaries are inclusive") {
  CHECK(classify_sdr(0.2) == SdrZone::Recommended);
  CHECK(classify_sdr(-0.2) == SdrZone::Recommended);
  CHECK(classify_sdr(0.2000001) == SdrZone::Caution);
  CHECK(classify_sdr(0.5) == SdrZone::Caution);
  CHECK(classify_sdr(-0.5) == SdrZone::Caution);
  CHECK(classify_sdr(0.5000001) == SdrZone::Avoid);
  CHECK(classify_recovery(0.70) == RecoveryZone::Strong);
  CHECK(classify_recovery(0.6999) == RecoveryZone::Acceptable);
  CHECK(classify_recovery(0.50) == RecoveryZone::Acceptable);
  CHECK(classify_recovery(0.4999) == RecoveryZone::Insufficient);
  CHECK(to_string(SdrZone::Avoid) == "avoid");
  CHECK(to_string(RecoveryZone::Strong) == "strong");
}

TEST_CASE("shift table pairs fake-good with honest rows per persona") {
  const auto a = artifact({{"P0001", Condition::Honest, {0, 0, 0, 0, 0}},
                           {"P0002", Condition::Honest, {1, 1, 1, 1, 1}},
                           {"P0002", Condition::FakeGood, {2, 1, 1, 0, 1}},
                           {"P0001", Condition::FakeGood, {1, 0, 0, -1, 0}}});
  const auto s = shift_table(a, a);
  REQUIRE(s.n() == 2);
  CHECK(s.personas[0] == "P0001");
  CHECK(s.delta(0, 0) == 1.0);
  CHECK(s.delta(0, 3) == -1.0);
  CHECK(s.delta(1, 0) == 1.0);

  const auto missing = artifact({{"P0001", Condition::Honest, {0, 0, 0, 0, 0}},
                                 {"P0002", Condition::FakeGood, {0, 0, 0, 0, 0}}});
  try {
    shift_table(missing, missing);
    FAIL("expected unpaired_persona");
  } catch (const Error& e) {
    CHECK(e.kind() == "unpaired_persona");
  }
}

TEST_CASE("effect summary corrects direction and averages traits") {
  std::vector<std::tuple<std::string, Condition, TraitVector>> rows;
  const std::vector<double> shifts{1.0, 2.0, 3.0};
  for (std::size_t i = 0; i < shifts.size(); ++i) {
    const std::string p = "P000" + std::to_string(i + 1);
    const double d = shifts[i];
    rows.push_back({p, Condition::Honest, {0, 0, 0, 0, 0}});
    rows.push_back({p, Condition::FakeGood, {d, d, d, -d, 0.0}});
  }
  const auto a = artifact(rows);
  const auto e = effect_summary(shift_table(a, a), "sim", "likert");
  CHECK(e.n == 3);
  CHECK(*e.traits[0].d_z.value == doctest::Approx(2.0));
  CHECK(*e.traits[3].d_z.value == doctest::Approx(-2.0));
  CHECK(*e.traits[3].d_tilde.value == doctest::Approx(2.0));
  CHECK(e.traits[3].g == -1);
  CHECK_FALSE(e.traits[4].d_tilde.value.has_value());
  CHECK_FALSE(e.traits[4].d_tilde.reason.empty());
  CHECK_FALSE(e.aggregate.value.has_value());
  CHECK_FALSE(e.aggregate.reason.empty());
  rows[1] = {"P0001", Condition::FakeGood, {1.0, 1.0, 1.0, -1.0, 1.0}};
  rows[3] = {"P0002", Condition::FakeGood, {2.0, 2.0, 2.0, -2.0, 2.0}};
  rows[5] = {"P0003", Condition::FakeGood, {3.0, 3.0, 3.0, -3.0, 3.0}};
  const auto b = artifact(rows);
  const auto full = effect_summary(shift_table(b, b), "sim", "likert");
  REQUIRE(full.aggregate.value.has_value());
  CHECK(*full.aggregate.value == doctest::Approx(2.0));
}

TEST_CASE("recovery of pure noise is near zero and of the truth is one") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z(0.0, 1.0);
  const int n = 2000;
  Eigen::MatrixXd truth(n, 5), noise(n, 5);
  for (int i = 0; i < n; ++i)
    for (int t = 0; t < 5; ++t) {
      truth(i, t) = z(rng);
      noise(i, t) = z(rng);
    }
  const auto r0 = recovery(noise, truth);
  for (const auto& r : r0.r) CHECK(std::abs(*r.value) < 0.1);
  const auto r1 = recovery(truth, truth);
  CHECK(*r1.mean_r.value == doctest::Approx(1.0));
  CHECK_THROWS_AS(recovery(truth.topRows(2), truth.topRows(2)), Error);

  Eigen::MatrixXd flat = truth.topRows(10);
  flat.col(2).setConstant(1.0);
  const auto rf = recovery(flat, truth.topRows(10));
  CHECK_FALSE(rf.r[2].value.has_value());
  CHECK(rf.r[0].value.has_value());
}

TEST_CASE("zones need every trait defined for the aggregate labels") {
  EffectSummary e;
  RecoveryReport r;
  e.aggregate.value = 0.1;
  r.mean_r.value = 0.8;
  for (std::size_t t = 0; t < 5; ++t) {
    e.traits[t].d_tilde.value = 0.1 * static_cast<double>(t);
    r.r[t].value = 0.8;
  }
  const auto z = classify_zones(e, r);
  CHECK(z.sdr == SdrZone::Recommended);
  CHECK(z.recovery == RecoveryZone::Strong);
  CHECK(z.sdr_traits[3] == SdrZone::Caution);
}

TEST_CASE("correlations report Pearson, Spearman and an interval") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  const std::vector<double> y{2, 4, 5, 4, 5};
  const auto c = correlations(x, y);
  CHECK(c.n == 5);
  CHECK(c.pearson == doctest::Approx(0.7745967).epsilon(1e-6));
  CHECK(c.spearman == doctest::Approx(0.7378648).epsilon(1e-6));
  REQUIRE(c.pearson_ci.has_value());
  CHECK(c.pearson_ci->lower < c.pearson);
  CHECK(c.pearson_ci->upper > c.pearson);
  const std::vector<double> x3{1, 2, 3}, y3{1, 3, 2};
  CHECK_FALSE(correlations(x3, y3).pearson_ci.has_value());
  const std::vector<double> flat{1, 1, 1};
  CHECK_THROWS_AS(correlations(x3, flat), UndefinedStatistic);
}
