#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "sdrkit/desirability.hpp"
#include "sdrkit/error.hpp"
#include "sdrkit/rng.hpp"

using namespace sdrkit;

namespace {

RatingDataset from_values(const std::string& item, const std::vector<int>& values) {
  std::vector<Rating> rs;
  int rep = 1;
  for (int v : values) rs.push_back({item, "r1", rep++, v});
  return RatingDataset(rs);
}

RatingDataset random_ratings(int items, int reps, std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_int_distribution<int> d(1, 9);
  std::vector<Rating> out;
  for (int j = 0; j < items; ++j)
    for (int r = 1; r <= reps; ++r) out.push_back({"i" + std::to_string(j), "r1", r, d(rng)});
  return RatingDataset(out);
}

Eigen::MatrixXd variance_ratio_matrix(int items, int reps, std::uint64_t seed) {
  Rng rng(seed);
  std::normal_distribution<double> u(0.0, 2.0), e(0.0, 1.0);
  Eigen::MatrixXd x(items, reps);
  for (int j = 0; j < items; ++j) {
    const double uj = u(rng);
    for (int r = 0; r < reps; ++r) x(j, r) = uj + e(rng);
  }
  return x;
}

}  // namespace

TEST_CASE("aggregate_ratings takes the mean of all available ratings") {
  CHECK(aggregate_ratings(from_values("x", std::vector<int>(60, 7))).items.at("x").mean ==
        doctest::Approx(7.0));
  CHECK(aggregate_ratings(from_values("respect", {9, 9, 8, 9})).items.at("respect").mean ==
        doctest::Approx(8.75));
  const auto t = aggregate_ratings(from_values("x", {1, 2, 3}));
  CHECK(t.items.at("x").mean == doctest::Approx(2.0));
  CHECK(t.items.at("x").n == 3);
}

TEST_CASE("aggregate_ratings errors") {
  CHECK_THROWS_AS(aggregate_ratings(RatingDataset{}), Error);
  try {
    aggregate_ratings(from_values("x", {5}), {"x", "y"});
    FAIL("expected unrated_item");
  } catch (const Error& e) {
    CHECK(e.kind() == "unrated_item");
  }
  CHECK_THROWS_AS(RatingDataset({{"x", "r", 1, 0}}), Error);
}

TEST_CASE("aggregate_ratings is invariant to rater and replication order") {
  auto ds = random_ratings(10, 6, 3);
  auto rs = ds.ratings();
  std::reverse(rs.begin(), rs.end());
  Rng rng(11);
  std::shuffle(rs.begin(), rs.end(), rng);
  const auto a = aggregate_ratings(ds).scores();
  const auto b = aggregate_ratings(RatingDataset(rs)).scores();
  CHECK(a == b);
}

TEST_CASE("shipped ratings reproduce the fixture desirability values") {
  const auto ds = load_rating_dataset(fixtures::data_dir() / "table3_ratings.tsv");
  const auto pool = fixtures::table3_pool();
  const auto scores = aggregate_ratings(ds).scores();
  REQUIRE(scores.size() == pool.size());
  for (const auto& item : pool.items())
    CHECK(scores.at(item.id) == doctest::Approx(*item.desirability).epsilon(1e-12));
}

TEST_CASE("rating dataset round trip") {
  const auto ds = random_ratings(4, 3, 5);
  std::stringstream ss;
  save_rating_dataset(ds, ss);
  const auto back = load_rating_dataset(ss);
  REQUIRE(back.ratings().size() == ds.ratings().size());
  for (std::size_t i = 0; i < ds.ratings().size(); ++i) {
    CHECK(back.ratings()[i].item == ds.ratings()[i].item);
    CHECK(back.ratings()[i].value == ds.ratings()[i].value);
  }
}

TEST_CASE("ICC is 1 when every replication is identical") {
  Eigen::MatrixXd x(5, 4);
  for (int j = 0; j < 5; ++j) x.row(j).setConstant(1.0 + j);
  const auto icc = icc_absolute_agreement(x);
  CHECK(icc.single == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(icc.average == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("ICC(A,1) recovers a 4:1 variance ratio") {
  double acc = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto icc = icc_absolute_agreement(variance_ratio_matrix(100, 30, seed));
    CHECK(icc.single == doctest::Approx(0.8).epsilon(0.0625));
    CHECK(icc.single <= icc.average);
    acc += icc.single;
  }
  CHECK(std::abs(acc / 5.0 - 0.8) < 0.05);
}

TEST_CASE("ICC is unchanged when whole replication columns are permuted") {
  const auto x = variance_ratio_matrix(40, 8, 9);
  Eigen::MatrixXd y(x.rows(), x.cols());
  const std::vector<int> perm = {3, 0, 7, 1, 6, 2, 5, 4};
  for (int c = 0; c < 8; ++c) y.col(c) = x.col(perm[static_cast<std::size_t>(c)]);
  const auto a = icc_absolute_agreement(x), b = icc_absolute_agreement(y);
  CHECK(a.single == doctest::Approx(b.single).epsilon(1e-12));
  CHECK(a.average == doctest::Approx(b.average).epsilon(1e-12));
}

TEST_CASE("ICC is undefined without variance across items") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(4, 3, 5.0);
  CHECK_THROWS_AS(icc_absolute_agreement(x), UndefinedStatistic);
}

TEST_CASE("agreement_stats on the shipped ratings") {
  const auto ds = load_rating_dataset(fixtures::data_dir() / "table3_ratings.tsv");
  const auto a = agreement_stats(ds, "rater_a", 200, 42);
  CHECK(a.k == 30);
  CHECK(a.items_used == 60);
  CHECK(a.items_dropped == 0);
  CHECK(a.icc_a1 <= a.icc_ak);
  CHECK(a.icc_ak > 0.9);
  CHECK(a.split_half_r <= 1.0);
  CHECK(a.split_half_interval.lower <= a.split_half_r);
  CHECK(a.split_half_r <= a.split_half_interval.upper);
  const auto b = agreement_stats(ds, "rater_a", 200, 42);
  CHECK(std::memcmp(&a.split_half_r, &b.split_half_r, sizeof(double)) == 0);
  CHECK(std::memcmp(&a.split_half_interval.lower, &b.split_half_interval.lower, sizeof(double)) == 0);
}

TEST_CASE("agreement_stats drops incomplete items and needs two replications") {
  std::vector<Rating> rs;
  for (int j = 0; j < 6; ++j)
    for (int r = 1; r <= 4; ++r)
      if (!(j == 2 && r == 3)) rs.push_back({"i" + std::to_string(j), "r1", r, 1 + (j + r) % 9});
  const auto st = agreement_stats(RatingDataset(rs), "r1", 10, 1);
  CHECK(st.items_dropped == 1);
  CHECK(st.items_used == 5);
  CHECK_THROWS_AS(agreement_stats(from_values("x", {5}), "r1", 10, 1), Error);
}

TEST_CASE("between_rater_agreement") {
  DesirabilityTable a, b, c;
  const std::vector<double> v = {2.0, 3.5, 4.0, 6.25, 8.0, 8.5};
  for (std::size_t i = 0; i < v.size(); ++i) {
    a.items["i" + std::to_string(i)] = {v[i], 1};
    c.items["i" + std::to_string(i)] = {10.0 - v[i], 1};
  }
  const auto same = between_rater_agreement(a, a);
  CHECK(same.pearson == doctest::Approx(1.0));
  CHECK(same.spearman == doctest::Approx(1.0));
  REQUIRE(same.icc_a1.has_value());
  CHECK(*same.icc_a1 == doctest::Approx(1.0));
  const auto rev = between_rater_agreement(a, c);
  CHECK(rev.pearson == doctest::Approx(-1.0));
  CHECK(rev.spearman == doctest::Approx(-1.0));
  CHECK_FALSE(rev.icc_a1.has_value());
  b.items["zz"] = {5.0, 1};
  try {
    between_rater_agreement(a, b);
    FAIL("expected disjoint_items");
  } catch (const Error& e) {
    CHECK(e.kind() == "disjoint_items");
  }
}

TEST_CASE("parse_block_rating_response") {
  CHECK(parse_block_rating_response("5 7 3", 3) == std::vector<int>{5, 7, 3});
  CHECK(parse_block_rating_response("5, 7,\n3", 3) == std::vector<int>{5, 7, 3});
  auto kind_of = [](const std::string& text, int n) {
    try {
      parse_block_rating_response(text, n);
    } catch (const Error& e) {
      return e.kind();
    }
    return std::string("ok");
  };
  CHECK(kind_of("5 0 3", 3) == "rating_out_of_range");
  CHECK(kind_of("5 7", 3) == "rating_wrong_count");
  CHECK(kind_of("5 x 3", 3) == "rating_non_digit");
  CHECK(kind_of("Ratings: 5 7 3", 3) == "rating_non_digit");
}
