#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdrkit/stats.hpp"

namespace sdrkit {

struct Rating {
  std::string item;
  std::string rater;
  int replication = 1;
  int value = 5;  ///< 1..9
};

/// Ragged (item, rater, replication) ratings; absent cells are simply missing rows.
class RatingDataset {
 public:
  RatingDataset() = default;
  explicit RatingDataset(std::vector<Rating> ratings);

  const std::vector<Rating>& ratings() const { return ratings_; }
  std::vector<std::string> raters() const;
  std::vector<std::string> items() const;
  /// Distinct replication indices recorded for `rater`.
  std::vector<int> replications(const std::string& rater) const;

 private:
  std::vector<Rating> ratings_;
};

RatingDataset load_rating_dataset(std::istream& in, const std::string& source_name = "<stream>");
RatingDataset load_rating_dataset(const std::filesystem::path& path);
void save_rating_dataset(const RatingDataset& ds, std::ostream& out);

struct ItemDesirability {
  double mean = 0.0;
  int n = 0;
};

/// Per-item mean desirability s_j keyed by item id.
struct DesirabilityTable {
  std::map<std::string, ItemDesirability> items;
  std::map<std::string, double> scores() const;
};

/// s_j = mean over every available rating of item j. When `expected_items` is
/// given, an item among them with no ratings is an error.
DesirabilityTable aggregate_ratings(const RatingDataset& ds,
                                    const std::vector<std::string>& expected_items = {});

struct IccResult {
  double single = 0.0;   ///< ICC(A,1)
  double average = 0.0;  ///< ICC(A,k)
  int k = 0;
};

/// Two-way random-effects absolute-agreement ICC (McGraw & Wong A,1 and A,k)
/// from ANOVA mean squares. Rows are targets (items), columns are raters or
/// replications. Throws UndefinedStatistic when items carry no variance.
IccResult icc_absolute_agreement(const Eigen::MatrixXd& x);

struct AgreementStats {
  double icc_a1 = 0.0;
  double icc_ak = 0.0;
  double mean_pairwise_r = 0.0;
  double split_half_r = 0.0;
  stats::Interval split_half_interval;  ///< 2.5 / 97.5 percentiles over splits
  int k = 0;                            ///< replications used
  int items_used = 0;
  int items_dropped = 0;  ///< items without a complete replication row
};

AgreementStats agreement_stats(const RatingDataset& ds, const std::string& rater, int splits,
                               std::uint64_t seed);

struct BetweenRaterAgreement {
  double pearson = 0.0;
  double spearman = 0.0;
  std::optional<double> icc_a1;  ///< empty when items carry no variance (e.g. b = 10 - a)
  int items = 0;
};

BetweenRaterAgreement between_rater_agreement(const DesirabilityTable& a,
                                              const DesirabilityTable& b);

/// Normalizes a rater reply (drops line breaks, commas, whitespace) and accepts
/// it iff exactly `expected` digits in 1..9 remain. Error kinds:
/// "rating_non_digit", "rating_out_of_range", "rating_wrong_count".
std::vector<int> parse_block_rating_response(const std::string& text, int expected);

}  // namespace sdrkit
