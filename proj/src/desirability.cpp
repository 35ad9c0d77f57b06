#include "sdrkit/desirability.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <set>

#include "sdrkit/error.hpp"
#include "sdrkit/inventory_io.hpp"
#include "sdrkit/rng.hpp"

namespace sdrkit {

RatingDataset::RatingDataset(std::vector<Rating> ratings) : ratings_(std::move(ratings)) {
  for (const auto& r : ratings_) {
    if (r.value < 1 || r.value > 9)
      throw Error("rating_range", "rating of item '" + r.item + "' outside 1..9");
  }
}

std::vector<std::string> RatingDataset::raters() const {
  std::set<std::string> s;
  for (const auto& r : ratings_) s.insert(r.rater);
  return {s.begin(), s.end()};
}

std::vector<std::string> RatingDataset::items() const {
  std::set<std::string> s;
  for (const auto& r : ratings_) s.insert(r.item);
  return {s.begin(), s.end()};
}

std::vector<int> RatingDataset::replications(const std::string& rater) const {
  std::set<int> s;
  for (const auto& r : ratings_)
    if (r.rater == rater) s.insert(r.replication);
  return {s.begin(), s.end()};
}

RatingDataset load_rating_dataset(std::istream& in, const std::string& source_name) {
  auto table = read_tsv(in, source_name);
  const auto c_item = table.column("item"), c_rater = table.column("rater"),
             c_rep = table.column("replication"), c_val = table.column("value");
  std::vector<Rating> ratings;
  ratings.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    try {
      ratings.push_back({row[c_item], row[c_rater], std::stoi(row[c_rep]), std::stoi(row[c_val])});
    } catch (const std::exception&) {
      throw Error("parse", source_name + ":" + std::to_string(table.line_numbers[r]) +
                               ": malformed rating row");
    }
  }
  return RatingDataset(std::move(ratings));
}

RatingDataset load_rating_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open ratings " + path.string());
  return load_rating_dataset(in, path.string());
}

void save_rating_dataset(const RatingDataset& ds, std::ostream& out) {
  out << "item\trater\treplication\tvalue\n";
  for (const auto& r : ds.ratings())
    out << r.item << '\t' << r.rater << '\t' << r.replication << '\t' << r.value << '\n';
}

std::map<std::string, double> DesirabilityTable::scores() const {
  std::map<std::string, double> out;
  for (const auto& [id, d] : items) out[id] = d.mean;
  return out;
}

DesirabilityTable aggregate_ratings(const RatingDataset& ds,
                                    const std::vector<std::string>& expected_items) {
  if (ds.ratings().empty()) throw Error("empty_ratings", "rating dataset is empty");
  std::map<std::string, std::pair<long long, int>> acc;
  for (const auto& r : ds.ratings()) {
    auto& [sum, n] = acc[r.item];
    sum += r.value;
    ++n;
  }
  for (const auto& id : expected_items)
    if (!acc.count(id)) throw Error("unrated_item", "item '" + id + "' has zero ratings");
  DesirabilityTable table;
  for (const auto& [id, sn] : acc)
    table.items[id] = {static_cast<double>(sn.first) / static_cast<double>(sn.second), sn.second};
  return table;
}

IccResult icc_absolute_agreement(const Eigen::MatrixXd& x) {
  const auto n = x.rows(), k = x.cols();
  if (n < 2 || k < 2) throw UndefinedStatistic("ICC needs at least two targets and two raters");
  const double grand = x.mean();
  const Eigen::VectorXd row_means = x.rowwise().mean();
  const Eigen::RowVectorXd col_means = x.colwise().mean();
  const double ss_rows = static_cast<double>(k) * (row_means.array() - grand).square().sum();
  const double ss_cols = static_cast<double>(n) * (col_means.array() - grand).square().sum();
  const double ss_total = (x.array() - grand).square().sum();
  const double ss_err = std::max(0.0, ss_total - ss_rows - ss_cols);
  const double msr = ss_rows / static_cast<double>(n - 1);
  const double msc = ss_cols / static_cast<double>(k - 1);
  const double mse = ss_err / static_cast<double>((n - 1) * (k - 1));
  if (msr <= 0.0) throw UndefinedStatistic("ICC undefined: no variance across targets");
  const double kd = static_cast<double>(k), nd = static_cast<double>(n);
  IccResult out;
  out.k = static_cast<int>(k);
  out.single = (msr - mse) / (msr + (kd - 1.0) * mse + kd * (msc - mse) / nd);
  out.average = (msr - mse) / (msr + (msc - mse) / nd);
  return out;
}

AgreementStats agreement_stats(const RatingDataset& ds, const std::string& rater, int splits,
                               std::uint64_t seed) {
  const auto reps = ds.replications(rater);
  if (reps.size() < 2)
    throw Error("too_few_replications", "rater '" + rater + "' has fewer than 2 replications");
  std::map<int, std::size_t> rep_col;
  for (std::size_t c = 0; c < reps.size(); ++c) rep_col[reps[c]] = c;

  std::map<std::string, std::vector<std::optional<double>>> cells;
  for (const auto& r : ds.ratings()) {
    if (r.rater != rater) continue;
    auto& row = cells[r.item];
    row.resize(reps.size());
    row[rep_col[r.replication]] = r.value;
  }

  AgreementStats out;
  std::vector<std::vector<double>> complete;
  for (const auto& [id, row] : cells) {
    if (std::all_of(row.begin(), row.end(), [](const auto& v) { return v.has_value(); })) {
      std::vector<double> vals;
      for (const auto& v : row) vals.push_back(*v);
      complete.push_back(std::move(vals));
    } else {
      ++out.items_dropped;
    }
  }
  const auto n = static_cast<Eigen::Index>(complete.size());
  const auto k = static_cast<Eigen::Index>(reps.size());
  Eigen::MatrixXd x(n, k);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < k; ++j) x(i, j) = complete[i][j];
  out.items_used = static_cast<int>(n);
  out.k = static_cast<int>(k);

  const auto icc = icc_absolute_agreement(x);
  out.icc_a1 = icc.single;
  out.icc_ak = icc.average;

  // Replication columns with zero variance have no defined correlation and are skipped.
  double sum_r = 0.0;
  int pairs = 0;
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = a + 1; b < k; ++b) {
      Eigen::VectorXd ca = x.col(a), cb = x.col(b);
      try {
        sum_r += stats::pearson({ca.data(), static_cast<std::size_t>(n)},
                                {cb.data(), static_cast<std::size_t>(n)});
        ++pairs;
      } catch (const UndefinedStatistic&) {
      }
    }
  }
  if (pairs == 0) throw UndefinedStatistic("no replication pair has variance across items");
  out.mean_pairwise_r = sum_r / pairs;

  if (splits > 0) {
    Rng rng(derive_seed(seed, "split-half", rater));
    std::vector<Eigen::Index> cols(static_cast<std::size_t>(k));
    std::iota(cols.begin(), cols.end(), Eigen::Index{0});
    const auto half = k / 2;
    std::vector<double> rs;
    rs.reserve(static_cast<std::size_t>(splits));
    for (int s = 0; s < splits; ++s) {
      std::shuffle(cols.begin(), cols.end(), rng);
      std::vector<double> m1(static_cast<std::size_t>(n), 0.0), m2(static_cast<std::size_t>(n), 0.0);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < k; ++c)
          (c < half ? m1 : m2)[static_cast<std::size_t>(i)] += x(i, cols[static_cast<std::size_t>(c)]);
        m1[static_cast<std::size_t>(i)] /= static_cast<double>(half);
        m2[static_cast<std::size_t>(i)] /= static_cast<double>(k - half);
      }
      rs.push_back(stats::pearson(m1, m2));
    }
    out.split_half_r = stats::mean(rs);
    out.split_half_interval = {stats::quantile(rs, 0.025), stats::quantile(rs, 0.975)};
  }
  return out;
}

BetweenRaterAgreement between_rater_agreement(const DesirabilityTable& a,
                                              const DesirabilityTable& b) {
  std::vector<double> xa, xb;
  for (const auto& [id, da] : a.items) {
    auto it = b.items.find(id);
    if (it == b.items.end()) continue;
    xa.push_back(da.mean);
    xb.push_back(it->second.mean);
  }
  if (xa.empty()) throw Error("disjoint_items", "desirability tables share no items");
  if (xa.size() != a.items.size() || xa.size() != b.items.size())
    throw Error("item_set_mismatch", "desirability tables cover different item sets");
  BetweenRaterAgreement out;
  out.items = static_cast<int>(xa.size());
  out.pearson = stats::pearson(xa, xb);
  out.spearman = stats::spearman(xa, xb);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(xa.size()), 2);
  for (std::size_t i = 0; i < xa.size(); ++i) {
    x(static_cast<Eigen::Index>(i), 0) = xa[i];
    x(static_cast<Eigen::Index>(i), 1) = xb[i];
  }
  try {
    out.icc_a1 = icc_absolute_agreement(x).single;
  } catch (const UndefinedStatistic&) {
  }
  return out;
}

std::vector<int> parse_block_rating_response(const std::string& text, int expected) {
  if (expected < 1) throw Error("config", "expected rating count must be positive");
  std::string digits;
  for (char c : text) {
    if (c == '\n' || c == '\r' || c == ',' || std::isspace(static_cast<unsigned char>(c))) continue;
    digits.push_back(c);
  }
  for (char c : digits)
    if (c < '0' || c > '9') throw Error("rating_non_digit", "reply contains non-digit text");
  if (digits.find('0') != std::string::npos)
    throw Error("rating_out_of_range", "reply contains a rating outside 1..9");
  if (static_cast<int>(digits.size()) != expected)
    throw Error("rating_wrong_count", "reply has " + std::to_string(digits.size()) +
                                          " ratings, expected " + std::to_string(expected));
  std::vector<int> out;
  for (char c : digits) out.push_back(c - '0');
  return out;
}

}  // namespace sdrkit
