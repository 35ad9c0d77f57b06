#include "sdrkit/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "sdrkit/error.hpp"

namespace sdrkit::stats {

double mean(std::span<const double> x) {
  if (x.empty()) throw UndefinedStatistic("mean of an empty sample");
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

namespace {

// Mean accumulated relative to the first value, so constant input gives
// exactly zero deviations.
double centre(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v - x[0];
  return x[0] + s / static_cast<double>(x.size());
}

}  // namespace

double sample_variance(std::span<const double> x) {
  if (x.size() < 2) throw UndefinedStatistic("variance needs at least two observations");
  const double m = centre(x);
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return ss / static_cast<double>(x.size() - 1);
}

double sample_sd(std::span<const double> x) { return std::sqrt(sample_variance(x)); }

std::vector<double> ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[order[k]] = avg;
    i = j + 1;
  }
  return r;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("length_mismatch", "correlation inputs differ in length");
  if (x.size() < 2) throw UndefinedStatistic("correlation needs at least two pairs");
  const double mx = centre(x), my = centre(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw UndefinedStatistic("correlation with zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  auto rx = ranks(x);
  auto ry = ranks(y);
  return pearson(rx, ry);
}

Interval fisher_interval(double r, std::size_t n, double level) {
  if (n < 4) throw UndefinedStatistic("Fisher interval needs n >= 4");
  const double z = std::atanh(std::clamp(r, -1.0 + 1e-15, 1.0 - 1e-15));
  const double se = 1.0 / std::sqrt(static_cast<double>(n) - 3.0);
  const double crit = normal_quantile(0.5 + level / 2.0);
  return {std::tanh(z - crit * se), std::tanh(z + crit * se)};
}

double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw UndefinedStatistic("quantile of an empty sample");
  std::sort(x.begin(), x.end());
  const double h = (static_cast<double>(x.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (h - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  static const boost::math::normal_distribution<double> standard;
  return boost::math::quantile(standard, p);
}

}  // namespace sdrkit::stats
