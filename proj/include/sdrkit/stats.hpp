#pragma once

#include <span>
#include <vector>

namespace sdrkit::stats {

double mean(std::span<const double> x);
/// Sample variance with the n-1 denominator. Requires n >= 2.
double sample_variance(std::span<const double> x);
double sample_sd(std::span<const double> x);

/// Average ranks (1-based); ties share the mean of their positions.
std::vector<double> ranks(std::span<const double> x);

/// Product-moment correlation. Throws UndefinedStatistic on zero variance
/// or length mismatch / n < 2.
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
};

/// 95% (by default) interval for a Pearson r via the Fisher z transform.
Interval fisher_interval(double r, std::size_t n, double level = 0.95);

/// Linear-interpolated quantile (type 7), q in [0, 1].
double quantile(std::vector<double> x, double q);

double normal_cdf(double x);
double normal_quantile(double p);

}  // namespace sdrkit::stats
