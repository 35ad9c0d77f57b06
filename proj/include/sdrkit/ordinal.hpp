#pragma once

#include <array>

namespace sdrkit {

inline constexpr int kThresholdCount = 6;
using Thresholds = std::array<double, kThresholdCount>;
using CategoryProbs = std::array<double, 7>;

double sigmoid(double x);
/// log(sigmoid(x)) without overflow for large |x|.
double log_sigmoid(double x);

/// Throws Error("unordered_thresholds") unless strictly increasing and finite.
void check_thresholds(const Thresholds& kappa);

/// P(Y = k) = sigmoid(eta - kappa_{k-1}) - sigmoid(eta - kappa_k), k = 1..7,
/// with kappa_0 = -inf and kappa_7 = +inf.
CategoryProbs category_probs(double eta, const Thresholds& kappa);

/// P(Y >= k) in survivor form sigmoid(eta - kappa_{k-1}); k in 1..7.
double survivor(double eta, const Thresholds& kappa, int k);
/// P(Y >= k) in cumulative-cutpoint form 1 - sigmoid(kappa_{k-1} - eta).
double survivor_cutpoint_form(double eta, const Thresholds& kappa, int k);

/// log P(Y = y) and its partial derivatives w.r.t. eta and the two adjacent
/// thresholds (kappa_{y-1} -> d_lower, kappa_y -> d_upper; zero when absent),
/// plus the second derivative w.r.t. eta.
struct OrdinalTerm {
  double log_prob = 0.0;
  double d_eta = 0.0;
  double d2_eta = 0.0;
  double d_lower = 0.0;
  double d_upper = 0.0;
};
OrdinalTerm ordinal_log_prob(double eta, const Thresholds& kappa, int y);

/// Inverse-CDF draw from category_probs given u in [0, 1).
int draw_category(double eta, const Thresholds& kappa, double u);

}  // namespace sdrkit
