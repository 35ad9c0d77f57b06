#include "sdrkit/ordinal.hpp"

#include <cmath>

#include "sdrkit/error.hpp"

namespace sdrkit {

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double log_sigmoid(double x) {
  if (x >= 0.0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

void check_thresholds(const Thresholds& kappa) {
  for (int k = 0; k < kThresholdCount; ++k) {
    if (!std::isfinite(kappa[k])) throw Error("unordered_thresholds", "non-finite threshold");
    if (k > 0 && !(kappa[k] > kappa[k - 1]))
      throw Error("unordered_thresholds", "thresholds must be strictly increasing");
  }
}

CategoryProbs category_probs(double eta, const Thresholds& kappa) {
  check_thresholds(kappa);
  CategoryProbs p{};
  for (int y = 1; y <= 7; ++y) p[static_cast<std::size_t>(y - 1)] = std::exp(ordinal_log_prob(eta, kappa, y).log_prob);
  return p;
}

double survivor(double eta, const Thresholds& kappa, int k) {
  if (k < 1 || k > 7) throw Error("category", "category outside 1..7");
  if (k == 1) return 1.0;
  return sigmoid(eta - kappa[static_cast<std::size_t>(k - 2)]);
}

double survivor_cutpoint_form(double eta, const Thresholds& kappa, int k) {
  if (k < 1 || k > 7) throw Error("category", "category outside 1..7");
  if (k == 1) return 1.0;
  return 1.0 - sigmoid(kappa[static_cast<std::size_t>(k - 2)] - eta);
}

OrdinalTerm ordinal_log_prob(double eta, const Thresholds& kappa, int y) {
  OrdinalTerm t;
  if (y < 1 || y > 7) throw Error("category", "category outside 1..7");
  if (y == 1) {
    const double b = eta - kappa[0];
    t.log_prob = log_sigmoid(-b);
    t.d_eta = -sigmoid(b);
    t.d2_eta = -sigmoid(b) * sigmoid(-b);
    t.d_upper = sigmoid(b);
    return t;
  }
  if (y == 7) {
    const double a = eta - kappa[5];
    t.log_prob = log_sigmoid(a);
    t.d_eta = sigmoid(-a);
    t.d2_eta = -sigmoid(a) * sigmoid(-a);
    t.d_lower = -sigmoid(-a);
    return t;
  }
  const double a = eta - kappa[static_cast<std::size_t>(y - 2)];
  const double b = eta - kappa[static_cast<std::size_t>(y - 1)];
  const double gap = a - b;  // kappa_y - kappa_{y-1} > 0
  const double log_one_minus = gap < M_LN2 ? std::log(-std::expm1(-gap)) : std::log1p(-std::exp(-gap));
  t.log_prob = log_sigmoid(a) + log_sigmoid(-b) + log_one_minus;
  const double inv = 1.0 / std::expm1(gap);
  t.d_eta = sigmoid(-a) - sigmoid(b);
  t.d2_eta = -sigmoid(a) * sigmoid(-a) - sigmoid(b) * sigmoid(-b);
  t.d_lower = -sigmoid(-a) - inv;
  t.d_upper = sigmoid(b) + inv;
  return t;
}

int draw_category(double eta, const Thresholds& kappa, double u) {
  // P(Y >= k) is decreasing in k; Y = 1 + #{k >= 2 : u < P(Y >= k)}.
  int y = 1;
  for (int k = 2; k <= 7; ++k)
    if (u < survivor(eta, kappa, k)) y = k;
  return y;
}

}  // namespace sdrkit
