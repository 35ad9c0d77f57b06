#include "sdrkit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sdrkit/error.hpp"
#include "sdrkit/stats.hpp"

namespace sdrkit {

namespace {

using Chains = std::vector<std::vector<double>>;

void check_chains(const Chains& chains) {
  if (chains.size() < 2) throw UndefinedStatistic("R-hat needs at least two chains");
  const auto n = chains.front().size();
  if (n < 4) throw UndefinedStatistic("R-hat needs at least four draws per chain");
  for (const auto& c : chains)
    if (c.size() != n) throw Error("dimension", "chains differ in length");
}

Chains split(const Chains& chains) {
  Chains out;
  for (const auto& c : chains) {
    const auto half = c.size() / 2;
    // Odd lengths drop the middle draw.
    out.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
    out.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
  }
  return out;
}

Chains rank_normalize(const Chains& chains) {
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  const auto r = stats::ranks(pooled);
  const double s = static_cast<double>(pooled.size());
  Chains out = chains;
  std::size_t k = 0;
  for (auto& c : out)
    for (auto& v : c) v = stats::normal_quantile((r[k++] - 0.375) / (s + 0.25));
  return out;
}

Chains fold(const Chains& chains) {
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  const double med = stats::quantile(pooled, 0.5);
  Chains out = chains;
  for (auto& c : out)
    for (auto& v : c) v = std::abs(v - med);
  return out;
}

double rhat_of(const Chains& chains) {
  const double m = static_cast<double>(chains.size());
  const double n = static_cast<double>(chains.front().size());
  std::vector<double> means, vars;
  for (const auto& c : chains) {
    means.push_back(stats::mean(c));
    vars.push_back(stats::sample_variance(c));
  }
  const double w = stats::mean(vars);
  const double b = n * stats::sample_variance(means);
  if (!(w > 0.0)) return b > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
  (void)m;
  return std::sqrt(((n - 1.0) / n * w + b / n) / w);
}

double ess_of(const Chains& chains) {
  const auto m = chains.size();
  const auto n = chains.front().size();
  std::vector<double> means(m), vars(m);
  auto acov = [&](std::size_t c, std::size_t lag) {
    const auto& x = chains[c];
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += (x[t] - means[c]) * (x[t + lag] - means[c]);
    return s / static_cast<double>(n);
  };
  for (std::size_t c = 0; c < m; ++c) {
    means[c] = stats::mean(chains[c]);
    vars[c] = acov(c, 0) * static_cast<double>(n) / static_cast<double>(n - 1);
  }
  const double nd = static_cast<double>(n), md = static_cast<double>(m);
  const double w = stats::mean(vars);
  const double b_over_n = stats::sample_variance(means);
  double var_plus = w * (nd - 1.0) / nd + b_over_n;
  if (!(var_plus > 0.0)) return nd * md;
  auto rho = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t c = 0; c < m; ++c) s += acov(c, lag);
    return 1.0 - (w - s / md) / var_plus;
  };
  // Geyer initial positive sequence with monotone correction.
  std::vector<double> rhos(n, 0.0);
  rhos[0] = 1.0;
  if (n > 1) rhos[1] = rho(1);
  std::size_t t = 1;
  while (t + 2 < n) {
    rhos[t + 1] = rho(t + 1);
    rhos[t + 2] = rho(t + 2);
    if (rhos[t + 1] + rhos[t + 2] < 0.0) break;
    t += 2;
  }
  const std::size_t max_t = t;
  for (std::size_t k = 1; k + 2 <= max_t; k += 2) {
    const double prev = rhos[k - 1] + rhos[k];
    if (rhos[k + 1] + rhos[k + 2] > prev) {
      rhos[k + 1] = prev / 2.0;
      rhos[k + 2] = prev / 2.0;
    }
  }
  double tau = -1.0 + 2.0 * std::accumulate(rhos.begin(), rhos.begin() + static_cast<std::ptrdiff_t>(max_t + 1), 0.0);
  // Antithetic chains can make tau tiny; cap as Stan does.
  tau = std::max(tau, 1.0 / std::log10(md * nd));
  return md * nd / tau;
}

Chains tail_indicator(const Chains& chains, double q) {
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  const double cut = stats::quantile(pooled, q);
  Chains out = chains;
  for (auto& c : out)
    for (auto& v : c) v = v <= cut ? 1.0 : 0.0;
  return out;
}

}  // namespace

double basic_rhat(const Chains& chains) {
  check_chains(chains);
  return rhat_of(chains);
}

ParamDiagnostics scalar_diagnostics(const Chains& chains) {
  check_chains(chains);
  const auto sp = split(chains);
  ParamDiagnostics d;
  const auto z = rank_normalize(sp);
  const auto zf = rank_normalize(fold(sp));
  d.rhat = std::max(rhat_of(z), rhat_of(zf));
  d.ess_bulk = ess_of(z);
  auto ess_q = [&](double q) {
    const auto ind = tail_indicator(sp, q);
    return ess_of(ind);
  };
  d.ess_tail = std::min(ess_q(0.05), ess_q(0.95));
  return d;
}

std::vector<ParamDiagnostics> diagnostics(const std::vector<Eigen::MatrixXd>& chains) {
  if (chains.size() < 2) throw UndefinedStatistic("R-hat needs at least two chains");
  const auto p = chains.front().cols();
  std::vector<ParamDiagnostics> out(static_cast<std::size_t>(p));
  Chains buf(chains.size());
  for (Eigen::Index j = 0; j < p; ++j) {
    for (std::size_t c = 0; c < chains.size(); ++c) {
      const auto& m = chains[c];
      buf[c].assign(m.col(j).data(), m.col(j).data() + m.rows());
    }
    out[static_cast<std::size_t>(j)] = scalar_diagnostics(buf);
  }
  return out;
}

}  // namespace sdrkit
