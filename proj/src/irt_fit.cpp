#include "sdrkit/irt_fit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <thread>

#include <ceres/ceres.h>

#include "sdrkit/error.hpp"
#include "sdrkit/rng.hpp"

namespace sdrkit {

using nlohmann::json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_sum_exp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

class NegLogPosterior : public ceres::FirstOrderFunction {
 public:
  explicit NegLogPosterior(const ModelData& d) : d_(d), n_(ParamLayout(d).size()) {}
  bool Evaluate(const double* x, double* cost, double* gradient) const override {
    const Eigen::Map<const Eigen::VectorXd> xv(x, n_);
    if (!xv.allFinite()) return false;
    Eigen::VectorXd g;
    const double lp = log_posterior(d_, xv, gradient ? &g : nullptr);
    if (!std::isfinite(lp)) return false;
    *cost = -lp;
    if (gradient) Eigen::Map<Eigen::VectorXd>(gradient, n_) = -g;
    return true;
  }
  int NumParameters() const override { return n_; }

 private:
  const ModelData& d_;
  int n_;
};

Eigen::VectorXd random_start(const ModelData& d, Rng& rng) {
  Eigen::VectorXd x = default_start(d);
  std::normal_distribution<double> nd;
  const ParamLayout L(d);
  for (int i = 0; i < L.rows; ++i)
    for (int t = 0; t < 5; ++t) x(L.theta(i, t)) = 0.5 * nd(rng);
  for (int j = 0; j < L.items; ++j) x(L.log_a(j)) = 0.3 * nd(rng);
  for (int c = 0; c < L.columns; ++c) {
    x(L.cut(c, 0)) += 0.3 * nd(rng);
    for (int m = 1; m < 6; ++m) x(L.cut(c, m)) += 0.2 * nd(rng);
  }
  return x;
}

Eigen::VectorXd constrained_vector(const ModelData& d, const ModelParams& p) {
  const ParamLayout L(d);
  Eigen::VectorXd v(L.size());
  int k = 0;
  for (int i = 0; i < L.rows; ++i)
    for (int t = 0; t < 5; ++t) v(k++) = p.theta(i, t);
  for (int j = 0; j < L.items; ++j) v(k++) = p.a_plus(j);
  for (int c = 0; c < L.columns; ++c)
    for (int m = 0; m < 6; ++m) v(k++) = p.kappa[static_cast<std::size_t>(c)][static_cast<std::size_t>(m)];
  return v;
}

ModelParams params_from_constrained(const ModelData& d, const Eigen::VectorXd& v) {
  const ParamLayout L(d);
  ModelParams p;
  p.theta.resize(L.rows, 5);
  p.a_plus.resize(L.items);
  p.kappa.resize(static_cast<std::size_t>(L.columns));
  int k = 0;
  for (int i = 0; i < L.rows; ++i)
    for (int t = 0; t < 5; ++t) p.theta(i, t) = v(k++);
  for (int j = 0; j < L.items; ++j) p.a_plus(j) = v(k++);
  for (int c = 0; c < L.columns; ++c)
    for (int m = 0; m < 6; ++m) p.kappa[static_cast<std::size_t>(c)][static_cast<std::size_t>(m)] = v(k++);
  return p;
}

std::vector<std::string> param_names(const ModelData& d) {
  std::vector<std::string> out;
  for (int i = 0; i < d.n_rows(); ++i)
    for (auto t : kAllTraits) out.push_back("theta[" + std::to_string(i) + "," + trait_letter(t) + "]");
  for (const auto& id : d.item_ids) out.push_back("a_plus[" + id + "]");
  for (const auto& id : d.column_ids)
    for (int m = 1; m <= 6; ++m) out.push_back("kappa[" + id + "," + std::to_string(m) + "]");
  return out;
}

// ---------------------------------------------------------------------------
// NUTS

struct Point {
  Eigen::VectorXd q, p, g;
  double lp = -kInf;
};

class Nuts {
 public:
  Nuts(const ModelData& d, Rng& rng, int max_depth) : d_(d), rng_(rng), max_depth_(max_depth) {}

  Eigen::VectorXd inv_metric;
  double epsilon = 1.0;

  void evaluate(Point& z) const {
    try {
      z.lp = log_posterior(d_, z.q, &z.g);
      if (!std::isfinite(z.lp) || !z.g.allFinite()) z.lp = -kInf;
    } catch (const Error&) {
      z.lp = -kInf;
    }
  }

  double hamiltonian(const Point& z) const {
    if (z.lp == -kInf) return kInf;
    return -z.lp + 0.5 * (z.p.array().square() * inv_metric.array()).sum();
  }

  void sample_momentum(Point& z) {
    z.p.resize(z.q.size());
    for (Eigen::Index i = 0; i < z.q.size(); ++i) z.p(i) = normal_(rng_) / std::sqrt(inv_metric(i));
  }

  void leapfrog(Point& z, double eps) const {
    if (z.lp == -kInf) return;
    z.p += 0.5 * eps * z.g;
    z.q += eps * (inv_metric.array() * z.p.array()).matrix();
    evaluate(z);
    if (z.lp == -kInf) return;
    z.p += 0.5 * eps * z.g;
  }

  double uniform() { return uniform01(rng_); }

  struct Stats {
    double accept = 0.0;
    int depth = 0;
    bool divergent = false;
  };

  Stats transition(Point& current) {
    sample_momentum(current);
    divergent_ = false;
    Point z_fwd = current, z_bck = current, z_sample = current, z_propose = current;
    Eigen::VectorXd p_sharp = (inv_metric.array() * current.p.array()).matrix();
    Eigen::VectorXd p_sharp_fwd_fwd = p_sharp, p_sharp_fwd_bck = p_sharp, p_sharp_bck_fwd = p_sharp,
                    p_sharp_bck_bck = p_sharp;
    Eigen::VectorXd p_fwd_fwd = current.p, p_fwd_bck = current.p, p_bck_fwd = current.p, p_bck_bck = current.p;
    Eigen::VectorXd rho = current.p;
    double log_sum_weight = 0.0;
    const double h0 = hamiltonian(current);
    int n_leapfrog = 0;
    double sum_metro = 0.0;
    int depth = 0;
    const auto n = current.q.size();

    while (depth < max_depth_) {
      Eigen::VectorXd rho_fwd = Eigen::VectorXd::Zero(n), rho_bck = Eigen::VectorXd::Zero(n);
      bool valid = false;
      double lsw_subtree = -kInf;
      if (uniform() > 0.5) {
        rho_bck = rho;
        p_bck_fwd = p_fwd_bck;
        p_sharp_bck_fwd = p_sharp_fwd_bck;
        valid = build_tree(depth, z_fwd, z_propose, p_sharp_fwd_bck, p_sharp_fwd_fwd, rho_fwd, p_fwd_bck,
                           p_fwd_fwd, h0, 1.0, n_leapfrog, lsw_subtree, sum_metro);
      } else {
        rho_fwd = rho;
        p_fwd_bck = p_bck_fwd;
        p_sharp_fwd_bck = p_sharp_bck_fwd;
        valid = build_tree(depth, z_bck, z_propose, p_sharp_bck_fwd, p_sharp_bck_bck, rho_bck, p_bck_fwd,
                           p_bck_bck, h0, -1.0, n_leapfrog, lsw_subtree, sum_metro);
      }
      if (!valid) break;
      ++depth;
      if (lsw_subtree > log_sum_weight) {
        z_sample = z_propose;
      } else if (uniform() < std::exp(lsw_subtree - log_sum_weight)) {
        z_sample = z_propose;
      }
      log_sum_weight = log_sum_exp(log_sum_weight, lsw_subtree);
      rho = rho_bck + rho_fwd;
      bool persist = criterion(p_sharp_bck_bck, p_sharp_fwd_fwd, rho);
      persist = persist && criterion(p_sharp_bck_bck, p_sharp_fwd_bck, rho_bck + p_fwd_bck);
      persist = persist && criterion(p_sharp_bck_fwd, p_sharp_fwd_fwd, rho_fwd + p_bck_fwd);
      if (!persist) break;
    }
    current = z_sample;
    Stats s;
    s.accept = n_leapfrog > 0 ? sum_metro / n_leapfrog : 0.0;
    s.depth = depth;
    s.divergent = divergent_;
    return s;
  }

  /// Stan's step-size initialization heuristic.
  void init_stepsize(const Point& start) {
    Point z = start;
    sample_momentum(z);
    double h0 = hamiltonian(z);
    leapfrog(z, epsilon);
    double delta_h = h0 - hamiltonian(z);
    if (std::isnan(delta_h)) delta_h = -kInf;
    const int direction = delta_h > std::log(0.8) ? 1 : -1;
    for (int iter = 0; iter < 100; ++iter) {
      z = start;
      sample_momentum(z);
      h0 = hamiltonian(z);
      leapfrog(z, epsilon);
      delta_h = h0 - hamiltonian(z);
      if (std::isnan(delta_h)) delta_h = -kInf;
      if (direction == 1 && !(delta_h > std::log(0.8))) break;
      if (direction == -1 && !(delta_h < std::log(0.8))) break;
      epsilon = direction == 1 ? 2.0 * epsilon : 0.5 * epsilon;
      if (epsilon > 1e7 || epsilon < 1e-12) throw Error("hmc", "step size initialization failed");
    }
  }

 private:
  static bool criterion(const Eigen::VectorXd& p_sharp_minus, const Eigen::VectorXd& p_sharp_plus,
                        const Eigen::VectorXd& rho) {
    return p_sharp_plus.dot(rho) > 0.0 && p_sharp_minus.dot(rho) > 0.0;
  }

  bool build_tree(int depth, Point& z, Point& z_propose, Eigen::VectorXd& p_sharp_beg,
                  Eigen::VectorXd& p_sharp_end, Eigen::VectorXd& rho, Eigen::VectorXd& p_beg,
                  Eigen::VectorXd& p_end, double h0, double sign, int& n_leapfrog,
                  double& log_sum_weight, double& sum_metro) {
    if (depth == 0) {
      leapfrog(z, sign * epsilon);
      ++n_leapfrog;
      double h = hamiltonian(z);
      if (std::isnan(h)) h = kInf;
      if (h - h0 > 1000.0) divergent_ = true;
      log_sum_weight = log_sum_exp(log_sum_weight, h0 - h);
      sum_metro += h0 - h > 0.0 ? 1.0 : std::exp(h0 - h);
      z_propose = z;
      p_sharp_beg = (inv_metric.array() * z.p.array()).matrix();
      p_sharp_end = p_sharp_beg;
      rho += z.p;
      p_beg = z.p;
      p_end = p_beg;
      return !divergent_;
    }
    const auto n = z.q.size();
    Eigen::VectorXd rho_init = Eigen::VectorXd::Zero(n), p_init_end(n), p_sharp_init_end(n);
    double lsw_init = -kInf;
    if (!build_tree(depth - 1, z, z_propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg, p_init_end,
                    h0, sign, n_leapfrog, lsw_init, sum_metro))
      return false;
    Point z_propose_final = z;
    Eigen::VectorXd rho_final = Eigen::VectorXd::Zero(n), p_final_beg(n), p_sharp_final_beg(n);
    double lsw_final = -kInf;
    if (!build_tree(depth - 1, z, z_propose_final, p_sharp_final_beg, p_sharp_end, rho_final, p_final_beg,
                    p_end, h0, sign, n_leapfrog, lsw_final, sum_metro))
      return false;
    const double lsw_subtree = log_sum_exp(lsw_init, lsw_final);
    log_sum_weight = log_sum_exp(log_sum_weight, lsw_subtree);
    if (lsw_final > lsw_subtree) {
      z_propose = z_propose_final;
    } else if (uniform() < std::exp(lsw_final - lsw_subtree)) {
      z_propose = z_propose_final;
    }
    const Eigen::VectorXd rho_subtree = rho_init + rho_final;
    rho += rho_subtree;
    bool persist = criterion(p_sharp_beg, p_sharp_end, rho_subtree);
    persist = persist && criterion(p_sharp_beg, p_sharp_final_beg, rho_init + p_final_beg);
    persist = persist && criterion(p_sharp_init_end, p_sharp_end, rho_final + p_init_end);
    return persist;
  }

  const ModelData& d_;
  Rng& rng_;
  int max_depth_;
  bool divergent_ = false;
  std::normal_distribution<double> normal_;
};

struct DualAveraging {
  double mu = 0.0, s_bar = 0.0, x_bar = 0.0, delta = 0.8;
  int counter = 0;
  static constexpr double gamma = 0.05, t0 = 10.0, kappa = 0.75;

  void restart(double eps) {
    mu = std::log(10.0 * eps);
    s_bar = x_bar = 0.0;
    counter = 0;
  }
  double learn(double accept) {
    ++counter;
    accept = std::min(1.0, accept);
    const double eta = 1.0 / (counter + t0);
    s_bar = (1.0 - eta) * s_bar + eta * (delta - accept);
    const double x = mu - s_bar * std::sqrt(static_cast<double>(counter)) / gamma;
    const double x_eta = std::pow(static_cast<double>(counter), -kappa);
    x_bar = x_eta * x + (1.0 - x_eta) * x_bar;
    return std::exp(x);
  }
  double final_step() const { return std::exp(x_bar); }
};

/// Warmup layout: initial fast buffer, slow windows that double in length
/// (the last one stretched to the terminal buffer), terminal fast buffer.
struct Windows {
  int init = 0;
  std::vector<int> ends;
};

Windows adaptation_windows(int warmup) {
  int init = 75, term = 50, base = 25;
  if (init + term + base > warmup) {
    init = static_cast<int>(0.15 * warmup);
    term = static_cast<int>(0.1 * warmup);
    base = warmup - init - term;
  }
  Windows w;
  w.init = init;
  const int slow_end = warmup - term;
  int start = init, size = base;
  while (start < slow_end) {
    int end = start + size;
    if (end + 2 * size > slow_end) end = slow_end;
    w.ends.push_back(end);
    start = end;
    size *= 2;
  }
  return w;
}

struct ChainResult {
  Eigen::MatrixXd draws;
  int divergences = 0;
  double step = 0.0, accept = 0.0, depth = 0.0;
};

ChainResult run_chain(const ModelData& d, const HmcOptions& o, int chain) {
  Rng rng(derive_seed(o.seed, "chain", static_cast<std::uint64_t>(chain)));
  Nuts nuts(d, rng, o.max_treedepth);
  const int n = ParamLayout(d).size();
  nuts.inv_metric = Eigen::VectorXd::Ones(n);

  Point z;
  z.q.resize(n);
  std::uniform_real_distribution<double> init(-o.init_radius, o.init_radius);
  for (int attempt = 0; attempt < 100; ++attempt) {
    for (int i = 0; i < n; ++i) z.q(i) = init(rng);
    nuts.evaluate(z);
    if (z.lp != -kInf) break;
  }
  if (z.lp == -kInf) throw Error("hmc", "no finite initial value found");

  nuts.epsilon = 1.0;
  nuts.init_stepsize(z);
  DualAveraging da;
  da.delta = o.target_accept;
  da.restart(nuts.epsilon);

  // Welford accumulator for the current slow window.
  const auto windows = adaptation_windows(o.warmup);
  const auto& ends = windows.ends;
  int window_start = windows.init;
  std::size_t next_end = 0;
  Eigen::VectorXd w_mean = Eigen::VectorXd::Zero(n), w_m2 = Eigen::VectorXd::Zero(n);
  int w_count = 0;

  ChainResult out;
  out.draws.resize(o.draws, n);
  for (int it = 0; it < o.warmup + o.draws; ++it) {
    const auto s = nuts.transition(z);
    if (it < o.warmup) {
      nuts.epsilon = da.learn(s.accept);
      if (it >= window_start && next_end < ends.size() && it < ends[next_end]) {
        ++w_count;
        const Eigen::VectorXd delta = z.q - w_mean;
        w_mean += delta / w_count;
        w_m2 += (delta.array() * (z.q - w_mean).array()).matrix();
      }
      if (next_end < ends.size() && it + 1 == ends[next_end]) {
        const double c = w_count;
        Eigen::VectorXd var = w_m2 / std::max(1.0, c - 1.0);
        nuts.inv_metric = ((c / (c + 5.0)) * var.array() + 1e-3 * (5.0 / (c + 5.0))).matrix();
        w_mean.setZero();
        w_m2.setZero();
        w_count = 0;
        window_start = ends[next_end];
        ++next_end;
        nuts.init_stepsize(z);
        da.restart(nuts.epsilon);
      }
      if (it + 1 == o.warmup) nuts.epsilon = da.final_step();
      continue;
    }
    const int k = it - o.warmup;
    out.draws.row(k) = constrained_vector(d, unpack(d, z.q)).transpose();
    out.divergences += s.divergent ? 1 : 0;
    out.accept += s.accept;
    out.depth += s.depth;
  }
  if (o.draws > 0) {
    out.accept /= o.draws;
    out.depth /= o.draws;
  }
  out.step = nuts.epsilon;
  return out;
}

/// L-BFGS refinement whose line search uses only directional derivatives.
/// Near the mode the log posterior changes by less than its rounding error,
/// so value-based line searches stall well before the gradient vanishes.
using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

int polish(const GradFn& neg_grad, Eigen::VectorXd& x, double tol, int max_iter) {
  const int memory = 20;
  std::vector<Eigen::VectorXd> s_hist, y_hist;
  std::vector<double> rho_hist;
  Eigen::VectorXd g = neg_grad(x);
  int it = 0;
  for (; it < max_iter && g.norm() > tol; ++it) {
    Eigen::VectorXd q = g;
    std::vector<double> alpha(s_hist.size());
    for (int k = static_cast<int>(s_hist.size()) - 1; k >= 0; --k) {
      alpha[static_cast<std::size_t>(k)] = rho_hist[static_cast<std::size_t>(k)] * s_hist[static_cast<std::size_t>(k)].dot(q);
      q -= alpha[static_cast<std::size_t>(k)] * y_hist[static_cast<std::size_t>(k)];
    }
    if (!s_hist.empty()) q *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
    for (std::size_t k = 0; k < s_hist.size(); ++k) {
      const double beta = rho_hist[k] * y_hist[k].dot(q);
      q += (alpha[k] - beta) * s_hist[k];
    }
    Eigen::VectorXd dir = -q;
    double dphi0 = g.dot(dir);
    if (!(dphi0 < 0.0)) {
      dir = -g;
      dphi0 = -g.squaredNorm();
      s_hist.clear();
      y_hist.clear();
      rho_hist.clear();
    }
    // Bracket a sign change of phi'(t) = g(x + t dir) . dir, then refine by
    // regula falsi until the strong curvature condition holds.
    double lo = 0.0, dlo = dphi0, hi = 1.0;
    Eigen::VectorXd g_hi;
    double dhi = 0.0;
    bool ok = false;
    for (int k = 0; k < 30; ++k) {
      const Eigen::VectorXd xt = x + hi * dir;
      if (!xt.allFinite()) break;
      try {
        g_hi = neg_grad(xt);
      } catch (const Error&) {
        hi = 0.5 * (lo + hi);
        continue;
      }
      dhi = g_hi.dot(dir);
      if (!std::isfinite(dhi)) {
        hi = 0.5 * (lo + hi);
        continue;
      }
      if (std::abs(dhi) <= 0.1 * std::abs(dphi0)) {
        ok = true;
        break;
      }
      if (dhi < 0.0) {
        lo = hi;
        dlo = dhi;
        hi *= 2.0;
        continue;
      }
      ok = true;
      break;
    }
    if (!ok) break;
    double t = hi;
    Eigen::VectorXd g_new = g_hi;
    for (int k = 0; k < 30 && std::abs(dhi) > 0.1 * std::abs(dphi0); ++k) {
      t = lo - dlo * (hi - lo) / (dhi - dlo);
      if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
      g_new = neg_grad(x + t * dir);
      const double dt = g_new.dot(dir);
      if (std::abs(dt) <= 0.1 * std::abs(dphi0)) {
        dhi = dt;
        break;
      }
      if (dt < 0.0) {
        lo = t;
        dlo = dt;
      } else {
        hi = t;
        dhi = dt;
      }
    }
    const Eigen::VectorXd step = t * dir;
    const Eigen::VectorXd yv = g_new - g;
    x += step;
    g = g_new;
    const double sy = step.dot(yv);
    if (sy > 1e-300) {
      s_hist.push_back(step);
      y_hist.push_back(yv);
      rho_hist.push_back(1.0 / sy);
      if (static_cast<int>(s_hist.size()) > memory) {
        s_hist.erase(s_hist.begin());
        y_hist.erase(y_hist.begin());
        rho_hist.erase(rho_hist.begin());
      }
    }
  }
  return it;
}

GradFn neg_log_posterior_gradient(const ModelData& d) {
  return [&d](const Eigen::VectorXd& v) {
    Eigen::VectorXd g;
    log_posterior(d, v, &g);
    return Eigen::VectorXd(-g);
  };
}

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

// Newton ascent on one row's conditional log posterior, which is concave in
// theta. Returns the mode and writes the Hessian there.
Vec5 theta_mode(const ModelData& d, const ModelParams& p, int row, Vec5 theta, Mat5& hess, double tol) {
  Vec5 g;
  double lp = theta_log_posterior(d, p, row, theta, &g, &hess);
  for (int it = 0; it < 100 && g.norm() > tol; ++it) {
    const Vec5 step = hess.ldlt().solve(-g);
    double t = 1.0;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      const Vec5 cand = theta + t * step;
      const double lc = theta_log_posterior(d, p, row, cand);
      if (lc >= lp - 1e-12 * std::abs(lp)) {
        theta = cand;
        break;
      }
    }
    lp = theta_log_posterior(d, p, row, theta, &g, &hess);
    if (t < 1e-10) break;
  }
  return theta;
}

MapResult fit_marginal(const ModelData& d, const MapOptions& opts) {
  const ParamLayout L(d);
  const int n = L.rows, S = std::max(1, opts.marginal_draws), B = item_block_size(d);
  Eigen::VectorXd xi = default_start(d).tail(B);

  // Fixed standard-normal draws per row, reused across iterations.
  std::vector<Eigen::MatrixXd> z(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng(derive_seed(opts.seed, "em-draws", static_cast<std::uint64_t>(i)));
    std::normal_distribution<double> nd;
    auto& zi = z[static_cast<std::size_t>(i)];
    zi.resize(S, 5);
    for (int s = 0; s < S; ++s)
      for (int t = 0; t < 5; ++t) zi(s, t) = nd(rng);
  }

  Eigen::MatrixXd modes = Eigen::MatrixXd::Zero(n, 5);
  Eigen::MatrixXd pseudo(static_cast<Eigen::Index>(n) * S, 5);
  Eigen::VectorXd weight(static_cast<Eigen::Index>(n) * S);
  std::vector<int> source(static_cast<std::size_t>(n) * static_cast<std::size_t>(S));
  for (int i = 0; i < n; ++i)
    for (int s = 0; s < S; ++s) source[static_cast<std::size_t>(i * S + s)] = i;

  MapResult out;
  int em = 0;
  bool em_converged = false;
  for (; em < opts.em_iterations; ++em) {
    const ModelParams p = unpack_item_block(d, xi);
    // E step: importance draws from a widened Laplace approximation per row.
    for (int i = 0; i < n; ++i) {
      Mat5 h;
      const Vec5 m = theta_mode(d, p, i, modes.row(i).transpose(), h, 1e-8);
      modes.row(i) = m.transpose();
      const Eigen::LLT<Mat5> llt(-h);
      const Mat5 chol_cov = llt.matrixL().solve(Mat5::Identity()).transpose() * opts.proposal_scale;
      std::vector<double> lw(static_cast<std::size_t>(S));
      for (int s = 0; s < S; ++s) {
        const Vec5 zs = z[static_cast<std::size_t>(i)].row(s).transpose();
        const Vec5 th = m + chol_cov * zs;
        pseudo.row(i * S + s) = th.transpose();
        lw[static_cast<std::size_t>(s)] = theta_log_posterior(d, p, i, th) + 0.5 * zs.squaredNorm();
      }
      const double mx = *std::max_element(lw.begin(), lw.end());
      double sum = 0.0;
      for (double& v : lw) sum += (v = std::exp(v - mx));
      for (int s = 0; s < S; ++s) weight(i * S + s) = lw[static_cast<std::size_t>(s)] / sum;
    }
    // M step: item parameters against the weighted draws.
    Eigen::VectorXd next = xi;
    polish(
        [&](const Eigen::VectorXd& v) {
          Eigen::VectorXd g;
          item_log_posterior(d, pseudo, source, weight, v, &g);
          return Eigen::VectorXd(-g);
        },
        next, 1e-6, opts.m_step_iterations);
    const double change = (next - xi).cwiseAbs().maxCoeff();
    xi = next;
    if (change < opts.em_tolerance) {
      em_converged = true;
      ++em;
      break;
    }
  }

  // Theta: conditional posterior modes given the item estimates.
  const ModelParams p = unpack_item_block(d, xi);
  Eigen::VectorXd x(L.size());
  x.tail(B) = xi;
  for (int i = 0; i < n; ++i) {
    Mat5 h;
    const Vec5 m = theta_mode(d, p, i, modes.row(i).transpose(), h, opts.gradient_tolerance / std::sqrt(n));
    for (int t = 0; t < 5; ++t) x(L.theta(i, t)) = m(t);
  }
  Eigen::VectorXd g;
  out.x = x;
  out.log_posterior = log_posterior(d, x, &g);
  out.gradient_norm = g.head(5 * n).norm();
  out.converged = em_converged && out.gradient_norm <= opts.gradient_tolerance;
  out.iterations = em;
  out.message = em_converged ? "marginal EM converged" : "marginal EM iteration limit reached";
  out.params = unpack(d, x);
  return out;
}

}  // namespace

std::string to_string(ItemEstimation e) { return e == ItemEstimation::Joint ? "joint" : "marginal"; }

ItemEstimation item_estimation_from_string(const std::string& s) {
  if (s == "joint") return ItemEstimation::Joint;
  if (s == "marginal") return ItemEstimation::Marginal;
  throw Error("config", "unknown item estimation '" + s + "'");
}

Eigen::VectorXd default_start(const ModelData& d) {
  const ParamLayout L(d);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(L.size());
  for (int c = 0; c < L.columns; ++c) {
    x(L.cut(c, 0)) = -2.0;
    for (int m = 1; m < 6; ++m) x(L.cut(c, m)) = std::log(0.8);
  }
  return x;
}

MapResult fit_map(const ModelData& d, const MapOptions& opts) {
  if (d.n_rows() == 0) throw Error("empty_data", "no complete response rows to fit");
  if (opts.items == ItemEstimation::Marginal) return fit_marginal(d, opts);
  ceres::GradientProblemSolver::Options co;
  co.line_search_direction_type = ceres::LBFGS;
  co.line_search_type = ceres::WOLFE;
  co.max_num_iterations = opts.max_iterations;
  co.gradient_tolerance = opts.gradient_tolerance;
  co.function_tolerance = 1e-16;
  co.parameter_tolerance = 1e-16;
  co.logging_type = ceres::SILENT;
  co.minimizer_progress_to_stdout = false;

  MapResult best;
  best.log_posterior = -kInf;
  for (int s = 0; s < std::max(1, opts.starts); ++s) {
    Eigen::VectorXd x;
    if (s == 0) {
      x = default_start(d);
    } else {
      Rng rng(derive_seed(opts.seed, "map-start", static_cast<std::uint64_t>(s)));
      x = random_start(d, rng);
    }
    ceres::GradientProblem problem(new NegLogPosterior(d));
    ceres::GradientProblemSolver::Summary summary;
    ceres::Solve(co, problem, x.data(), &summary);
    int iterations = static_cast<int>(summary.iterations.size());
    const std::string message = summary.message;
    iterations += polish(neg_log_posterior_gradient(d), x, opts.gradient_tolerance, opts.max_iterations);
    Eigen::VectorXd g;
    const double lp = log_posterior(d, x, &g);
    if (lp > best.log_posterior) {
      best.x = x;
      best.log_posterior = lp;
      best.gradient_norm = g.norm();
      best.converged = g.norm() <= opts.gradient_tolerance;
      best.iterations = iterations;
      best.best_start = s;
      best.message = message;
    }
  }
  best.params = unpack(d, best.x);
  return best;
}

int Posterior::total_draws() const {
  int n = 0;
  for (const auto& m : draws) n += static_cast<int>(m.rows());
  return n;
}

int Posterior::total_divergences() const {
  int n = 0;
  for (int v : divergences) n += v;
  return n;
}

Posterior fit_hmc(const ModelData& d, const HmcOptions& opts) {
  if (d.n_rows() == 0) throw Error("empty_data", "no complete response rows to fit");
  if (opts.chains < 1 || opts.draws < 1) throw Error("config", "need at least one chain and one draw");
  std::vector<ChainResult> results(static_cast<std::size_t>(opts.chains));
  std::vector<std::exception_ptr> errors(results.size());
  int threads = opts.threads > 0 ? opts.threads
                                 : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, opts.chains);
  auto work = [&](int c) {
    try {
      results[static_cast<std::size_t>(c)] = run_chain(d, opts, c);
    } catch (...) {
      errors[static_cast<std::size_t>(c)] = std::current_exception();
    }
  };
  if (threads <= 1) {
    for (int c = 0; c < opts.chains; ++c) work(c);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (int c = next++; c < opts.chains; c = next++) work(c);
      });
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  Posterior post;
  post.param_names = param_names(d);
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(ParamLayout(d).size());
  for (auto& r : results) {
    sum += r.draws.colwise().sum().transpose();
    post.divergences.push_back(r.divergences);
    post.step_size.push_back(r.step);
    post.mean_accept.push_back(r.accept);
    post.mean_treedepth.push_back(r.depth);
    post.draws.push_back(std::move(r.draws));
  }
  const Eigen::VectorXd mean = sum / post.total_draws();
  post.mean_params = params_from_constrained(d, mean);
  post.theta_mean = post.mean_params.theta;
  return post;
}

DiagnosticsSummary summarize_diagnostics(const Posterior& post) {
  DiagnosticsSummary s;
  s.params = diagnostics(post.draws);
  int below = 0;
  s.min_ess_bulk = kInf;
  for (const auto& p : s.params) {
    s.max_rhat = std::max(s.max_rhat, p.rhat);
    below += p.rhat < 1.01 ? 1 : 0;
    s.min_ess_bulk = std::min(s.min_ess_bulk, p.ess_bulk);
  }
  s.share_rhat_below = s.params.empty() ? 0.0 : static_cast<double>(below) / static_cast<double>(s.params.size());
  s.divergence_rate = post.total_draws() > 0 ? static_cast<double>(post.total_divergences()) / post.total_draws() : 0.0;
  s.passes_gate = s.share_rhat_below >= 0.99 && s.divergence_rate <= 0.10;
  return s;
}

namespace {

FitArtifact base_artifact(const ModelData& d, const ModelParams& p) {
  FitArtifact a;
  a.model = d.kind;
  a.rows = d.rows;
  a.theta = p.theta;
  a.item_ids = d.item_ids;
  a.a_plus = p.a_plus;
  a.column_ids = d.column_ids;
  a.kappa = p.kappa;
  return a;
}

}  // namespace

FitArtifact make_artifact(const ModelData& d, const MapResult& r) {
  auto a = base_artifact(d, r.params);
  a.backend = "map";
  a.diagnostics = {{"estimate", "posterior mode"},
                   {"log_posterior", r.log_posterior},
                   {"gradient_norm", r.gradient_norm},
                   {"converged", r.converged},
                   {"iterations", r.iterations},
                   {"best_start", r.best_start},
                   {"excluded_incomplete", d.excluded_incomplete}};
  return a;
}

FitArtifact make_artifact(const ModelData& d, const Posterior& p, const DiagnosticsSummary& s) {
  auto a = base_artifact(d, p.mean_params);
  a.backend = "hmc";
  a.diagnostics = {{"estimate", "posterior mean"},
                   {"chains", p.draws.size()},
                   {"draws_per_chain", p.draws.empty() ? 0 : p.draws.front().rows()},
                   {"max_rhat", s.max_rhat},
                   {"share_rhat_below_1_01", s.share_rhat_below},
                   {"min_ess_bulk", s.min_ess_bulk},
                   {"divergence_rate", s.divergence_rate},
                   {"step_size", p.step_size},
                   {"mean_accept", p.mean_accept},
                   {"passes_gate", s.passes_gate},
                   {"excluded_incomplete", d.excluded_incomplete}};
  return a;
}

json to_json(const FitArtifact& a) {
  json rows = json::array();
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    json theta = json::object();
    for (auto t : kAllTraits) theta[std::string(1, trait_letter(t))] = a.theta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(index_of(t)));
    rows.push_back({{"respondent", a.rows[i].respondent},
                    {"persona", a.rows[i].persona},
                    {"condition", to_string(a.rows[i].condition)},
                    {"theta", theta}});
  }
  json items = json::array();
  for (std::size_t j = 0; j < a.item_ids.size(); ++j)
    items.push_back({{"id", a.item_ids[j]}, {"a_plus", a.a_plus(static_cast<Eigen::Index>(j))}});
  json cols = json::array();
  for (std::size_t c = 0; c < a.column_ids.size(); ++c) cols.push_back({{"id", a.column_ids[c]}, {"kappa", a.kappa[c]}});
  return {{"model", to_string(a.model)}, {"backend", a.backend}, {"theta", rows},
          {"items", items},             {"columns", cols},       {"diagnostics", a.diagnostics}};
}

FitArtifact artifact_from_json(const json& j) {
  FitArtifact a;
  try {
    a.model = j.at("model").get<std::string>() == "grm" ? ModelKind::Grm : ModelKind::Gfc;
    a.backend = j.at("backend").get<std::string>();
    const auto& rows = j.at("theta");
    a.theta.resize(static_cast<Eigen::Index>(rows.size()), 5);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      a.rows.push_back({r.at("respondent").get<std::string>(), r.at("persona").get<std::string>(),
                        parse_condition(r.at("condition").get<std::string>())});
      for (auto t : kAllTraits)
        a.theta(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(index_of(t))) =
            r.at("theta").at(std::string(1, trait_letter(t))).get<double>();
    }
    const auto& items = j.at("items");
    a.a_plus.resize(static_cast<Eigen::Index>(items.size()));
    Eigen::Index k = 0;
    for (const auto& v : items) {
      a.item_ids.push_back(v.at("id").get<std::string>());
      a.a_plus(k++) = v.at("a_plus").get<double>();
    }
    for (const auto& v : j.at("columns")) {
      a.column_ids.push_back(v.at("id").get<std::string>());
      a.kappa.push_back(v.at("kappa").get<Thresholds>());
    }
    a.diagnostics = j.value("diagnostics", json::object());
  } catch (const json::exception& e) {
    throw Error("parse", std::string("malformed fit artifact: ") + e.what());
  }
  return a;
}

void save_artifact(const FitArtifact& a, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write " + path.string());
  out << to_json(a).dump(2) << '\n';
}

FitArtifact load_artifact(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open fit artifact " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error("parse", path.string() + ": " + e.what());
  }
  return artifact_from_json(j);
}

}  // namespace sdrkit
