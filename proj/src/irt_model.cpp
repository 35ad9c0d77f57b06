#include "sdrkit/irt_model.hpp"

#include <cmath>
#include <map>

#include "sdrkit/error.hpp"

namespace sdrkit {

namespace {
const double kInvSqrt2 = 1.0 / std::sqrt(2.0);
}

std::string to_string(ModelKind k) { return k == ModelKind::Grm ? "grm" : "gfc"; }
ModelKind model_for(Format f) { return f == Format::Likert ? ModelKind::Grm : ModelKind::Gfc; }

ModelData build_model_data(ModelKind kind, const std::vector<ResponseSet>& sets,
                           const Inventory& inv, const ItemPool& pool) {
  ModelData d;
  d.kind = kind;
  const Format format = kind == ModelKind::Grm ? Format::Likert : Format::Gfc;
  std::map<std::string, int> item_index;
  for (const auto& id : inv.statements()) {
    const auto& item = pool.at(id);
    item_index[id] = d.n_items();
    d.item_ids.push_back(id);
    d.item_trait.push_back(item.domain);
    d.item_keying.push_back(item.keying);
  }
  d.column_ids = administered_units(inv, format);
  if (kind == ModelKind::Gfc)
    for (const auto& b : inv.blocks()) d.block_items.emplace_back(item_index.at(b.left), item_index.at(b.right));

  std::vector<const ResponseSet*> used;
  for (const auto& rs : sets) {
    if (rs.format != format) continue;
    if (!rs.complete) {
      ++d.excluded_incomplete;
      continue;
    }
    check_response_set(rs, inv);
    used.push_back(&rs);
  }
  d.y.resize(static_cast<Eigen::Index>(used.size()), d.n_columns());
  for (std::size_t i = 0; i < used.size(); ++i) {
    d.rows.push_back({used[i]->respondent_id, used[i]->persona_id, used[i]->condition});
    for (int j = 0; j < d.n_columns(); ++j)
      d.y(static_cast<Eigen::Index>(i), j) = used[i]->canonical_answer(d.column_ids[static_cast<std::size_t>(j)]);
  }
  return d;
}

ModelParams unpack(const ModelData& d, const Eigen::VectorXd& x) {
  const ParamLayout L(d);
  if (x.size() != L.size()) throw Error("dimension", "parameter vector has the wrong length");
  ModelParams p;
  p.theta.resize(L.rows, 5);
  for (int i = 0; i < L.rows; ++i)
    for (int t = 0; t < 5; ++t) p.theta(i, t) = x(L.theta(i, t));
  p.a_plus.resize(L.items);
  for (int j = 0; j < L.items; ++j) p.a_plus(j) = std::exp(x(L.log_a(j)));
  p.kappa.resize(static_cast<std::size_t>(L.columns));
  for (int c = 0; c < L.columns; ++c) {
    auto& k = p.kappa[static_cast<std::size_t>(c)];
    k[0] = x(L.cut(c, 0));
    for (int m = 1; m < 6; ++m) k[static_cast<std::size_t>(m)] = k[static_cast<std::size_t>(m - 1)] + std::exp(x(L.cut(c, m)));
  }
  return p;
}

Eigen::VectorXd pack(const ModelData& d, const ModelParams& p) {
  const ParamLayout L(d);
  Eigen::VectorXd x(L.size());
  for (int i = 0; i < L.rows; ++i)
    for (int t = 0; t < 5; ++t) x(L.theta(i, t)) = p.theta(i, t);
  for (int j = 0; j < L.items; ++j) {
    if (!(p.a_plus(j) > 0.0)) throw Error("params", "a_plus must be positive");
    x(L.log_a(j)) = std::log(p.a_plus(j));
  }
  for (int c = 0; c < L.columns; ++c) {
    const auto& k = p.kappa[static_cast<std::size_t>(c)];
    check_thresholds(k);
    x(L.cut(c, 0)) = k[0];
    for (int m = 1; m < 6; ++m) x(L.cut(c, m)) = std::log(k[static_cast<std::size_t>(m)] - k[static_cast<std::size_t>(m - 1)]);
  }
  return x;
}

double model_eta(const ModelData& d, const ModelParams& p, int row, int column) {
  auto mu = [&](int item) {
    return d.item_keying[static_cast<std::size_t>(item)] * p.a_plus(item) *
           p.theta(row, static_cast<int>(index_of(d.item_trait[static_cast<std::size_t>(item)])));
  };
  if (d.kind == ModelKind::Grm) return mu(column);
  const auto [l, r] = d.block_items[static_cast<std::size_t>(column)];
  return (mu(r) - mu(l)) * kInvSqrt2;
}

double log_likelihood(const ModelData& d, const ModelParams& p) {
  double ll = 0.0;
  for (int i = 0; i < d.n_rows(); ++i)
    for (int j = 0; j < d.n_columns(); ++j)
      ll += ordinal_log_prob(model_eta(d, p, i, j), p.kappa[static_cast<std::size_t>(j)], d.y(i, j)).log_prob;
  return ll;
}

namespace {

using Dk = std::vector<std::array<double, 6>>;

int trait_col(const ModelData& d, int item) {
  return static_cast<int>(index_of(d.item_trait[static_cast<std::size_t>(item)]));
}

double eta_at(const ModelData& d, const Eigen::VectorXd& a_plus, const double* theta, int column) {
  auto mu = [&](int item) {
    return d.item_keying[static_cast<std::size_t>(item)] * a_plus(item) * theta[trait_col(d, item)];
  };
  if (d.kind == ModelKind::Grm) return mu(column);
  const auto [l, r] = d.block_items[static_cast<std::size_t>(column)];
  return (mu(r) - mu(l)) * kInvSqrt2;
}

// Adds w * log p(y_row | theta) over all columns. When d_a is non-null the
// derivatives w.r.t. a_plus and kappa are accumulated into d_a and dk; when
// d_theta is non-null the 5 theta derivatives are accumulated there.
double add_row(const ModelData& d, const ModelParams& p, int row, const double* theta, double w,
               Eigen::VectorXd* d_a, Dk* dk, double* d_theta) {
  const double c = d.kind == ModelKind::Gfc ? kInvSqrt2 : 1.0;
  double lp = 0.0;
  for (int j = 0; j < d.n_columns(); ++j) {
    const auto& kappa = p.kappa[static_cast<std::size_t>(j)];
    const int y = d.y(row, j);
    const auto term = ordinal_log_prob(eta_at(d, p.a_plus, theta, j), kappa, y);
    lp += w * term.log_prob;
    if (d_a) {
      auto& dkj = (*dk)[static_cast<std::size_t>(j)];
      if (y > 1) dkj[static_cast<std::size_t>(y - 2)] += w * term.d_lower;
      if (y < 7) dkj[static_cast<std::size_t>(y - 1)] += w * term.d_upper;
    }
    auto add_item = [&](int item, double sign) {
      const int t = trait_col(d, item);
      const double g = d.item_keying[static_cast<std::size_t>(item)];
      const double v = w * sign * c * term.d_eta * g;
      if (d_theta) d_theta[t] += v * p.a_plus(item);
      if (d_a) (*d_a)(item) += v * theta[t];
    };
    if (d.kind == ModelKind::Grm) {
      add_item(j, 1.0);
    } else {
      const auto [l, r] = d.block_items[static_cast<std::size_t>(j)];
      add_item(r, 1.0);
      add_item(l, -1.0);
    }
  }
  return lp;
}

// Priors and log-Jacobians of the item block `xi` (log a_plus per item, then
// per column the first cutpoint and 5 log-gaps). Converts the likelihood
// derivatives d_a, dk into the gradient w.r.t. xi when `g` is non-null.
double add_item_prior(const ModelData& d, const ModelParams& p, const double* xi,
                      const Eigen::VectorXd& d_a, Dk& dk, double* g) {
  const int items = d.n_items();
  double lp = 0.0;
  // a_plus ~ half-Normal(0, s), a = exp(u): log p = -a^2 / (2 s^2) + u
  const double inv_var_a = 1.0 / (kDiscriminationPriorSd * kDiscriminationPriorSd);
  for (int j = 0; j < items; ++j) {
    const double a = p.a_plus(j);
    lp += -0.5 * a * a * inv_var_a + xi[j];
    if (g) g[j] = (d_a(j) - a * inv_var_a) * a + 1.0;
  }
  // kappa_k ~ N(0, s); kappa_1 = u0, kappa_k = kappa_{k-1} + exp(v_{k-1})
  const double inv_var_k = 1.0 / (kThresholdPriorSd * kThresholdPriorSd);
  for (int col = 0; col < d.n_columns(); ++col) {
    const auto& kappa = p.kappa[static_cast<std::size_t>(col)];
    auto& dkj = dk[static_cast<std::size_t>(col)];
    const double* v = xi + items + 6 * col;
    for (int m = 0; m < 6; ++m) {
      lp -= 0.5 * kappa[static_cast<std::size_t>(m)] * kappa[static_cast<std::size_t>(m)] * inv_var_k;
      dkj[static_cast<std::size_t>(m)] -= kappa[static_cast<std::size_t>(m)] * inv_var_k;
    }
    for (int m = 1; m < 6; ++m) lp += v[m];
    if (!g) continue;
    double* gv = g + items + 6 * col;
    double tail = 0.0;  // sum of d/d kappa_k for k >= m
    for (int m = 5; m >= 0; --m) {
      tail += dkj[static_cast<std::size_t>(m)];
      gv[m] = m == 0 ? tail : tail * std::exp(v[m]) + 1.0;
    }
  }
  return lp;
}

void unpack_items(const ModelData& d, const double* xi, ModelParams& p) {
  const int items = d.n_items();
  p.a_plus.resize(items);
  for (int j = 0; j < items; ++j) p.a_plus(j) = std::exp(xi[j]);
  p.kappa.resize(static_cast<std::size_t>(d.n_columns()));
  for (int c = 0; c < d.n_columns(); ++c) {
    auto& k = p.kappa[static_cast<std::size_t>(c)];
    const double* v = xi + items + 6 * c;
    k[0] = v[0];
    for (int m = 1; m < 6; ++m) k[static_cast<std::size_t>(m)] = k[static_cast<std::size_t>(m - 1)] + std::exp(v[m]);
  }
}

}  // namespace

double log_posterior(const ModelData& d, const Eigen::VectorXd& x, Eigen::VectorXd* grad) {
  const ParamLayout L(d);
  if (x.size() != L.size()) throw Error("dimension", "parameter vector has the wrong length");
  if (!x.allFinite()) throw Error("non_finite", "non-finite parameter");
  const ModelParams p = unpack(d, x);
  if (grad) grad->setZero(L.size());

  double lp = 0.0;
  Dk dk(static_cast<std::size_t>(L.columns), std::array<double, 6>{});
  Eigen::VectorXd d_a = Eigen::VectorXd::Zero(L.items);
  for (int i = 0; i < L.rows; ++i) {
    const double theta[5] = {p.theta(i, 0), p.theta(i, 1), p.theta(i, 2), p.theta(i, 3), p.theta(i, 4)};
    lp += add_row(d, p, i, theta, 1.0, grad ? &d_a : nullptr, &dk, grad ? grad->data() + L.theta(i, 0) : nullptr);
    // theta ~ N(0, I)
    for (int t = 0; t < 5; ++t) {
      lp -= 0.5 * theta[t] * theta[t];
      if (grad) (*grad)(L.theta(i, t)) -= theta[t];
    }
  }
  lp += add_item_prior(d, p, x.data() + L.log_a(0), d_a, dk, grad ? grad->data() + L.log_a(0) : nullptr);
  return lp;
}

int item_block_size(const ModelData& d) { return d.n_items() + 6 * d.n_columns(); }

ModelParams unpack_item_block(const ModelData& d, const Eigen::VectorXd& xi) {
  if (xi.size() != item_block_size(d)) throw Error("dimension", "item vector has the wrong length");
  ModelParams p;
  unpack_items(d, xi.data(), p);
  return p;
}

double item_log_posterior(const ModelData& d, const Eigen::MatrixXd& theta, const std::vector<int>& source_row,
                          const Eigen::VectorXd& weight, const Eigen::VectorXd& xi, Eigen::VectorXd* grad) {
  if (xi.size() != item_block_size(d)) throw Error("dimension", "item vector has the wrong length");
  if (theta.cols() != 5 || theta.rows() != static_cast<Eigen::Index>(source_row.size()) ||
      weight.size() != theta.rows())
    throw Error("dimension", "pseudo-row inputs disagree in length");
  if (!xi.allFinite()) throw Error("non_finite", "non-finite parameter");
  ModelParams p;
  unpack_items(d, xi.data(), p);
  Dk dk(static_cast<std::size_t>(d.n_columns()), std::array<double, 6>{});
  Eigen::VectorXd d_a = Eigen::VectorXd::Zero(d.n_items());
  double lp = 0.0;
  for (Eigen::Index r = 0; r < theta.rows(); ++r) {
    if (weight(r) == 0.0) continue;
    const double th[5] = {theta(r, 0), theta(r, 1), theta(r, 2), theta(r, 3), theta(r, 4)};
    lp += add_row(d, p, source_row[static_cast<std::size_t>(r)], th, weight(r), grad ? &d_a : nullptr, &dk, nullptr);
  }
  if (grad) grad->resize(xi.size());
  lp += add_item_prior(d, p, xi.data(), d_a, dk, grad ? grad->data() : nullptr);
  return lp;
}

double theta_log_posterior(const ModelData& d, const ModelParams& p, int row, const Eigen::Matrix<double, 5, 1>& theta,
                           Eigen::Matrix<double, 5, 1>* grad, Eigen::Matrix<double, 5, 5>* hess) {
  const double c = d.kind == ModelKind::Gfc ? kInvSqrt2 : 1.0;
  double lp = -0.5 * theta.squaredNorm();
  if (grad) *grad = -theta;
  if (hess) *hess = -Eigen::Matrix<double, 5, 5>::Identity();
  for (int j = 0; j < d.n_columns(); ++j) {
    const auto term = ordinal_log_prob(eta_at(d, p.a_plus, theta.data(), j), p.kappa[static_cast<std::size_t>(j)], d.y(row, j));
    lp += term.log_prob;
    if (!grad && !hess) continue;
    Eigen::Matrix<double, 5, 1> deta = Eigen::Matrix<double, 5, 1>::Zero();
    auto add_item = [&](int item, double sign) {
      deta(trait_col(d, item)) += sign * c * d.item_keying[static_cast<std::size_t>(item)] * p.a_plus(item);
    };
    if (d.kind == ModelKind::Grm) {
      add_item(j, 1.0);
    } else {
      const auto [l, r] = d.block_items[static_cast<std::size_t>(j)];
      add_item(r, 1.0);
      add_item(l, -1.0);
    }
    if (grad) *grad += term.d_eta * deta;
    if (hess) *hess += term.d2_eta * deta * deta.transpose();
  }
  return lp;
}

}  // namespace sdrkit
