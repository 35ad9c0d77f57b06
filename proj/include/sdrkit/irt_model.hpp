#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "sdrkit/inventory.hpp"
#include "sdrkit/ordinal.hpp"

namespace sdrkit {

enum class ModelKind { Grm, Gfc };
std::string to_string(ModelKind k);
ModelKind model_for(Format f);

struct UnitKey {
  std::string respondent;
  std::string persona;
  Condition condition = Condition::Honest;
};

/// Complete response matrix for one model. For GRM the columns are items; for
/// GFC they are blocks, with answers in canonical (left, right) orientation.
struct ModelData {
  ModelKind kind = ModelKind::Grm;
  std::vector<std::string> item_ids;
  std::vector<Trait> item_trait;
  std::vector<int> item_keying;
  std::vector<std::string> column_ids;
  std::vector<std::pair<int, int>> block_items;  ///< GFC: (left, right) item indices
  std::vector<UnitKey> rows;
  Eigen::MatrixXi y;  ///< rows x columns, values 1..7
  int excluded_incomplete = 0;

  int n_rows() const { return static_cast<int>(rows.size()); }
  int n_items() const { return static_cast<int>(item_ids.size()); }
  int n_columns() const { return static_cast<int>(column_ids.size()); }
};

/// Builds the matrix for the format of `kind` from every complete response
/// set of that format; incomplete sets are counted and skipped.
ModelData build_model_data(ModelKind kind, const std::vector<ResponseSet>& sets,
                           const Inventory& inv, const ItemPool& pool);

/// Constrained parameters.
struct ModelParams {
  Eigen::MatrixXd theta;           ///< rows x 5
  Eigen::VectorXd a_plus;          ///< per item
  std::vector<Thresholds> kappa;   ///< per column
};

/// Unconstrained vector layout: theta (row-major, 5 per row), log a_plus per
/// item, then per column the first cutpoint followed by 5 log-gaps.
struct ParamLayout {
  int rows = 0, items = 0, columns = 0;
  explicit ParamLayout(const ModelData& d) : rows(d.n_rows()), items(d.n_items()), columns(d.n_columns()) {}
  int theta(int row, int trait) const { return 5 * row + trait; }
  int log_a(int item) const { return 5 * rows + item; }
  int cut(int column, int k) const { return 5 * rows + items + 6 * column + k; }
  int size() const { return 5 * rows + items + 6 * columns; }
};

ModelParams unpack(const ModelData& d, const Eigen::VectorXd& x);
Eigen::VectorXd pack(const ModelData& d, const ModelParams& p);

/// Linear predictor for row i and column j.
double model_eta(const ModelData& d, const ModelParams& p, int row, int column);

/// Sum of ordinal log-probabilities.
double log_likelihood(const ModelData& d, const ModelParams& p);

/// Log posterior in the unconstrained parameterization, up to an additive
/// constant: likelihood + theta ~ N(0, I) + a_plus ~ half-Normal(0, 0.5) +
/// each threshold ~ N(0, 1.5) + log-Jacobian of the transforms. Writes the
/// exact gradient when `grad` is non-null. Throws Error("non_finite") for
/// non-finite input.
double log_posterior(const ModelData& d, const Eigen::VectorXd& x, Eigen::VectorXd* grad = nullptr);

/// Length of the item block of the unconstrained vector: log a_plus per item,
/// then the cutpoint parameters per column (the tail of the full vector).
int item_block_size(const ModelData& d);
/// a_plus and kappa from an item block; theta is left empty.
ModelParams unpack_item_block(const ModelData& d, const Eigen::VectorXd& xi);

/// Weighted complete-data log posterior of the item block with theta held
/// fixed. Pseudo-row r uses theta.row(r), the answers of row source_row[r]
/// and weight(r); item priors and log-Jacobians are added once.
double item_log_posterior(const ModelData& d, const Eigen::MatrixXd& theta, const std::vector<int>& source_row,
                          const Eigen::VectorXd& weight, const Eigen::VectorXd& xi, Eigen::VectorXd* grad = nullptr);

/// log p(y_row | theta) + log N(theta; 0, I) with item parameters from `p`,
/// optionally with gradient and Hessian in theta.
double theta_log_posterior(const ModelData& d, const ModelParams& p, int row, const Eigen::Matrix<double, 5, 1>& theta,
                           Eigen::Matrix<double, 5, 1>* grad = nullptr, Eigen::Matrix<double, 5, 5>* hess = nullptr);

inline constexpr double kDiscriminationPriorSd = 0.5;
inline constexpr double kThresholdPriorSd = 1.5;

}  // namespace sdrkit
