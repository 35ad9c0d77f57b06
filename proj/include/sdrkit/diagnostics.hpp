#pragma once

#include <vector>

#include <Eigen/Dense>

namespace sdrkit {

struct ParamDiagnostics {
  double rhat = 0.0;      ///< max of rank-normalized bulk and tail split-R-hat
  double ess_bulk = 0.0;
  double ess_tail = 0.0;
};

/// `chains[c]` is one chain's draws for one scalar. Needs >= 2 chains of
/// equal length >= 4; a single chain raises UndefinedStatistic.
ParamDiagnostics scalar_diagnostics(const std::vector<std::vector<double>>& chains);

/// Column-wise diagnostics for draws stored as one (iterations x params)
/// matrix per chain.
std::vector<ParamDiagnostics> diagnostics(const std::vector<Eigen::MatrixXd>& chains);

/// Classic (non-split, non-ranked) potential scale reduction for reference.
double basic_rhat(const std::vector<std::vector<double>>& chains);

}  // namespace sdrkit
