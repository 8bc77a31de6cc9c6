#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "common.hpp"
#include "gibbs.hpp"
#include "precision.hpp"

namespace npgraph {

// Gaussian MLE of the precision matrix under a fixed zero pattern
// (covariance selection): omega maximizes n log det(omega) - tr(omega S)
// subject to omega_{dk} = 0 wherever pattern_{dk} = 0.
struct PatternMLE {
  Eigen::MatrixXd omega_hat;
  Eigen::MatrixXi pattern;  // symmetric, unit diagonal; 1 marks a free entry
  double loglik = 0.0;      // n log det(omega_hat) - tr(omega_hat S)
  int iterations = 0;
  double stationarity_gap = 0.0;  // max |(omega^{-1} - S/n)| over free entries
};

PatternMLE constrained_gaussian_mle(const Eigen::MatrixXd& scatter, int n,
                                    const Eigen::MatrixXi& pattern);

// BIC = 2(-n log det + tr(omega S)) + k log n with k = p + free pairs.
double bic_score(const PatternMLE& mle, const Eigen::MatrixXd& scatter, int n);

struct HyperGridRow {
  PrecisionHyper hyper;
  int k = 0;
  double deviance = 0.0;
  double bic = 0.0;
  bool selected = false;
  std::string error;  // non-empty when the chain or the MLE failed
  ErrorCode error_code = ErrorCode::internal_error;  // meaningful only with error
};

struct HyperGridResult {
  PrecisionHyper best;
  std::vector<HyperGridRow> rows;
  std::vector<int> basis_counts;  // per-variable counts shared by all chains
};

// The paper's grid: c0 in {0.02, 0.005} crossed with (b0, b1) in
// {(1, 1), (10, 30)}.
std::vector<PrecisionHyper> default_hyper_grid();

// Runs one chain per hyperparameter setting, scores each by the BIC of the
// pattern-constrained MLE at its median-probability graph, and returns the
// minimizer (ties: smaller c0, then smaller b0).
HyperGridResult select_hyperparameters(const Eigen::MatrixXd& x,
                                       const std::vector<PrecisionHyper>& grid,
                                       const ChainConfig& base_config);

}  // namespace npgraph
