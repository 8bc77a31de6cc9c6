#pragma once

#include <Eigen/Core>

namespace npgraph {

// minimize 1/2 x' G x + q' x
// subject to eq_normals x = eq_values, ineq_normals x >= ineq_values
struct QpProblem {
  Eigen::MatrixXd hessian;  // G, symmetric positive semidefinite
  Eigen::VectorXd linear;   // q
  Eigen::MatrixXd eq_normals;
  Eigen::VectorXd eq_values;
  Eigen::MatrixXd ineq_normals;
  Eigen::VectorXd ineq_values;
};

struct QpOptions {
  double ridge = 1e-10;      // initial diagonal regularization, relative to |G|
  double kkt_target = 1e-7;  // stop escalating the ridge once this is reached
  int max_iterations = 0;    // 0 -> scaled with problem size
};

struct QpResult {
  Eigen::VectorXd solution;
  double objective;     // evaluated with the unregularized Hessian
  int iterations = 0;
  double kkt_residual;  // max of stationarity/primal/dual/complementarity gaps
};

// Dual active-set method: start from the equality-constrained minimum, then
// repeatedly activate the most violated inequality, dropping constraints
// whose multiplier turns negative. Escalates the ridge when the Hessian
// factorization or the iteration fails to converge, or while the KKT
// residual stays above kkt_target (a singular Hessian under a tiny ridge
// yields a solve whose conditioning error alone exceeds the contract), and
// returns the best iterate found across the ladder.
QpResult solve_qp(const QpProblem& problem, QpOptions options = {});

}  // namespace npgraph
