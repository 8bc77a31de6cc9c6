#pragma once

#include <Eigen/Core>
#include <vector>

#include "bspline.hpp"

namespace npgraph {

// Prior over one variable's spline coefficients: an increasing-order-statistic
// mean zeta conditioned on the identifiability constraints A theta = c, plus
// the full-rank restriction to the non-pivot coordinates.
struct TransformPrior {
  double nu = 0.0;
  double tau = 1.0;
  double sigma2 = 1.0;
  Eigen::VectorXd zeta;       // length J, strictly increasing
  Eigen::VectorXd xi;         // length J, conditioned mean, A xi = c
  Eigen::MatrixXd gamma;      // J x J, conditioned covariance (rank J-2)
  Eigen::VectorXd xi_bar;     // length J-2: xi at non-pivot coordinates
  Eigen::MatrixXd gamma_bar;  // (J-2) x (J-2), symmetric positive definite
};

// zeta_j = nu + tau * Phi^{-1}((j - 0.375) / (J + 0.25)), j = 1..J.
Eigen::VectorXd prior_mean_zeta(int num_basis, double nu, double tau);

// Conditions the N(zeta, sigma2 I) prior on A theta = c and restricts to the
// non-pivot coordinates of the constraint system.
TransformPrior condition_prior(const Eigen::VectorXd& zeta, double sigma2,
                               const ConstraintSystem& system);

// Basis values at each element of x with columns centered, the design matrix
// of the spline-fitting quadratic programs.
Eigen::MatrixXd centered_basis_design(const BasisSpec& spec, const Eigen::VectorXd& x);

// Initial coefficients: match the spline to the normal quantile function by
// Gauss-Hermite moment equations b = E theta, solved as a constrained least
// squares problem (min 1/2 theta' E'E theta - b'E theta).
Eigen::VectorXd init_coeffs_quadrature(const BasisSpec& spec, const ConstraintSystem& system,
                                       int n_nodes);

// Constrained least-squares spline fit: minimizes 1/2 ||Z theta - target||^2
// subject to the identifiability equalities and the monotonicity inequalities
// F theta >= 1e-4. An empty target means target = 0, i.e. the pure quadratic
// min 1/2 theta' (Z'Z) theta. A design with zero rows returns the minimum-norm
// feasible point.
Eigen::VectorXd fit_monotone_spline_qp(const Eigen::MatrixXd& design,
                                       const ConstraintSystem& system,
                                       const Eigen::VectorXd& target = Eigen::VectorXd());

struct AicSelection {
  int selected = 0;                // chosen basis count
  std::vector<int> tried;          // basis counts evaluated, ascending
  std::vector<double> aic;         // aligned with tried; +inf marks failed fits
};

// Scans basis counts in ascending order. Each candidate J is scored by
// AIC(J) = WRSS_J + 2J, where WRSS_J is the weighted residual sum of squares
// of the constrained spline fit to the column's centered normal scores (the
// empirical analogue of the quadrature initializer's fit to the normal
// quantile function). The weights are the inverse asymptotic variances of the
// normal order statistics, which puts WRSS on the chi-squared scale that the
// 2J complexity penalty assumes and keeps extreme ranks, whose scores carry
// little information, from dominating the fit. The scan stops once ten
// consecutive counts fail to improve on the running minimum.
AicSelection aic_select_basis(const Eigen::VectorXd& x_column, int min_basis = 4,
                              int max_basis = 100);

}  // namespace npgraph
