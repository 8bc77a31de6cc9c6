#include "quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "common.hpp"

namespace npgraph {

QuadratureRule gauss_hermite(int n_points) {
  require(n_points >= 1, ErrorCode::invalid_argument, "quadrature: need at least one node");
  // Jacobi matrix of the (physicists') Hermite polynomials: zero diagonal,
  // off-diagonal sqrt(i/2). Nodes are its eigenvalues; the weight attached
  // to each node is sqrt(pi) times the squared first eigenvector component.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n_points, n_points);
  for (int i = 1; i < n_points; ++i) {
    const double off = std::sqrt(0.5 * i);
    jacobi(i, i - 1) = off;
    jacobi(i - 1, i) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  require(eig.info() == Eigen::Success, ErrorCode::numeric_failure,
          "quadrature: eigendecomposition failed");

  const double sqrt_pi = std::sqrt(M_PI);
  QuadratureRule rule;
  rule.nodes = eig.eigenvalues();
  rule.weights.resize(n_points);
  for (int i = 0; i < n_points; ++i) {
    const double v0 = eig.eigenvectors()(0, i);
    rule.weights[i] = sqrt_pi * v0 * v0;
  }
  return rule;
}

double gauss_hermite_normal_expectation(const QuadratureRule& rule,
                                        const std::function<double(double)>& f) {
  const double sqrt2 = std::sqrt(2.0);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < rule.nodes.size(); ++i) {
    acc += rule.weights[i] * f(sqrt2 * rule.nodes[i]);
  }
  return acc / std::sqrt(M_PI);
}

}  // namespace npgraph
