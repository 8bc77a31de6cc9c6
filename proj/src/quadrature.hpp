#pragma once

#include <Eigen/Core>
#include <functional>

namespace npgraph {

struct QuadratureRule {
  Eigen::VectorXd nodes;    // ascending
  Eigen::VectorXd weights;  // positive, summing to sqrt(pi)
};

// Gauss-Hermite rule for integrals against exp(-u^2) on the real line,
// computed from the Jacobi-matrix eigendecomposition.
QuadratureRule gauss_hermite(int n_points);

// Expectation of f under the standard normal density using a Gauss-Hermite
// rule: integral of f(z) phi(z) dz with the substitution z = sqrt(2) u.
double gauss_hermite_normal_expectation(const QuadratureRule& rule,
                                        const std::function<double(double)>& f);

}  // namespace npgraph
