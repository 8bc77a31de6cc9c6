#pragma once

#include <Eigen/Core>
#include <array>

namespace npgraph {

// Clamped cubic B-spline basis on [0,1] with equally spaced interior knots.
// `order` is the spline order (degree + 1); cubic splines have order 4.
struct BasisSpec {
  int num_basis = 0;  // J
  int order = 4;
  Eigen::VectorXd knots;  // length J + order, clamped at both ends
};

// Builds a clamped cubic basis with J basis functions (J >= 4) and J-4
// equally spaced interior knots.
BasisSpec build_basis(int num_basis);

// Evaluates all J basis functions at x in [0,1]. Inputs exactly at the
// boundary are clamped to [1e-10, 1-1e-10] first. Values are nonnegative
// and sum to one.
Eigen::VectorXd eval_basis(const BasisSpec& spec, double x);

// Identifiability and monotonicity constraints on the spline coefficients,
// together with the two-coefficient dimension reduction.
//
// The full coefficient vector theta (length J) satisfies
//   value_constraints * theta = targets        (f(1/2)=0, f(3/4)-f(1/4)=1)
//   monotone * theta > 0                       (increasing coefficients)
// Two pivot coordinates are eliminated; for a reduced vector u (length J-2)
// the pivot pair is pivot_map * u + pivot_offset, and the monotonicity cone
// becomes reduced_monotone * u + reduced_offset > 0.
struct ConstraintSystem {
  Eigen::MatrixXd value_constraints;  // A, 2 x J
  Eigen::Vector2d targets;            // c = (0, 1)
  Eigen::MatrixXd monotone;           // F, (J-1) x J first differences

  std::array<int, 2> pivots{};     // 0-based columns removed by the reduction
  Eigen::MatrixXd pivot_map;       // W, 2 x (J-2)
  Eigen::Vector2d pivot_offset;    // q
  Eigen::MatrixXd reduced_monotone;  // (J-1) x (J-2)
  Eigen::VectorXd reduced_offset;    // length J-1

  // Affine embedding of a reduced vector into the full coefficient space:
  // theta = embed_map * u + embed_offset.
  Eigen::MatrixXd embed_map;     // J x (J-2)
  Eigen::VectorXd embed_offset;  // length J
};

ConstraintSystem constraint_system(const BasisSpec& spec);

// theta = embed_map * reduced + embed_offset; satisfies the value constraints
// by construction.
Eigen::VectorXd reconstitute(const ConstraintSystem& system, const Eigen::VectorXd& reduced);

// Drops the pivot coordinates of a full coefficient vector.
Eigen::VectorXd reduce_coefficients(const ConstraintSystem& system, const Eigen::VectorXd& full);

}  // namespace npgraph
