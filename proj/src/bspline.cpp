#include "bspline.hpp"

#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <vector>

#include "common.hpp"

namespace npgraph {

namespace {

constexpr double kBoundaryClamp = 1e-10;

// Knot span index for the de Boor evaluation: largest i with knots[i] <= x,
// restricted to the valid range of the clamped vector.
int find_span(const BasisSpec& spec, double x) {
  const int k = spec.order;
  const int n_knots = static_cast<int>(spec.knots.size());
  const int lo = k - 1;
  const int hi = n_knots - k;  // first index of the right clamp
  int span = static_cast<int>(std::upper_bound(spec.knots.data() + lo, spec.knots.data() + hi, x) -
                              spec.knots.data()) -
             1;
  return std::clamp(span, lo, hi - 1);
}

}  // namespace

BasisSpec build_basis(int num_basis) {
  require(num_basis >= 4, ErrorCode::invalid_argument,
          "build_basis: need at least 4 basis functions, got " + std::to_string(num_basis));
  BasisSpec spec;
  spec.num_basis = num_basis;
  spec.order = 4;
  const int n_interior = num_basis - spec.order;
  spec.knots.resize(num_basis + spec.order);
  for (int i = 0; i < spec.order; ++i) spec.knots[i] = 0.0;
  for (int i = 0; i < n_interior; ++i)
    spec.knots[spec.order + i] = static_cast<double>(i + 1) / (n_interior + 1);
  for (int i = 0; i < spec.order; ++i) spec.knots[num_basis + i] = 1.0;
  return spec;
}

Eigen::VectorXd eval_basis(const BasisSpec& spec, double x) {
  require(x >= 0.0 && x <= 1.0, ErrorCode::invalid_argument,
          "eval_basis: x=" + std::to_string(x) + " outside [0,1]");
  x = std::clamp(x, kBoundaryClamp, 1.0 - kBoundaryClamp);

  const int k = spec.order;
  const int span = find_span(spec, x);

  // Triangular scheme: values of the k basis functions that are nonzero on
  // the span, indices span-k+1 .. span.
  std::vector<double> vals(k), left(k), right(k);
  vals[0] = 1.0;
  for (int j = 1; j < k; ++j) {
    left[j] = x - spec.knots[span + 1 - j];
    right[j] = spec.knots[span + j] - x;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double tmp = vals[r] / (right[r + 1] + left[j - r]);
      vals[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    vals[j] = saved;
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(spec.num_basis);
  for (int j = 0; j < k; ++j) out[span - k + 1 + j] = vals[j];
  return out;
}

ConstraintSystem constraint_system(const BasisSpec& spec) {
  const int J = spec.num_basis;
  ConstraintSystem sys;

  sys.value_constraints.resize(2, J);
  sys.value_constraints.row(0) = eval_basis(spec, 0.5).transpose();
  sys.value_constraints.row(1) =
      (eval_basis(spec, 0.75) - eval_basis(spec, 0.25)).transpose();
  sys.targets << 0.0, 1.0;

  sys.monotone = Eigen::MatrixXd::Zero(J - 1, J);
  for (int i = 0; i < J - 1; ++i) {
    sys.monotone(i, i) = -1.0;
    sys.monotone(i, i + 1) = 1.0;
  }

  // Pivot rule: first column of each row with a nonzero entry, the second
  // distinct from the first.
  constexpr double kNonzeroTol = 1e-12;
  int p0 = -1, p1 = -1;
  for (int j = 0; j < J; ++j) {
    if (std::abs(sys.value_constraints(0, j)) > kNonzeroTol) {
      p0 = j;
      break;
    }
  }
  for (int j = 0; j < J; ++j) {
    if (j != p0 && std::abs(sys.value_constraints(1, j)) > kNonzeroTol) {
      p1 = j;
      break;
    }
  }
  require(p0 >= 0 && p1 >= 0, ErrorCode::numeric_failure,
          "constraint_system: could not locate pivot columns");
  sys.pivots = {p0, p1};

  Eigen::Matrix2d pivot_block;
  pivot_block << sys.value_constraints(0, p0), sys.value_constraints(0, p1),
      sys.value_constraints(1, p0), sys.value_constraints(1, p1);
  require(std::abs(pivot_block.determinant()) > 1e-14, ErrorCode::numeric_failure,
          "constraint_system: degenerate basis, pivot block is singular");

  // Solve the 2x2 pivot system: theta_pivots = W * u + q.
  Eigen::MatrixXd rest(2, J - 2);
  std::vector<int> rest_cols;
  rest_cols.reserve(J - 2);
  for (int j = 0; j < J; ++j) {
    if (j != p0 && j != p1) rest_cols.push_back(j);
  }
  for (int i = 0; i < J - 2; ++i) rest.col(i) = sys.value_constraints.col(rest_cols[i]);

  const Eigen::Matrix2d pivot_inv = pivot_block.inverse();
  sys.pivot_map = -pivot_inv * rest;
  sys.pivot_offset = pivot_inv * sys.targets;

  sys.embed_map = Eigen::MatrixXd::Zero(J, J - 2);
  sys.embed_offset = Eigen::VectorXd::Zero(J);
  for (int i = 0; i < J - 2; ++i) sys.embed_map(rest_cols[i], i) = 1.0;
  sys.embed_map.row(p0) = sys.pivot_map.row(0);
  sys.embed_map.row(p1) = sys.pivot_map.row(1);
  sys.embed_offset[p0] = sys.pivot_offset[0];
  sys.embed_offset[p1] = sys.pivot_offset[1];

  sys.reduced_monotone = sys.monotone * sys.embed_map;
  sys.reduced_offset = sys.monotone * sys.embed_offset;
  return sys;
}

Eigen::VectorXd reconstitute(const ConstraintSystem& system, const Eigen::VectorXd& reduced) {
  require(reduced.size() == system.embed_map.cols(), ErrorCode::invalid_argument,
          "reconstitute: reduced vector has wrong length");
  return system.embed_map * reduced + system.embed_offset;
}

Eigen::VectorXd reduce_coefficients(const ConstraintSystem& system, const Eigen::VectorXd& full) {
  const int J = static_cast<int>(system.embed_map.rows());
  require(full.size() == J, ErrorCode::invalid_argument,
          "reduce_coefficients: full vector has wrong length");
  Eigen::VectorXd out(J - 2);
  int k = 0;
  for (int j = 0; j < J; ++j) {
    if (j != system.pivots[0] && j != system.pivots[1]) out[k++] = full[j];
  }
  return out;
}

}  // namespace npgraph
