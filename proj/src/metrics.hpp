#pragma once

#include <Eigen/Core>
#include <vector>

namespace npgraph {

// Confusion counts over the upper-triangular off-diagonal pairs. Ratios that
// would divide by zero are reported as NaN ("missing"), matching the MCC
// convention for empty margins.
struct ConfusionMetrics {
  long tp = 0;
  long tn = 0;
  long fp = 0;
  long fn = 0;
  double specificity = 0.0;  // TN / (TN + FP)
  double sensitivity = 0.0;  // TP / (TP + FN)
  double mcc = 0.0;          // NaN when any denominator factor is zero
};

ConfusionMetrics score_graph(const Eigen::MatrixXi& estimate, const Eigen::MatrixXi& truth);

// Linear-interpolation quantile of the sorted copy of v (R type 7).
double quantile(std::vector<double> v, double q);

}  // namespace npgraph
