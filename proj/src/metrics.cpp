#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"

namespace npgraph {

ConfusionMetrics score_graph(const Eigen::MatrixXi& estimate, const Eigen::MatrixXi& truth) {
  const auto p = truth.rows();
  require(truth.cols() == p && estimate.rows() == p && estimate.cols() == p,
          ErrorCode::invalid_argument, "score: estimate and truth must be square and equal-sized");
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a + 1; b < p; ++b) {
      require(estimate(a, b) == estimate(b, a) && truth(a, b) == truth(b, a),
              ErrorCode::invalid_argument, "score: matrices must be symmetric");
    }
  }

  ConfusionMetrics m;
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a + 1; b < p; ++b) {
      const bool est = estimate(a, b) != 0;
      const bool tru = truth(a, b) != 0;
      if (est && tru) ++m.tp;
      else if (!est && !tru) ++m.tn;
      else if (est) ++m.fp;
      else ++m.fn;
    }
  }

  const double nan = std::numeric_limits<double>::quiet_NaN();
  m.specificity = (m.tn + m.fp) > 0 ? static_cast<double>(m.tn) / (m.tn + m.fp) : nan;
  m.sensitivity = (m.tp + m.fn) > 0 ? static_cast<double>(m.tp) / (m.tp + m.fn) : nan;
  const double f1 = static_cast<double>(m.tp + m.fp);
  const double f2 = static_cast<double>(m.tp + m.fn);
  const double f3 = static_cast<double>(m.tn + m.fp);
  const double f4 = static_cast<double>(m.tn + m.fn);
  if (f1 > 0 && f2 > 0 && f3 > 0 && f4 > 0) {
    m.mcc = (static_cast<double>(m.tp) * m.tn - static_cast<double>(m.fp) * m.fn) /
            std::sqrt(f1 * f2 * f3 * f4);
  } else {
    m.mcc = nan;
  }
  return m;
}

double quantile(std::vector<double> v, double q) {
  require(!v.empty(), ErrorCode::invalid_argument, "quantile of an empty sample");
  require(q >= 0.0 && q <= 1.0, ErrorCode::invalid_argument, "quantile level outside [0,1]");
  std::sort(v.begin(), v.end());
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, v.size() - 1);
  const double w = h - std::floor(h);
  return (1.0 - w) * v[lo] + w * v[hi];
}

}  // namespace npgraph
