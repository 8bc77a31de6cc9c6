#pragma once

#include <cmath>

namespace npgraph {

// Standard normal density, c.d.f. and quantile function.
// The quantile uses Wichura's PPND16 rational approximations, accurate to
// full double precision on (0,1).

inline double normal_pdf(double x) {
  static const double inv_sqrt_2pi = 0.3989422804014326779;
  return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

inline double normal_log_pdf(double x, double mean, double var) {
  static const double log_2pi = 1.8378770664093454836;
  const double d = x - mean;
  return -0.5 * (log_2pi + std::log(var) + d * d / var);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

double normal_quantile(double p);

}  // namespace npgraph
