#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "rng.hpp"

namespace npgraph {

enum class Structure { percent, ar1, circle };

enum class TransformFamily { normal_cdf, logistic_cdf, gumbel_cdf, power };

Structure parse_structure(const std::string& name);      // "percent"|"ar1"|"circle"
TransformFamily parse_transform(const std::string& name);  // "normal"|"logistic"|"gumbel"|"power"
std::string structure_name(Structure s);
std::string transform_name(TransformFamily t);

struct Scenario {
  int p = 10;
  int n = 100;
  Structure structure = Structure::ar1;
  double sparsity_fraction = 0.1;  // percent model only
  std::vector<TransformFamily> transforms{TransformFamily::power};  // round-robin over columns
  int power_m = 1;                 // exponent for the power transform
  std::uint64_t seed = 0;
};

// Parameters actually used for one column's observation map, for provenance.
struct TransformRecord {
  TransformFamily family;
  double location = 0.0;
  double scale = 1.0;
  int power_m = 1;
};

struct Dataset {
  Eigen::MatrixXd x;         // n x p, entries strictly inside (0,1)
  Eigen::MatrixXd y_latent;  // n x p Gaussian layer
  Eigen::MatrixXi truth;     // true edge matrix (support of the precision)
  Eigen::MatrixXd omega;     // generating precision matrix
  std::vector<TransformRecord> transforms;  // one per column
};

// Paper-stated generator matrices: circle (diag 2, neighbors 1, corners 0.9),
// AR(1) (diag 2.9216 with 1.9608 ends, off-diagonal -1.3725), and the percent
// model Omega = T T' with random lower-triangular T.
Eigen::MatrixXd gen_precision(Structure structure, int p, double fraction, std::uint64_t seed);
Eigen::MatrixXd gen_precision(Structure structure, int p, double fraction, Rng& rng);

Dataset gen_dataset(const Scenario& scenario);

}  // namespace npgraph
