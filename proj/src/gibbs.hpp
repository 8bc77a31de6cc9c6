#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "bspline.hpp"
#include "precision.hpp"
#include "rng.hpp"
#include "tmvn.hpp"
#include "transform.hpp"

namespace npgraph {

struct ChainConfig {
  int n_burn = 1000;
  int n_keep = 2000;
  std::uint64_t seed = 0;
  double hmc_travel_time = 1.5707963267948966;
  int hmc_trajectories = 1;  // exact-HMC trajectories per coefficient update
  int thinning = 1;
  PrecisionHyper hyper;
  double prior_nu = 1.0;
  double prior_tau = 0.5;
  double prior_sigma2 = 1.0;
  int quadrature_nodes = 20;
  int min_basis = 4;
  int max_basis = 100;
  std::vector<int> basis_counts;  // per-variable override; empty -> AIC per variable
  bool keep_omega_samples = false;
};

struct ChainDiagnostics {
  std::vector<double> pi_trace;      // one entry per sweep (burn-in included)
  std::vector<int> edge_count_trace; // active upper-triangular edges per sweep
};

struct ChainOutput {
  Eigen::MatrixXd edge_mean;   // p x p posterior edge-inclusion frequencies
  Eigen::MatrixXd omega_mean;  // p x p posterior mean precision
  Eigen::MatrixXd z_bar;       // n x p mean of centered latent data
  std::vector<Eigen::VectorXd> theta_mean;  // per-variable coefficient means
  std::vector<int> basis_counts;            // per-variable basis count used
  ChainDiagnostics diagnostics;
  std::vector<Eigen::MatrixXd> omega_samples;  // kept sweeps, optional
};

// Everything about one variable's transformation that stays fixed across
// sweeps: basis, constraints, prior, and the reduced design R = B_bar + B* W
// with offset r0 = B* q, so that Y_d = R theta_bar + r0.
struct VariableModel {
  BasisSpec spec;
  ConstraintSystem system;
  TransformPrior prior;
  Eigen::MatrixXd reduced_design;   // n x (J-2)
  Eigen::VectorXd design_offset;    // n
  Eigen::MatrixXd gram;             // R'R
  Eigen::MatrixXd prior_precision;  // inverse of gamma_bar
  Eigen::VectorXd prior_linear;     // prior_precision * xi_bar
};

VariableModel make_variable_model(const BasisSpec& spec, const ConstraintSystem& system,
                                  const TransformPrior& prior, const Eigen::VectorXd& x_column);

// Full conditional of the reduced coefficients of variable d given the other
// latent columns, the mean vector, and the precision matrix.
TruncatedGaussian theta_conditional(const VariableModel& model, int d, const Eigen::MatrixXd& y,
                                    const Eigen::VectorXd& mu, const Eigen::MatrixXd& omega);

// One exact draw from mu | Y, Omega ~ N(colmean(Y), Omega^{-1} / n).
Eigen::VectorXd sample_mu(const Eigen::MatrixXd& y, const Eigen::MatrixXd& omega, Rng& rng);

// Runs the full Gibbs sampler on data in the open unit interval.
ChainOutput run_chain(const Eigen::MatrixXd& x, const ChainConfig& config);

// Median probability model: edge wherever the inclusion frequency exceeds 1/2.
Eigen::MatrixXi median_probability_edges(const Eigen::MatrixXd& edge_mean);

}  // namespace npgraph
