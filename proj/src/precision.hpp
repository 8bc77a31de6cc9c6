#pragma once

#include <Eigen/Core>

#include "rng.hpp"

namespace npgraph {

struct PrecisionHyper {
  double c0 = 0.02;    // spike variance scale relative to the slab
  double b0 = 1.0;     // inverse-gamma shape for the slab variance
  double b1 = 1.0;     // inverse-gamma scale for the slab variance
  double lambda = 1.0; // exponential rate for diagonal entries
};

// Markov-chain state of the sparse precision model: the matrix itself, the
// edge indicators, per-entry slab variances, and the global edge probability.
struct PrecisionState {
  Eigen::MatrixXd omega;  // p x p symmetric positive definite
  Eigen::MatrixXi edges;  // p x p symmetric {0,1}, zero diagonal
  Eigen::MatrixXd tau2;   // p x p symmetric positive, diagonal unused
  double pi_edge = 1.0 / 11.0;
  PrecisionHyper hyper;
};

// Fresh state with the given precision matrix, no edges, unit slab variances,
// and pi at its Be(1, 10) prior mean.
PrecisionState make_precision_state(const Eigen::MatrixXd& omega, PrecisionHyper hyper);

// Mixture variance of entry (d, k): tau2 under the slab, c0 tau2 under the spike.
double spike_slab_variance(const PrecisionState& state, int d, int k);

// P(l = 1 | omega, tau2, pi) for one off-diagonal entry.
double edge_inclusion_probability(double omega, double tau2, double c0, double pi);

// One conditional draw of column/row d of omega: off-diagonals from the
// Gaussian conditional of the column-wise change of variables, diagonal from
// the shifted gamma draw. Positive definiteness is preserved by construction.
void update_precision_column(PrecisionState& state, const Eigen::MatrixXd& scatter, int n, int d,
                             Rng& rng);

void update_edges(PrecisionState& state, Rng& rng);
void update_tau2(PrecisionState& state, Rng& rng);
void update_pi(PrecisionState& state, Rng& rng);

// One full sweep: every column of omega in order, then edges, slab variances,
// and the edge probability.
void update_precision_sweep(PrecisionState& state, const Eigen::MatrixXd& scatter, int n, Rng& rng);

}  // namespace npgraph
