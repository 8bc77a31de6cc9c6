#include "precision.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <vector>

#include "common.hpp"
#include "stats.hpp"

namespace npgraph {

PrecisionState make_precision_state(const Eigen::MatrixXd& omega, PrecisionHyper hyper) {
  const auto p = omega.rows();
  require(p >= 2 && omega.cols() == p, ErrorCode::invalid_argument,
          "precision: omega must be square with p >= 2");
  require(hyper.c0 > 0.0 && hyper.b0 > 0.0 && hyper.b1 > 0.0 && hyper.lambda > 0.0,
          ErrorCode::invalid_argument, "precision: hyperparameters must be positive");
  PrecisionState state;
  state.omega = 0.5 * (omega + omega.transpose());
  state.edges = Eigen::MatrixXi::Zero(p, p);
  state.tau2 = Eigen::MatrixXd::Ones(p, p);
  state.pi_edge = 1.0 / 11.0;
  state.hyper = hyper;
  return state;
}

double spike_slab_variance(const PrecisionState& state, int d, int k) {
  const double t2 = state.tau2(d, k);
  return state.edges(d, k) == 1 ? t2 : state.hyper.c0 * t2;
}

double edge_inclusion_probability(double omega, double tau2, double c0, double pi) {
  if (pi <= 0.0) return 0.0;
  if (pi >= 1.0) return 1.0;
  if (c0 == 1.0) return pi;  // spike and slab coincide; the densities cancel
  const double log_slab = std::log(pi) + normal_log_pdf(omega, 0.0, tau2);
  const double log_spike = std::log1p(-pi) + normal_log_pdf(omega, 0.0, c0 * tau2);
  return 1.0 / (1.0 + std::exp(log_spike - log_slab));
}

void update_precision_column(PrecisionState& state, const Eigen::MatrixXd& scatter, int n, int d,
                             Rng& rng) {
  const auto p = state.omega.rows();
  require(scatter.rows() == p && scatter.cols() == p, ErrorCode::invalid_argument,
          "precision: scatter matrix shape mismatch");
  require(d >= 0 && d < p, ErrorCode::invalid_argument, "precision: column index out of range");
  require(n >= 0, ErrorCode::invalid_argument, "precision: sample count must be non-negative");

  // Work on the ordering that moves variable d to the last position.
  std::vector<Eigen::Index> rest;
  rest.reserve(static_cast<std::size_t>(p - 1));
  for (Eigen::Index k = 0; k < p; ++k) {
    if (k != d) rest.push_back(k);
  }

  Eigen::MatrixXd omega11(p - 1, p - 1);
  Eigen::VectorXd s12(p - 1);
  Eigen::VectorXd mix_prec(p - 1);  // 1 / v^2 for the off-diagonal entries
  for (Eigen::Index a = 0; a < p - 1; ++a) {
    s12[a] = scatter(rest[static_cast<std::size_t>(a)], d);
    mix_prec[a] = 1.0 / spike_slab_variance(state, static_cast<int>(rest[static_cast<std::size_t>(a)]),
                                            static_cast<int>(d));
    for (Eigen::Index b = 0; b < p - 1; ++b) {
      omega11(a, b) =
          state.omega(rest[static_cast<std::size_t>(a)], rest[static_cast<std::size_t>(b)]);
    }
  }

  Eigen::LLT<Eigen::MatrixXd> llt11(omega11);
  require(llt11.info() == Eigen::Success, ErrorCode::numeric_failure,
          "precision: leading block lost positive definiteness");
  const Eigen::MatrixXd omega11_inv =
      llt11.solve(Eigen::MatrixXd::Identity(p - 1, p - 1));

  const double s22 = scatter(d, d);
  const double shifted = s22 + state.hyper.lambda;
  Eigen::MatrixXd cond_prec = shifted * omega11_inv;  // C^{-1}
  cond_prec.diagonal() += mix_prec;
  Eigen::LLT<Eigen::MatrixXd> llt_c(cond_prec);
  require(llt_c.info() == Eigen::Success, ErrorCode::numeric_failure,
          "precision: conditional precision not positive definite");

  // u ~ N(-C s12, C) drawn through the precision factorization.
  Eigen::VectorXd z(p - 1);
  for (Eigen::Index a = 0; a < p - 1; ++a) z[a] = rng.normal();
  const Eigen::VectorXd u = -llt_c.solve(s12) + llt_c.matrixU().solve(z);
  const double v = rng.gamma(0.5 * n + 1.0, 0.5 * shifted);
  const double omega22 = v + u.dot(llt11.solve(u));

  for (Eigen::Index a = 0; a < p - 1; ++a) {
    state.omega(rest[static_cast<std::size_t>(a)], d) = u[a];
    state.omega(d, rest[static_cast<std::size_t>(a)]) = u[a];
  }
  state.omega(d, d) = omega22;
}

void update_edges(PrecisionState& state, Rng& rng) {
  const auto p = state.omega.rows();
  for (Eigen::Index d = 0; d < p - 1; ++d) {
    for (Eigen::Index k = d + 1; k < p; ++k) {
      const double prob = edge_inclusion_probability(state.omega(d, k), state.tau2(d, k),
                                                     state.hyper.c0, state.pi_edge);
      const int l = rng.uniform() < prob ? 1 : 0;
      state.edges(d, k) = l;
      state.edges(k, d) = l;
    }
  }
}

void update_tau2(PrecisionState& state, Rng& rng) {
  const auto p = state.omega.rows();
  for (Eigen::Index d = 0; d < p - 1; ++d) {
    for (Eigen::Index k = d + 1; k < p; ++k) {
      const double l = state.edges(d, k);
      const double scale = state.hyper.b1 + 0.5 * state.omega(d, k) * state.omega(d, k) *
                                                (l + (1.0 - l) / state.hyper.c0);
      const double draw = rng.inv_gamma(state.hyper.b0 + 0.5, scale);
      state.tau2(d, k) = draw;
      state.tau2(k, d) = draw;
    }
  }
}

void update_pi(PrecisionState& state, Rng& rng) {
  const auto p = state.omega.rows();
  double ones = 0.0;
  double zeros = 0.0;
  for (Eigen::Index d = 0; d < p - 1; ++d) {
    for (Eigen::Index k = d + 1; k < p; ++k) {
      (state.edges(d, k) == 1 ? ones : zeros) += 1.0;
    }
  }
  state.pi_edge = rng.beta(1.0 + ones, 10.0 + zeros);
}

void update_precision_sweep(PrecisionState& state, const Eigen::MatrixXd& scatter, int n,
                            Rng& rng) {
  const auto p = state.omega.rows();
  for (Eigen::Index d = 0; d < p; ++d) {
    update_precision_column(state, scatter, n, static_cast<int>(d), rng);
  }
  update_edges(state, rng);
  update_tau2(state, rng);
  update_pi(state, rng);
}

}  // namespace npgraph
