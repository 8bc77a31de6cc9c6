#include "model_selection.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>

#include "common.hpp"
#include "parallel.hpp"

namespace npgraph {

namespace {

// Largest free-entry gap between the current covariance and the target.
double free_entry_gap(const Eigen::MatrixXd& cov, const Eigen::MatrixXd& target,
                      const Eigen::MatrixXi& pattern) {
  double gap = 0.0;
  for (Eigen::Index a = 0; a < cov.rows(); ++a) {
    for (Eigen::Index b = a; b < cov.cols(); ++b) {
      if (pattern(a, b) == 1) gap = std::max(gap, std::abs(cov(a, b) - target(a, b)));
    }
  }
  return gap;
}

}  // namespace

PatternMLE constrained_gaussian_mle(const Eigen::MatrixXd& scatter, int n,
                                    const Eigen::MatrixXi& pattern) {
  const auto p = scatter.rows();
  require(p >= 1 && scatter.cols() == p, ErrorCode::invalid_argument,
          "pattern mle: scatter matrix must be square");
  require(n >= 1, ErrorCode::invalid_argument, "pattern mle: sample count must be positive");
  require(pattern.rows() == p && pattern.cols() == p, ErrorCode::invalid_argument,
          "pattern mle: pattern shape mismatch");
  const double scatter_scale = scatter.cwiseAbs().maxCoeff();
  require((scatter - scatter.transpose()).cwiseAbs().maxCoeff() <=
              1e-8 * std::max(1.0, scatter_scale),
          ErrorCode::invalid_argument, "pattern mle: scatter matrix is not symmetric");
  for (Eigen::Index a = 0; a < p; ++a) {
    require(pattern(a, a) == 1, ErrorCode::invalid_argument,
            "pattern mle: pattern diagonal must be all ones");
    for (Eigen::Index b = 0; b < p; ++b) {
      require(pattern(a, b) == pattern(b, a) && (pattern(a, b) == 0 || pattern(a, b) == 1),
              ErrorCode::invalid_argument, "pattern mle: pattern must be symmetric binary");
    }
  }

  const Eigen::MatrixXd target = scatter / static_cast<double>(n);  // S / n
  std::vector<std::pair<Eigen::Index, Eigen::Index>> free_pairs;
  for (Eigen::Index a = 0; a < p; ++a) {
    require(target(a, a) > 0.0, ErrorCode::numeric_failure,
            "pattern mle: zero diagonal in the scatter matrix, no feasible point");
    for (Eigen::Index b = a + 1; b < p; ++b) {
      if (pattern(a, b) == 1) {
        require(target(a, a) * target(b, b) - target(a, b) * target(a, b) > 0.0,
                ErrorCode::numeric_failure,
                "pattern mle: singular 2x2 margin, no positive-definite point");
        free_pairs.emplace_back(a, b);
      }
    }
  }

  PatternMLE result;
  result.pattern = pattern;
  result.omega_hat = Eigen::MatrixXd::Zero(p, p);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(p, p);  // running omega^{-1}
  for (Eigen::Index a = 0; a < p; ++a) {
    result.omega_hat(a, a) = 1.0 / target(a, a);
    cov(a, a) = target(a, a);
  }

  // Cyclic proportional fitting: each pass matches every free 2x2 margin and
  // every diagonal entry exactly, which is block-coordinate ascent of the
  // concave log-likelihood. The running inverse is corrected by low-rank
  // updates inside a pass and recomputed in full at the end of each pass.
  const double tol_internal = 1e-12 * std::max(1.0, target.cwiseAbs().maxCoeff());
  const int max_passes = 10000;
  int pass = 0;
  double gap = free_entry_gap(cov, target, pattern);
  while (gap > tol_internal && pass < max_passes) {
    ++pass;
    for (const auto& [a, b] : free_pairs) {
      Eigen::Matrix2d marg;
      marg << cov(a, a), cov(a, b), cov(a, b), cov(b, b);
      Eigen::Matrix2d want;
      want << target(a, a), target(a, b), target(a, b), target(b, b);
      const Eigen::Matrix2d delta = want.inverse() - marg.inverse();
      result.omega_hat(a, a) += delta(0, 0);
      result.omega_hat(b, b) += delta(1, 1);
      result.omega_hat(a, b) += delta(0, 1);
      result.omega_hat(b, a) += delta(0, 1);
      // Woodbury correction of the running inverse for the rank-2 change.
      Eigen::MatrixXd cu(p, 2);
      cu.col(0) = cov.col(a);
      cu.col(1) = cov.col(b);
      const Eigen::Matrix2d capacitance =
          (Eigen::Matrix2d::Identity() + marg * delta).inverse();
      cov -= cu * (delta * capacitance) * cu.transpose();
      cov = 0.5 * (cov + cov.transpose());
    }
    for (Eigen::Index a = 0; a < p; ++a) {
      const double delta = 1.0 / target(a, a) - 1.0 / cov(a, a);
      result.omega_hat(a, a) += delta;
      const Eigen::VectorXd ca = cov.col(a);
      cov -= ca * (delta / (1.0 + cov(a, a) * delta)) * ca.transpose();
    }
    // Fresh inverse once per pass to stop roundoff from accumulating.
    Eigen::LLT<Eigen::MatrixXd> llt(result.omega_hat);
    require(llt.info() == Eigen::Success, ErrorCode::numeric_failure,
            "pattern mle: iterate left the positive-definite cone");
    cov = llt.solve(Eigen::MatrixXd::Identity(p, p));
    gap = free_entry_gap(cov, target, pattern);
  }

  result.iterations = pass;
  result.stationarity_gap = gap;
  require(gap <= 1e-6, ErrorCode::numeric_failure,
          "pattern mle: no convergence after iteration cap, residual " + std::to_string(gap));

  Eigen::LLT<Eigen::MatrixXd> llt(result.omega_hat);
  require(llt.info() == Eigen::Success, ErrorCode::numeric_failure,
          "pattern mle: final iterate not positive definite");
  double logdet = 0.0;
  for (Eigen::Index a = 0; a < p; ++a) logdet += std::log(llt.matrixL()(a, a));
  logdet *= 2.0;
  result.loglik = n * logdet - (result.omega_hat * scatter).trace();
  return result;
}

double bic_score(const PatternMLE& mle, const Eigen::MatrixXd& scatter, int n) {
  const auto p = scatter.rows();
  require(mle.omega_hat.rows() == p, ErrorCode::invalid_argument,
          "bic: MLE and scatter dimensions disagree");
  int free_pairs = 0;
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a + 1; b < p; ++b) free_pairs += mle.pattern(a, b);
  }
  const double k = static_cast<double>(p + free_pairs);
  return -2.0 * mle.loglik + k * std::log(static_cast<double>(n));
}

std::vector<PrecisionHyper> default_hyper_grid() {
  std::vector<PrecisionHyper> grid;
  for (double c0 : {0.02, 0.005}) {
    for (auto [b0, b1] : {std::pair<double, double>{1.0, 1.0}, {10.0, 30.0}}) {
      PrecisionHyper hyper;
      hyper.c0 = c0;
      hyper.b0 = b0;
      hyper.b1 = b1;
      grid.push_back(hyper);
    }
  }
  return grid;
}

HyperGridResult select_hyperparameters(const Eigen::MatrixXd& x,
                                       const std::vector<PrecisionHyper>& grid,
                                       const ChainConfig& base_config) {
  require(!grid.empty(), ErrorCode::invalid_argument,
          "hyper selection: need at least one configuration");
  const auto n = x.rows();
  const auto p = x.cols();

  HyperGridResult result;
  // Basis counts depend only on the data; select once and share.
  if (base_config.basis_counts.empty()) {
    result.basis_counts.resize(static_cast<std::size_t>(p));
    for (Eigen::Index d = 0; d < p; ++d) {
      result.basis_counts[static_cast<std::size_t>(d)] =
          aic_select_basis(x.col(d), base_config.min_basis, base_config.max_basis).selected;
    }
  } else {
    result.basis_counts = base_config.basis_counts;
  }

  result.rows.resize(grid.size());
  const int jobs = static_cast<int>(grid.size());
  parallel_for(jobs, [&](int i) {
    HyperGridRow& row = result.rows[static_cast<std::size_t>(i)];
    row.hyper = grid[static_cast<std::size_t>(i)];
    row.bic = std::numeric_limits<double>::infinity();
    try {
      ChainConfig config = base_config;
      config.hyper = row.hyper;
      config.basis_counts = result.basis_counts;
      config.seed = Rng::split_seed(base_config.seed, 1000 + static_cast<std::uint64_t>(i));
      const ChainOutput chain = run_chain(x, config);

      const Eigen::MatrixXd scatter = chain.z_bar.transpose() * chain.z_bar;
      Eigen::MatrixXi pattern = median_probability_edges(chain.edge_mean);
      pattern.diagonal().setOnes();
      const PatternMLE mle = constrained_gaussian_mle(scatter, static_cast<int>(n), pattern);
      row.k = static_cast<int>(p);
      for (Eigen::Index a = 0; a < p; ++a) {
        for (Eigen::Index b = a + 1; b < p; ++b) row.k += pattern(a, b);
      }
      row.deviance = -2.0 * mle.loglik;
      row.bic = bic_score(mle, scatter, static_cast<int>(n));
    } catch (const Error& e) {
      row.error = e.what();
      row.error_code = e.code();
    }
  });

  // Argmin with deterministic tie-breaking: smaller c0, then smaller b0.
  int best = -1;
  for (int i = 0; i < jobs; ++i) {
    const auto& row = result.rows[static_cast<std::size_t>(i)];
    if (best < 0) {
      best = i;
      continue;
    }
    const auto& champ = result.rows[static_cast<std::size_t>(best)];
    if (row.bic < champ.bic ||
        (row.bic == champ.bic &&
         (row.hyper.c0 < champ.hyper.c0 ||
          (row.hyper.c0 == champ.hyper.c0 && row.hyper.b0 < champ.hyper.b0)))) {
      best = i;
    }
  }
  if (!std::isfinite(result.rows[static_cast<std::size_t>(best)].bic)) {
    // Surface the underlying cause (and its code: a data problem must not
    // masquerade as a solver breakdown) rather than a blanket failure.
    for (const auto& row : result.rows) {
      if (!row.error.empty()) {
        fail(row.error_code, "hyper selection: every configuration failed: " + row.error);
      }
    }
    fail(ErrorCode::numeric_failure, "hyper selection: every configuration failed");
  }
  result.rows[static_cast<std::size_t>(best)].selected = true;
  result.best = result.rows[static_cast<std::size_t>(best)].hyper;
  return result;
}

}  // namespace npgraph
