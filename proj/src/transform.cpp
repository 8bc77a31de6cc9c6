#include "transform.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

#include "common.hpp"
#include "qp.hpp"
#include "quadrature.hpp"
#include "stats.hpp"

namespace npgraph {

Eigen::VectorXd prior_mean_zeta(int num_basis, double nu, double tau) {
  require(num_basis >= 4, ErrorCode::invalid_argument, "prior: need at least four basis functions");
  require(tau > 0.0, ErrorCode::invalid_argument, "prior: tau must be positive");
  Eigen::VectorXd zeta(num_basis);
  for (int j = 1; j <= num_basis; ++j) {
    zeta[j - 1] = nu + tau * normal_quantile((j - 0.375) / (num_basis + 0.25));
  }
  return zeta;
}

TransformPrior condition_prior(const Eigen::VectorXd& zeta, double sigma2,
                               const ConstraintSystem& system) {
  const auto j = zeta.size();
  require(system.value_constraints.cols() == j, ErrorCode::invalid_argument,
          "prior: zeta length does not match constraint system");
  require(sigma2 > 0.0, ErrorCode::invalid_argument, "prior: sigma2 must be positive");

  const Eigen::MatrixXd& a = system.value_constraints;
  const Eigen::MatrixXd aat = a * a.transpose();
  Eigen::LLT<Eigen::MatrixXd> llt(aat);
  require(llt.info() == Eigen::Success, ErrorCode::numeric_failure,
          "prior: constraint rows are degenerate");

  TransformPrior prior;
  prior.sigma2 = sigma2;
  prior.zeta = zeta;
  prior.xi = zeta + a.transpose() * llt.solve(system.targets - a * zeta);
  prior.gamma =
      sigma2 * (Eigen::MatrixXd::Identity(j, j) - a.transpose() * llt.solve(a));

  // Restriction to non-pivot coordinates; pivots are deterministic on the
  // constraint subspace, so the submatrix law is exact and full rank.
  const auto r = j - 2;
  prior.xi_bar.resize(r);
  prior.gamma_bar.resize(r, r);
  std::vector<Eigen::Index> keep;
  keep.reserve(static_cast<std::size_t>(r));
  for (Eigen::Index k = 0; k < j; ++k) {
    if (static_cast<int>(k) != system.pivots[0] && static_cast<int>(k) != system.pivots[1]) {
      keep.push_back(k);
    }
  }
  for (Eigen::Index row = 0; row < r; ++row) {
    prior.xi_bar[row] = prior.xi[keep[static_cast<std::size_t>(row)]];
    for (Eigen::Index col = 0; col < r; ++col) {
      prior.gamma_bar(row, col) = prior.gamma(keep[static_cast<std::size_t>(row)],
                                              keep[static_cast<std::size_t>(col)]);
    }
  }
  return prior;
}

Eigen::MatrixXd centered_basis_design(const BasisSpec& spec, const Eigen::VectorXd& x) {
  Eigen::MatrixXd design(x.size(), spec.num_basis);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    design.row(i) = eval_basis(spec, x[i]).transpose();
  }
  if (design.rows() > 0) design.rowwise() -= design.colwise().mean();
  return design;
}

namespace {

// Shared constrained QP: min 1/2 theta' G theta + q' theta with A theta = c
// and F theta >= 1e-4.
Eigen::VectorXd solve_constrained(const ConstraintSystem& system, Eigen::MatrixXd hessian,
                                  Eigen::VectorXd linear) {
  QpProblem problem;
  problem.hessian = std::move(hessian);
  problem.linear = std::move(linear);
  problem.eq_normals = system.value_constraints;
  problem.eq_values = system.targets;
  problem.ineq_normals = system.monotone;
  problem.ineq_values = Eigen::VectorXd::Constant(system.monotone.rows(), 1e-4);
  QpResult result = solve_qp(problem);
  require(result.kkt_residual < 1e-6, ErrorCode::numeric_failure,
          "spline fit: optimizer did not reach the required accuracy");
  return result.solution;
}

}  // namespace

Eigen::VectorXd init_coeffs_quadrature(const BasisSpec& spec, const ConstraintSystem& system,
                                       int n_nodes) {
  require(n_nodes >= 10, ErrorCode::invalid_argument,
          "init: need at least ten quadrature nodes");
  const QuadratureRule rule = gauss_hermite(n_nodes);
  const double sqrt2 = std::sqrt(2.0);
  const double sqrt_pi = std::sqrt(M_PI);

  Eigen::MatrixXd basis_at_nodes(n_nodes, spec.num_basis);
  Eigen::VectorXd scaled_weights(n_nodes);
  Eigen::VectorXd z_nodes(n_nodes);
  for (int i = 0; i < n_nodes; ++i) {
    z_nodes[i] = sqrt2 * rule.nodes[i];
    scaled_weights[i] = rule.weights[i] / sqrt_pi;
    basis_at_nodes.row(i) = eval_basis(spec, normal_cdf(z_nodes[i])).transpose();
  }
  const Eigen::VectorXd b =
      basis_at_nodes.transpose() * scaled_weights.cwiseProduct(z_nodes);
  const Eigen::MatrixXd e =
      basis_at_nodes.transpose() * scaled_weights.asDiagonal() * basis_at_nodes;

  return solve_constrained(system, e.transpose() * e, -e.transpose() * b);
}

Eigen::VectorXd fit_monotone_spline_qp(const Eigen::MatrixXd& design,
                                       const ConstraintSystem& system,
                                       const Eigen::VectorXd& target) {
  const auto j = system.value_constraints.cols();
  require(design.rows() == 0 || design.cols() == j, ErrorCode::invalid_argument,
          "spline fit: design columns do not match basis count");
  require(target.size() == 0 || target.size() == design.rows(), ErrorCode::invalid_argument,
          "spline fit: target length does not match design rows");
  if (design.rows() == 0) {
    return solve_constrained(system, Eigen::MatrixXd::Identity(j, j),
                             Eigen::VectorXd::Zero(j));
  }
  Eigen::VectorXd linear = Eigen::VectorXd::Zero(j);
  if (target.size() > 0) linear = -design.transpose() * target;
  return solve_constrained(system, design.transpose() * design, std::move(linear));
}

namespace {

// Sorted distinct values of a column with Blom plotting positions
// p = (r - 0.375)/(n + 0.25), where r is the average rank of a tie block, and
// the corresponding normal scores s = Phi^{-1}(p).
struct ScoreBlocks {
  Eigen::VectorXd x;  // distinct values, ascending
  Eigen::VectorXd p;
  Eigen::VectorXd s;
};

ScoreBlocks score_blocks(const Eigen::VectorXd& x_column) {
  std::vector<double> sorted(x_column.data(), x_column.data() + x_column.size());
  std::sort(sorted.begin(), sorted.end());
  const double denom = static_cast<double>(sorted.size()) + 0.25;

  ScoreBlocks out;
  std::vector<double> xs, ps;
  std::size_t start = 0;
  while (start < sorted.size()) {
    std::size_t stop = start + 1;
    while (stop < sorted.size() && sorted[stop] == sorted[start]) ++stop;
    const double rank = 0.5 * static_cast<double>(start + stop + 1);  // 1-based average
    xs.push_back(sorted[start]);
    ps.push_back((rank - 0.375) / denom);
    start = stop;
  }
  out.x = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  out.p = Eigen::Map<Eigen::VectorXd>(ps.data(), static_cast<Eigen::Index>(ps.size()));
  out.s = out.p.unaryExpr([](double p) { return normal_quantile(p); });
  return out;
}

// Whitens a vector of per-block residual values against the asymptotic
// covariance of empirical normal quantiles, Cov(s_i, s_j) =
// p_i(1 - p_j) / ((n + 2) phi_i phi_j) for i <= j. The underlying process is
// Markov (a Brownian bridge after the delta method), so the precision matrix
// is tridiagonal and the whitener is a lower-bidiagonal transform.
Eigen::VectorXd whiten_block_values(const ScoreBlocks& blocks, double n_obs,
                                    const Eigen::VectorXd& values) {
  const Eigen::Index m = blocks.p.size();
  const double root_n2 = std::sqrt(n_obs + 2.0);
  Eigen::VectorXd phi = blocks.s.unaryExpr([](double s) { return normal_pdf(s); });
  Eigen::VectorXd out(m);
  out[0] = values[0] * phi[0] * root_n2 /
           std::sqrt(blocks.p[0] * (1.0 - blocks.p[0]));
  for (Eigen::Index i = 1; i < m; ++i) {
    const double carry = (1.0 - blocks.p[i]) / (1.0 - blocks.p[i - 1]);
    const double cond_sd =
        std::sqrt((1.0 - blocks.p[i]) * (blocks.p[i] - blocks.p[i - 1]) /
                  (1.0 - blocks.p[i - 1]));
    out[i] = (values[i] * phi[i] - values[i - 1] * phi[i - 1] * carry) * root_n2 / cond_sd;
  }
  return out;
}

}  // namespace

AicSelection aic_select_basis(const Eigen::VectorXd& x_column, int min_basis, int max_basis) {
  const auto n = x_column.size();
  require(n >= 10, ErrorCode::invalid_argument, "aic: need at least ten observations");
  require(min_basis >= 4 && max_basis >= min_basis, ErrorCode::invalid_argument,
          "aic: invalid basis-count range");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(x_column[i] >= 0.0 && x_column[i] <= 1.0, ErrorCode::data_error,
            "aic: data outside the unit interval");
  }
  const ScoreBlocks blocks = score_blocks(x_column);
  const Eigen::Index m = blocks.x.size();
  require(m >= 10, ErrorCode::data_error, "aic: need at least ten distinct values");
  const double n_obs = static_cast<double>(n);

  // The transformed fitted values match the normal scores only up to the free
  // latent location and scale, so both are profiled out: whiten the constant
  // and score directions and project them from the whitened design. The score
  // target itself then projects to zero and the fit becomes the pure
  // constrained quadratic program over the GLS-centered design.
  Eigen::VectorXd e1 = whiten_block_values(blocks, n_obs, Eigen::VectorXd::Ones(m));
  e1.normalize();
  Eigen::VectorXd e2 = whiten_block_values(blocks, n_obs, blocks.s);
  e2 -= e1 * e1.dot(e2);
  e2.normalize();

  AicSelection out;
  double best = std::numeric_limits<double>::infinity();
  for (int j = min_basis; j <= max_basis; ++j) {
    double score = std::numeric_limits<double>::infinity();
    // Keep enough residual degrees of freedom for the deviance to be
    // meaningful; larger counts would let the spline chase the rank noise.
    if (static_cast<Eigen::Index>(j) > m - 4) break;
    try {
      const BasisSpec spec = build_basis(j);
      const ConstraintSystem system = constraint_system(spec);
      Eigen::MatrixXd design(m, spec.num_basis);
      for (Eigen::Index i = 0; i < m; ++i) {
        design.row(i) = eval_basis(spec, blocks.x[i]).transpose();
      }
      for (Eigen::Index col = 0; col < design.cols(); ++col) {
        design.col(col) = whiten_block_values(blocks, n_obs, design.col(col));
      }
      design -= e1 * (e1.transpose() * design);
      design -= e2 * (e2.transpose() * design);
      const Eigen::VectorXd theta = fit_monotone_spline_qp(design, system);
      const double deviance = (design * theta).squaredNorm();
      if (deviance > 0.0) {
        score = static_cast<double>(m) * std::log(deviance) + 2.0 * j;
      }
    } catch (const Error&) {
      // Leave the score infinite; the scan continues past isolated failures.
    }
    out.tried.push_back(j);
    out.aic.push_back(score);
    if (score < best) {
      best = score;
      out.selected = j;
    } else if (out.selected > 0 && j - out.selected >= 10) {
      break;  // ten consecutive values above the running minimum
    }
  }
  require(out.selected > 0, ErrorCode::numeric_failure,
          "aic: every basis count failed to fit");
  return out;
}

}  // namespace npgraph
