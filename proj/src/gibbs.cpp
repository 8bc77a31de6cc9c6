#include "gibbs.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <string>

#include "common.hpp"

namespace npgraph {

namespace {

constexpr double kUnitClamp = 1e-10;

[[noreturn]] void rethrow_with_context(const Error& e, int sweep, const char* step, int variable) {
  std::string msg = "chain failed at sweep " + std::to_string(sweep) + ", step " + step;
  if (variable >= 0) msg += ", variable " + std::to_string(variable + 1);
  fail(e.code(), msg + ": " + e.what());
}

}  // namespace

VariableModel make_variable_model(const BasisSpec& spec, const ConstraintSystem& system,
                                  const TransformPrior& prior, const Eigen::VectorXd& x_column) {
  const int j = spec.num_basis;
  require(prior.xi_bar.size() == j - 2, ErrorCode::invalid_argument,
          "variable model: prior does not match basis count");

  VariableModel model;
  model.spec = spec;
  model.system = system;
  model.prior = prior;

  const auto n = x_column.size();
  Eigen::MatrixXd pivot_cols(n, 2);
  model.reduced_design.resize(n, j - 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd row = eval_basis(spec, x_column[i]);
    pivot_cols(i, 0) = row[system.pivots[0]];
    pivot_cols(i, 1) = row[system.pivots[1]];
    Eigen::Index col = 0;
    for (int k = 0; k < j; ++k) {
      if (k != system.pivots[0] && k != system.pivots[1]) {
        model.reduced_design(i, col++) = row[k];
      }
    }
  }
  model.reduced_design += pivot_cols * system.pivot_map;
  model.design_offset = pivot_cols * system.pivot_offset;
  model.gram = model.reduced_design.transpose() * model.reduced_design;

  Eigen::LLT<Eigen::MatrixXd> llt(prior.gamma_bar);
  require(llt.info() == Eigen::Success, ErrorCode::numeric_failure,
          "variable model: reduced prior covariance not positive definite");
  model.prior_precision = llt.solve(Eigen::MatrixXd::Identity(j - 2, j - 2));
  model.prior_linear = llt.solve(prior.xi_bar);
  return model;
}

TruncatedGaussian theta_conditional(const VariableModel& model, int d, const Eigen::MatrixXd& y,
                                    const Eigen::VectorXd& mu, const Eigen::MatrixXd& omega) {
  const auto p = omega.rows();
  require(d >= 0 && d < p, ErrorCode::invalid_argument, "theta update: variable index out of range");
  const double omega_dd = omega(d, d);
  require(omega_dd > 0.0, ErrorCode::numeric_failure,
          "theta update: non-positive conditional precision (state corruption)");

  TruncatedGaussian target;
  target.precision = omega_dd * model.gram + model.prior_precision;
  target.constraint_normals = model.system.reduced_monotone;
  target.constraint_offsets = model.system.reduced_offset;

  Eigen::VectorXd linear = model.prior_linear;
  const auto n = y.rows();
  if (n > 0) {
    // delta_i = mu_d - sum_{e != d} (omega_de / omega_dd) (y_ie - mu_e)
    Eigen::VectorXd w = omega.col(d) / omega_dd;
    w[d] = 0.0;
    const Eigen::VectorXd delta =
        Eigen::VectorXd::Constant(n, mu[d]) -
        ((y.rowwise() - mu.transpose()) * w);
    linear -= omega_dd *
              (model.reduced_design.transpose() * (model.design_offset - delta));
  }

  Eigen::LLT<Eigen::MatrixXd> llt(target.precision);
  require(llt.info() == Eigen::Success, ErrorCode::numeric_failure,
          "theta update: conditional precision not positive definite");
  target.mean = llt.solve(linear);
  return target;
}

Eigen::VectorXd sample_mu(const Eigen::MatrixXd& y, const Eigen::MatrixXd& omega, Rng& rng) {
  const auto n = y.rows();
  const auto p = y.cols();
  require(n >= 1, ErrorCode::invalid_argument, "mu update: need at least one observation");
  require(omega.rows() == p && omega.cols() == p, ErrorCode::invalid_argument,
          "mu update: precision shape mismatch");
  Eigen::LLT<Eigen::MatrixXd> llt(omega);
  require(llt.info() == Eigen::Success, ErrorCode::numeric_failure,
          "mu update: precision not positive definite");
  Eigen::VectorXd z(p);
  for (Eigen::Index i = 0; i < p; ++i) z[i] = rng.normal();
  return y.colwise().mean().transpose() +
         llt.matrixU().solve(z) / std::sqrt(static_cast<double>(n));
}

ChainOutput run_chain(const Eigen::MatrixXd& x, const ChainConfig& config) {
  const auto n = x.rows();
  const auto p = x.cols();
  require(n >= 2 && p >= 2, ErrorCode::invalid_argument,
          "chain: need at least two rows and two columns");
  require(config.n_burn >= 0 && config.n_keep >= 1, ErrorCode::invalid_argument,
          "chain: burn-in must be non-negative and kept sweeps positive");
  require(config.thinning >= 1 && config.hmc_trajectories >= 1, ErrorCode::invalid_argument,
          "chain: thinning and trajectory counts must be positive");
  require(config.basis_counts.empty() ||
              config.basis_counts.size() == static_cast<std::size_t>(p),
          ErrorCode::invalid_argument,
          "chain: basis-count override must list one count per variable");

  Eigen::MatrixXd xc = x;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index d = 0; d < p; ++d) {
      require(std::isfinite(xc(i, d)) && xc(i, d) >= 0.0 && xc(i, d) <= 1.0,
              ErrorCode::data_error,
              "chain: data must lie in the unit interval (row " + std::to_string(i + 1) +
                  ", column " + std::to_string(d + 1) + ")");
      xc(i, d) = std::min(1.0 - kUnitClamp, std::max(kUnitClamp, xc(i, d)));
    }
  }

  Rng rng(config.seed);

  // Per-variable setup: basis count, constraints, prior, reduced design.
  std::vector<VariableModel> models;
  std::vector<Eigen::VectorXd> theta_bar(static_cast<std::size_t>(p));
  models.reserve(static_cast<std::size_t>(p));
  Eigen::MatrixXd y(n, p);
  for (Eigen::Index d = 0; d < p; ++d) {
    try {
      int j = 0;
      if (!config.basis_counts.empty()) {
        j = config.basis_counts[static_cast<std::size_t>(d)];
        require(j >= 4, ErrorCode::invalid_argument, "chain: basis counts must be at least 4");
      } else {
        j = aic_select_basis(xc.col(d), config.min_basis, config.max_basis).selected;
      }
      const BasisSpec spec = build_basis(j);
      const ConstraintSystem system = constraint_system(spec);
      const TransformPrior prior = condition_prior(
          prior_mean_zeta(j, config.prior_nu, config.prior_tau), config.prior_sigma2, system);
      models.push_back(make_variable_model(spec, system, prior, xc.col(d)));

      const Eigen::VectorXd theta0 =
          init_coeffs_quadrature(spec, system, config.quadrature_nodes);
      theta_bar[static_cast<std::size_t>(d)] = reduce_coefficients(system, theta0);
      y.col(d) = models.back().reduced_design * theta_bar[static_cast<std::size_t>(d)] +
                 models.back().design_offset;
    } catch (const Error& e) {
      rethrow_with_context(e, 0, "initialization", static_cast<int>(d));
    }
  }

  // Moment-based starting values for mu and Omega.
  Eigen::VectorXd mu = y.colwise().mean().transpose();
  Eigen::MatrixXd centered = y.rowwise() - mu.transpose();
  Eigen::MatrixXd sigma = centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::LLT<Eigen::MatrixXd> sigma_llt(sigma);
  if (sigma_llt.info() != Eigen::Success) {
    sigma += 1e-6 * Eigen::MatrixXd::Identity(p, p);
    sigma_llt.compute(sigma);
    require(sigma_llt.info() == Eigen::Success, ErrorCode::numeric_failure,
            "chain: initial covariance is not positive definite");
  }
  PrecisionState state =
      make_precision_state(sigma_llt.solve(Eigen::MatrixXd::Identity(p, p)), config.hyper);

  ChainOutput out;
  out.edge_mean = Eigen::MatrixXd::Zero(p, p);
  out.omega_mean = Eigen::MatrixXd::Zero(p, p);
  out.z_bar = Eigen::MatrixXd::Zero(n, p);
  out.theta_mean.assign(static_cast<std::size_t>(p), Eigen::VectorXd());
  out.basis_counts.resize(static_cast<std::size_t>(p));
  for (Eigen::Index d = 0; d < p; ++d) {
    const auto& model = models[static_cast<std::size_t>(d)];
    out.basis_counts[static_cast<std::size_t>(d)] = model.spec.num_basis;
    out.theta_mean[static_cast<std::size_t>(d)] = Eigen::VectorXd::Zero(model.spec.num_basis);
  }

  const int total_sweeps = config.n_burn + config.n_keep * config.thinning;
  Eigen::MatrixXd z(n, p);
  HmcOptions hmc_options;
  hmc_options.travel_time = config.hmc_travel_time;
  int kept = 0;
  for (int sweep = 0; sweep < total_sweeps; ++sweep) {
    // (1) spline coefficients, one variable at a time on fresh latent data
    for (Eigen::Index d = 0; d < p; ++d) {
      auto& model = models[static_cast<std::size_t>(d)];
      auto& theta = theta_bar[static_cast<std::size_t>(d)];
      try {
        const TruncatedGaussian target =
            theta_conditional(model, static_cast<int>(d), y, mu, state.omega);
        ExactHmcSampler hmc(target, theta, hmc_options);
        for (int t = 0; t < config.hmc_trajectories; ++t) hmc.step(rng);
        theta = hmc.current();
        // The state must stay strictly inside the cone in the exact
        // arithmetic the next sweep's feasibility check performs; nudge any
        // wall whose slack sits below the roundoff floor.
        for (int pass = 0; pass < 4; ++pass) {
          const Eigen::VectorXd slack =
              target.constraint_normals * theta + target.constraint_offsets;
          bool clean = true;
          for (Eigen::Index r = 0; r < slack.size(); ++r) {
            const double eps = 1e-10 * (1.0 + std::abs(target.constraint_offsets[r]));
            if (slack[r] < eps) {
              theta += target.constraint_normals.row(r).transpose() *
                       ((eps - slack[r]) /
                        target.constraint_normals.row(r).squaredNorm());
              clean = false;
            }
          }
          if (clean) break;
        }
        y.col(d) = model.reduced_design * theta + model.design_offset;
      } catch (const Error& e) {
        rethrow_with_context(e, sweep + 1, "transformation update", static_cast<int>(d));
      }
    }

    // (2) mean vector and centered latent data
    try {
      mu = sample_mu(y, state.omega, rng);
    } catch (const Error& e) {
      rethrow_with_context(e, sweep + 1, "mean update", -1);
    }
    z = y.rowwise() - mu.transpose();

    // (3) precision matrix, edges, slab variances, edge probability
    try {
      update_precision_sweep(state, z.transpose() * z, static_cast<int>(n), rng);
    } catch (const Error& e) {
      rethrow_with_context(e, sweep + 1, "precision update", -1);
    }

    int active = 0;
    for (Eigen::Index a = 0; a < p - 1; ++a) {
      for (Eigen::Index b = a + 1; b < p; ++b) active += state.edges(a, b);
    }
    out.diagnostics.pi_trace.push_back(state.pi_edge);
    out.diagnostics.edge_count_trace.push_back(active);

    const int offset = sweep - config.n_burn;
    if (offset >= 0 && offset % config.thinning == 0) {
      ++kept;
      out.edge_mean += state.edges.cast<double>();
      out.omega_mean += state.omega;
      out.z_bar += z;
      for (Eigen::Index d = 0; d < p; ++d) {
        out.theta_mean[static_cast<std::size_t>(d)] += reconstitute(
            models[static_cast<std::size_t>(d)].system, theta_bar[static_cast<std::size_t>(d)]);
      }
      if (config.keep_omega_samples) out.omega_samples.push_back(state.omega);
    }
  }

  const double denom = static_cast<double>(kept);
  out.edge_mean /= denom;
  out.omega_mean /= denom;
  out.z_bar /= denom;
  for (auto& theta : out.theta_mean) theta /= denom;
  return out;
}

Eigen::MatrixXi median_probability_edges(const Eigen::MatrixXd& edge_mean) {
  const auto p = edge_mean.rows();
  require(edge_mean.cols() == p, ErrorCode::invalid_argument,
          "median model: edge-frequency matrix must be square");
  Eigen::MatrixXi edges = Eigen::MatrixXi::Zero(p, p);
  for (Eigen::Index d = 0; d < p; ++d) {
    for (Eigen::Index k = 0; k < p; ++k) {
      const double value = edge_mean(d, k);
      require(value >= 0.0 && value <= 1.0, ErrorCode::invalid_argument,
              "median model: frequencies must lie in [0, 1]");
      if (d != k && value > 0.5) edges(d, k) = 1;
    }
  }
  return edges;
}

}  // namespace npgraph
