#include "simulate.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>

#include "common.hpp"
#include "stats.hpp"

namespace npgraph {

namespace {

constexpr double kEulerGamma = 0.57721566490153286;

double column_sd(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  const double ss = (v.array() - mean).square().sum();
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

Structure parse_structure(const std::string& name) {
  if (name == "percent") return Structure::percent;
  if (name == "ar1") return Structure::ar1;
  if (name == "circle") return Structure::circle;
  fail(ErrorCode::invalid_argument,
       "unknown structure '" + name + "' (valid: percent, ar1, circle)");
}

TransformFamily parse_transform(const std::string& name) {
  if (name == "normal") return TransformFamily::normal_cdf;
  if (name == "logistic") return TransformFamily::logistic_cdf;
  if (name == "gumbel") return TransformFamily::gumbel_cdf;
  if (name == "power") return TransformFamily::power;
  fail(ErrorCode::invalid_argument,
       "unknown transform '" + name + "' (valid: normal, logistic, gumbel, power)");
}

std::string structure_name(Structure s) {
  switch (s) {
    case Structure::percent: return "percent";
    case Structure::ar1: return "ar1";
    case Structure::circle: return "circle";
  }
  fail(ErrorCode::internal_error, "unreachable structure tag");
}

std::string transform_name(TransformFamily t) {
  switch (t) {
    case TransformFamily::normal_cdf: return "normal";
    case TransformFamily::logistic_cdf: return "logistic";
    case TransformFamily::gumbel_cdf: return "gumbel";
    case TransformFamily::power: return "power";
  }
  fail(ErrorCode::internal_error, "unreachable transform tag");
}

Eigen::MatrixXd gen_precision(Structure structure, int p, double fraction, Rng& rng) {
  require(p >= 2, ErrorCode::invalid_argument, "generator: need p >= 2");
  Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(p, p);
  switch (structure) {
    case Structure::circle: {
      omega.diagonal().setConstant(2.0);
      for (int i = 1; i < p; ++i) {
        omega(i, i - 1) = 1.0;
        omega(i - 1, i) = 1.0;
      }
      omega(0, p - 1) = 0.9;
      omega(p - 1, 0) = 0.9;
      return omega;
    }
    case Structure::ar1: {
      omega.diagonal().setConstant(2.9216);
      omega(0, 0) = 1.9608;
      omega(p - 1, p - 1) = 1.9608;
      for (int i = 1; i < p; ++i) {
        omega(i, i - 1) = -1.3725;
        omega(i - 1, i) = -1.3725;
      }
      return omega;
    }
    case Structure::percent: {
      require(fraction > 0.0 && fraction < 1.0, ErrorCode::invalid_argument,
              "generator: sparsity fraction must lie in (0,1)");
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(p, p);
      for (int i = 0; i < p; ++i) t(i, i) = 1.0 + 0.1 * rng.normal();
      // Choose an exact count of lower-triangular positions for the support.
      std::vector<std::pair<int, int>> slots;
      slots.reserve(static_cast<std::size_t>(p * (p - 1) / 2));
      for (int i = 1; i < p; ++i) {
        for (int j = 0; j < i; ++j) slots.emplace_back(i, j);
      }
      const auto want = static_cast<std::size_t>(
          std::ceil(fraction * static_cast<double>(slots.size())));
      for (std::size_t k = 0; k < want; ++k) {
        const std::size_t pick = k + rng.below(slots.size() - k);
        std::swap(slots[k], slots[pick]);
        t(slots[k].first, slots[k].second) = rng.normal();
      }
      omega = t * t.transpose();
      return omega;
    }
  }
  fail(ErrorCode::internal_error, "unreachable structure tag");
}

Eigen::MatrixXd gen_precision(Structure structure, int p, double fraction, std::uint64_t seed) {
  Rng rng(seed);
  return gen_precision(structure, p, fraction, rng);
}

Dataset gen_dataset(const Scenario& scenario) {
  require(scenario.n >= 2, ErrorCode::invalid_argument, "generator: need n >= 2");
  require(!scenario.transforms.empty(), ErrorCode::invalid_argument,
          "generator: need at least one transform family");
  require(scenario.power_m >= 1 && scenario.power_m <= 5, ErrorCode::invalid_argument,
          "generator: power exponent must be an integer in [1, 5]");

  Rng rng(scenario.seed);
  Dataset data;
  data.omega = gen_precision(scenario.structure, scenario.p, scenario.sparsity_fraction, rng);
  const int p = scenario.p;
  const int n = scenario.n;

  data.truth = Eigen::MatrixXi::Zero(p, p);
  for (int a = 0; a < p; ++a) {
    for (int b = 0; b < p; ++b) {
      if (a != b && data.omega(a, b) != 0.0) data.truth(a, b) = 1;
    }
  }

  // Latent Gaussian layer: mean on the equally spaced grid over [1, 2],
  // covariance the inverse of the generating precision.
  Eigen::VectorXd mu(p);
  for (int d = 0; d < p; ++d) {
    mu[d] = p == 1 ? 1.0 : 1.0 + static_cast<double>(d) / static_cast<double>(p - 1);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(data.omega);
  require(llt.info() == Eigen::Success, ErrorCode::numeric_failure,
          "generator: precision matrix is not positive definite");
  data.y_latent.resize(n, p);
  Eigen::VectorXd z(p);
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < p; ++d) z[d] = rng.normal();
    data.y_latent.row(i) = (mu + llt.matrixU().solve(z)).transpose();
  }

  // Observation maps, one per column, moment-matched to that column.
  data.x.resize(n, p);
  data.transforms.reserve(static_cast<std::size_t>(p));
  for (int d = 0; d < p; ++d) {
    const TransformFamily family =
        scenario.transforms[static_cast<std::size_t>(d) % scenario.transforms.size()];
    const Eigen::VectorXd y = data.y_latent.col(d);
    const double mean = y.mean();
    const double sd = column_sd(y);
    require(sd > 0.0, ErrorCode::numeric_failure, "generator: degenerate latent column");

    TransformRecord record;
    record.family = family;
    switch (family) {
      case TransformFamily::normal_cdf: {
        record.location = mean;
        record.scale = sd;
        for (int i = 0; i < n; ++i) data.x(i, d) = normal_cdf((y[i] - mean) / sd);
        break;
      }
      case TransformFamily::logistic_cdf: {
        record.location = mean;
        record.scale = sd * std::sqrt(3.0) / M_PI;
        for (int i = 0; i < n; ++i) {
          data.x(i, d) = 1.0 / (1.0 + std::exp(-(y[i] - record.location) / record.scale));
        }
        break;
      }
      case TransformFamily::gumbel_cdf: {
        record.scale = sd * std::sqrt(6.0) / M_PI;
        record.location = mean - kEulerGamma * record.scale;
        for (int i = 0; i < n; ++i) {
          data.x(i, d) = std::exp(-std::exp(-(y[i] - record.location) / record.scale));
        }
        break;
      }
      case TransformFamily::power: {
        record.location = mean;
        record.scale = sd;
        record.power_m = scenario.power_m;
        const double inv_m = 1.0 / static_cast<double>(scenario.power_m);
        for (int i = 0; i < n; ++i) {
          data.x(i, d) = std::pow(normal_cdf((y[i] - mean) / sd), inv_m);
        }
        break;
      }
    }
    data.transforms.push_back(record);
  }
  return data;
}

}  // namespace npgraph
