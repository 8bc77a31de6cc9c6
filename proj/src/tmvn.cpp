#include "tmvn.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "common.hpp"

namespace npgraph {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// Earliest root of  alpha sin t + beta cos t + offset = 0  with t > lo,
// or +inf when the wall is never reached. The linear combination equals
// r cos(t - psi) with r = hypot(alpha, beta), psi = atan2(alpha, beta).
double earliest_hit(double alpha, double beta, double offset, double lo) {
  const double r = std::hypot(alpha, beta);
  if (r < std::abs(offset)) return std::numeric_limits<double>::infinity();
  const double psi = std::atan2(alpha, beta);
  const double theta = std::acos(std::clamp(-offset / r, -1.0, 1.0));
  double best = std::numeric_limits<double>::infinity();
  for (double t : {psi + theta, psi - theta}) {
    t = std::fmod(t, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t <= lo) t += kTwoPi;
    best = std::min(best, t);
  }
  return best;
}

}  // namespace

ExactHmcSampler::ExactHmcSampler(const TruncatedGaussian& target, const Eigen::VectorXd& init,
                                 HmcOptions options)
    : mean_(target.mean), options_(options) {
  const auto k = target.precision.rows();
  require(k > 0 && target.precision.cols() == k, ErrorCode::invalid_argument,
          "hmc: precision must be square and non-empty");
  require(target.mean.size() == k, ErrorCode::invalid_argument,
          "hmc: mean dimension does not match precision");
  require(init.size() == k, ErrorCode::invalid_argument,
          "hmc: initial point dimension does not match precision");
  const double sym_gap = (target.precision - target.precision.transpose()).cwiseAbs().maxCoeff();
  require(sym_gap <= 1e-8 * std::max(1.0, target.precision.cwiseAbs().maxCoeff()),
          ErrorCode::invalid_argument, "hmc: precision matrix is not symmetric");
  require(options_.travel_time > 0.0, ErrorCode::invalid_argument,
          "hmc: travel time must be positive");

  chol_.compute(target.precision);
  require(chol_.info() == Eigen::Success, ErrorCode::numeric_failure,
          "hmc: precision matrix is not positive definite");

  const auto m = target.constraint_normals.rows();
  require(target.constraint_offsets.size() == m, ErrorCode::invalid_argument,
          "hmc: constraint offsets do not match constraint rows");
  if (m > 0) {
    require(target.constraint_normals.cols() == k, ErrorCode::invalid_argument,
            "hmc: constraint columns do not match dimension");
    const Eigen::VectorXd slack =
        target.constraint_normals * init + target.constraint_offsets;
    require(slack.minCoeff() > 0.0, ErrorCode::invalid_argument,
            "hmc: initial point is not strictly feasible");
    // F U^{-1} where precision = U' U; solve L Y = F' and transpose.
    white_normals_ =
        chol_.matrixL().solve(target.constraint_normals.transpose()).transpose();
    white_offsets_ = target.constraint_offsets + target.constraint_normals * mean_;
    normal_sq_ = white_normals_.rowwise().squaredNorm();
  } else {
    white_normals_.resize(0, k);
    white_offsets_.resize(0);
    normal_sq_.resize(0);
  }

  z_ = chol_.matrixU() * (init - mean_);
  current_ = init;
}

const Eigen::VectorXd& ExactHmcSampler::step(Rng& rng) {
  const auto k = z_.size();
  const auto m = white_normals_.rows();
  Eigen::VectorXd a(k);
  for (Eigen::Index i = 0; i < k; ++i) a[i] = rng.normal();
  Eigen::VectorXd b = z_;

  double remaining = options_.travel_time;
  int reflections = 0;
  while (true) {
    // Locate the earliest wall crossing along z(t) = a sin t + b cos t.
    double t_hit = std::numeric_limits<double>::infinity();
    Eigen::Index hit_row = -1;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double t = earliest_hit(white_normals_.row(i).dot(a), white_normals_.row(i).dot(b),
                                    white_offsets_[i], options_.hit_time_tolerance);
      if (t < t_hit) {
        t_hit = t;
        hit_row = i;
      }
    }

    if (t_hit >= remaining) {
      if (observer_) observer_(a, b, remaining);
      const double s = std::sin(remaining);
      const double c = std::cos(remaining);
      z_ = a * s + b * c;
      break;
    }

    if (observer_) observer_(a, b, t_hit);
    const double s = std::sin(t_hit);
    const double c = std::cos(t_hit);
    Eigen::VectorXd position = a * s + b * c;
    Eigen::VectorXd velocity = a * c - b * s;

    // Resolve the event. Reflect off the wall that was hit; then, because
    // several non-orthogonal walls can meet at the event point (corners and
    // walls whose own crossing lies inside the hit tolerance, which the
    // root search would skip next segment), keep reflecting while any wall
    // at the point still sees outward motion, and push the position back
    // inside if roundoff left it marginally beyond a wall.
    velocity -= white_normals_.row(hit_row).transpose() *
                (2.0 * white_normals_.row(hit_row).dot(velocity) / normal_sq_[hit_row]);
    ++reflections;
    for (int guard = 0; guard < 32; ++guard) {
      Eigen::Index worst = -1;
      double worst_rate = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        double slack = white_normals_.row(i).dot(position) + white_offsets_[i];
        const double rate = white_normals_.row(i).dot(velocity);
        const double touch = 1e-11 * (1.0 + std::abs(white_offsets_[i])) +
                             std::abs(rate) * options_.hit_time_tolerance;
        if (slack < -touch) {
          position -= white_normals_.row(i).transpose() * (slack / normal_sq_[i]);
          slack = 0.0;
        }
        if (slack < touch && rate < worst_rate) {
          worst_rate = rate;
          worst = i;
        }
      }
      if (worst < 0) break;
      velocity -= white_normals_.row(worst).transpose() *
                  (2.0 * white_normals_.row(worst).dot(velocity) / normal_sq_[worst]);
      ++reflections;
    }
    require(reflections <= options_.max_reflections, ErrorCode::numeric_failure,
            "hmc: reflection count exceeded limit within one trajectory");

    a = velocity;
    b = position;
    remaining -= t_hit;
  }
  diagnostics_.reflections += reflections;

  // Guard against roundoff leaving the point on, or on the wrong side of, a
  // wall. Walls share coordinates, so fixing one can disturb a neighbour;
  // repeat until a pass leaves every slack at or above its floor.
  for (int pass = 0; pass < 4; ++pass) {
    bool touched = false;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double w = white_normals_.row(i).dot(z_) + white_offsets_[i];
      const double eps = 1e-12 * (1.0 + std::abs(white_offsets_[i]));
      if (w < eps) {
        z_ += white_normals_.row(i).transpose() * ((eps - w) / normal_sq_[i]);
        ++diagnostics_.boundary_projections;
        touched = true;
      }
    }
    if (!touched) break;
  }

  current_ = mean_ + chol_.matrixU().solve(z_);
  return current_;
}

std::vector<Eigen::VectorXd> sample_exact_hmc(const TruncatedGaussian& target,
                                              const Eigen::VectorXd& init, int n_samples,
                                              double travel_time, std::uint64_t rng_seed) {
  require(n_samples >= 0, ErrorCode::invalid_argument, "hmc: n_samples must be non-negative");
  HmcOptions options;
  options.travel_time = travel_time;
  ExactHmcSampler sampler(target, init, options);
  Rng rng(rng_seed);
  std::vector<Eigen::VectorXd> draws;
  draws.reserve(static_cast<std::size_t>(n_samples));
  for (int s = 0; s < n_samples; ++s) draws.push_back(sampler.step(rng));
  return draws;
}

std::vector<Eigen::VectorXd> sample_rejection_oracle(const TruncatedGaussian& target, int n_samples,
                                                     std::uint64_t rng_seed, long max_attempts) {
  require(n_samples >= 0, ErrorCode::invalid_argument,
          "rejection: n_samples must be non-negative");
  require(max_attempts > 0, ErrorCode::invalid_argument,
          "rejection: max_attempts must be positive");
  const auto k = target.precision.rows();
  Eigen::LLT<Eigen::MatrixXd> chol(target.precision);
  require(chol.info() == Eigen::Success, ErrorCode::numeric_failure,
          "rejection: precision matrix is not positive definite");

  Rng rng(rng_seed);
  std::vector<Eigen::VectorXd> draws;
  draws.reserve(static_cast<std::size_t>(n_samples));
  Eigen::VectorXd z(k);
  long consecutive_rejects = 0;
  while (static_cast<int>(draws.size()) < n_samples) {
    for (Eigen::Index i = 0; i < k; ++i) z[i] = rng.normal();
    Eigen::VectorXd x = target.mean + chol.matrixU().solve(z);
    const bool feasible =
        target.constraint_normals.rows() == 0 ||
        (target.constraint_normals * x + target.constraint_offsets).minCoeff() > 0.0;
    if (feasible) {
      draws.push_back(std::move(x));
      consecutive_rejects = 0;
    } else if (++consecutive_rejects > max_attempts) {
      fail(ErrorCode::numeric_failure, "rejection: acceptance rate too low for oracle sampling");
    }
  }
  return draws;
}

}  // namespace npgraph
