#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <vector>

#include "rng.hpp"

namespace npgraph {

// Multivariate normal restricted to the open polyhedron {x : F x + g > 0},
// parameterized by mean and precision.
struct TruncatedGaussian {
  Eigen::VectorXd mean;
  Eigen::MatrixXd precision;           // k x k symmetric positive definite
  Eigen::MatrixXd constraint_normals;  // F, m x k (m may be zero)
  Eigen::VectorXd constraint_offsets;  // g, length m
};

struct HmcOptions {
  double travel_time = 1.5707963267948966;  // quarter period
  int max_reflections = 10000;
  double hit_time_tolerance = 1e-10;  // wall hits closer than this are merged
};

struct HmcDiagnostics {
  long long reflections = 0;
  long long boundary_projections = 0;
};

// Exact Hamiltonian dynamics for a Gaussian with reflecting linear walls.
// The state is whitened through the Cholesky factor of the precision, the
// trajectory x(t) = a sin t + b cos t is followed in closed form, and wall
// crossings are located analytically, so every proposal is accepted.
class ExactHmcSampler {
 public:
  // Observer called once per trajectory segment with the whitened
  // coefficients (a, b) and the segment duration.
  using SegmentObserver =
      std::function<void(const Eigen::VectorXd&, const Eigen::VectorXd&, double)>;

  ExactHmcSampler(const TruncatedGaussian& target, const Eigen::VectorXd& init,
                  HmcOptions options = {});

  // Runs one trajectory and returns the new (strictly feasible) point.
  const Eigen::VectorXd& step(Rng& rng);

  const Eigen::VectorXd& current() const { return current_; }
  const HmcDiagnostics& diagnostics() const { return diagnostics_; }
  void set_segment_observer(SegmentObserver observer) { observer_ = std::move(observer); }

 private:
  void refresh_feasibility_check() const;

  Eigen::VectorXd mean_;
  Eigen::LLT<Eigen::MatrixXd> chol_;     // precision = L L'
  Eigen::MatrixXd white_normals_;        // F L'^{-1}
  Eigen::VectorXd white_offsets_;        // g + F mean
  Eigen::VectorXd normal_sq_;            // row squared norms of white_normals_
  HmcOptions options_;
  Eigen::VectorXd z_;        // whitened position
  Eigen::VectorXd current_;  // original-space position
  HmcDiagnostics diagnostics_;
  SegmentObserver observer_;
};

// Draws n_samples successive exact-HMC states starting from init.
std::vector<Eigen::VectorXd> sample_exact_hmc(const TruncatedGaussian& target,
                                              const Eigen::VectorXd& init, int n_samples,
                                              double travel_time, std::uint64_t rng_seed);

// Independent draws by rejection from the untruncated Gaussian. Validation
// oracle; fails if fewer than one in max_attempts proposals is feasible.
std::vector<Eigen::VectorXd> sample_rejection_oracle(const TruncatedGaussian& target, int n_samples,
                                                     std::uint64_t rng_seed, long max_attempts);

}  // namespace npgraph
