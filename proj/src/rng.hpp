#pragma once

#include <cstdint>
#include <random>

namespace npgraph {

// Seeded random stream with self-contained distribution transforms.
// Draws depend only on the seed and the call sequence, never on the
// standard library's distribution internals, so output files are
// reproducible byte-for-byte for a fixed seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Derives an independent stream from a master seed and a stream index.
  static Rng split(std::uint64_t master_seed, std::uint64_t stream);

  // The seed such that Rng(seed) equals split(master_seed, stream).
  static std::uint64_t split_seed(std::uint64_t master_seed, std::uint64_t stream);

  std::uint64_t raw() { return engine_(); }

  // Uniform on the open interval (0,1).
  double uniform();

  // Standard normal via Box-Muller.
  double normal();

  // Gamma with given shape and rate (Marsaglia-Tsang).
  double gamma(double shape, double rate);

  // Inverse gamma: reciprocal of gamma(shape, rate=scale_b).
  double inv_gamma(double shape, double scale_b);

  double beta(double a, double b);

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace npgraph
