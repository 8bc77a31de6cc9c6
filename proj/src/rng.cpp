#include "rng.hpp"

#include <cmath>

#include "common.hpp"

namespace npgraph {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t s = seed;
  // Warm the seed through SplitMix64 so nearby seeds give unrelated streams.
  std::seed_seq seq{static_cast<unsigned>(splitmix64(s) >> 32), static_cast<unsigned>(splitmix64(s)),
                    static_cast<unsigned>(splitmix64(s) >> 32), static_cast<unsigned>(splitmix64(s))};
  engine_.seed(seq);
}

Rng Rng::split(std::uint64_t master_seed, std::uint64_t stream) {
  return Rng(split_seed(master_seed, stream));
}

std::uint64_t Rng::split_seed(std::uint64_t master_seed, std::uint64_t stream) {
  std::uint64_t s = master_seed;
  std::uint64_t base = splitmix64(s);
  std::uint64_t t = base ^ (0xA0761D6478BD642Full * (stream + 1));
  return splitmix64(t);
}

double Rng::uniform() {
  // 53-bit mantissa, offset by half an ulp to stay strictly inside (0,1).
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
}

double Rng::gamma(double shape, double rate) {
  require(shape > 0.0 && rate > 0.0, ErrorCode::invalid_argument,
          "gamma draw requires positive shape and rate");
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0, 1.0);
    return g * std::pow(uniform(), 1.0 / shape) / rate;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x;
    double v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * x * x * x * x) return d * v / rate;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double Rng::inv_gamma(double shape, double scale_b) { return 1.0 / gamma(shape, scale_b); }

double Rng::beta(double a, double b) {
  const double x = gamma(a, 1.0);
  const double y = gamma(b, 1.0);
  return x / (x + y);
}

std::uint64_t Rng::below(std::uint64_t n) {
  require(n > 0, ErrorCode::invalid_argument, "below(0) is undefined");
  // Rejection to remove modulo bias.
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % n;
}

}  // namespace npgraph
