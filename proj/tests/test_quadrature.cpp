#include <doctest.h>

#include <cmath>
#include <functional>

#include "common.hpp"
#include "quadrature.hpp"
#include "stats.hpp"

using npgraph::gauss_hermite;
using npgraph::gauss_hermite_normal_expectation;
using npgraph::QuadratureRule;

namespace {

// Independent oracle: adaptive Simpson integration of f(z) phi(z) over
// [-12, 12], which loses at most ~1e-32 of normal mass.
double simpson(const std::function<double(double)>& g, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = g(lm), frm = g(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(g, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
         simpson(g, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double normal_expectation_oracle(const std::function<double(double)>& f) {
  auto g = [&](double z) { return f(z) * npgraph::normal_pdf(z); };
  const double a = -12.0, b = 12.0, m = 0.0;
  const double fa = g(a), fm = g(m), fb = g(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson(g, a, b, fa, fm, fb, whole, 1e-13, 48);
}

}  // namespace

TEST_CASE("nodes are ascending, symmetric, with positive weights summing to sqrt(pi)") {
  for (int n : {1, 2, 5, 20, 40}) {
    const QuadratureRule rule = gauss_hermite(n);
    REQUIRE(rule.nodes.size() == n);
    REQUIRE(rule.weights.size() == n);
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
      if (i > 0) CHECK(rule.nodes[i] > rule.nodes[i - 1]);
      CHECK(rule.weights[i] > 0.0);
      CHECK(rule.nodes[i] == doctest::Approx(-rule.nodes[n - 1 - i]).epsilon(1e-12));
      wsum += rule.weights[i];
    }
    CHECK(wsum == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-13));
  }
}

TEST_CASE("polynomial moments are exact up to degree 2n-1") {
  // E[z^k] for standard normal: 0 odd, (k-1)!! even.
  const QuadratureRule rule = gauss_hermite(20);
  double dfact = 1.0;  // (k-1)!! running product for even k
  for (int k = 0; k <= 39; ++k) {
    const double got =
        gauss_hermite_normal_expectation(rule, [k](double z) { return std::pow(z, k); });
    if (k % 2 == 1) {
      // Odd moments vanish by cancellation of huge symmetric terms, so the
      // achievable absolute error scales with the magnitude of those terms
      // (roughly the neighboring even moment). A genuinely wrong rule would
      // miss by a relative O(1) amount.
      CHECK(std::abs(got) < 1e-9 * std::max(1.0, dfact * k));
    } else {
      if (k > 0) dfact *= (k - 1);
      CHECK(got == doctest::Approx(dfact).epsilon(1e-10));
    }
  }
}

TEST_CASE("known closed forms") {
  const QuadratureRule rule = gauss_hermite(40);
  CHECK(gauss_hermite_normal_expectation(rule, [](double z) { return std::cos(z); }) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(gauss_hermite_normal_expectation(rule, [](double z) { return std::exp(z); }) ==
        doctest::Approx(std::exp(0.5)).epsilon(1e-12));
}

TEST_CASE("converges to adaptive Simpson on smooth non-polynomial integrands") {
  // These are not polynomials, so a fixed rule carries real error (~1e-5 at
  // 20 nodes for sqrt(1+z^2), whose complex branch points slow convergence).
  // Correctness shows as convergence toward the oracle with the node count.
  auto probit_sigmoid = [](double z) { return npgraph::normal_cdf(1.7 * z - 0.3); };
  auto soft_abs = [](double z) { return std::sqrt(1.0 + z * z); };
  auto bounded_wiggle = [](double z) { return std::tanh(z) * std::sin(0.8 * z + 1.0); };
  const QuadratureRule coarse = gauss_hermite(20);
  const QuadratureRule dense = gauss_hermite(60);
  for (auto& f : {std::function<double(double)>(probit_sigmoid),
                  std::function<double(double)>(soft_abs),
                  std::function<double(double)>(bounded_wiggle)}) {
    const double oracle = normal_expectation_oracle(f);
    const double got20 = gauss_hermite_normal_expectation(coarse, f);
    const double got60 = gauss_hermite_normal_expectation(dense, f);
    CHECK(std::abs(got20 - oracle) < 1e-4);
    CHECK(std::abs(got60 - oracle) < 5e-8);
    CHECK(std::abs(got60 - oracle) < 0.1 * std::abs(got20 - oracle) + 1e-15);
  }
}

TEST_CASE("rejects non-positive node counts") {
  CHECK_THROWS_AS(gauss_hermite(0), npgraph::Error);
  CHECK_THROWS_AS(gauss_hermite(-3), npgraph::Error);
}
