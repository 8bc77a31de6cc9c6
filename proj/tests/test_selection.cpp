#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "common.hpp"
#include "model_selection.hpp"
#include "rng.hpp"
#include "simulate.hpp"

using Eigen::MatrixXd;
using Eigen::MatrixXi;
using Eigen::VectorXd;
using npgraph::bic_score;
using npgraph::constrained_gaussian_mle;
using npgraph::PatternMLE;

namespace {

MatrixXd random_scatter(int p, int n, npgraph::Rng& rng) {
  MatrixXd y(n, p);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) y(i, j) = rng.normal();
  // Mild correlation so off-diagonal entries matter.
  for (int i = 0; i < n; ++i)
    for (int j = 1; j < p; ++j) y(i, j) += 0.4 * y(i, j - 1);
  return y.transpose() * y;
}

double pattern_loglik(const MatrixXd& omega, const MatrixXd& s, int n) {
  Eigen::LLT<MatrixXd> llt(omega);
  REQUIRE(llt.info() == Eigen::Success);
  double logdet = 0.0;
  for (int i = 0; i < omega.rows(); ++i) logdet += std::log(llt.matrixL()(i, i));
  return n * 2.0 * logdet - (omega * s).trace();
}

// Generic-optimizer oracle: damped Newton over the free entries of omega,
// with the analytic gradient of n log det(omega) - tr(omega S) and a
// finite-difference Hessian. Knows nothing about the library's iterative
// proportional fitting.
MatrixXd newton_oracle(const MatrixXd& s, int n, const MatrixXi& pattern) {
  const int p = static_cast<int>(s.rows());
  std::vector<std::pair<int, int>> free_entries;
  for (int i = 0; i < p; ++i) free_entries.emplace_back(i, i);
  for (int i = 0; i < p; ++i)
    for (int j = i + 1; j < p; ++j)
      if (pattern(i, j) == 1) free_entries.emplace_back(i, j);
  const int m = static_cast<int>(free_entries.size());

  auto unpack = [&](const VectorXd& th) {
    MatrixXd omega = MatrixXd::Zero(p, p);
    for (int k = 0; k < m; ++k) {
      const auto [i, j] = free_entries[k];
      omega(i, j) = th[k];
      omega(j, i) = th[k];
    }
    return omega;
  };
  auto grad_at = [&](const VectorXd& th) {
    const MatrixXd omega = unpack(th);
    const MatrixXd inv = omega.inverse();
    VectorXd g(m);
    for (int k = 0; k < m; ++k) {
      const auto [i, j] = free_entries[k];
      const double mult = (i == j) ? 1.0 : 2.0;
      g[k] = mult * (n * inv(i, j) - s(i, j));
    }
    return g;
  };

  VectorXd th = VectorXd::Zero(m);
  for (int k = 0; k < p; ++k) th[k] = n / s(k, k);  // diagonal start, PD
  for (int iter = 0; iter < 200; ++iter) {
    const VectorXd g = grad_at(th);
    if (g.lpNorm<Eigen::Infinity>() < 1e-11) break;
    MatrixXd h(m, m);
    const double step = 1e-6;
    for (int k = 0; k < m; ++k) {
      VectorXd hi = th, lo = th;
      hi[k] += step;
      lo[k] -= step;
      h.col(k) = (grad_at(hi) - grad_at(lo)) / (2 * step);
    }
    VectorXd dir = -h.ldlt().solve(g);
    if (!dir.allFinite() || dir.dot(g) >= 0.0) dir = g;  // fall back to ascent
    double t = 1.0;
    const double f0 = pattern_loglik(unpack(th), s, n);
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const VectorXd cand = th + t * dir;
      const MatrixXd omega = unpack(cand);
      Eigen::LLT<MatrixXd> llt(omega);
      if (llt.info() != Eigen::Success) continue;
      double logdet = 0.0;
      for (int i = 0; i < p; ++i) logdet += std::log(llt.matrixL()(i, i));
      if (n * 2.0 * logdet - (omega * s).trace() > f0 - 1e-14) {
        th = cand;
        break;
      }
    }
  }
  return unpack(th);
}

MatrixXi full_pattern(int p) {
  MatrixXi pat = MatrixXi::Ones(p, p);
  return pat;
}

}  // namespace

TEST_CASE("full pattern recovers the unconstrained mle n S^{-1}") {
  npgraph::Rng rng(12);
  for (int p : {2, 4, 6}) {
    const int n = 80;
    const MatrixXd s = random_scatter(p, n, rng);
    const PatternMLE mle = constrained_gaussian_mle(s, n, full_pattern(p));
    const MatrixXd direct = n * s.inverse();
    CHECK((mle.omega_hat - direct).lpNorm<Eigen::Infinity>() <
          1e-8 * direct.lpNorm<Eigen::Infinity>());
    CHECK(mle.stationarity_gap < 1e-6);
  }
}

TEST_CASE("diagonal pattern separates into per-variable problems") {
  npgraph::Rng rng(13);
  const int p = 5, n = 60;
  const MatrixXd s = random_scatter(p, n, rng);
  const PatternMLE mle = constrained_gaussian_mle(s, n, MatrixXi::Identity(p, p));
  for (int i = 0; i < p; ++i) {
    CHECK(mle.omega_hat(i, i) == doctest::Approx(n / s(i, i)).epsilon(1e-9));
    for (int j = 0; j < p; ++j)
      if (i != j) CHECK(mle.omega_hat(i, j) == 0.0);
  }
}

TEST_CASE("single zero constraint matches the generic newton oracle") {
  npgraph::Rng rng(14);
  const int p = 3, n = 50;
  const MatrixXd s = random_scatter(p, n, rng);
  MatrixXi pat = full_pattern(p);
  pat(0, 2) = pat(2, 0) = 0;
  const PatternMLE mle = constrained_gaussian_mle(s, n, pat);
  const MatrixXd oracle = newton_oracle(s, n, pat);
  CHECK((mle.omega_hat - oracle).lpNorm<Eigen::Infinity>() < 1e-6);
  CHECK(mle.omega_hat(0, 2) == 0.0);
  CHECK(mle.omega_hat(2, 0) == 0.0);
}

TEST_CASE("random patterns meet the stationarity contract and the oracle") {
  npgraph::Rng rng(15);
  for (int trial = 0; trial < 10; ++trial) {
    const int p = 3 + static_cast<int>(rng.below(4));  // 3..6
    const int n = 40 + static_cast<int>(rng.below(40));
    const MatrixXd s = random_scatter(p, n, rng);
    MatrixXi pat = full_pattern(p);
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j)
        if (rng.uniform() < 0.5) pat(i, j) = pat(j, i) = 0;
    const PatternMLE mle = constrained_gaussian_mle(s, n, pat);
    // Stationarity: free entries of the inverse match S/n; zeros are exact.
    const MatrixXd inv = mle.omega_hat.inverse();
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j < p; ++j) {
        if (i == j || pat(i, j) == 1) {
          CHECK(std::abs(inv(i, j) - s(i, j) / n) < 1e-6);
        } else {
          CHECK(mle.omega_hat(i, j) == 0.0);
        }
      }
    }
    CHECK(mle.stationarity_gap < 1e-6);
    if (p <= 4) {
      const MatrixXd oracle = newton_oracle(s, n, pat);
      CHECK((mle.omega_hat - oracle).lpNorm<Eigen::Infinity>() < 5e-6);
    }
  }
}

TEST_CASE("reported loglik matches its definition") {
  npgraph::Rng rng(16);
  const int p = 4, n = 45;
  const MatrixXd s = random_scatter(p, n, rng);
  MatrixXi pat = full_pattern(p);
  pat(1, 3) = pat(3, 1) = 0;
  const PatternMLE mle = constrained_gaussian_mle(s, n, pat);
  CHECK(mle.loglik == doctest::Approx(pattern_loglik(mle.omega_hat, s, n)).epsilon(1e-10));
}

TEST_CASE("bic penalty arithmetic") {
  // p=3 with 2 free edges, n=100: k = 5, penalty = 5 log 100 ≈ 23.0259.
  npgraph::Rng rng(17);
  const int p = 3, n = 100;
  const MatrixXd s = random_scatter(p, n, rng);
  MatrixXi pat = full_pattern(p);
  pat(0, 2) = pat(2, 0) = 0;  // 2 edges remain
  const PatternMLE mle = constrained_gaussian_mle(s, n, pat);
  const double bic = bic_score(mle, s, n);
  const double deviance = -2.0 * mle.loglik;
  CHECK(bic - deviance == doctest::Approx(5.0 * std::log(100.0)).epsilon(1e-12));
  CHECK(5.0 * std::log(100.0) == doctest::Approx(23.0259).epsilon(1e-4));
}

TEST_CASE("adding an edge never increases the deviance") {
  npgraph::Rng rng(18);
  const int p = 4, n = 70;
  const MatrixXd s = random_scatter(p, n, rng);
  MatrixXi sparse = MatrixXi::Identity(p, p);
  sparse(0, 1) = sparse(1, 0) = 1;
  MatrixXi richer = sparse;
  richer(2, 3) = richer(3, 2) = 1;
  const PatternMLE small = constrained_gaussian_mle(s, n, sparse);
  const PatternMLE big = constrained_gaussian_mle(s, n, richer);
  CHECK(big.loglik >= small.loglik - 1e-9);
}

TEST_CASE("scalar case closes the calculus loop") {
  // p=1: deviance 2(-n log w + w s), minimized at w = n/s.
  MatrixXd s(1, 1);
  s << 7.0;
  const PatternMLE mle = constrained_gaussian_mle(s, 20, MatrixXi::Identity(1, 1));
  CHECK(mle.omega_hat(0, 0) == doctest::Approx(20.0 / 7.0).epsilon(1e-10));
  const double bic = bic_score(mle, s, 20);
  const double w = 20.0 / 7.0;
  CHECK(bic == doctest::Approx(2 * (-20 * std::log(w) + w * 7.0) + std::log(20.0)).epsilon(1e-10));
}

TEST_CASE("infeasible margins are reported") {
  // Scatter with a zero diagonal entry admits no positive-definite fit.
  MatrixXd s = MatrixXd::Identity(3, 3);
  s(1, 1) = 0.0;
  CHECK_THROWS_AS(constrained_gaussian_mle(s, 10, full_pattern(3)), npgraph::Error);
}

TEST_CASE("pattern validation") {
  npgraph::Rng rng(19);
  const MatrixXd s = random_scatter(3, 30, rng);
  MatrixXi pat = full_pattern(3);
  pat(0, 0) = 0;  // diagonal must stay free
  CHECK_THROWS_AS(constrained_gaussian_mle(s, 30, pat), npgraph::Error);
  pat = full_pattern(3);
  pat(0, 1) = 0;  // asymmetric
  CHECK_THROWS_AS(constrained_gaussian_mle(s, 30, pat), npgraph::Error);
}

TEST_CASE("default grid is the documented four-point set") {
  const auto grid = npgraph::default_hyper_grid();
  REQUIRE(grid.size() == 4);
  CHECK(grid[0].c0 == 0.02);
  CHECK(grid[0].b0 == 1.0);
  CHECK(grid[0].b1 == 1.0);
  CHECK(grid[1].c0 == 0.02);
  CHECK(grid[1].b0 == 10.0);
  CHECK(grid[1].b1 == 30.0);
  CHECK(grid[2].c0 == 0.005);
  CHECK(grid[2].b0 == 1.0);
  CHECK(grid[3].c0 == 0.005);
  CHECK(grid[3].b0 == 10.0);
}

TEST_CASE("hyperparameter selection produces a coherent table") {
  npgraph::Scenario sc;
  sc.p = 3;
  sc.n = 150;
  sc.structure = npgraph::Structure::ar1;
  sc.transforms = {npgraph::TransformFamily::normal_cdf};
  sc.seed = 5050;
  const npgraph::Dataset data = npgraph::gen_dataset(sc);
  npgraph::ChainConfig base;
  base.n_burn = 50;
  base.n_keep = 100;
  base.seed = 10101;
  const auto result = npgraph::select_hyperparameters(data.x, npgraph::default_hyper_grid(), base);
  REQUIRE(result.rows.size() == 4);
  int selected_count = 0;
  double best_bic = std::numeric_limits<double>::infinity();
  for (const auto& row : result.rows) {
    CHECK(row.error.empty());
    CHECK(std::isfinite(row.bic));
    CHECK(row.k >= sc.p);
    best_bic = std::min(best_bic, row.bic);
    selected_count += row.selected ? 1 : 0;
  }
  CHECK(selected_count == 1);
  for (const auto& row : result.rows)
    if (row.selected) CHECK(row.bic == best_bic);
  REQUIRE(result.basis_counts.size() == 3);

  // Determinism of the whole selection.
  const auto again = npgraph::select_hyperparameters(data.x, npgraph::default_hyper_grid(), base);
  CHECK(again.best.c0 == result.best.c0);
  CHECK(again.best.b0 == result.best.b0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(again.rows[i].bic == result.rows[i].bic);
}

TEST_CASE("selection requires at least one configuration") {
  npgraph::Rng rng(21);
  Eigen::MatrixXd x(20, 2);
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 2; ++j) x(i, j) = rng.uniform();
  npgraph::ChainConfig base;
  base.n_burn = 2;
  base.n_keep = 2;
  base.basis_counts = {4, 4};
  CHECK_THROWS_AS(npgraph::select_hyperparameters(x, {}, base), npgraph::Error);
}
