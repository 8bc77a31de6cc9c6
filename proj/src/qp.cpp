#include "qp.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "common.hpp"

namespace npgraph {

namespace {

struct ActiveSolve {
  Eigen::VectorXd x;
  Eigen::VectorXd eq_mult;
  Eigen::VectorXd ineq_mult;  // aligned with the active list
};

class DualActiveSet {
 public:
  DualActiveSet(const QpProblem& p, double ridge) : p_(p) {
    const auto n = p.hessian.rows();
    Eigen::MatrixXd reg = p.hessian + ridge * Eigen::MatrixXd::Identity(n, n);
    llt_.compute(reg);
    ok_ = llt_.info() == Eigen::Success;
  }

  bool factorized() const { return ok_; }

  // KKT solve with the equalities plus the given active inequalities.
  std::optional<ActiveSolve> solve(const std::vector<int>& active) const {
    const auto n = p_.hessian.rows();
    const auto me = p_.eq_normals.rows();
    const auto ma = static_cast<Eigen::Index>(active.size());
    ActiveSolve out;
    if (me + ma == 0) {
      out.x = -llt_.solve(p_.linear);
      return out;
    }
    Eigen::MatrixXd a(me + ma, n);
    Eigen::VectorXd b(me + ma);
    a.topRows(me) = p_.eq_normals;
    b.head(me) = p_.eq_values;
    for (Eigen::Index j = 0; j < ma; ++j) {
      a.row(me + j) = p_.ineq_normals.row(active[static_cast<std::size_t>(j)]);
      b[me + j] = p_.ineq_values[active[static_cast<std::size_t>(j)]];
    }
    const Eigen::MatrixXd gi_at = llt_.solve(a.transpose());
    const Eigen::VectorXd gi_q = llt_.solve(p_.linear);
    const Eigen::MatrixXd schur = a * gi_at;
    const Eigen::VectorXd rhs = b + a * gi_q;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(schur);
    if (ldlt.info() != Eigen::Success) return std::nullopt;
    const Eigen::VectorXd mult = ldlt.solve(rhs);
    if ((schur * mult - rhs).cwiseAbs().maxCoeff() >
        1e-8 * (1.0 + rhs.cwiseAbs().maxCoeff())) {
      return std::nullopt;  // dependent active constraints
    }
    out.x = gi_at * mult - gi_q;
    out.eq_mult = mult.head(me);
    out.ineq_mult = mult.tail(ma);
    return out;
  }

 private:
  const QpProblem& p_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  bool ok_ = false;
};

double kkt_residual(const QpProblem& p, const ActiveSolve& s, const std::vector<int>& active) {
  const auto mi = p.ineq_normals.rows();
  Eigen::VectorXd mu = Eigen::VectorXd::Zero(mi);
  for (std::size_t j = 0; j < active.size(); ++j) {
    mu[active[j]] = s.ineq_mult[static_cast<Eigen::Index>(j)];
  }
  Eigen::VectorXd grad = p.hessian * s.x + p.linear;
  if (p.eq_normals.rows() > 0) grad -= p.eq_normals.transpose() * s.eq_mult;
  if (mi > 0) grad -= p.ineq_normals.transpose() * mu;
  const double scale = std::max({1.0, p.linear.cwiseAbs().maxCoeff(),
                                 (p.hessian * s.x).cwiseAbs().maxCoeff()});
  double res = grad.cwiseAbs().maxCoeff() / scale;
  if (p.eq_normals.rows() > 0) {
    res = std::max(res, (p.eq_normals * s.x - p.eq_values).cwiseAbs().maxCoeff());
  }
  if (mi > 0) {
    const Eigen::VectorXd slack = p.ineq_normals * s.x - p.ineq_values;
    res = std::max(res, std::max(0.0, -slack.minCoeff()));
    res = std::max(res, std::max(0.0, -mu.minCoeff()));
    res = std::max(res, mu.cwiseAbs().cwiseProduct(slack.cwiseAbs()).maxCoeff() / scale);
  }
  return res;
}

std::optional<QpResult> try_solve(const QpProblem& p, double ridge, int max_iter) {
  DualActiveSet solver(p, ridge);
  if (!solver.factorized()) return std::nullopt;

  std::vector<int> active;
  auto current = solver.solve(active);
  if (!current) return std::nullopt;

  const auto mi = p.ineq_normals.rows();
  const double feas_tol =
      1e-11 * std::max(1.0, mi > 0 ? p.ineq_values.cwiseAbs().maxCoeff() : 0.0);
  int iter = 0;
  while (iter++ < max_iter) {
    // Most violated inactive inequality, if any.
    int worst = -1;
    double worst_gap = feas_tol;
    for (Eigen::Index i = 0; i < mi; ++i) {
      if (std::find(active.begin(), active.end(), static_cast<int>(i)) != active.end()) continue;
      const double gap = p.ineq_values[i] - p.ineq_normals.row(i).dot(current->x);
      if (gap > worst_gap) {
        worst_gap = gap;
        worst = static_cast<int>(i);
      }
    }
    if (worst < 0) break;  // primal feasible and dual feasible: done

    active.push_back(worst);
    auto next = solver.solve(active);
    // Restore dual feasibility: drop the most negative multiplier until the
    // active-set solve succeeds with nonnegative inequality multipliers.
    while (true) {
      if (next) {
        Eigen::Index neg = -1;
        double most_neg = -1e-12;
        for (Eigen::Index j = 0; j < next->ineq_mult.size(); ++j) {
          if (next->ineq_mult[j] < most_neg) {
            most_neg = next->ineq_mult[j];
            neg = j;
          }
        }
        if (neg < 0) break;
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(neg));
      } else {
        // Dependent set: discard the oldest active constraint.
        if (active.size() <= 1) return std::nullopt;
        active.erase(active.begin());
      }
      if (iter++ >= max_iter) return std::nullopt;
      next = solver.solve(active);
      if (!next && active.empty()) return std::nullopt;
    }
    current = std::move(next);
  }
  if (iter > max_iter) return std::nullopt;

  QpResult result;
  result.solution = current->x;
  result.objective =
      0.5 * current->x.dot(p.hessian * current->x) + p.linear.dot(current->x);
  result.iterations = iter;
  result.kkt_residual = kkt_residual(p, *current, active);
  return result;
}

}  // namespace

QpResult solve_qp(const QpProblem& problem, QpOptions options) {
  const auto n = problem.hessian.rows();
  require(n > 0 && problem.hessian.cols() == n, ErrorCode::invalid_argument,
          "qp: hessian must be square and non-empty");
  require(problem.linear.size() == n, ErrorCode::invalid_argument,
          "qp: linear term dimension mismatch");
  require(problem.eq_normals.rows() == problem.eq_values.size(), ErrorCode::invalid_argument,
          "qp: equality rows do not match values");
  require(problem.ineq_normals.rows() == problem.ineq_values.size(), ErrorCode::invalid_argument,
          "qp: inequality rows do not match values");
  require(problem.eq_normals.rows() == 0 || problem.eq_normals.cols() == n,
          ErrorCode::invalid_argument, "qp: equality columns do not match dimension");
  require(problem.ineq_normals.rows() == 0 || problem.ineq_normals.cols() == n,
          ErrorCode::invalid_argument, "qp: inequality columns do not match dimension");

  const double scale = std::max(1.0, problem.hessian.cwiseAbs().maxCoeff());
  const int max_iter =
      options.max_iterations > 0
          ? options.max_iterations
          : 100 + 20 * static_cast<int>(n + problem.eq_normals.rows() +
                                        problem.ineq_normals.rows());
  std::optional<QpResult> best;
  for (double step : {1.0, 1e2, 1e4, 1e6, 1e8}) {
    if (auto result = try_solve(problem, step * options.ridge * scale, max_iter)) {
      if (!best || result->kkt_residual < best->kkt_residual) best = std::move(result);
      if (best->kkt_residual <= options.kkt_target) break;
    }
  }
  if (best) return *best;
  fail(ErrorCode::numeric_failure, "qp: active-set iteration failed to converge");
}

}  // namespace npgraph
