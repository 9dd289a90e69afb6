#include "fastrate/core.hpp"

#include <cmath>

#include "fastrate/errors.hpp"
#include "fastrate/montecarlo.hpp"

namespace fastrate {

double excess_loss(const LearningProblem& problem, std::span<const double> w,
                   std::span<const double> z) {
  const auto w_star = problem.optimal_hypothesis();
  return problem.loss(w, z) - problem.loss(w_star, z);
}

namespace {

double row_mean(const Matrix& m, std::size_t j) {
  double sum = 0.0;
  for (double v : m.row(j)) sum += v;
  return sum / static_cast<double>(m.cols);
}

}  // namespace

RiskEstimates estimate_risks(const ReplicateSet& rs) {
  if (rs.m < 2) {
    throw InsufficientDataError(
        "estimate_risks: need at least 2 replicates for standard errors");
  }
  if (rs.joint_r.rows != rs.m || rs.product_r.rows != rs.m) {
    throw ConfigError("estimate_risks: couplings not populated");
  }

  const auto m = static_cast<double>(rs.m);
  double sum_gen = 0.0, sum_exc = 0.0, sum_emp = 0.0;
  double sq_gen = 0.0, sq_exc = 0.0, sq_emp = 0.0;
  for (std::size_t j = 0; j < rs.m; ++j) {
    const double emp = row_mean(rs.joint_r, j);
    const double exc = row_mean(rs.product_r, j);
    const double gen = exc - emp;
    sum_gen += gen;
    sum_exc += exc;
    sum_emp += emp;
    sq_gen += gen * gen;
    sq_exc += exc * exc;
    sq_emp += emp * emp;
  }

  RiskEstimates est;
  est.m_replicates = rs.m;
  est.gen_error = sum_gen / m;
  est.excess_risk = sum_exc / m;
  est.empirical_excess = sum_emp / m;
  auto se = [m](double sq, double mean) {
    const double var = std::max(0.0, sq / m - mean * mean) * m / (m - 1.0);
    return std::sqrt(var / m);
  };
  est.gen_error_se = se(sq_gen, est.gen_error);
  est.excess_risk_se = se(sq_exc, est.excess_risk);
  est.empirical_excess_se = se(sq_emp, est.empirical_excess);
  return est;
}

}  // namespace fastrate
