#include "fastrate/oracle.hpp"

#include <cmath>
#include <sstream>

#include "fastrate/errors.hpp"

namespace fastrate {

namespace {

void validate(const GaussianOracle& o) {
  if (o.sigma_n < 0.0) throw DomainError("oracle: sigma_n must be >= 0");
  if (o.n < 2) throw DomainError("oracle: n must be >= 2");
}

}  // namespace

double oracle_quantity(const GaussianOracle& o, OracleQuantity which) {
  validate(o);
  const double s2 = o.sigma_n * o.sigma_n;
  const double s4 = s2 * s2;
  const auto n = static_cast<double>(o.n);
  switch (which) {
    case OracleQuantity::gen_error: return 2.0 * s2 / n;
    case OracleQuantity::excess_risk: return s2 / n;
    case OracleQuantity::empirical_excess: return -s2 / n;
    case OracleQuantity::mi: return 0.5 * std::log(n / (n - 1.0));
    case OracleQuantity::second_moment_r: return 3.0 * s4 / (n * n) + 4.0 * s4 / n;
    case OracleQuantity::expected_loss: return (n + 1.0) * s2 / n;
  }
  throw DomainError("oracle_quantity: unknown quantity");
}

double oracle_mgf_r(const GaussianOracle& o, double eta, MgfSign sign) {
  validate(o);
  const double s2 = o.sigma_n * o.sigma_n;
  const double s4 = s2 * s2;
  const auto n = static_cast<double>(o.n);
  const double signed_term = sign == MgfSign::plus ? 2.0 * eta * s2 : -2.0 * eta * s2;
  const double denom = n - (4.0 * eta * eta * s4 + signed_term);
  if (denom <= 0.0) {
    // Boundary eta solves 4 eta^2 s4 +- 2 eta s2 = n.
    const double a = 4.0 * s4;
    const double b = sign == MgfSign::plus ? 2.0 * s2 : -2.0 * s2;
    const double disc = b * b + 4.0 * a * n;
    const double boundary = (-b + std::sqrt(disc)) / (2.0 * a);
    std::ostringstream msg;
    msg << "oracle_mgf_r: eta=" << eta << " outside validity region (boundary "
        << boundary << ")";
    throw DomainError(msg.str());
  }
  return std::sqrt(n / denom);
}

double oracle_per_w_mgf(const GaussianOracle& o, double w, double eta, MgfSign sign) {
  validate(o);
  const double s2 = o.sigma_n * o.sigma_n;
  const double d = w - o.mu;
  const double coeff = 2.0 * eta * eta * s2 + (sign == MgfSign::plus ? eta : -eta);
  return std::exp(coeff * d * d);
}

double oracle_asymptotic_centered_cgf(const GaussianOracle& o, double eta) {
  validate(o);
  const double s4 = o.sigma_n * o.sigma_n * o.sigma_n * o.sigma_n;
  return 2.0 * eta * eta * s4 / static_cast<double>(o.n);
}

OracleConditionVerdicts oracle_condition_verdicts(const GaussianOracle& o) {
  validate(o);
  const double s2 = o.sigma_n * o.sigma_n;
  OracleConditionVerdicts v;
  v.central_eta_boundary = s2 > 0.0 ? 1.0 / (2.0 * s2) : 0.0;
  v.central_holds_erm = true;
  v.central_holds_all_w = true;  // same eta range for every w
  v.bernstein_holds_erm = true;
  v.bernstein_holds_all_w = false;
  v.bernstein_beta = 1.0;
  v.bernstein_B = 7.0 * s2;
  v.witness_holds_erm = true;
  v.witness_holds_all_w = false;
  v.subgaussian_holds_erm = true;
  v.subgaussian_holds_all_w = false;
  v.subgaussian_sigma2 = 4.0 * s2 * s2 / static_cast<double>(o.n);
  v.loss_subgaussian_positive_side_verified = false;
  return v;
}

}  // namespace fastrate
