#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fastrate {

/// Empirical cumulant generating function of the excess loss under the
/// product coupling, Lambda(eta) = log((1/m) sum_j exp(-eta r_j)), over
/// a positive eta grid.  lambda_plus holds the mirrored exponent
/// log mean exp(+eta r), needed for two-sided sub-Gaussian fitting.
struct CgfProfile {
  std::vector<double> eta_grid;
  std::vector<double> lambda_vals;   // log mean exp(-eta r)
  std::vector<double> lambda_plus;   // log mean exp(+eta r)
  std::vector<bool> reliable_minus;  // effective-sample-size guard verdicts
  std::vector<bool> reliable_plus;
  double mean_r = 0.0;
  double mean_r2 = 0.0;
  double std_r = 0.0;
  double min_r = 0.0;
  std::size_t m = 0;
};

enum class ConditionKind {
  subgaussian,
  eta_c_central,
  bernstein,
  witness,
  central_plain,
  v_c_central,
};

struct ConditionCertificate {
  ConditionKind kind = ConditionKind::subgaussian;
  bool feasible = false;
  double margin = 0.0;  // slack in the defining inequality at the fit
  std::size_t m = 0;

  // Kind-specific parameters; unused ones stay at 0.
  double sigma2 = 0.0;       // subgaussian
  double eta = 0.0;          // eta_c_central / central_plain / v_c_central
  double c = 0.0;            // eta_c_central / witness / v_c_central
  double beta = 0.0;         // bernstein / v_c_central
  double bernstein_B = 0.0;  // minimal B at the recorded beta
  double bernstein_b = 0.0;  // empirical lower bound -min(r)
  double witness_u = 0.0;
  double epsilon = 0.0;      // v_c_central slack at the certified beta

  // Full profiles where the operation records one.
  std::vector<double> beta_grid;
  std::vector<double> B_profile;

  std::string note;
};

/// Structured text record (kind, params, margin, m) embedded in bound
/// reports and CSV output.
std::string to_string(const ConditionCertificate& cert);

/// 40 log-spaced etas over [1e-3/scale, 10/scale], scale = std(r).
std::vector<double> default_eta_grid(std::span<const double> product_r,
                                     std::size_t points = 40);

/// Evaluates the empirical CGF via log-sum-exp.  Grid points where fewer
/// than 10 samples carry 90% of the exponential mass are flagged
/// unreliable and skipped by the fitting operations.
CgfProfile estimate_cgf(std::span<const double> product_r,
                        std::span<const double> eta_grid);

/// sigma^2 = max over reliable grid points of 2 Lambda_centered(eta) /
/// eta^2, restricted to eta * std(r) <= eta_cap where the quadratic
/// bound is informative.  With two_sided the centered CGF is probed at
/// both signs of eta.
ConditionCertificate fit_subgaussian(const CgfProfile& profile,
                                     bool two_sided = true,
                                     double eta_cap = 0.4);

/// c(eta) = -Lambda(eta) / (eta mean_r), clipped to (0, 1].  Picks the
/// grid (eta, c) pair minimizing the fast-rate bound
/// (1-c)/c * empirical_excess + mi_sum/(c eta n); with no bound
/// ingredients supplied, picks the largest feasible c (ties to larger
/// eta).
ConditionCertificate fit_central_condition(const CgfProfile& profile);
ConditionCertificate fit_central_condition(const CgfProfile& profile,
                                           double mi_sum,
                                           double empirical_excess,
                                           std::size_t n);

/// c(eta) at the grid point nearest to eta.
double central_c_at(const CgfProfile& profile, double eta);

/// B_hat(beta) = E[r^2] / (E[r])^beta over the beta grid; records the
/// beta = 1 pair plus the empirical lower bound b_hat = -min(r).
ConditionCertificate check_bernstein(std::span<const double> product_r,
                                     std::span<const double> beta_grid);

/// c_hat(u) = E[r 1{r <= u}] / E[r]; feasible when in (0, 1].
ConditionCertificate check_witness(std::span<const double> product_r, double u);

/// Corollary mapping central + witness into an (eta', c') pair:
/// c' = (c - c eta'/eta) / (eta' u + 1), for 0 < eta' < eta.
std::pair<double, double> central_witness_to_eta_c(double eta, double u,
                                                   double c, double eta_prime);

/// Certifies the relaxed condition with v(eps) = eps^(1-beta): for every
/// reliable grid eta, Lambda(eta) <= -c eta mean_r + eta eps with
/// eps = eta^(1/(1-beta)) (beta = 1 reduces to the plain condition at
/// eta = 1).  Returns the largest feasible beta on the grid.
ConditionCertificate fit_v_central(const CgfProfile& profile, double c,
                                   std::span<const double> beta_grid);

/// kappa(x) = (e^x - x - 1)/x^2, with a series branch for |x| < 1e-4;
/// kappa(0) = 1/2.
double kappa(double x);

struct ExpectedBernsteinReport {
  std::vector<double> eta_grid;
  std::vector<double> lhs;     // log E[exp(eta(E[U]-U))]
  std::vector<double> rhs;     // eta^2 kappa(eta b) E[U^2] + slack
  std::vector<double> margins; // rhs - lhs
  double worst_margin = 0.0;
  bool holds = false;
};

/// Empirical verification of the lower-bounded-variable concentration
/// inequality with Monte Carlo slack 3/sqrt(m) x std of the
/// exponentiated statistic.
ExpectedBernsteinReport expected_bernstein_check(std::span<const double> u_samples,
                                                 double b,
                                                 std::span<const double> eta_grid);

}  // namespace fastrate
