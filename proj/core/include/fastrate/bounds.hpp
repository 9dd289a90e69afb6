#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace fastrate {

enum class BoundKind {
  thm1_slow,
  thm2_excess_sg,
  thm3_fast_sg,
  thm5_eta_c,
  rerm_lemma,
  thm7_intermediate,
};

std::string to_string(BoundKind kind);

struct BoundIngredients {
  std::vector<double> mi;  // per-sample I(W;Z_i), nats
  double sigma2 = 0.0;
  double eta = 0.0;
  double c = 0.0;
  double beta = 0.0;
  double a_eta = 0.0;
  double empirical_excess = 0.0;
  double mean_r_product = 0.0;
  double lambda = 0.0;
  double range_bound = 0.0;
  std::size_t n = 0;
};

struct BoundReport {
  BoundKind kind = BoundKind::thm1_slow;
  double gen_bound = 0.0;
  double excess_bound = 0.0;
  bool has_excess_bound = false;
  bool valid = false;
  std::string validity_notes;
  BoundIngredients ingredients;
};

/// Slow-rate bound with sigma fitted on the losses themselves:
/// (1/n) sum_i sqrt(2 sigma^2 I_i).
BoundReport bound_thm1(double sigma2, std::span<const double> mi);

/// Same form with sigma fitted on the excess losses; also bounds the
/// excess risk by empirical_excess + gen_bound.
BoundReport bound_thm2(double sigma2_r, std::span<const double> mi,
                       double empirical_excess);

/// Square-root-free fast-rate form under the excess-loss sub-Gaussian
/// assumption, valid for 0 < eta < 2 mean_r / sigma_r^2 with
/// a_eta = 1 - eta sigma_r^2 / (2 mean_r).  Outside the window the
/// report carries valid = false (callers sweep eta).
BoundReport bound_thm3(double sigma2_r, double mean_r_product,
                       std::span<const double> mi, double empirical_excess,
                       double eta);

/// Fast-rate bound under the fitted central condition:
/// (1-c)/c * empirical_excess + sum_i I_i / (c eta' n).
BoundReport bound_thm5(double c, double eta_prime, std::span<const double> mi,
                       double empirical_excess);

/// Regularized-ERM excess bound: adds lambda B / (c n) to the thm5
/// excess bound, with empirical_excess measured on the regularized
/// objective.
BoundReport bound_rerm(double c, double eta_prime, std::span<const double> mi,
                       double empirical_excess_reg, double lambda,
                       double range_bound, std::size_t n);

/// Intermediate-rate bound: (1-c)/c * empirical_excess +
/// (2/(n c)) sum_i I_i^(1/(2-beta)), beta in [0,1], c in (0,1).
BoundReport bound_thm7(double c, double beta, std::span<const double> mi,
                       double empirical_excess);

/// Least-squares slope of log(value) against log(n); needs >= 3 points,
/// all values positive.
double rate_slope(std::span<const std::pair<std::size_t, double>> points);

}  // namespace fastrate
