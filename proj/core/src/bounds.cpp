#include "fastrate/bounds.hpp"

#include <cmath>
#include <limits>

#include "fastrate/errors.hpp"

namespace fastrate {

std::string to_string(BoundKind kind) {
  switch (kind) {
    case BoundKind::thm1_slow: return "thm1_slow";
    case BoundKind::thm2_excess_sg: return "thm2_excess_sg";
    case BoundKind::thm3_fast_sg: return "thm3_fast_sg";
    case BoundKind::thm5_eta_c: return "thm5_eta_c";
    case BoundKind::rerm_lemma: return "rerm_lemma";
    case BoundKind::thm7_intermediate: return "thm7_intermediate";
  }
  return "unknown";
}

namespace {

void require_nonnegative_mi(std::span<const double> mi) {
  for (double v : mi) {
    if (v < 0.0) throw DomainError("bound: negative mutual information input");
  }
}

double sqrt_term(double sigma2, std::span<const double> mi) {
  double sum = 0.0;
  for (double v : mi) sum += std::sqrt(2.0 * sigma2 * v);
  return sum / static_cast<double>(mi.size());
}

double mi_sum(std::span<const double> mi) {
  double sum = 0.0;
  for (double v : mi) sum += v;
  return sum;
}

}  // namespace

BoundReport bound_thm1(double sigma2, std::span<const double> mi) {
  require_nonnegative_mi(mi);
  BoundReport report;
  report.kind = BoundKind::thm1_slow;
  report.ingredients.sigma2 = sigma2;
  report.ingredients.mi.assign(mi.begin(), mi.end());
  report.ingredients.n = mi.size();
  report.gen_bound = sqrt_term(sigma2, mi);
  report.valid = true;
  return report;
}

BoundReport bound_thm2(double sigma2_r, std::span<const double> mi,
                       double empirical_excess) {
  require_nonnegative_mi(mi);
  BoundReport report;
  report.kind = BoundKind::thm2_excess_sg;
  report.ingredients.sigma2 = sigma2_r;
  report.ingredients.mi.assign(mi.begin(), mi.end());
  report.ingredients.empirical_excess = empirical_excess;
  report.ingredients.n = mi.size();
  report.gen_bound = sqrt_term(sigma2_r, mi);
  report.excess_bound = empirical_excess + report.gen_bound;
  report.has_excess_bound = true;
  report.valid = true;
  return report;
}

BoundReport bound_thm3(double sigma2_r, double mean_r_product,
                       std::span<const double> mi, double empirical_excess,
                       double eta) {
  require_nonnegative_mi(mi);
  BoundReport report;
  report.kind = BoundKind::thm3_fast_sg;
  report.ingredients.sigma2 = sigma2_r;
  report.ingredients.mean_r_product = mean_r_product;
  report.ingredients.mi.assign(mi.begin(), mi.end());
  report.ingredients.empirical_excess = empirical_excess;
  report.ingredients.eta = eta;
  report.ingredients.n = mi.size();

  const double window = sigma2_r > 0.0
                            ? 2.0 * mean_r_product / sigma2_r
                            : std::numeric_limits<double>::infinity();
  if (eta <= 0.0 || eta >= window || mean_r_product <= 0.0) {
    report.valid = false;
    report.validity_notes = "eta outside (0, 2 mean_r / sigma_r^2)";
    return report;
  }
  const double a_eta = 1.0 - eta * sigma2_r / (2.0 * mean_r_product);
  const auto n = static_cast<double>(mi.size());
  const double mi_term = mi_sum(mi) / (n * eta * a_eta);
  report.ingredients.a_eta = a_eta;
  report.gen_bound = (1.0 - a_eta) / a_eta * empirical_excess + mi_term;
  report.excess_bound = empirical_excess / a_eta + mi_term;
  report.has_excess_bound = true;
  report.valid = true;
  return report;
}

BoundReport bound_thm5(double c, double eta_prime, std::span<const double> mi,
                       double empirical_excess) {
  require_nonnegative_mi(mi);
  if (c <= 0.0 || c > 1.0) throw DomainError("bound_thm5: c must be in (0, 1]");
  if (eta_prime <= 0.0) throw DomainError("bound_thm5: eta' must be positive");

  BoundReport report;
  report.kind = BoundKind::thm5_eta_c;
  report.ingredients.c = c;
  report.ingredients.eta = eta_prime;
  report.ingredients.mi.assign(mi.begin(), mi.end());
  report.ingredients.empirical_excess = empirical_excess;
  report.ingredients.n = mi.size();

  const auto n = static_cast<double>(mi.size());
  const double mi_term = mi_sum(mi) / (c * eta_prime * n);
  report.gen_bound = (1.0 - c) / c * empirical_excess + mi_term;
  report.excess_bound = empirical_excess / c + mi_term;
  report.has_excess_bound = true;
  report.valid = true;
  return report;
}

BoundReport bound_rerm(double c, double eta_prime, std::span<const double> mi,
                       double empirical_excess_reg, double lambda,
                       double range_bound, std::size_t n) {
  BoundReport report = bound_thm5(c, eta_prime, mi, empirical_excess_reg);
  report.kind = BoundKind::rerm_lemma;
  report.ingredients.lambda = lambda;
  report.ingredients.range_bound = range_bound;
  report.excess_bound += lambda * range_bound / (c * static_cast<double>(n));
  return report;
}

BoundReport bound_thm7(double c, double beta, std::span<const double> mi,
                       double empirical_excess) {
  require_nonnegative_mi(mi);
  if (c <= 0.0 || c >= 1.0) throw DomainError("bound_thm7: c must be in (0, 1)");
  if (beta < 0.0 || beta > 1.0) throw DomainError("bound_thm7: beta must be in [0, 1]");

  BoundReport report;
  report.kind = BoundKind::thm7_intermediate;
  report.ingredients.c = c;
  report.ingredients.beta = beta;
  report.ingredients.mi.assign(mi.begin(), mi.end());
  report.ingredients.empirical_excess = empirical_excess;
  report.ingredients.n = mi.size();

  const auto n = static_cast<double>(mi.size());
  const double expo = 1.0 / (2.0 - beta);
  double sum = 0.0;
  for (double v : mi) sum += std::pow(v, expo);
  report.gen_bound = (1.0 - c) / c * empirical_excess + 2.0 / (n * c) * sum;
  report.valid = true;
  return report;
}

double rate_slope(std::span<const std::pair<std::size_t, double>> points) {
  if (points.size() < 3) throw DomainError("rate_slope: need at least 3 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [n, value] : points) {
    if (value <= 0.0) throw DomainError("rate_slope: values must be positive");
    const double x = std::log(static_cast<double>(n));
    const double y = std::log(value);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const auto k = static_cast<double>(points.size());
  return (k * sxy - sx * sy) / (k * sxx - sx * sx);
}

}  // namespace fastrate
