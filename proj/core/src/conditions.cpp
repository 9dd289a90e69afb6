#include "fastrate/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "fastrate/errors.hpp"

namespace fastrate {

namespace {

struct LseResult {
  double log_mean = 0.0;  // log((1/m) sum exp(t_j))
  bool reliable = false;  // effective-sample-size guard
};

// log-sum-exp with a shift by the max exponent; flags grid points where
// fewer than 10 samples carry 90% of the exponential mass.
LseResult log_mean_exp(std::span<const double> exponents) {
  const std::size_t m = exponents.size();
  const double shift = *std::max_element(exponents.begin(), exponents.end());
  std::vector<double> weights(m);
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    weights[j] = std::exp(exponents[j] - shift);
    total += weights[j];
  }
  LseResult res;
  res.log_mean = shift + std::log(total / static_cast<double>(m));

  std::sort(weights.begin(), weights.end(), std::greater<>());
  double acc = 0.0;
  std::size_t needed = 0;
  const double target = 0.9 * total;
  while (acc < target && needed < m) acc += weights[needed++];
  res.reliable = needed >= 10;
  return res;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::vector<double> default_eta_grid(std::span<const double> product_r,
                                     std::size_t points) {
  const double mean = mean_of(product_r);
  double var = 0.0;
  for (double r : product_r) var += (r - mean) * (r - mean);
  var /= static_cast<double>(product_r.size());
  double scale = std::sqrt(var);
  if (scale <= 0.0) scale = 1.0;

  const double lo = 1e-3 / scale;
  const double hi = 10.0 / scale;
  std::vector<double> grid(points);
  for (std::size_t i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    grid[i] = lo * std::pow(hi / lo, t);
  }
  return grid;
}

CgfProfile estimate_cgf(std::span<const double> product_r,
                        std::span<const double> eta_grid) {
  if (product_r.size() < 100) {
    throw InsufficientDataError("estimate_cgf: need at least 100 samples");
  }
  for (double r : product_r) {
    if (!std::isfinite(r)) throw DomainError("estimate_cgf: non-finite excess loss");
  }
  for (double eta : eta_grid) {
    if (eta <= 0.0) throw ConfigError("estimate_cgf: grid etas must be positive");
  }

  CgfProfile profile;
  profile.m = product_r.size();
  profile.eta_grid.assign(eta_grid.begin(), eta_grid.end());
  profile.mean_r = mean_of(product_r);
  double m2 = 0.0, var = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (double r : product_r) {
    m2 += r * r;
    var += (r - profile.mean_r) * (r - profile.mean_r);
    lo = std::min(lo, r);
  }
  profile.mean_r2 = m2 / static_cast<double>(profile.m);
  profile.std_r = std::sqrt(var / static_cast<double>(profile.m));
  profile.min_r = lo;

  std::vector<double> exponents(profile.m);
  for (double eta : eta_grid) {
    for (std::size_t j = 0; j < profile.m; ++j) exponents[j] = -eta * product_r[j];
    const auto minus = log_mean_exp(exponents);
    profile.lambda_vals.push_back(minus.log_mean);
    profile.reliable_minus.push_back(minus.reliable);
    for (std::size_t j = 0; j < profile.m; ++j) exponents[j] = eta * product_r[j];
    const auto plus = log_mean_exp(exponents);
    profile.lambda_plus.push_back(plus.log_mean);
    profile.reliable_plus.push_back(plus.reliable);
  }
  return profile;
}

ConditionCertificate fit_subgaussian(const CgfProfile& profile, bool two_sided,
                                     double eta_cap) {
  if (profile.eta_grid.empty()) throw ConfigError("fit_subgaussian: empty grid");

  ConditionCertificate cert;
  cert.kind = ConditionKind::subgaussian;
  cert.m = profile.m;

  const double scale = profile.std_r > 0.0 ? profile.std_r : 1.0;
  double best = 0.0;
  double best_eta = 0.0;
  bool any = false;
  for (std::size_t i = 0; i < profile.eta_grid.size(); ++i) {
    const double eta = profile.eta_grid[i];
    if (eta * scale > eta_cap) continue;
    // Centered CGF at -eta comes from the minus-exponent profile,
    // at +eta from the mirrored one.
    if (profile.reliable_minus[i]) {
      const double centered = profile.lambda_vals[i] + eta * profile.mean_r;
      const double cand = 2.0 * centered / (eta * eta);
      if (!any || cand > best) {
        best = cand;
        best_eta = -eta;
      }
      any = true;
    }
    if (two_sided && profile.reliable_plus[i]) {
      const double centered = profile.lambda_plus[i] - eta * profile.mean_r;
      const double cand = 2.0 * centered / (eta * eta);
      if (!any || cand > best) {
        best = cand;
        best_eta = eta;
      }
      any = true;
    }
  }
  if (!any) {
    cert.feasible = false;
    cert.note = "no reliable grid point within the eta cap";
    return cert;
  }
  cert.sigma2 = std::max(0.0, best);
  cert.eta = best_eta;
  cert.feasible = true;
  cert.margin = 0.0;  // sigma^2 is fitted to make the worst slack zero
  return cert;
}

namespace {

ConditionCertificate fit_central_impl(const CgfProfile& profile, bool use_bound,
                                      double mi_sum, double empirical_excess,
                                      std::size_t n) {
  if (profile.mean_r <= 0.0) {
    throw DomainError("fit_central_condition: mean excess risk must be positive");
  }

  ConditionCertificate cert;
  cert.kind = ConditionKind::eta_c_central;
  cert.m = profile.m;

  bool any = false;
  double best_obj = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < profile.eta_grid.size(); ++i) {
    if (!profile.reliable_minus[i]) continue;
    const double eta = profile.eta_grid[i];
    const double c_raw = -profile.lambda_vals[i] / (eta * profile.mean_r);
    if (c_raw <= 0.0) continue;
    const double c = std::min(1.0, c_raw);
    double obj;
    if (use_bound) {
      obj = (1.0 - c) / c * empirical_excess +
            mi_sum / (c * eta * static_cast<double>(n));
    } else {
      // Largest feasible c, ties broken toward larger eta.
      obj = -(c + 1e-12 * eta);
    }
    if (!any || obj < best_obj) {
      best_obj = obj;
      cert.eta = eta;
      cert.c = c;
      cert.margin = -profile.lambda_vals[i] - c * eta * profile.mean_r;
      any = true;
    }
  }
  cert.feasible = any;
  if (!any) cert.note = "c(eta) <= 0 at every reliable grid point";
  return cert;
}

}  // namespace

ConditionCertificate fit_central_condition(const CgfProfile& profile) {
  return fit_central_impl(profile, false, 0.0, 0.0, 1);
}

ConditionCertificate fit_central_condition(const CgfProfile& profile,
                                           double mi_sum, double empirical_excess,
                                           std::size_t n) {
  return fit_central_impl(profile, true, mi_sum, empirical_excess, n);
}

double central_c_at(const CgfProfile& profile, double eta) {
  if (profile.mean_r <= 0.0) {
    throw DomainError("central_c_at: mean excess risk must be positive");
  }
  std::size_t best = 0;
  double best_gap = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < profile.eta_grid.size(); ++i) {
    const double gap = std::abs(profile.eta_grid[i] - eta);
    if (gap < best_gap) {
      best_gap = gap;
      best = i;
    }
  }
  const double c_raw =
      -profile.lambda_vals[best] / (profile.eta_grid[best] * profile.mean_r);
  return std::min(1.0, c_raw);
}

ConditionCertificate check_bernstein(std::span<const double> product_r,
                                     std::span<const double> beta_grid) {
  if (product_r.size() < 100) {
    throw InsufficientDataError("check_bernstein: need at least 100 samples");
  }
  const double mean = mean_of(product_r);
  double m2 = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  for (double r : product_r) {
    m2 += r * r;
    lo = std::min(lo, r);
  }
  m2 /= static_cast<double>(product_r.size());

  ConditionCertificate cert;
  cert.kind = ConditionKind::bernstein;
  cert.m = product_r.size();
  cert.bernstein_b = -lo;
  for (double beta : beta_grid) {
    cert.beta_grid.push_back(beta);
    if (mean <= 0.0 && beta > 0.0) {
      cert.B_profile.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    cert.B_profile.push_back(m2 / std::pow(mean, beta));
  }

  // The recorded headline pair is beta = 1.
  if (mean > 0.0) {
    cert.beta = 1.0;
    cert.bernstein_B = m2 / mean;
    cert.feasible = true;
    cert.margin = cert.bernstein_B * mean - m2;  // zero by construction
  } else {
    cert.feasible = false;
    cert.note = "mean excess risk <= 0: infeasible for beta > 0";
  }
  return cert;
}

ConditionCertificate check_witness(std::span<const double> product_r, double u) {
  if (product_r.size() < 100) {
    throw InsufficientDataError("check_witness: need at least 100 samples");
  }
  const double mean = mean_of(product_r);
  if (mean <= 0.0) {
    throw DomainError("check_witness: mean excess risk must be positive");
  }
  double truncated = 0.0;
  for (double r : product_r) {
    if (r <= u) truncated += r;
  }
  truncated /= static_cast<double>(product_r.size());

  ConditionCertificate cert;
  cert.kind = ConditionKind::witness;
  cert.m = product_r.size();
  cert.witness_u = u;
  cert.c = truncated / mean;
  cert.feasible = cert.c > 0.0 && cert.c <= 1.0;
  cert.margin = truncated - cert.c * mean;  // zero at the fitted c
  return cert;
}

std::pair<double, double> central_witness_to_eta_c(double eta, double u, double c,
                                                   double eta_prime) {
  if (eta_prime <= 0.0 || eta_prime >= eta) {
    throw DomainError("central_witness_to_eta_c: need 0 < eta' < eta");
  }
  const double c_prime = (c - c * eta_prime / eta) / (eta_prime * u + 1.0);
  return {eta_prime, c_prime};
}

ConditionCertificate fit_v_central(const CgfProfile& profile, double c,
                                   std::span<const double> beta_grid) {
  if (profile.mean_r <= 0.0) {
    throw DomainError("fit_v_central: mean excess risk must be positive");
  }
  ConditionCertificate cert;
  cert.kind = ConditionKind::v_c_central;
  cert.c = c;
  cert.m = profile.m;

  for (double beta : beta_grid) {
    if (beta < 0.0 || beta > 1.0) throw DomainError("fit_v_central: beta in [0,1]");
    bool ok = true;
    double worst = std::numeric_limits<double>::infinity();
    if (beta == 1.0) {
      // v is constant: the condition must hold with eps -> 0 at eta = 1;
      // check at the grid point nearest 1.
      std::size_t idx = 0;
      double gap = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < profile.eta_grid.size(); ++i) {
        const double g = std::abs(profile.eta_grid[i] - 1.0);
        if (g < gap) {
          gap = g;
          idx = i;
        }
      }
      const double eta = profile.eta_grid[idx];
      worst = -c * eta * profile.mean_r - profile.lambda_vals[idx];
      ok = profile.reliable_minus[idx] && worst >= 0.0;
    } else {
      for (std::size_t i = 0; i < profile.eta_grid.size(); ++i) {
        if (!profile.reliable_minus[i]) continue;
        const double eta = profile.eta_grid[i];
        const double eps = std::pow(eta, 1.0 / (1.0 - beta));
        const double slack =
            -c * eta * profile.mean_r + eta * eps - profile.lambda_vals[i];
        worst = std::min(worst, slack);
        if (slack < 0.0) {
          ok = false;
          break;
        }
      }
    }
    if (ok) {
      // Grid is ascending in beta; keep the fastest certified rate.
      if (!cert.feasible || beta >= cert.beta) {
        cert.feasible = true;
        cert.beta = beta;
        cert.margin = worst;
      }
    }
  }
  if (!cert.feasible) cert.note = "no beta on the grid is certified";
  return cert;
}

double kappa(double x) {
  if (std::abs(x) < 1e-4) {
    // (e^x - x - 1)/x^2 = 1/2 + x/6 + x^2/24 + ...
    return 0.5 + x / 6.0 + x * x / 24.0;
  }
  return (std::exp(x) - x - 1.0) / (x * x);
}

ExpectedBernsteinReport expected_bernstein_check(std::span<const double> u_samples,
                                                 double b,
                                                 std::span<const double> eta_grid) {
  if (b <= 0.0) throw DomainError("expected_bernstein_check: b must be positive");
  const std::size_t m = u_samples.size();
  const double mean = mean_of(u_samples);
  double m2 = 0.0;
  for (double u : u_samples) {
    if (u < -b) {
      throw DomainError("expected_bernstein_check: sample below -b");
    }
    m2 += u * u;
  }
  m2 /= static_cast<double>(m);

  ExpectedBernsteinReport report;
  report.worst_margin = std::numeric_limits<double>::infinity();
  report.holds = true;
  std::vector<double> exponents(m);
  for (double eta : eta_grid) {
    if (eta <= 0.0) throw ConfigError("expected_bernstein_check: etas must be positive");
    for (std::size_t j = 0; j < m; ++j) exponents[j] = eta * (mean - u_samples[j]);
    const auto lse = log_mean_exp(exponents);

    // Monte Carlo slack: 3/sqrt(m) x empirical std of the exponentiated
    // statistic, mapped through the log.
    const double shift = *std::max_element(exponents.begin(), exponents.end());
    double s1 = 0.0, s2 = 0.0;
    for (double e : exponents) {
      const double w = std::exp(e - shift);
      s1 += w;
      s2 += w * w;
    }
    s1 /= static_cast<double>(m);
    s2 /= static_cast<double>(m);
    const double rel_std = std::sqrt(std::max(0.0, s2 - s1 * s1)) / s1;
    const double slack = 3.0 / std::sqrt(static_cast<double>(m)) * rel_std;

    const double rhs = eta * eta * kappa(eta * b) * m2 + slack;
    report.eta_grid.push_back(eta);
    report.lhs.push_back(lse.log_mean);
    report.rhs.push_back(rhs);
    const double margin = rhs - lse.log_mean;
    report.margins.push_back(margin);
    report.worst_margin = std::min(report.worst_margin, margin);
    if (margin < 0.0) report.holds = false;
  }
  return report;
}

std::string to_string(const ConditionCertificate& cert) {
  std::ostringstream out;
  out << "kind=";
  switch (cert.kind) {
    case ConditionKind::subgaussian: out << "subgaussian"; break;
    case ConditionKind::eta_c_central: out << "eta_c_central"; break;
    case ConditionKind::bernstein: out << "bernstein"; break;
    case ConditionKind::witness: out << "witness"; break;
    case ConditionKind::central_plain: out << "central_plain"; break;
    case ConditionKind::v_c_central: out << "v_c_central"; break;
  }
  out << " feasible=" << (cert.feasible ? 1 : 0);
  switch (cert.kind) {
    case ConditionKind::subgaussian:
      out << " sigma2=" << cert.sigma2 << " eta=" << cert.eta;
      break;
    case ConditionKind::eta_c_central:
    case ConditionKind::central_plain:
      out << " eta=" << cert.eta << " c=" << cert.c;
      break;
    case ConditionKind::bernstein:
      out << " beta=" << cert.beta << " B=" << cert.bernstein_B
          << " b=" << cert.bernstein_b;
      break;
    case ConditionKind::witness:
      out << " u=" << cert.witness_u << " c=" << cert.c;
      break;
    case ConditionKind::v_c_central:
      out << " beta=" << cert.beta << " c=" << cert.c << " eps=" << cert.epsilon;
      break;
  }
  out << " margin=" << cert.margin << " m=" << cert.m;
  if (!cert.note.empty()) out << " note=\"" << cert.note << "\"";
  return out.str();
}

}  // namespace fastrate
