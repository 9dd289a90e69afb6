#include "fastrate/mi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "fastrate/errors.hpp"
#include "fastrate/random.hpp"

namespace fastrate {

double digamma(double x) {
  if (x <= 0.0) throw DomainError("digamma: needs x > 0");
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 / 252.0));
  return result;
}

namespace {

constexpr double kJitterRelScale = 1e-10;

// Uniform jitter of scale 1e-10 x per-coordinate range; breaks ties from
// duplicated samples without materially changing the estimate.
double apply_jitter(Matrix& m, std::uint64_t seed, std::uint64_t salt) {
  Stream rng(seed, 0x6a69747465ULL + salt);
  double max_scale = 0.0;
  for (std::size_t c = 0; c < m.cols; ++c) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < m.rows; ++i) {
      lo = std::min(lo, m.at(i, c));
      hi = std::max(hi, m.at(i, c));
    }
    double range = hi - lo;
    if (range <= 0.0) range = 1.0;
    const double scale = kJitterRelScale * range;
    max_scale = std::max(max_scale, scale);
    for (std::size_t i = 0; i < m.rows; ++i) {
      m.at(i, c) += rng.next_uniform(-scale, scale);
    }
  }
  return max_scale;
}

double chebyshev(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    d = std::max(d, std::abs(a[k] - b[k]));
  }
  return d;
}

// Distance to the k-th nearest neighbor of row i (self excluded) by
// partial selection over brute-force distances.
double kth_neighbor_distance(const Matrix& pts_x, const Matrix& pts_y,
                             std::size_t i, int k, std::vector<double>& scratch) {
  scratch.clear();
  for (std::size_t j = 0; j < pts_x.rows; ++j) {
    if (j == i) continue;
    const double d = std::max(chebyshev(pts_x.row(i), pts_x.row(j)),
                              chebyshev(pts_y.row(i), pts_y.row(j)));
    scratch.push_back(d);
  }
  std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end());
  return scratch[k - 1];
}

std::size_t count_within(const Matrix& pts, std::size_t i, double eps) {
  std::size_t count = 0;
  for (std::size_t j = 0; j < pts.rows; ++j) {
    if (j == i) continue;
    if (chebyshev(pts.row(i), pts.row(j)) < eps) ++count;
  }
  return count;
}

}  // namespace

MiEstimate ksg_mi(const Matrix& x, const Matrix& y, int k, std::uint64_t seed) {
  if (x.rows != y.rows) throw ConfigError("ksg_mi: sample counts differ");
  const std::size_t m = x.rows;
  if (k < 1) throw ConfigError("ksg_mi: k must be >= 1");
  if (m < static_cast<std::size_t>(k) + 2) {
    throw InsufficientDataError("ksg_mi: need at least k+2 samples");
  }

  Matrix xj = x, yj = y;
  double jitter = apply_jitter(xj, seed, 1);
  jitter = std::max(jitter, apply_jitter(yj, seed, 2));

  // Per-point terms go into a vector and are summed serially afterwards,
  // so the result does not depend on thread scheduling.
  std::vector<double> psi_terms(m, 0.0);
  bool degenerate = false;
#pragma omp parallel for schedule(dynamic, 64) reduction(|| : degenerate)
  for (long long ii = 0; ii < static_cast<long long>(m); ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    std::vector<double> scratch;
    scratch.reserve(m);
    const double eps = kth_neighbor_distance(xj, yj, i, k, scratch);
    if (eps <= 0.0) {
      degenerate = true;
      continue;
    }
    const std::size_t nx = count_within(xj, i, eps);
    const std::size_t ny = count_within(yj, i, eps);
    psi_terms[i] = digamma(static_cast<double>(nx) + 1.0) +
                   digamma(static_cast<double>(ny) + 1.0);
  }
  if (degenerate) {
    throw DomainError("ksg_mi: zero k-th neighbor distance after jitter");
  }
  double psi_sum = 0.0;
  for (double t : psi_terms) psi_sum += t;

  MiEstimate est;
  est.estimator = MiEstimator::ksg;
  est.k = k;
  est.m = m;
  est.jitter_scale = jitter;
  est.raw = digamma(k) + digamma(static_cast<double>(m)) -
            psi_sum / static_cast<double>(m);
  est.value = std::max(0.0, est.raw);
  return est;
}

MiEstimate mixed_cd_mi(const Matrix& x, const std::vector<int>& labels, int k,
                       std::uint64_t seed) {
  if (x.rows != labels.size()) throw ConfigError("mixed_cd_mi: sample counts differ");
  const std::size_t m = x.rows;
  if (k < 1) throw ConfigError("mixed_cd_mi: k must be >= 1");

  std::map<int, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < m; ++i) classes[labels[i]].push_back(i);

  MiEstimate est;
  est.estimator = MiEstimator::mixed_cd;
  est.k = k;
  est.m = m;
  if (classes.size() == 1) {
    // A constant label carries no information.
    return est;
  }

  Matrix xj = x;
  est.jitter_scale = apply_jitter(xj, seed, 3);

  double psi_sum = 0.0;
  std::size_t used = 0;
  std::vector<double> dists;
  for (const auto& [label, members] : classes) {
    if (members.size() <= static_cast<std::size_t>(k)) {
      est.warnings.push_back("mixed_cd_mi: class " + std::to_string(label) +
                             " has <= k samples; its points were skipped");
      continue;
    }
    for (std::size_t i : members) {
      dists.clear();
      for (std::size_t j : members) {
        if (j == i) continue;
        dists.push_back(chebyshev(xj.row(i), xj.row(j)));
      }
      std::nth_element(dists.begin(), dists.begin() + (k - 1), dists.end());
      const double eps = dists[k - 1];
      if (eps <= 0.0) {
        throw DomainError("mixed_cd_mi: zero k-th neighbor distance after jitter");
      }
      const std::size_t nx = count_within(xj, i, eps);
      psi_sum += digamma(static_cast<double>(members.size())) +
                 digamma(static_cast<double>(nx) + 1.0);
      ++used;
    }
  }
  if (used == 0) {
    throw InsufficientDataError("mixed_cd_mi: every class has <= k samples");
  }

  est.raw = digamma(static_cast<double>(m)) + digamma(k) -
            psi_sum / static_cast<double>(used);
  est.value = std::max(0.0, est.raw);
  return est;
}

MiEstimate chain_mi(const Matrix& w, const Matrix& x, const std::vector<int>& y,
                    int k, std::uint64_t seed) {
  if (w.rows != x.rows || w.rows != y.size()) {
    throw ConfigError("chain_mi: sample counts differ");
  }
  const std::size_t m = w.rows;

  std::map<int, std::vector<std::size_t>> classes;
  for (std::size_t i = 0; i < m; ++i) classes[y[i]].push_back(i);

  if (classes.size() == 1) {
    // Uninformative label: the chain collapses to I(W;X) on the full set.
    MiEstimate est = ksg_mi(w, x, k, seed);
    est.estimator = MiEstimator::chain;
    return est;
  }

  MiEstimate est;
  est.estimator = MiEstimator::chain;
  est.k = k;
  est.m = m;

  MiEstimate discrete = mixed_cd_mi(w, y, k, seed);
  est.raw = discrete.raw;
  est.jitter_scale = discrete.jitter_scale;
  est.warnings = discrete.warnings;

  for (const auto& [label, members] : classes) {
    if (members.size() < static_cast<std::size_t>(k) + 2) {
      est.warnings.push_back("chain_mi: class " + std::to_string(label) +
                             " too small for the conditional term; skipped");
      continue;
    }
    Matrix ws(members.size(), w.cols), xs(members.size(), x.cols);
    for (std::size_t r = 0; r < members.size(); ++r) {
      const auto src = members[r];
      for (std::size_t c = 0; c < w.cols; ++c) ws.at(r, c) = w.at(src, c);
      for (std::size_t c = 0; c < x.cols; ++c) xs.at(r, c) = x.at(src, c);
    }
    const double p_hat = static_cast<double>(members.size()) / static_cast<double>(m);
    MiEstimate cond = ksg_mi(ws, xs, k, seed + static_cast<std::uint64_t>(label) + 1);
    est.raw += p_hat * cond.raw;
    for (auto& warning : cond.warnings) est.warnings.push_back(std::move(warning));
  }

  est.value = std::max(0.0, est.raw);
  return est;
}

double analytic_gaussian_mi(std::size_t n) {
  if (n < 2) throw DomainError("analytic_gaussian_mi: needs n >= 2 (divergent at n=1)");
  const auto nd = static_cast<double>(n);
  return 0.5 * std::log(nd / (nd - 1.0));
}

}  // namespace fastrate
