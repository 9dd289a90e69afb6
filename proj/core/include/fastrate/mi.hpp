#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fastrate/matrix.hpp"

namespace fastrate {

enum class MiEstimator { ksg, mixed_cd, chain, analytic };

struct MiEstimate {
  double value = 0.0;      // clamped at 0
  double raw = 0.0;        // unclamped estimate
  MiEstimator estimator = MiEstimator::ksg;
  int k = 0;
  std::size_t m = 0;
  double jitter_scale = 0.0;
  std::vector<std::string> warnings;
};

inline constexpr int kDefaultKnnK = 3;

/// KSG (variant 1) mutual information estimate in nats:
///   psi(k) + psi(m) - mean[psi(n_x + 1) + psi(n_y + 1)],
/// with marginal counts taken strictly inside the joint k-th neighbor
/// distance under the max norm.  Ties from duplicated samples are broken
/// by deterministic jitter of scale 1e-10 x per-coordinate range, keyed
/// by `seed`.
MiEstimate ksg_mi(const Matrix& x, const Matrix& y, int k = kDefaultKnnK,
                  std::uint64_t seed = 0);

/// Mixed continuous-discrete estimate (Ross style):
///   psi(m) - mean[psi(N_label)] + psi(k) - mean[psi(n_x + 1)],
/// with within-class k-th neighbor distances.  Classes with <= k samples
/// are skipped and a coverage warning is recorded.
MiEstimate mixed_cd_mi(const Matrix& x, const std::vector<int>& labels,
                       int k = kDefaultKnnK, std::uint64_t seed = 0);

/// Chain-rule decomposition
///   I(W; X,Y) = I(W;Y) + sum_y p_hat(y) I(W; X | Y=y),
/// with the discrete term from mixed_cd_mi and the conditional terms
/// from ksg_mi on the per-label slices.
MiEstimate chain_mi(const Matrix& w, const Matrix& x, const std::vector<int>& y,
                    int k = kDefaultKnnK, std::uint64_t seed = 0);

/// Closed-form I(W;Z_i) = (1/2) ln(n/(n-1)) for Gaussian mean
/// estimation under ERM; requires n >= 2.
double analytic_gaussian_mi(std::size_t n);

/// Digamma function (needed by the kNN estimators).
double digamma(double x);

}  // namespace fastrate
