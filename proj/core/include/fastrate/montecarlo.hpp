#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fastrate/core.hpp"
#include "fastrate/matrix.hpp"

namespace fastrate {

/// M independent replicates of (train, learn, evaluate): row j holds the
/// hypothesis trained on replicate j's sample together with its excess
/// losses under the joint coupling (own training points) and the product
/// coupling (fresh points, independent of the hypothesis).
struct ReplicateSet {
  std::string problem_id;
  std::size_t n = 0;      // sample size per replicate
  std::size_t m = 0;      // surviving replicate count
  std::uint64_t master_seed = 0;
  std::size_t excluded = 0;  // replicates dropped for algorithm failure

  Matrix hypotheses;   // m x hypothesis_dim
  Matrix joint_r;      // m x n, r(W_j, Z_{j,i})
  Matrix product_r;    // m x n, r(W_j, Z'_{j,i}) with fresh Z'
  Matrix joint_loss;   // m x n, l(W_j, Z_{j,i})
  Matrix product_loss; // m x n, l(W_j, Z'_{j,i})

  /// Original replicate index of surviving row j (identity when nothing
  /// was excluded); needed to regenerate row j's data stream.
  std::vector<std::uint64_t> replicate_ids;
};

struct PairSet {
  Matrix w;  // m x hypothesis_dim
  Matrix z;  // m x data_dim
};

/// Runs m independent replicates of size n.  Per-replicate streams are
/// derived from (seed, replicate index); failed replicates are excluded
/// and counted, not retried.
ReplicateSet run_replicates(const LearningProblem& problem, std::size_t n,
                            std::size_t m, std::uint64_t seed);

/// The m pairs (W_j, Z_{j,i}) drawn from the joint law P_{W Z_i}.  Data
/// points are regenerated from the replicate streams, bit-identical to
/// the draws used during training.
PairSet hypothesis_data_pairs(const LearningProblem& problem,
                              const ReplicateSet& rs, std::size_t i);

/// Versioned binary dump / load, used to decouple simulation from
/// analysis runs.
void save_replicates(const ReplicateSet& rs, const std::string& path);
ReplicateSet load_replicates(const std::string& path);

}  // namespace fastrate
