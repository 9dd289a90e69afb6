#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fastrate/matrix.hpp"
#include "fastrate/random.hpp"

namespace fastrate {

/// A learning tuple: data distribution, loss, hypothesis space (implicit
/// in the algorithm) and the algorithm itself.
class LearningProblem {
 public:
  virtual ~LearningProblem() = default;

  virtual const std::string& name() const = 0;
  virtual std::size_t data_dim() const = 0;
  virtual std::size_t hypothesis_dim() const = 0;

  /// Draws n i.i.d. data points into `out` (resized to n x data_dim).
  /// Consumes the stream in a fixed order, so the same stream state
  /// always reproduces the same sequence.
  virtual void sample_z(std::size_t n, Stream& rng, Matrix& out) const = 0;

  virtual double loss(std::span<const double> w, std::span<const double> z) const = 0;

  /// Population-risk minimizer.  May be resolved numerically and cached;
  /// throws ConfigError if it cannot be resolved.
  virtual std::span<const double> optimal_hypothesis() const = 0;

  /// Runs the learning algorithm on a dataset.  `converged`, when given,
  /// reports whether the optimizer met its tolerance.
  virtual std::vector<double> run_algorithm(const Matrix& data,
                                            bool* converged = nullptr) const = 0;
};

enum class Coupling { joint, product };

/// One draw of the excess loss r(w,z) = l(w,z) - l(w*,z) together with
/// the coupling it was sampled under.
struct ExcessLossSample {
  double r_value = 0.0;
  Coupling coupling = Coupling::joint;
};

struct RiskEstimates {
  double gen_error = 0.0;        // E[E(W, S_n)]
  double excess_risk = 0.0;      // E[R(W)]
  double empirical_excess = 0.0; // E[R_hat(W, S_n)]
  double gen_error_se = 0.0;
  double excess_risk_se = 0.0;
  double empirical_excess_se = 0.0;
  std::size_t m_replicates = 0;
};

struct ReplicateSet;  // montecarlo.hpp

/// r(w,z) = l(w,z) - l(w*,z).
double excess_loss(const LearningProblem& problem, std::span<const double> w,
                   std::span<const double> z);

/// Replicate-level Monte Carlo estimates of generalization error, excess
/// risk and empirical excess risk, with standard errors.  The identity
/// gen_error = excess_risk - empirical_excess holds exactly because all
/// three come from the same replicates.
RiskEstimates estimate_risks(const ReplicateSet& replicates);

}  // namespace fastrate
