#pragma once

#include <array>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fastrate/core.hpp"

namespace fastrate {

/// 1-D Gaussian mean estimation with squared loss; ERM is the sample
/// mean and w* = mu.
class GaussianMeanProblem final : public LearningProblem {
 public:
  GaussianMeanProblem(double mu, double sigma_n);

  const std::string& name() const override { return name_; }
  std::size_t data_dim() const override { return 1; }
  std::size_t hypothesis_dim() const override { return 1; }
  void sample_z(std::size_t n, Stream& rng, Matrix& out) const override;
  double loss(std::span<const double> w, std::span<const double> z) const override;
  std::span<const double> optimal_hypothesis() const override;
  std::vector<double> run_algorithm(const Matrix& data,
                                    bool* converged = nullptr) const override;

  double mu() const { return mu_; }
  double sigma_n() const { return sigma_n_; }

 private:
  double mu_;
  double sigma_n_;
  std::vector<double> w_star_;
  std::string name_ = "gaussian";
};

struct LogisticOptimizerSettings {
  std::size_t gd_steps = 500;
  double gd_rate = 0.5;
  double grad_tol = 1e-6;
};

/// 2-D logistic regression: x ~ N(0, I), P(Y=1|x) = sigmoid(-x.w_gen),
/// cross-entropy loss scored with sigmoid(+x.w), hypotheses constrained
/// to the open ball of radius 3.  ERM is full-batch projected gradient
/// descent.  The population minimizer is resolved numerically on a
/// held-out pool (the scoring/generator sign mismatch makes it -w_gen,
/// not w_gen) and cached per instance.
class LogisticProblem final : public LearningProblem {
 public:
  explicit LogisticProblem(std::array<double, 2> w_gen = {0.5, 0.5},
                           double radius = 3.0,
                           LogisticOptimizerSettings opt = {});

  const std::string& name() const override { return name_; }
  std::size_t data_dim() const override { return 3; }  // (x0, x1, y)
  std::size_t hypothesis_dim() const override { return 2; }
  void sample_z(std::size_t n, Stream& rng, Matrix& out) const override;
  double loss(std::span<const double> w, std::span<const double> z) const override;
  std::span<const double> optimal_hypothesis() const override;
  std::vector<double> run_algorithm(const Matrix& data,
                                    bool* converged = nullptr) const override;

  double radius() const { return radius_; }
  std::array<double, 2> w_gen() const { return w_gen_; }

  /// Pool size for the numeric w* resolution (default 1e6).
  void set_resolution_pool(std::size_t pool, std::uint64_t seed);

 private:
  std::vector<double> minimize_empirical(const Matrix& data, bool* converged) const;

  std::array<double, 2> w_gen_;
  double radius_;
  LogisticOptimizerSettings opt_;
  std::size_t pool_size_ = 1000000;
  std::uint64_t pool_seed_ = 0x77cafe;
  mutable std::mutex wstar_mutex_;
  mutable std::optional<std::vector<double>> w_star_;
  std::string name_ = "logistic";
};

/// Numerically stable cross-entropy: -(y log s(t) + (1-y) log(1-s(t)))
/// with t = w.x, computed via log(1+exp(.)).
double logistic_loss(std::span<const double> w, std::span<const double> x, int y);

/// Sample mean (the ERM for the Gaussian problem).
double gaussian_erm(std::span<const double> sample);

struct RermConfig {
  double lambda = 0.0;
  std::function<double(std::span<const double>)> regularizer;
  std::function<std::vector<double>(std::span<const double>)> regularizer_grad;
  double range_bound = 9.0;  // B with sup |g(w1)-g(w2)| <= B
};

RermConfig squared_norm_regularizer(double lambda, double range_bound = 9.0);

/// Regularized ERM over the base problem's hypothesis space: minimizes
/// L_hat(w, S_n) + (lambda/n) g(w) by gradient descent with the same
/// projection the base problem uses; lambda = 0 coincides with plain ERM.
std::vector<double> rerm(const Matrix& data, const RermConfig& config,
                         const LearningProblem& base, bool* converged = nullptr);

/// LearningProblem wrapper whose algorithm is rerm() over the base
/// problem; data distribution, loss and w* are the base's.
class RermProblem final : public LearningProblem {
 public:
  RermProblem(std::shared_ptr<const LearningProblem> base, RermConfig config);

  const std::string& name() const override { return name_; }
  std::size_t data_dim() const override { return base_->data_dim(); }
  std::size_t hypothesis_dim() const override { return base_->hypothesis_dim(); }
  void sample_z(std::size_t n, Stream& rng, Matrix& out) const override;
  double loss(std::span<const double> w, std::span<const double> z) const override;
  std::span<const double> optimal_hypothesis() const override;
  std::vector<double> run_algorithm(const Matrix& data,
                                    bool* converged = nullptr) const override;

  const RermConfig& config() const { return config_; }
  const LearningProblem& base() const { return *base_; }

 private:
  std::shared_ptr<const LearningProblem> base_;
  RermConfig config_;
  std::string name_;
};

}  // namespace fastrate
