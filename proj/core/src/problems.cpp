#include "fastrate/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fastrate/errors.hpp"

namespace fastrate {

namespace {

double dot2(std::span<const double> a, std::span<const double> b) {
  return a[0] * b[0] + a[1] * b[1];
}

double norm2(std::span<const double> w) {
  double s = 0.0;
  for (double v : w) s += v * v;
  return std::sqrt(s);
}

// log(1 + e^t) without overflow.
double log1p_exp(double t) {
  if (t > 0.0) return t + std::log1p(std::exp(-t));
  return std::log1p(std::exp(t));
}

}  // namespace

// ---------------------------------------------------------------------------
// Gaussian mean estimation

GaussianMeanProblem::GaussianMeanProblem(double mu, double sigma_n)
    : mu_(mu), sigma_n_(sigma_n), w_star_{mu} {
  if (sigma_n < 0.0) throw ConfigError("gaussian: sigma_n must be >= 0");
}

void GaussianMeanProblem::sample_z(std::size_t n, Stream& rng, Matrix& out) const {
  out = Matrix(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    out.at(i, 0) = mu_ + sigma_n_ * rng.next_gaussian();
  }
}

double GaussianMeanProblem::loss(std::span<const double> w,
                                 std::span<const double> z) const {
  const double d = w[0] - z[0];
  return d * d;
}

std::span<const double> GaussianMeanProblem::optimal_hypothesis() const {
  return w_star_;
}

std::vector<double> GaussianMeanProblem::run_algorithm(const Matrix& data,
                                                       bool* converged) const {
  if (converged) *converged = true;
  std::span<const double> column(data.data.data(), data.rows);
  return {gaussian_erm(column)};
}

double gaussian_erm(std::span<const double> sample) {
  if (sample.empty()) throw InsufficientDataError("gaussian_erm: empty sample");
  const double sum = std::accumulate(sample.begin(), sample.end(), 0.0);
  return sum / static_cast<double>(sample.size());
}

// ---------------------------------------------------------------------------
// Logistic regression

double logistic_loss(std::span<const double> w, std::span<const double> x, int y) {
  const double t = dot2(w, x);
  // -log sigmoid(t) = log(1+e^-t); -log(1-sigmoid(t)) = log(1+e^t).
  return y == 1 ? log1p_exp(-t) : log1p_exp(t);
}

LogisticProblem::LogisticProblem(std::array<double, 2> w_gen, double radius,
                                 LogisticOptimizerSettings opt)
    : w_gen_(w_gen), radius_(radius), opt_(opt) {
  if (radius <= 0.0) throw ConfigError("logistic: radius must be positive");
}

void LogisticProblem::sample_z(std::size_t n, Stream& rng, Matrix& out) const {
  out = Matrix(n, 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double x0 = rng.next_gaussian();
    const double x1 = rng.next_gaussian();
    // Generator scores the negated parameter: P(Y=1|x) = sigmoid(-x.w_gen).
    const double t = -(x0 * w_gen_[0] + x1 * w_gen_[1]);
    const double p = 1.0 / (1.0 + std::exp(-t));
    const double u = rng.next_double();
    out.at(i, 0) = x0;
    out.at(i, 1) = x1;
    out.at(i, 2) = u < p ? 1.0 : 0.0;
  }
}

double LogisticProblem::loss(std::span<const double> w,
                             std::span<const double> z) const {
  return logistic_loss(w, z.first(2), static_cast<int>(z[2]));
}

std::vector<double> LogisticProblem::minimize_empirical(const Matrix& data,
                                                        bool* converged) const {
  const std::size_t n = data.rows;
  const double bound = radius_ - 1e-6;
  std::vector<double> w(2, 0.0);
  std::vector<double> best_w = w;
  double best_risk = std::numeric_limits<double>::infinity();
  double grad_norm = 0.0;

  auto risk = [&](std::span<const double> wv) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += loss(wv, data.row(i));
    return s / static_cast<double>(n);
  };

  for (std::size_t step = 0; step <= opt_.gd_steps; ++step) {
    double g0 = 0.0, g1 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto z = data.row(i);
      const double t = w[0] * z[0] + w[1] * z[1];
      const double p = 1.0 / (1.0 + std::exp(-t));
      const double d = p - z[2];
      g0 += d * z[0];
      g1 += d * z[1];
    }
    g0 /= static_cast<double>(n);
    g1 /= static_cast<double>(n);
    grad_norm = std::sqrt(g0 * g0 + g1 * g1);

    const double cur = risk(w);
    if (cur < best_risk) {
      best_risk = cur;
      best_w = w;
    }
    if (grad_norm <= opt_.grad_tol || step == opt_.gd_steps) break;

    w[0] -= opt_.gd_rate * g0;
    w[1] -= opt_.gd_rate * g1;
    const double nw = norm2(w);
    if (nw > bound) {
      w[0] *= bound / nw;
      w[1] *= bound / nw;
    }
  }
  if (converged) *converged = grad_norm <= opt_.grad_tol || norm2(best_w) >= bound - 1e-9;
  return best_w;
}

std::vector<double> LogisticProblem::run_algorithm(const Matrix& data,
                                                   bool* converged) const {
  if (data.rows == 0) throw InsufficientDataError("logistic_erm: empty sample");
  return minimize_empirical(data, converged);
}

void LogisticProblem::set_resolution_pool(std::size_t pool, std::uint64_t seed) {
  std::lock_guard lock(wstar_mutex_);
  pool_size_ = pool;
  pool_seed_ = seed;
  w_star_.reset();
}

std::span<const double> LogisticProblem::optimal_hypothesis() const {
  std::lock_guard lock(wstar_mutex_);
  if (!w_star_) {
    // Population risk minimized on a held-out pool with the same
    // deterministic optimizer, then cached.
    Stream rng(pool_seed_, 0);
    Matrix pool;
    sample_z(pool_size_, rng, pool);
    bool ok = false;
    auto w = minimize_empirical(pool, &ok);
    if (!ok) {
      throw ConfigError("logistic: numeric resolution of w* did not converge");
    }
    w_star_ = std::move(w);
  }
  return *w_star_;
}

// ---------------------------------------------------------------------------
// Regularized ERM

RermConfig squared_norm_regularizer(double lambda, double range_bound) {
  RermConfig cfg;
  cfg.lambda = lambda;
  cfg.range_bound = range_bound;
  cfg.regularizer = [](std::span<const double> w) {
    double s = 0.0;
    for (double v : w) s += v * v;
    return s;
  };
  cfg.regularizer_grad = [](std::span<const double> w) {
    std::vector<double> g(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) g[i] = 2.0 * w[i];
    return g;
  };
  return cfg;
}

std::vector<double> rerm(const Matrix& data, const RermConfig& config,
                         const LearningProblem& base, bool* converged) {
  if (config.lambda < 0.0) throw ConfigError("rerm: lambda must be >= 0");
  if (data.rows == 0) throw InsufficientDataError("rerm: empty sample");
  if (config.lambda == 0.0) return base.run_algorithm(data, converged);
  if (!config.regularizer) throw ConfigError("rerm: regularizer not set");

  const std::size_t n = data.rows;
  const std::size_t d = base.hypothesis_dim();
  const double scale = config.lambda / static_cast<double>(n);

  // Numeric gradient of the empirical risk keeps this generic over base
  // problems; the regularizer gradient is analytic when supplied.
  std::vector<double> w(d, 0.0);
  const std::size_t steps = 2000;
  // The regularizer adds curvature of order `scale`; shrinking the step
  // accordingly keeps the iteration stable for arbitrarily large lambda.
  const double rate = 0.2 / (1.0 + 2.0 * scale);
  const double tol = 1e-10;
  double gnorm = 0.0;
  for (std::size_t step = 0; step <= steps; ++step) {
    std::vector<double> grad(d, 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      const double h = 1e-6 * (1.0 + std::abs(w[k]));
      std::vector<double> wp(w), wm(w);
      wp[k] += h;
      wm[k] -= h;
      double lp = 0.0, lm = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        lp += base.loss(wp, data.row(i));
        lm += base.loss(wm, data.row(i));
      }
      grad[k] = (lp - lm) / (2.0 * h * static_cast<double>(n));
    }
    if (config.regularizer_grad) {
      auto rg = config.regularizer_grad(w);
      for (std::size_t k = 0; k < d; ++k) grad[k] += scale * rg[k];
    } else {
      for (std::size_t k = 0; k < d; ++k) {
        const double h = 1e-6 * (1.0 + std::abs(w[k]));
        std::vector<double> wp(w), wm(w);
        wp[k] += h;
        wm[k] -= h;
        grad[k] += scale * (config.regularizer(wp) - config.regularizer(wm)) / (2.0 * h);
      }
    }
    gnorm = 0.0;
    for (double g : grad) gnorm += g * g;
    gnorm = std::sqrt(gnorm);
    if (gnorm <= tol || step == steps) break;
    for (std::size_t k = 0; k < d; ++k) w[k] -= rate * grad[k];
  }
  if (converged) *converged = gnorm <= 1e-6;
  return w;
}

RermProblem::RermProblem(std::shared_ptr<const LearningProblem> base,
                         RermConfig config)
    : base_(std::move(base)), config_(std::move(config)) {
  name_ = base_->name() + "_rerm";
}

void RermProblem::sample_z(std::size_t n, Stream& rng, Matrix& out) const {
  base_->sample_z(n, rng, out);
}

double RermProblem::loss(std::span<const double> w,
                         std::span<const double> z) const {
  return base_->loss(w, z);
}

std::span<const double> RermProblem::optimal_hypothesis() const {
  return base_->optimal_hypothesis();
}

std::vector<double> RermProblem::run_algorithm(const Matrix& data,
                                               bool* converged) const {
  return rerm(data, config_, *base_, converged);
}

}  // namespace fastrate
