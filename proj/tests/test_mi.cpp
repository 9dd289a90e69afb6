#include <cmath>
#include <vector>

#include "doctest.h"
#include "fastrate/errors.hpp"
#include "fastrate/mi.hpp"
#include "fastrate/montecarlo.hpp"
#include "fastrate/problems.hpp"
#include "fastrate/random.hpp"

using namespace fastrate;

namespace {

// Correlated standard-normal pair samples with correlation rho.
void fill_bivariate(Matrix& x, Matrix& y, std::size_t m, double rho,
                    std::uint64_t seed) {
  x = Matrix(m, 1);
  y = Matrix(m, 1);
  Stream rng(seed, 0);
  const double tail = std::sqrt(1.0 - rho * rho);
  for (std::size_t i = 0; i < m; ++i) {
    const double a = rng.next_gaussian();
    const double b = rng.next_gaussian();
    x.at(i, 0) = a;
    y.at(i, 0) = rho * a + tail * b;
  }
}

double gaussian_mi(double rho) { return -0.5 * std::log(1.0 - rho * rho); }

}  // namespace

TEST_CASE("ksg on independent samples stays near zero") {
  Matrix x, y;
  fill_bivariate(x, y, 4000, 0.0, 101);
  const MiEstimate est = ksg_mi(x, y);
  CHECK(est.value <= 0.02);
  CHECK(std::abs(est.raw) <= 0.02);
  CHECK(est.k == 3);
  CHECK(est.m == 4000);
}

TEST_CASE("ksg recovers the bivariate gaussian closed form") {
  Matrix x, y;
  fill_bivariate(x, y, 4000, 0.6, 7);
  const MiEstimate est = ksg_mi(x, y);
  CHECK(std::abs(est.value - gaussian_mi(0.6)) <= 0.03);
}

TEST_CASE("ksg on a deterministic copy reports high information") {
  Matrix x(1500, 1), y(1500, 1);
  Stream rng(55, 0);
  for (std::size_t i = 0; i < 1500; ++i) {
    x.at(i, 0) = rng.next_gaussian();
    y.at(i, 0) = x.at(i, 0);
  }
  CHECK(ksg_mi(x, y).value > 1.0);
}

TEST_CASE("ksg is invariant to a common rescaling and shift") {
  Matrix x, y;
  fill_bivariate(x, y, 2500, 0.5, 19);
  const double base = ksg_mi(x, y).value;
  // A shared affine map preserves every max-norm comparison (the tie
  // jitter scales with the coordinate range), so the estimate moves only
  // by rounding in the transformed distances.
  Matrix xs = x, ys = y;
  for (double& v : xs.data) v = 100.0 * v + 7.0;
  for (double& v : ys.data) v = 100.0 * v - 3.0;
  CHECK(std::abs(ksg_mi(xs, ys).value - base) <= 0.02);
}

TEST_CASE("ksg is insensitive to sample order up to jitter keying") {
  Matrix x, y;
  fill_bivariate(x, y, 1200, 0.4, 23);
  Matrix xr(x.rows, 1), yr(y.rows, 1);
  for (std::size_t i = 0; i < x.rows; ++i) {
    xr.at(i, 0) = x.at(x.rows - 1 - i, 0);
    yr.at(i, 0) = y.at(y.rows - 1 - i, 0);
  }
  // Continuous draws never tie, so the jitter (keyed by row index)
  // cannot flip any neighbor comparison at this scale.
  CHECK(ksg_mi(xr, yr).value == doctest::Approx(ksg_mi(x, y).value).epsilon(1e-9));
}

TEST_CASE("ksg rejects bad inputs") {
  Matrix x(10, 1), y(9, 1);
  CHECK_THROWS_AS(ksg_mi(x, y), ConfigError);
  Matrix small(4, 1);
  for (std::size_t i = 0; i < 4; ++i) small.at(i, 0) = static_cast<double>(i);
  CHECK_THROWS_AS(ksg_mi(small, small, 3), InsufficientDataError);
  Matrix ok(10, 1);
  for (std::size_t i = 0; i < 10; ++i) ok.at(i, 0) = static_cast<double>(i);
  CHECK_THROWS_AS(ksg_mi(ok, ok, 0), ConfigError);
}

TEST_CASE("ksg breaks duplicate ties with jitter instead of failing") {
  Matrix x(400, 1), y(400, 1);
  Stream rng(3, 0);
  for (std::size_t i = 0; i < 400; ++i) {
    x.at(i, 0) = std::floor(rng.next_uniform(0.0, 4.0));
    y.at(i, 0) = x.at(i, 0);
  }
  const MiEstimate est = ksg_mi(x, y);
  CHECK(est.jitter_scale > 0.0);
  CHECK(est.value > 0.5);  // 4 equiprobable atoms carry ln 4 nats
}

TEST_CASE("mixed estimator is near zero for independent labels") {
  Matrix x(3000, 1);
  std::vector<int> labels(3000);
  Stream rng(8, 0);
  for (std::size_t i = 0; i < 3000; ++i) {
    x.at(i, 0) = rng.next_gaussian();
    labels[i] = rng.next_double() < 0.5 ? 0 : 1;
  }
  CHECK(std::abs(mixed_cd_mi(x, labels).raw) <= 0.03);
}

TEST_CASE("mixed estimator matches a quadrature oracle on a gaussian mixture") {
  // x | y ~ N(2y - 1, 0.25), y uniform on {0, 1}.
  const double sd = 0.5;
  Matrix x(4000, 1);
  std::vector<int> labels(4000);
  Stream rng(12, 0);
  for (std::size_t i = 0; i < 4000; ++i) {
    labels[i] = rng.next_double() < 0.5 ? 0 : 1;
    x.at(i, 0) = (labels[i] == 1 ? 1.0 : -1.0) + sd * rng.next_gaussian();
  }

  // I = h(X) - h(X|Y); the mixture entropy comes from Simpson quadrature.
  auto density = [&](double t) {
    const double a = std::exp(-(t - 1.0) * (t - 1.0) / (2.0 * sd * sd));
    const double b = std::exp(-(t + 1.0) * (t + 1.0) / (2.0 * sd * sd));
    return 0.5 * (a + b) / (sd * std::sqrt(2.0 * M_PI));
  };
  const int steps = 4000;
  const double lo = -6.0, hi = 6.0, h = (hi - lo) / steps;
  double entropy = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double t = lo + h * i;
    const double p = density(t);
    const double f = p > 0.0 ? -p * std::log(p) : 0.0;
    const double weight = (i == 0 || i == steps) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    entropy += weight * f;
  }
  entropy *= h / 3.0;
  const double cond_entropy = 0.5 * std::log(2.0 * M_PI * M_E * sd * sd);
  const double truth = entropy - cond_entropy;

  CHECK(std::abs(mixed_cd_mi(x, labels).value - truth) <= 0.05);
}

TEST_CASE("mixed estimator returns zero for a constant label") {
  Matrix x(200, 1);
  Stream rng(2, 0);
  for (std::size_t i = 0; i < 200; ++i) x.at(i, 0) = rng.next_gaussian();
  const MiEstimate est = mixed_cd_mi(x, std::vector<int>(200, 7));
  CHECK(est.value == 0.0);
  CHECK(est.raw == 0.0);
}

TEST_CASE("mixed estimator warns about undersized classes") {
  Matrix x(103, 1);
  std::vector<int> labels(103, 0);
  Stream rng(6, 0);
  for (std::size_t i = 0; i < 103; ++i) x.at(i, 0) = rng.next_gaussian();
  labels[100] = labels[101] = labels[102] = 1;  // class of size 3 with k = 3
  const MiEstimate est = mixed_cd_mi(x, labels, 3);
  CHECK(est.warnings.size() == 1);
  // All classes undersized: refuse instead of reporting garbage.
  CHECK_THROWS_AS(mixed_cd_mi(x, labels, 200), InsufficientDataError);
}

TEST_CASE("chain estimate is near zero under full independence") {
  Matrix w(2500, 1), x(2500, 2);
  std::vector<int> y(2500);
  Stream rng(9, 0);
  for (std::size_t i = 0; i < 2500; ++i) {
    w.at(i, 0) = rng.next_gaussian();
    x.at(i, 0) = rng.next_gaussian();
    x.at(i, 1) = rng.next_gaussian();
    y[i] = rng.next_double() < 0.5 ? 0 : 1;
  }
  CHECK(std::abs(chain_mi(w, x, y).raw) <= 0.05);
}

TEST_CASE("chain collapses to ksg when the label is constant") {
  Matrix w, x;
  fill_bivariate(w, x, 800, 0.5, 40);
  const MiEstimate plain = ksg_mi(w, x, 3, 99);
  const MiEstimate chained = chain_mi(w, x, std::vector<int>(800, 0), 3, 99);
  CHECK(chained.raw == plain.raw);
  CHECK(chained.estimator == MiEstimator::chain);
}

TEST_CASE("per-sample chain information decreases with n") {
  GaussianMeanProblem p(0.0, 1.0);
  double previous = 1e300;
  for (std::size_t n : {10, 20, 40}) {
    const ReplicateSet rs = run_replicates(p, n, 3000, 61);
    const PairSet ps = hypothesis_data_pairs(p, rs, 0);
    // A synthetic balanced label independent of everything else leaves
    // only the continuous term.
    std::vector<int> y(rs.m);
    for (std::size_t j = 0; j < rs.m; ++j) y[j] = static_cast<int>(j % 2);
    const double value = chain_mi(ps.w, ps.z, y).value;
    CHECK(value < previous);
    previous = value;
  }
}

TEST_CASE("analytic per-sample information for the gaussian problem") {
  CHECK(analytic_gaussian_mi(2) == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-15));
  CHECK(analytic_gaussian_mi(100) ==
        doctest::Approx(0.005025167926750725).epsilon(1e-12));
  // n * I -> 1/2 as n grows
  CHECK(1000000.0 * analytic_gaussian_mi(1000000) == doctest::Approx(0.5).epsilon(1e-5));
  CHECK_THROWS_AS(analytic_gaussian_mi(1), DomainError);
}

TEST_CASE("digamma sanity") {
  // psi(1) = -gamma, psi(2) = 1 - gamma, recurrence psi(x+1) = psi(x) + 1/x
  const double gamma = 0.5772156649015329;
  CHECK(digamma(1.0) == doctest::Approx(-gamma).epsilon(1e-8));
  CHECK(digamma(2.0) == doctest::Approx(1.0 - gamma).epsilon(1e-8));
  CHECK(digamma(7.5) == doctest::Approx(digamma(6.5) + 1.0 / 6.5).epsilon(1e-8));
  CHECK_THROWS_AS(digamma(0.0), DomainError);
}
