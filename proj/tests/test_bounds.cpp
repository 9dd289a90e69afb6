#include <cmath>
#include <utility>
#include <vector>

#include "doctest.h"
#include "fastrate/bounds.hpp"
#include "fastrate/errors.hpp"
#include "fastrate/mi.hpp"
#include "fastrate/oracle.hpp"

using namespace fastrate;

namespace {

std::vector<double> uniform_mi(std::size_t n, double value) {
  return std::vector<double>(n, value);
}

}  // namespace

TEST_CASE("slow-rate bound edge cases and closed form") {
  const std::vector<double> zero_mi(10, 0.0);
  CHECK(bound_thm1(1.0, zero_mi).gen_bound == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(bound_thm1(0.0, uniform_mi(10, 1.0)).gen_bound ==
        doctest::Approx(0.0).epsilon(1e-15));

  // n = 100, sigma^2 = 2 sigma_W^4 with sigma_W^2 = 101/100, analytic MI:
  // the bound collapses to sigma_W^2 sqrt(2 ln(100/99)) ~ 0.1432.
  const std::size_t n = 100;
  const double sigma_w2 = 1.01;
  const std::vector<double> mi = uniform_mi(n, analytic_gaussian_mi(n));
  const BoundReport rep = bound_thm1(2.0 * sigma_w2 * sigma_w2, mi);
  const double closed = sigma_w2 * std::sqrt(2.0 * std::log(100.0 / 99.0));
  CHECK(rep.gen_bound == doctest::Approx(closed).epsilon(1e-12));
  CHECK(rep.gen_bound == doctest::Approx(0.1432).epsilon(1e-3));
  CHECK(rep.valid);

  CHECK_THROWS_AS(bound_thm1(1.0, std::vector<double>{0.1, -0.2}), DomainError);
}

TEST_CASE("excess-loss slow bound adds the empirical excess") {
  const std::vector<double> mi = uniform_mi(50, 0.02);
  const BoundReport rep = bound_thm2(0.08, mi, -0.01);
  CHECK(rep.gen_bound == doctest::Approx(std::sqrt(2.0 * 0.08 * 0.02)).epsilon(1e-12));
  CHECK(rep.has_excess_bound);
  CHECK(rep.excess_bound == doctest::Approx(rep.gen_bound - 0.01).epsilon(1e-15));
}

TEST_CASE("fast-rate subgaussian bound matches the oracle-ingredient form") {
  // Oracle ingredients at n = 100, sigma = 1, eta = mean_r / sigma_r^2:
  // a_eta = 1/2, so gen = emp + 2 mi_sum / (n eta) and excess = 3 sigma^2/n
  // once the small-n corrections cancel.
  const std::size_t n = 100;
  const double mean_r = 0.01;
  const double sigma2_r = 0.04;
  const double eta = mean_r / sigma2_r;  // midpoint of the validity window
  const std::vector<double> mi = uniform_mi(n, 0.5 / static_cast<double>(n));
  const BoundReport rep = bound_thm3(sigma2_r, mean_r, mi, -mean_r, eta);
  CHECK(rep.valid);
  CHECK(rep.ingredients.a_eta == doctest::Approx(0.5).epsilon(1e-12));
  const double mi_term = 0.5 / (static_cast<double>(n) * eta * 0.5);
  CHECK(rep.gen_bound == doctest::Approx(-mean_r + mi_term).epsilon(1e-12));
  CHECK(rep.excess_bound == doctest::Approx(-2.0 * mean_r + mi_term).epsilon(1e-12));
  // With these ingredients: gen = -1/n + 4/n = 3 sigma^2/n.
  CHECK(rep.gen_bound == doctest::Approx(3.0 / 100.0).epsilon(1e-12));
}

TEST_CASE("fast-rate subgaussian bound flags an out-of-window eta") {
  const std::vector<double> mi = uniform_mi(10, 0.01);
  const BoundReport hi = bound_thm3(0.04, 0.01, mi, -0.01, 0.5);  // window is (0, 0.5)
  CHECK_FALSE(hi.valid);
  CHECK_FALSE(hi.validity_notes.empty());
  CHECK_FALSE(bound_thm3(0.04, 0.01, mi, -0.01, 0.0).valid);
  CHECK_FALSE(bound_thm3(0.04, 0.0, mi, -0.01, 0.1).valid);
}

TEST_CASE("fast-rate subgaussian bound diverges as eta approaches zero") {
  const std::vector<double> mi = uniform_mi(10, 0.05);
  const double small = bound_thm3(0.04, 0.01, mi, -0.005, 1e-6).gen_bound;
  const double mid = bound_thm3(0.04, 0.01, mi, -0.005, 0.25).gen_bound;
  CHECK(small > 100.0 * mid);
}

TEST_CASE("central-condition bound arithmetic") {
  const std::vector<double> mi = uniform_mi(100, 0.005);
  const BoundReport rep = bound_thm5(0.5, 0.25, mi, -0.01);
  // (1-c)/c * emp + sum mi / (c eta' n) = -0.01 + 0.5/(0.5*0.25*100)
  CHECK(rep.gen_bound == doctest::Approx(-0.01 + 0.04).epsilon(1e-12));
  CHECK(rep.excess_bound == doctest::Approx(-0.02 + 0.04).epsilon(1e-12));

  // c = 1 removes the empirical term entirely.
  const BoundReport tight = bound_thm5(1.0, 0.25, mi, -0.01);
  CHECK(tight.gen_bound == doctest::Approx(0.02).epsilon(1e-12));

  CHECK_THROWS_AS(bound_thm5(0.0, 0.25, mi, 0.0), DomainError);
  CHECK_THROWS_AS(bound_thm5(1.5, 0.25, mi, 0.0), DomainError);
  CHECK_THROWS_AS(bound_thm5(0.5, 0.0, mi, 0.0), DomainError);
}

TEST_CASE("regularized bound reduces to the plain one at lambda zero") {
  const std::vector<double> mi = uniform_mi(40, 0.01);
  const BoundReport plain = bound_thm5(0.4, 0.2, mi, -0.005);
  const BoundReport reg = bound_rerm(0.4, 0.2, mi, -0.005, 0.0, 9.0, 40);
  CHECK(reg.gen_bound == plain.gen_bound);
  CHECK(reg.excess_bound == plain.excess_bound);
  CHECK(reg.kind == BoundKind::rerm_lemma);
}

TEST_CASE("regularized bound adds lambda B / (c n)") {
  const std::vector<double> mi = uniform_mi(50, 0.0);
  // lambda B / (c n) = 4.5 * 9 / (0.5 * 50) ... chosen to give 0.18.
  const BoundReport rep = bound_rerm(0.5, 0.25, mi, 0.0, 0.5, 9.0, 50);
  CHECK(rep.excess_bound == doctest::Approx(0.18).epsilon(1e-12));
  CHECK(rep.gen_bound == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("intermediate-rate bound interpolates between the extremes") {
  const std::vector<double> mi = uniform_mi(100, 0.004);
  // beta = 1: exponent 1, so the MI term is 2 sum mi / (n c).
  const BoundReport fast = bound_thm7(0.5, 1.0, mi, -0.01);
  CHECK(fast.gen_bound == doctest::Approx(-0.01 + 2.0 * 0.4 / 50.0).epsilon(1e-12));
  // beta = 0: exponent 1/2.
  const BoundReport slow = bound_thm7(0.5, 0.0, mi, -0.01);
  const double root_term = 2.0 / 50.0 * 100.0 * std::sqrt(0.004);
  CHECK(slow.gen_bound == doctest::Approx(-0.01 + root_term).epsilon(1e-12));
  CHECK(slow.gen_bound > fast.gen_bound);

  // Pinned numeric value at beta = 0.5, c = 0.8, emp = 0.
  const BoundReport mid = bound_thm7(0.8, 0.5, uniform_mi(10, 0.01), 0.0);
  const double expected = 2.0 / (10.0 * 0.8) * 10.0 * std::pow(0.01, 1.0 / 1.5);
  CHECK(mid.gen_bound == doctest::Approx(expected).epsilon(1e-12));
  CHECK(mid.gen_bound == doctest::Approx(0.1160).epsilon(1e-3));

  CHECK_THROWS_AS(bound_thm7(1.0, 0.5, mi, 0.0), DomainError);
  CHECK_THROWS_AS(bound_thm7(0.5, 1.5, mi, 0.0), DomainError);
}

TEST_CASE("rate slope recovers exact power laws") {
  std::vector<std::pair<std::size_t, double>> inv;
  std::vector<std::pair<std::size_t, double>> root;
  for (std::size_t n : {100, 200, 400, 800}) {
    inv.emplace_back(n, 3.0 / static_cast<double>(n));
    root.emplace_back(n, 0.7 / std::sqrt(static_cast<double>(n)));
  }
  CHECK(rate_slope(inv) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(rate_slope(root) == doctest::Approx(-0.5).epsilon(1e-12));

  std::vector<std::pair<std::size_t, double>> two{{10, 1.0}, {20, 0.5}};
  CHECK_THROWS_AS(rate_slope(two), DomainError);
  std::vector<std::pair<std::size_t, double>> bad{{10, 1.0}, {20, 0.5}, {40, -0.1}};
  CHECK_THROWS_AS(rate_slope(bad), DomainError);
}

TEST_CASE("with oracle ingredients the fast bound beats the slow one") {
  for (std::size_t n : {100, 400, 1600}) {
    const GaussianOracle o{0.0, 1.0, n};
    const double sigma_w2 = oracle_quantity(o, OracleQuantity::expected_loss);
    const std::vector<double> mi = uniform_mi(n, analytic_gaussian_mi(n));
    const double emp = oracle_quantity(o, OracleQuantity::empirical_excess);
    const double slow = bound_thm1(2.0 * sigma_w2 * sigma_w2, mi).gen_bound;
    const double fast = bound_thm5(0.5, 0.25, mi, emp).gen_bound;
    CHECK(fast < slow);
    CHECK(fast >= oracle_quantity(o, OracleQuantity::gen_error) - 1e-12);
  }
}
